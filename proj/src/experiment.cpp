#include "milo/experiment.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "milo/log.hpp"

namespace milo {

namespace {

std::string fmt_double(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc()) throw std::runtime_error("fmt_double failed");
    return std::string(buf, ptr);
}

double parse_double(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    return std::stod(s);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& body) {
    jobs = std::max(1, jobs);
    if (jobs == 1 || n <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> workers;
    std::atomic<int> next{0};
    for (int w = 0; w < std::min(jobs, n); ++w) {
        workers.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                body(i);
            }
        });
    }
    for (auto& t : workers) t.join();
}

}  // namespace

std::string ResultsTable::to_csv() const {
    std::ostringstream out;
    out << "mdp_id,learner,profile,M,seed,normalized_score,U_hat_pi,bound_slack\n";
    for (const auto& r : rows) {
        out << r.mdp_id << ',' << r.learner << ',' << r.profile << ',' << r.m << ',' << r.seed
            << ',' << fmt_double(r.normalized_score) << ',' << fmt_double(r.u_hat_pi) << ','
            << fmt_double(r.bound_slack) << '\n';
    }
    return out.str();
}

ResultsTable ResultsTable::from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("results csv: empty");
    ResultsTable table;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 8) throw std::invalid_argument("results csv: bad row: " + line);
        ResultRow row;
        row.mdp_id = fields[0];
        row.learner = fields[1];
        row.profile = fields[2];
        row.m = std::stoi(fields[3]);
        row.seed = std::stoull(fields[4]);
        row.normalized_score = parse_double(fields[5]);
        row.u_hat_pi = parse_double(fields[6]);
        row.bound_slack = parse_double(fields[7]);
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::vector<CellAggregate> aggregate(const ResultsTable& table) {
    std::map<std::tuple<std::string, std::string, std::string, int>, std::vector<double>> cells;
    for (const auto& r : table.rows) {
        cells[{r.mdp_id, r.learner, r.profile, r.m}].push_back(r.normalized_score);
    }
    std::vector<CellAggregate> out;
    out.reserve(cells.size());
    for (const auto& [key, scores] : cells) {
        CellAggregate agg;
        agg.mdp_id = std::get<0>(key);
        agg.learner = std::get<1>(key);
        agg.profile = std::get<2>(key);
        agg.m = std::get<3>(key);
        agg.n = static_cast<int>(scores.size());
        double mean = 0.0;
        for (const double s : scores) mean += s;
        mean /= scores.size();
        double var = 0.0;
        for (const double s : scores) var += (s - mean) * (s - mean);
        agg.mean = mean;
        agg.stddev = scores.size() > 1 ? std::sqrt(var / (scores.size() - 1)) : 0.0;
        out.push_back(std::move(agg));
    }
    return out;
}

std::string aggregates_to_csv(const std::vector<CellAggregate>& cells) {
    std::ostringstream out;
    out << "mdp_id,learner,profile,M,n,mean,stddev\n";
    for (const auto& c : cells) {
        out << c.mdp_id << ',' << c.learner << ',' << c.profile << ',' << c.m << ',' << c.n << ','
            << fmt_double(c.mean) << ',' << fmt_double(c.stddev) << '\n';
    }
    return out.str();
}

nlohmann::json aggregates_to_json(const std::vector<CellAggregate>& cells) {
    auto arr = nlohmann::json::array();
    for (const auto& c : cells) {
        arr.push_back({{"mdp_id", c.mdp_id},
                       {"learner", c.learner},
                       {"profile", c.profile},
                       {"M", c.m},
                       {"n", c.n},
                       {"mean", c.mean},
                       {"stddev", c.stddev}});
    }
    return arr;
}

namespace {

struct CellKey {
    int mdp_index;
    std::string learner;
    std::string profile;
    int m;
    std::uint64_t seed;
};

// data, model, and reference policies shared by every learner in one
// (mdp, profile, M, seed) cell
struct CellContext {
    TransitionDataset expert_data;
    TransitionDataset behavior_data;
    Occupancy behavior_weight;
    ModelEnsemble ensemble;
    MdpSpec tl;
    TabularPolicy expert;
    TabularPolicy uniform;
};

CellContext build_cell_context(const NamedMdp& named, const std::string& profile, int m,
                               std::uint64_t seed, const SweepConfig& cfg) {
    const MdpSpec& mdp = named.mdp;
    // expert data is shared across profiles and learners at a given
    // (mdp, M, seed); only the behavior side varies with the profile
    Rng expert_rng(derive_seed(seed, named.id + "|data|expert", m));
    const TabularPolicy expert = solve_expert(mdp);
    TransitionDataset expert_data =
        cfg.expert_trajectories
            ? sample_dataset_trajectories(expert, mdp, m, expert_rng, GeneratorTag::Expert)
            : sample_dataset(expert, mdp, m, expert_rng, GeneratorTag::Expert);

    const std::string data_tag = named.id + "|" + profile + "|data";
    Rng behavior_rng(derive_seed(seed, data_tag + "|behavior", m));
    TransitionDataset behavior_data;
    Occupancy behavior_weight = occupancy_sa(expert, mdp);
    if (profile == "expert_only") {
        behavior_data = expert_data;
        behavior_data.generator_tag = GeneratorTag::Custom;
    } else {
        Rng mix_rng(derive_seed(seed, data_tag + "|mixture", m));
        const BehaviorProfile bp =
            profile == "narrow" ? BehaviorProfile::Narrow : BehaviorProfile::Wide;
        const BehaviorMixture mixture = make_behavior_policy(mdp, bp, mix_rng);
        behavior_data = sample_dataset(
            mixture, mdp, cfg.n_behavior, behavior_rng,
            bp == BehaviorProfile::Narrow ? GeneratorTag::BehaviorNarrow : GeneratorTag::BehaviorWide);
        behavior_weight = mixture.occupancy_sa(mdp);
    }

    Rng ens_rng(derive_seed(seed, data_tag + "|ensemble", m));
    ModelEnsemble ensemble = fit_ensemble(behavior_data, mdp.n_states(), mdp.n_actions(),
                                          cfg.ensemble_k, cfg.pseudocount, ens_rng);
    MdpSpec tl = ensemble.point.to_mdp(mdp);
    return CellContext{std::move(expert_data),
                       std::move(behavior_data),
                       std::move(behavior_weight),
                       std::move(ensemble),
                       std::move(tl),
                       expert,
                       TabularPolicy::uniform(mdp.n_states(), mdp.n_actions())};
}

std::vector<TabularPolicy> policy_set_for_slack(const MdpSpec& mdp) {
    return all_deterministic_policies(mdp.n_states(), mdp.n_actions(), 20000);
}

double bound_slack_for(const std::string& learner, const CellContext& ctx, const NamedMdp& named,
                       const LearnerOutput* out, const TabularPolicy& policy,
                       const TrainConfig& train) {
    const MdpSpec& mdp = named.mdp;
    const double policies = std::pow(static_cast<double>(mdp.n_actions()), mdp.n_states());
    const double f_size = default_f_size(policies, 2.0);
    try {
        if (learner == "bc") {
            return check_lemma1(ctx.expert, policy, mdp).slack();
        }
        if (learner == "adv_il") {
            return check_theorem2(ctx.expert_data, *out, mdp, train.delta, f_size).slack();
        }
        if (learner == "alg1") {
            return check_theorem3(ctx.expert_data, *out, ctx.tl, mdp, ctx.behavior_weight,
                                  policy_set_for_slack(mdp), train.delta, f_size)
                .slack();
        }
        return check_corollary2(ctx.expert_data, *out, ctx.tl, mdp, ctx.behavior_weight,
                                train.delta, f_size)
            .slack();
    } catch (const std::exception& e) {
        log::debug(std::string("bound slack unavailable: ") + e.what());
        return std::numeric_limits<double>::quiet_NaN();
    }
}

ResultRow run_cell(const NamedMdp& named, const CellKey& key, const SweepConfig& cfg) {
    const MdpSpec& mdp = named.mdp;
    const CellContext ctx = build_cell_context(named, key.profile, key.m, key.seed, cfg);
    TrainConfig train = cfg.train;
    train.seed = key.seed;

    LearnerOutput out{ctx.uniform, Witness{OccKind::State, Eigen::VectorXd::Zero(mdp.n_states())},
                      {}, 0.0};
    TabularPolicy policy = ctx.uniform;
    if (key.learner == "bc") {
        policy = bc_fit(ctx.expert_data, mdp.n_states(), mdp.n_actions());
    } else if (key.learner == "adv_il") {
        out = adversarial_il_true_model(ctx.expert_data, mdp, train);
        policy = out.policy;
    } else if (key.learner == "alg1") {
        out = algorithm1(ctx.expert_data, ctx.tl, train);
        policy = out.policy;
    } else if (key.learner == "alg2") {
        out = algorithm2(ctx.expert_data, ctx.tl, ctx.ensemble, train, &ctx.behavior_data);
        policy = out.policy;
    } else {
        throw std::invalid_argument("unknown learner: " + key.learner);
    }

    ResultRow row;
    row.mdp_id = named.id;
    row.learner = key.learner;
    row.profile = key.profile;
    row.m = key.m;
    row.seed = key.seed;
    row.normalized_score = normalized_score(policy, mdp, ctx.expert, ctx.uniform);
    row.u_hat_pi = policy_uncertainty(policy, ctx.tl, mdp, ctx.behavior_weight);
    row.bound_slack = cfg.compute_bound_slack
                          ? bound_slack_for(key.learner, ctx, named, &out, policy, train)
                          : std::numeric_limits<double>::quiet_NaN();
    return row;
}

ResultsTable run_cells(const SweepConfig& cfg, const std::vector<CellKey>& keys, int jobs) {
    ResultsTable table;
    table.rows.resize(keys.size());
    std::vector<std::string> errors(keys.size());
    parallel_for(static_cast<int>(keys.size()), jobs, [&](int i) {
        const CellKey& key = keys[i];
        try {
            table.rows[i] = run_cell(cfg.mdps[key.mdp_index], key, cfg);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (!errors[i].empty()) {
            const CellKey& key = keys[i];
            throw std::runtime_error("cell (" + cfg.mdps[key.mdp_index].id + ", " + key.learner +
                                     ", " + key.profile + ", M=" + std::to_string(key.m) +
                                     ", seed=" + std::to_string(key.seed) + "): " + errors[i]);
        }
    }
    std::sort(table.rows.begin(), table.rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return std::tie(a.mdp_id, a.learner, a.profile, a.m, a.seed) <
               std::tie(b.mdp_id, b.learner, b.profile, b.m, b.seed);
    });
    return table;
}

void validate_sweep(const SweepConfig& cfg) {
    if (cfg.mdps.empty()) throw std::invalid_argument("sweep: no MDPs");
    if (cfg.m_grid.empty()) throw std::invalid_argument("sweep: empty M grid");
    if (cfg.learners.empty()) throw std::invalid_argument("sweep: no learners");
    if (cfg.profiles.empty()) throw std::invalid_argument("sweep: no profiles");
    if (cfg.seeds.empty()) throw std::invalid_argument("sweep: no seeds");
    std::vector<std::uint64_t> seeds = cfg.seeds;
    std::sort(seeds.begin(), seeds.end());
    if (std::adjacent_find(seeds.begin(), seeds.end()) != seeds.end()) {
        throw std::invalid_argument("sweep: seeds must be distinct");
    }
    for (const int m : cfg.m_grid) {
        if (m < 1) throw std::invalid_argument("sweep: M must be >= 1");
    }
}

}  // namespace

ResultsTable run_sweep(const SweepConfig& cfg, int jobs) {
    validate_sweep(cfg);
    std::vector<CellKey> keys;
    for (int mi = 0; mi < static_cast<int>(cfg.mdps.size()); ++mi) {
        for (const auto& learner : cfg.learners) {
            for (const auto& profile : cfg.profiles) {
                for (const int m : cfg.m_grid) {
                    for (const auto seed : cfg.seeds) {
                        keys.push_back({mi, learner, profile, m, seed});
                    }
                }
            }
        }
    }
    log::info("sweep: " + std::to_string(keys.size()) + " cells");
    return run_cells(cfg, keys, jobs);
}

ResultsTable starting_state_study(const SweepConfig& cfg, int jobs) {
    validate_sweep(cfg);
    const int m = cfg.m_grid[cfg.m_grid.size() / 2];
    const std::array<StartDist, 4> options = {StartDist::Init, StartDist::ExpertStates,
                                              StartDist::BehaviorStates, StartDist::Arbitrary};
    struct Job {
        int mdp_index;
        StartDist start;
        std::uint64_t seed;
    };
    std::vector<Job> jobs_list;
    for (int mi = 0; mi < static_cast<int>(cfg.mdps.size()); ++mi) {
        for (const auto start : options) {
            for (const auto seed : cfg.seeds) jobs_list.push_back({mi, start, seed});
        }
    }
    ResultsTable table;
    table.rows.resize(jobs_list.size());
    std::vector<std::string> errors(jobs_list.size());
    parallel_for(static_cast<int>(jobs_list.size()), jobs, [&](int i) {
        const Job& job = jobs_list[i];
        try {
            const NamedMdp& named = cfg.mdps[job.mdp_index];
            const std::string profile = "wide";
            const CellContext ctx = build_cell_context(named, profile, m, job.seed, cfg);
            TrainConfig train = cfg.train;
            train.seed = job.seed;
            train.start_dist = job.start;
            const LearnerOutput out =
                algorithm2(ctx.expert_data, ctx.tl, ctx.ensemble, train, &ctx.behavior_data);
            ResultRow row;
            row.mdp_id = named.id;
            row.learner = "alg2";
            row.profile = "start=" + to_string(job.start);
            row.m = m;
            row.seed = job.seed;
            row.normalized_score = normalized_score(out.policy, named.mdp, ctx.expert, ctx.uniform);
            row.u_hat_pi = policy_uncertainty(out.policy, ctx.tl, named.mdp, ctx.behavior_weight);
            row.bound_slack = std::numeric_limits<double>::quiet_NaN();
            table.rows[i] = std::move(row);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < jobs_list.size(); ++i) {
        if (!errors[i].empty()) {
            throw std::runtime_error("starting-state cell (" + cfg.mdps[jobs_list[i].mdp_index].id +
                                     ", " + to_string(jobs_list[i].start) +
                                     ", seed=" + std::to_string(jobs_list[i].seed) +
                                     "): " + errors[i]);
        }
    }
    std::sort(table.rows.begin(), table.rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return std::tie(a.mdp_id, a.learner, a.profile, a.m, a.seed) <
               std::tie(b.mdp_id, b.learner, b.profile, b.m, b.seed);
    });
    return table;
}

std::string HorizonStudyResult::to_csv() const {
    std::ostringstream out;
    out << "gamma,learner,mean_subopt,floored\n";
    for (const auto& c : cells) {
        out << fmt_double(c.gamma) << ',' << c.learner << ',' << fmt_double(c.mean_subopt) << ','
            << (c.floored ? 1 : 0) << '\n';
    }
    out << "#slopes";
    for (const auto& [learner, slope] : slopes) {
        out << ',' << learner << '=' << fmt_double(slope);
    }
    out << '\n';
    return out.str();
}

HorizonStudyResult horizon_scaling_study(const HorizonStudyConfig& cfg, int jobs) {
    if (cfg.gamma_grid.size() < 2) {
        throw std::invalid_argument("horizon study: need at least 2 gammas");
    }
    struct Job {
        double gamma;
        std::uint64_t seed;
    };
    std::vector<Job> jobs_list;
    for (const double gamma : cfg.gamma_grid) {
        for (const auto seed : cfg.seeds) jobs_list.push_back({gamma, seed});
    }
    struct CellOut {
        double bc_subopt = 0.0;
        double alg2_subopt = 0.0;
    };
    std::vector<CellOut> outs(jobs_list.size());
    std::vector<std::string> errors(jobs_list.size());
    parallel_for(static_cast<int>(jobs_list.size()), jobs, [&](int i) {
        const auto [gamma, seed] = jobs_list[i];
        try {
            const MdpSpec mdp = cliff_chain(cfg.chain_len, cfg.n_actions, gamma, cfg.p_slip);
            const NamedMdp named{"cliffchain", mdp};
            SweepConfig sweep;
            sweep.n_behavior = cfg.n_behavior;
            sweep.ensemble_k = cfg.ensemble_k;
            sweep.pseudocount = cfg.pseudocount;
            const CellContext ctx = build_cell_context(named, "wide", cfg.m, seed, sweep);
            const double v_expert = value(ctx.expert, mdp);

            const TabularPolicy bc = bc_fit(ctx.expert_data, mdp.n_states(), mdp.n_actions());
            outs[i].bc_subopt = v_expert - value(bc, mdp);

            TrainConfig train = cfg.train;
            train.seed = seed;
            train.learner_lr = cfg.lr_scale;
            train.start_dist = StartDist::BehaviorStates;
            const LearnerOutput out =
                algorithm2(ctx.expert_data, ctx.tl, ctx.ensemble, train, &ctx.behavior_data);
            outs[i].alg2_subopt = v_expert - value(out.policy, mdp);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < jobs_list.size(); ++i) {
        if (!errors[i].empty()) {
            throw std::runtime_error("horizon cell (gamma=" + std::to_string(jobs_list[i].gamma) +
                                     ", seed=" + std::to_string(jobs_list[i].seed) +
                                     "): " + errors[i]);
        }
    }

    HorizonStudyResult result;
    constexpr double kFloor = 1e-9;
    std::map<std::string, std::vector<std::pair<double, double>>> fit_points;
    for (std::size_t gi = 0; gi < cfg.gamma_grid.size(); ++gi) {
        const double gamma = cfg.gamma_grid[gi];
        double bc_mean = 0.0;
        double alg2_mean = 0.0;
        int n = 0;
        for (std::size_t i = 0; i < jobs_list.size(); ++i) {
            if (jobs_list[i].gamma == gamma) {
                bc_mean += outs[i].bc_subopt;
                alg2_mean += outs[i].alg2_subopt;
                ++n;
            }
        }
        bc_mean /= n;
        alg2_mean /= n;
        const double x = std::log(1.0 / (1.0 - gamma));
        for (const auto& [learner, mean] : std::initializer_list<std::pair<std::string, double>>{
                 {"bc", bc_mean}, {"alg2", alg2_mean}}) {
            HorizonCell cell;
            cell.gamma = gamma;
            cell.learner = learner;
            cell.mean_subopt = mean;
            cell.floored = mean < kFloor;
            result.cells.push_back(cell);
            fit_points[learner].push_back({x, std::log(std::max(mean, kFloor))});
        }
    }
    for (const auto& [learner, pts] : fit_points) {
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (const auto& [x, y] : pts) {
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double n = static_cast<double>(pts.size());
        const double denom = n * sxx - sx * sx;
        result.slopes[learner] = (n * sxy - sx * sy) / denom;
        bool any_floor = false;
        for (const auto& c : result.cells) {
            if (c.learner == learner && c.floored) any_floor = true;
        }
        result.degenerate[learner] = any_floor;
    }
    return result;
}

std::string TraceResult::to_csv() const {
    std::ostringstream out;
    out << "t,mean,std,policy_tag\n";
    for (const auto& r : rows) {
        out << r.t << ',' << fmt_double(r.mean) << ',' << fmt_double(r.stddev) << ','
            << r.policy_tag << '\n';
    }
    return out.str();
}

double TraceResult::mean_at(const std::string& tag, int t) const {
    for (const auto& r : rows) {
        if (r.policy_tag == tag && r.t == t) return r.mean;
    }
    throw std::invalid_argument("trace: no row for tag " + tag + " at t=" + std::to_string(t));
}

TraceResult uncertainty_trace(const TabularPolicy& policy_a, const std::string& tag_a,
                              const TabularPolicy& policy_b, const std::string& tag_b,
                              const MdpSpec& tl, const ModelEnsemble& expert_only_model,
                              const TransitionDataset& expert_data, const Eigen::VectorXd& start,
                              int horizon, double alpha, double beta,
                              const std::vector<std::uint64_t>& seeds, int batch) {
    if (batch < 1) throw std::invalid_argument("uncertainty_trace: batch must be >= 1");
    if (expert_only_model.point.pseudocount() <= 0.0) {
        throw std::invalid_argument("uncertainty_trace: expert-only model needs pseudocount > 0");
    }
    if (expert_data.size() == 0) {
        throw std::invalid_argument("uncertainty_trace: empty expert data");
    }
    const Eigen::MatrixXd disagreement = uncertainty_table(expert_only_model);
    auto neg_log_prob = [&](int s, int a, int sn) {
        return -std::log(expert_only_model.point.transition()[a](s, sn));
    };
    // standardize both components over the expert demonstration transitions
    // so expert data sits at zero
    double mu1 = 0.0, mu2 = 0.0;
    for (const auto& sample : expert_data.samples) {
        mu1 += disagreement(sample.s, sample.a);
        mu2 += neg_log_prob(sample.s, sample.a, sample.s_next);
    }
    mu1 /= expert_data.size();
    mu2 /= expert_data.size();
    double var1 = 0.0, var2 = 0.0;
    for (const auto& sample : expert_data.samples) {
        const double d1 = disagreement(sample.s, sample.a) - mu1;
        const double d2 = neg_log_prob(sample.s, sample.a, sample.s_next) - mu2;
        var1 += d1 * d1;
        var2 += d2 * d2;
    }
    const double sd1 = std::sqrt(var1 / expert_data.size());
    const double sd2 = std::sqrt(var2 / expert_data.size());
    const double scale1 = sd1 > 1e-12 ? sd1 : 1.0;
    const double scale2 = sd2 > 1e-12 ? sd2 : 1.0;
    auto statistic = [&](int s, int a, int sn) {
        return alpha * (disagreement(s, a) - mu1) / scale1 +
               beta * (neg_log_prob(s, a, sn) - mu2) / scale2;
    };

    TraceResult result;
    result.alpha = alpha;
    result.beta = beta;
    // per seed, a batch of rollouts; start states are drawn once per
    // (seed, batch index) and shared by the two policies
    std::vector<std::vector<int>> start_states(seeds.size(), std::vector<int>(batch));
    for (std::size_t si = 0; si < seeds.size(); ++si) {
        Rng rng(derive_seed(seeds[si], "trace|start"));
        for (int j = 0; j < batch; ++j) start_states[si][j] = rng.categorical(start);
    }
    const struct {
        const TabularPolicy* policy;
        const std::string* tag;
    } arms[2] = {{&policy_a, &tag_a}, {&policy_b, &tag_b}};
    for (const auto& arm : arms) {
        Eigen::MatrixXd traces = Eigen::MatrixXd::Zero(static_cast<int>(seeds.size()), horizon);
        for (std::size_t si = 0; si < seeds.size(); ++si) {
            Rng rng(derive_seed(seeds[si], "trace|" + *arm.tag));
            Eigen::VectorXd point_start = Eigen::VectorXd::Zero(tl.n_states());
            for (int j = 0; j < batch; ++j) {
                point_start.setZero();
                point_start[start_states[si][j]] = 1.0;
                const Trajectory traj = rollout(*arm.policy, tl, point_start, horizon, rng);
                for (int t = 0; t < horizon; ++t) {
                    const auto& step = traj.steps[t];
                    traces(static_cast<int>(si), t) +=
                        statistic(step.state, step.action, step.next_state) / batch;
                }
            }
        }
        for (int t = 0; t < horizon; ++t) {
            TraceRow row;
            row.t = t + 1;
            row.policy_tag = *arm.tag;
            row.mean = traces.col(t).mean();
            const Eigen::VectorXd centered = traces.col(t).array() - row.mean;
            row.stddev = seeds.size() > 1
                             ? std::sqrt(centered.squaredNorm() / (seeds.size() - 1))
                             : 0.0;
            result.rows.push_back(std::move(row));
        }
    }
    return result;
}

ResultsTable expert_only_study(const SweepConfig& cfg, int jobs) {
    validate_sweep(cfg);
    const int m = cfg.m_grid[cfg.m_grid.size() / 2];
    struct Job {
        int mdp_index;
        std::string learner;  // bc | alg2_expert | alg2_wide
        std::uint64_t seed;
    };
    std::vector<Job> jobs_list;
    const std::array<std::string, 3> arms = {"bc", "alg2_expert", "alg2_wide"};
    for (int mi = 0; mi < static_cast<int>(cfg.mdps.size()); ++mi) {
        for (const auto& learner : arms) {
            for (const auto seed : cfg.seeds) jobs_list.push_back({mi, learner, seed});
        }
    }
    ResultsTable table;
    table.rows.resize(jobs_list.size());
    std::vector<std::string> errors(jobs_list.size());
    parallel_for(static_cast<int>(jobs_list.size()), jobs, [&](int i) {
        const Job& job = jobs_list[i];
        try {
            const NamedMdp& named = cfg.mdps[job.mdp_index];
            const std::string profile = job.learner == "alg2_wide" ? "wide" : "expert_only";
            const CellContext ctx = build_cell_context(named, profile, m, job.seed, cfg);
            TrainConfig train = cfg.train;
            train.seed = job.seed;
            TabularPolicy policy = ctx.uniform;
            if (job.learner == "bc") {
                policy = bc_fit(ctx.expert_data, named.mdp.n_states(), named.mdp.n_actions());
            } else {
                train.start_dist = job.learner == "alg2_expert" ? StartDist::ExpertStates
                                                                : StartDist::BehaviorStates;
                policy = algorithm2(ctx.expert_data, ctx.tl, ctx.ensemble, train,
                                    &ctx.behavior_data)
                             .policy;
            }
            ResultRow row;
            row.mdp_id = named.id;
            row.learner = job.learner;
            row.profile = profile;
            row.m = m;
            row.seed = job.seed;
            row.normalized_score = normalized_score(policy, named.mdp, ctx.expert, ctx.uniform);
            row.u_hat_pi = policy_uncertainty(policy, ctx.tl, named.mdp, ctx.behavior_weight);
            row.bound_slack = std::numeric_limits<double>::quiet_NaN();
            table.rows[i] = std::move(row);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < jobs_list.size(); ++i) {
        if (!errors[i].empty()) {
            throw std::runtime_error("expert-only cell (" + cfg.mdps[jobs_list[i].mdp_index].id +
                                     ", " + jobs_list[i].learner +
                                     ", seed=" + std::to_string(jobs_list[i].seed) +
                                     "): " + errors[i]);
        }
    }
    std::sort(table.rows.begin(), table.rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return std::tie(a.mdp_id, a.learner, a.profile, a.m, a.seed) <
               std::tie(b.mdp_id, b.learner, b.profile, b.m, b.seed);
    });
    return table;
}

}  // namespace milo
