#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "milo/bounds.hpp"
#include "milo/datagen.hpp"
#include "milo/envs.hpp"
#include "milo/experiment.hpp"
#include "milo/imitation.hpp"
#include "milo/log.hpp"
#include "milo/mdp.hpp"
#include "milo/model.hpp"
#include "milo/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

/// Config problems exit with status 2; anything downstream with 3.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    out << content;
}

json load_config(const fs::path& path) {
    const std::string text = read_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + path.string() + ": " + e.what());
    }
}

/// Fail-closed field check: silent typos in sweep definitions are worse
/// than a hard error.
void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) {
            throw ConfigError(where + ": unknown field \"" + key + "\"");
        }
    }
}

template <typename T>
T require(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + ": missing field \"" + key + "\"");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + ": bad field \"" + key + "\": " + e.what());
    }
}

void require_version(const json& j, const std::string& where) {
    if (require<int>(j, "version", where) != 1) {
        throw ConfigError(where + ": unsupported config version");
    }
}

std::string hash_hex(const std::string& bytes) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(milo::fnv1a64(bytes)));
    return std::string(buf);
}

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return std::string(buf);
}

struct Outputs {
    fs::path dir;
    std::map<std::string, std::string> checksums;

    void emit(const std::string& name, const std::string& content) {
        fs::create_directories(dir);
        write_file(dir / name, content);
        checksums[name] = hash_hex(content);
    }

    void write_manifest(const std::string& verb, const std::string& config_bytes,
                        std::uint64_t seed) {
        json m;
        m["version"] = 1;
        m["verb"] = verb;
        m["config_hash"] = hash_hex(config_bytes);
        m["seed"] = seed;
        m["timestamp"] = iso_timestamp();
        json arts;
        for (const auto& [name, sum] : checksums) arts[name] = sum;
        m["artifacts"] = std::move(arts);
        write_file(dir / "manifest.json", m.dump(2) + "\n");
    }
};

milo::MdpSpec build_mdp_from_spec(const json& spec, std::uint64_t root_seed,
                                  const std::string& where) {
    check_keys(spec, {"kind", "gamma", "chain_len", "n_actions", "p_slip", "n_states", "r_max",
                      "support", "seed", "id"},
               where);
    const std::string kind = require<std::string>(spec, "kind", where);
    const double gamma = require<double>(spec, "gamma", where);
    if (kind == "chain2") return milo::chain2(gamma);
    if (kind == "cliff_chain") {
        return milo::cliff_chain(require<int>(spec, "chain_len", where),
                                 spec.value("n_actions", 2), gamma, spec.value("p_slip", 0.0));
    }
    if (kind == "two_room") return milo::two_room(gamma, spec.value("p_slip", 0.0));
    if (kind == "random") {
        milo::Rng rng(milo::derive_seed(spec.value("seed", root_seed), "gen-mdp"));
        return milo::random_mdp(require<int>(spec, "n_states", where),
                                require<int>(spec, "n_actions", where), gamma, rng,
                                spec.value("r_max", 1.0), spec.value("support", 0));
    }
    throw ConfigError(where + ": unknown MDP kind \"" + kind + "\"");
}

std::vector<milo::NamedMdp> resolve_mdps(const json& j, std::uint64_t root_seed,
                                         const std::string& where) {
    std::vector<milo::NamedMdp> out;
    if (j.is_string()) {
        if (j.get<std::string>() != "suite") {
            throw ConfigError(where + ": the only named MDP set is \"suite\"");
        }
        return milo::suite_mdps();
    }
    if (!j.is_array()) throw ConfigError(where + ": expected \"suite\" or an array");
    int index = 0;
    for (const auto& entry : j) {
        if (entry.contains("path")) {
            check_keys(entry, {"path", "id"}, where);
            const fs::path path = entry.at("path").get<std::string>();
            auto mdp = milo::MdpSpec::from_json(load_config(path));
            out.push_back({entry.value("id", path.stem().string()), std::move(mdp)});
        } else {
            auto mdp = build_mdp_from_spec(entry, root_seed + index, where);
            out.push_back({entry.value("id", "mdp" + std::to_string(index)), std::move(mdp)});
        }
        ++index;
    }
    if (out.empty()) throw ConfigError(where + ": no MDPs given");
    return out;
}

milo::TrainConfig parse_train(const json& j, const std::string& where) {
    check_keys(j, {"iters", "learner_lr", "lambda_u", "bc_weight", "start_dist", "horizon_h",
                   "delta", "seed", "penalty_mode"},
               where);
    try {
        return milo::TrainConfig::from_json(j);
    } catch (const std::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

milo::SweepConfig parse_sweep(const json& cfg, std::uint64_t root_seed, const std::string& where) {
    check_keys(cfg, {"version", "mdps", "m_grid", "n_behavior", "profiles", "learners", "seeds",
                     "train", "ensemble_k", "pseudocount", "expert_trajectories",
                     "compute_bound_slack", "seed", "type", "m", "horizon", "alpha", "beta",
                     "start"},
               where);
    milo::SweepConfig sweep;
    sweep.mdps = resolve_mdps(cfg.at("mdps"), root_seed, where);
    if (cfg.contains("m_grid")) sweep.m_grid = cfg.at("m_grid").get<std::vector<int>>();
    if (cfg.contains("m")) sweep.m_grid = {cfg.at("m").get<int>()};
    sweep.n_behavior = cfg.value("n_behavior", sweep.n_behavior);
    if (cfg.contains("profiles")) {
        sweep.profiles = cfg.at("profiles").get<std::vector<std::string>>();
    }
    for (const auto& p : sweep.profiles) {
        if (p != "wide" && p != "narrow" && p != "expert_only") {
            throw ConfigError(where + ": unknown profile \"" + p + "\"");
        }
    }
    if (cfg.contains("learners")) {
        sweep.learners = cfg.at("learners").get<std::vector<std::string>>();
    }
    for (const auto& l : sweep.learners) {
        if (l != "bc" && l != "adv_il" && l != "alg1" && l != "alg2") {
            throw ConfigError(where + ": unknown learner \"" + l + "\"");
        }
    }
    if (cfg.contains("seeds")) {
        sweep.seeds = cfg.at("seeds").get<std::vector<std::uint64_t>>();
    }
    if (cfg.contains("train")) sweep.train = parse_train(cfg.at("train"), where + ".train");
    sweep.ensemble_k = cfg.value("ensemble_k", sweep.ensemble_k);
    sweep.pseudocount = cfg.value("pseudocount", sweep.pseudocount);
    sweep.expert_trajectories = cfg.value("expert_trajectories", sweep.expert_trajectories);
    sweep.compute_bound_slack = cfg.value("compute_bound_slack", sweep.compute_bound_slack);
    return sweep;
}

int cmd_gen_mdp(const json& cfg, Outputs& out, std::uint64_t seed) {
    require_version(cfg, "gen-mdp");
    const auto mdp = build_mdp_from_spec(cfg, seed, "gen-mdp");
    out.emit("mdp.json", mdp.to_json().dump(2) + "\n");
    return 0;
}

int cmd_gen_data(const json& cfg, Outputs& out, std::uint64_t seed) {
    require_version(cfg, "gen-data");
    check_keys(cfg, {"version", "mdp", "role", "profile", "n", "mode", "seed", "include_reward"},
               "gen-data");
    const auto mdp = milo::MdpSpec::from_json(load_config(require<std::string>(cfg, "mdp", "gen-data")));
    const std::string role = require<std::string>(cfg, "role", "gen-data");
    const int n = require<int>(cfg, "n", "gen-data");
    const std::string mode = cfg.value("mode", "iid");
    const bool include_reward = cfg.value("include_reward", true);
    milo::Rng rng(milo::derive_seed(seed, "gen-data"));
    milo::TransitionDataset data;
    if (role == "expert") {
        const auto expert = milo::solve_expert(mdp);
        data = mode == "trajectory"
                   ? milo::sample_dataset_trajectories(expert, mdp, n, rng,
                                                       milo::GeneratorTag::Expert, include_reward)
                   : milo::sample_dataset(expert, mdp, n, rng, milo::GeneratorTag::Expert,
                                          include_reward);
        data.source_policy_id = "expert";
    } else if (role == "behavior") {
        const std::string profile = cfg.value("profile", "wide");
        if (profile != "wide" && profile != "narrow") {
            throw ConfigError("gen-data: unknown profile \"" + profile + "\"");
        }
        const auto bp = profile == "wide" ? milo::BehaviorProfile::Wide
                                          : milo::BehaviorProfile::Narrow;
        milo::Rng mix_rng(milo::derive_seed(seed, "gen-data-mixture"));
        const auto mixture = milo::make_behavior_policy(mdp, bp, mix_rng);
        data = milo::sample_dataset(mixture, mdp, n, rng,
                                    profile == "wide" ? milo::GeneratorTag::BehaviorWide
                                                      : milo::GeneratorTag::BehaviorNarrow,
                                    include_reward);
        data.source_policy_id = "behavior_" + profile;
    } else {
        throw ConfigError("gen-data: unknown role \"" + role + "\"");
    }
    data.seed = seed;
    out.emit("dataset.jsonl", data.to_jsonl());
    return 0;
}

int cmd_fit_model(const json& cfg, Outputs& out, std::uint64_t seed) {
    require_version(cfg, "fit-model");
    check_keys(cfg, {"version", "mdp", "data", "pseudocount", "ensemble_k", "seed"}, "fit-model");
    const auto mdp = milo::MdpSpec::from_json(load_config(require<std::string>(cfg, "mdp", "fit-model")));
    const auto data = milo::TransitionDataset::from_jsonl(
        read_file(require<std::string>(cfg, "data", "fit-model")));
    const double pseudocount = cfg.value("pseudocount", 0.1);
    const int k = cfg.value("ensemble_k", 5);
    if (k >= 2) {
        milo::Rng rng(milo::derive_seed(seed, "fit-model"));
        const auto ens =
            milo::fit_ensemble(data, mdp.n_states(), mdp.n_actions(), k, pseudocount, rng);
        out.emit("model.json", ens.to_json().dump(2) + "\n");
    } else {
        const auto model = milo::fit_model(data, mdp.n_states(), mdp.n_actions(), pseudocount);
        out.emit("model.json", model.to_json().dump(2) + "\n");
    }
    return 0;
}

int cmd_train(const json& cfg, Outputs& out, std::uint64_t seed) {
    require_version(cfg, "train");
    check_keys(cfg, {"version", "mdp", "learner", "expert_data", "behavior_data", "model", "train",
                     "seed"},
               "train");
    const auto mdp = milo::MdpSpec::from_json(load_config(require<std::string>(cfg, "mdp", "train")));
    const std::string learner = require<std::string>(cfg, "learner", "train");
    const auto expert_data = milo::TransitionDataset::from_jsonl(
        read_file(require<std::string>(cfg, "expert_data", "train")));
    milo::TrainConfig train =
        cfg.contains("train") ? parse_train(cfg.at("train"), "train.train") : milo::TrainConfig{};
    train.seed = seed;

    std::optional<milo::TransitionDataset> behavior_data;
    if (cfg.contains("behavior_data")) {
        behavior_data = milo::TransitionDataset::from_jsonl(
            read_file(cfg.at("behavior_data").get<std::string>()));
    }
    std::optional<milo::ModelEnsemble> ensemble;
    if (cfg.contains("model")) {
        const json mj = load_config(cfg.at("model").get<std::string>());
        if (!mj.contains("members")) {
            throw ConfigError("train: model file must hold an ensemble for alg1/alg2");
        }
        ensemble = milo::ModelEnsemble::from_json(mj);
    }

    milo::LearnerOutput output{milo::TabularPolicy::uniform(mdp.n_states(), mdp.n_actions()),
                               milo::Witness{milo::OccKind::State,
                                             Eigen::VectorXd::Zero(mdp.n_states())},
                               {},
                               0.0};
    if (learner == "bc") {
        output.policy = milo::bc_fit(expert_data, mdp.n_states(), mdp.n_actions());
    } else if (learner == "adv_il") {
        output = milo::adversarial_il_true_model(expert_data, mdp, train);
    } else if (learner == "alg1") {
        if (!ensemble) throw ConfigError("train: alg1 needs a fitted model");
        output = milo::algorithm1(expert_data, ensemble->point.to_mdp(mdp), train);
    } else if (learner == "alg2") {
        if (!ensemble) throw ConfigError("train: alg2 needs a fitted model");
        output = milo::algorithm2(expert_data, ensemble->point.to_mdp(mdp), *ensemble, train,
                                  behavior_data ? &*behavior_data : nullptr);
    } else {
        throw ConfigError("train: unknown learner \"" + learner + "\"");
    }
    out.emit("learner_output.json", output.to_json().dump(2) + "\n");
    return 0;
}

int cmd_verify_bounds(const json& cfg, Outputs& out, std::uint64_t seed, int jobs) {
    (void)jobs;
    require_version(cfg, "verify-bounds");
    check_keys(cfg, {"version", "audits", "train", "delta", "seed", "thm2_mdp_gamma"},
               "verify-bounds");
    milo::TrainConfig train = cfg.contains("train")
                                  ? parse_train(cfg.at("train"), "verify-bounds.train")
                                  : milo::TrainConfig{};
    train.iters = std::min(train.iters, 200);
    const double delta = cfg.value("delta", 0.1);
    train.delta = delta;

    const json audits = cfg.value("audits", json::object());
    check_keys(audits, {"lemma1", "lemma6", "thm2", "thm3", "thm4", "cor2", "prop1", "thm5",
                        "cor4", "state_visitation"},
               "verify-bounds.audits");
    auto count_of = [&](const std::string& name, int fallback) {
        if (!audits.contains(name)) return fallback;
        check_keys(audits.at(name), {"n", "m_values", "redraws"}, "verify-bounds." + name);
        return audits.at(name).value("n", fallback);
    };

    std::vector<milo::AuditSummary> summaries;
    summaries.push_back(milo::audit_lemma1(count_of("lemma1", 50), seed));
    summaries.push_back(milo::audit_lemma6(count_of("lemma6", 50), seed));
    {
        std::vector<int> m_values = {25, 100};
        int redraws = 20;
        if (audits.contains("thm2")) {
            m_values = audits.at("thm2").value("m_values", m_values);
            redraws = audits.at("thm2").value("redraws", redraws);
        }
        const auto mdp = milo::chain2(cfg.value("thm2_mdp_gamma", 0.9));
        summaries.push_back(milo::audit_theorem2(mdp, m_values, redraws, train, delta, seed));
    }
    summaries.push_back(milo::audit_theorem3(count_of("thm3", 10), seed, train));
    summaries.push_back(milo::audit_theorem4(count_of("thm4", 10), seed, train));
    summaries.push_back(milo::audit_corollary2(count_of("cor2", 10), seed, train));
    summaries.push_back(milo::audit_proposition1(count_of("prop1", 10), seed));
    summaries.push_back(milo::audit_theorem5(count_of("thm5", 10), seed));
    summaries.push_back(milo::audit_corollary4(count_of("cor4", 10), seed));
    summaries.push_back(milo::audit_state_visitation(count_of("state_visitation", 10), seed, train));

    json arr = json::array();
    std::ostringstream csv;
    csv << "theorem_id,n,holds_rate,median_slack\n";
    for (const auto& s : summaries) {
        arr.push_back(s.to_json());
        csv << s.theorem_id << ',' << s.n << ',' << s.holds_rate << ','
            << (std::isinf(s.median_slack) ? "inf" : std::to_string(s.median_slack)) << '\n';
    }
    out.emit("bound_reports.json", arr.dump(2) + "\n");
    out.emit("bounds_summary.csv", csv.str());
    return 0;
}

int cmd_sweep(const json& cfg, Outputs& out, std::uint64_t seed, int jobs) {
    require_version(cfg, "sweep");
    const auto sweep = parse_sweep(cfg, seed, "sweep");
    const auto table = milo::run_sweep(sweep, jobs);
    out.emit("results.csv", table.to_csv());
    out.emit("aggregates.json", milo::aggregates_to_json(milo::aggregate(table)).dump(2) + "\n");
    return 0;
}

int cmd_study(const json& cfg, Outputs& out, std::uint64_t seed, int jobs) {
    require_version(cfg, "study");
    const std::string type = require<std::string>(cfg, "type", "study");
    if (type == "starting_state") {
        const auto sweep = parse_sweep(cfg, seed, "study");
        const auto table = milo::starting_state_study(sweep, jobs);
        out.emit("results.csv", table.to_csv());
        out.emit("aggregates.json",
                 milo::aggregates_to_json(milo::aggregate(table)).dump(2) + "\n");
        return 0;
    }
    if (type == "expert_only") {
        const auto sweep = parse_sweep(cfg, seed, "study");
        const auto table = milo::expert_only_study(sweep, jobs);
        out.emit("results.csv", table.to_csv());
        out.emit("aggregates.json",
                 milo::aggregates_to_json(milo::aggregate(table)).dump(2) + "\n");
        return 0;
    }
    if (type == "horizon") {
        check_keys(cfg, {"version", "type", "gamma_grid", "chain_len", "n_actions", "p_slip", "m",
                         "n_behavior", "seeds", "train", "ensemble_k", "pseudocount", "lr_scale",
                         "seed"},
                   "study[horizon]");
        milo::HorizonStudyConfig hcfg;
        if (cfg.contains("gamma_grid")) {
            hcfg.gamma_grid = cfg.at("gamma_grid").get<std::vector<double>>();
        }
        hcfg.chain_len = cfg.value("chain_len", hcfg.chain_len);
        hcfg.n_actions = cfg.value("n_actions", hcfg.n_actions);
        hcfg.p_slip = cfg.value("p_slip", hcfg.p_slip);
        hcfg.m = cfg.value("m", hcfg.m);
        hcfg.n_behavior = cfg.value("n_behavior", hcfg.n_behavior);
        if (cfg.contains("seeds")) hcfg.seeds = cfg.at("seeds").get<std::vector<std::uint64_t>>();
        if (cfg.contains("train")) hcfg.train = parse_train(cfg.at("train"), "study.train");
        hcfg.ensemble_k = cfg.value("ensemble_k", hcfg.ensemble_k);
        hcfg.pseudocount = cfg.value("pseudocount", hcfg.pseudocount);
        hcfg.lr_scale = cfg.value("lr_scale", hcfg.lr_scale);
        const auto result = milo::horizon_scaling_study(hcfg, jobs);
        out.emit("results.csv", result.to_csv());
        json j;
        for (const auto& [learner, slope] : result.slopes) j["slopes"][learner] = slope;
        for (const auto& [learner, degenerate] : result.degenerate) {
            j["degenerate"][learner] = degenerate;
        }
        out.emit("aggregates.json", j.dump(2) + "\n");
        return 0;
    }
    if (type == "uncertainty_trace") {
        const auto sweep = parse_sweep(cfg, seed, "study");
        const int horizon = cfg.value("horizon", 10);
        const double alpha = cfg.value("alpha", 1.0);
        const double beta = cfg.value("beta", 1.0);
        const std::string start_name = cfg.value("start", std::string("behavior_states"));
        const int m = sweep.m_grid[sweep.m_grid.size() / 2];
        json agg;
        for (const auto& named : sweep.mdps) {
            milo::SweepConfig one = sweep;
            one.mdps = {named};
            // wide behavior model for training, expert-only model for tracing
            auto ctxseed = sweep.seeds.front();
            milo::Rng expert_rng(milo::derive_seed(ctxseed, named.id + "|trace|expert", m));
            const auto expert = milo::solve_expert(named.mdp);
            const auto expert_data = milo::sample_dataset(expert, named.mdp, m, expert_rng,
                                                          milo::GeneratorTag::Expert);
            milo::Rng mix_rng(milo::derive_seed(ctxseed, named.id + "|trace|mixture", m));
            const auto mixture =
                milo::make_behavior_policy(named.mdp, milo::BehaviorProfile::Wide, mix_rng);
            milo::Rng behavior_rng(milo::derive_seed(ctxseed, named.id + "|trace|behavior", m));
            const auto behavior_data = milo::sample_dataset(
                mixture, named.mdp, sweep.n_behavior, behavior_rng, milo::GeneratorTag::BehaviorWide);
            milo::Rng ens_rng(milo::derive_seed(ctxseed, named.id + "|trace|ens", m));
            const auto ensemble =
                milo::fit_ensemble(behavior_data, named.mdp.n_states(), named.mdp.n_actions(),
                                   sweep.ensemble_k, sweep.pseudocount, ens_rng);
            const auto tl = ensemble.point.to_mdp(named.mdp);
            milo::Rng expert_ens_rng(milo::derive_seed(ctxseed, named.id + "|trace|expert_ens", m));
            const auto expert_only = milo::fit_ensemble(expert_data, named.mdp.n_states(),
                                                        named.mdp.n_actions(), sweep.ensemble_k,
                                                        sweep.pseudocount, expert_ens_rng);
            milo::TrainConfig train = sweep.train;
            train.seed = ctxseed;
            train.start_dist = milo::start_dist_from_string(start_name);
            const auto alg2 =
                milo::algorithm2(expert_data, tl, ensemble, train, &behavior_data);
            const auto bc = milo::bc_fit(expert_data, named.mdp.n_states(), named.mdp.n_actions());
            const Eigen::VectorXd start = milo::resolve_start_dist(
                train.start_dist, named.mdp, &expert_data, &behavior_data);
            const auto trace = milo::uncertainty_trace(alg2.policy, "alg2", bc, "bc", tl,
                                                       expert_only, expert_data, start, horizon,
                                                       alpha, beta, sweep.seeds);
            out.emit("traces_" + named.id + ".csv", trace.to_csv());
            agg[named.id] = {{"alg2_final", trace.mean_at("alg2", horizon)},
                             {"bc_final", trace.mean_at("bc", horizon)}};
        }
        out.emit("aggregates.json", agg.dump(2) + "\n");
        return 0;
    }
    throw ConfigError("study: unknown type \"" + type + "\"");
}

int cmd_report(const json& cfg, Outputs& out) {
    require_version(cfg, "report");
    check_keys(cfg, {"version", "results_dir"}, "report");
    const fs::path dir = require<std::string>(cfg, "results_dir", "report");
    const fs::path results = dir / "results.csv";
    if (!fs::exists(results)) throw ConfigError("report: missing " + results.string());
    const auto table = milo::ResultsTable::from_csv(read_file(results));
    if (table.rows.empty()) throw ConfigError("report: results.csv has no rows");
    const auto cells = milo::aggregate(table);
    out.emit("summary.csv", milo::aggregates_to_csv(cells));

    // Table-1 layout: one block per (mdp, profile); learners as columns,
    // M as rows
    std::set<std::pair<std::string, std::string>> blocks;
    std::set<std::string> learners;
    std::set<int> ms;
    for (const auto& c : cells) {
        blocks.insert({c.mdp_id, c.profile});
        learners.insert(c.learner);
        ms.insert(c.m);
    }
    std::ostringstream md;
    md << "# Sweep summary\n";
    for (const auto& [mdp_id, profile] : blocks) {
        md << "\n## " << mdp_id << " / " << profile << "\n\n|M|";
        for (const auto& l : learners) md << l << "|";
        md << "\n|-|";
        for (std::size_t i = 0; i < learners.size(); ++i) md << "-|";
        md << "\n";
        for (const int m : ms) {
            md << "|" << m << "|";
            for (const auto& l : learners) {
                bool found = false;
                for (const auto& c : cells) {
                    if (c.mdp_id == mdp_id && c.profile == profile && c.learner == l &&
                        c.m == m) {
                        char buf[64];
                        std::snprintf(buf, sizeof(buf), "%.2f ± %.2f", c.mean, c.stddev);
                        md << buf;
                        found = true;
                        break;
                    }
                }
                if (!found) md << "-";
                md << "|";
            }
            md << "\n";
        }
    }
    out.emit("summary.md", md.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"milo: tabular testbed for model-based offline imitation learning"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::int64_t> seed_override;
    int jobs = 1;

    const std::vector<std::string> verbs = {"gen-mdp",       "gen-data", "fit-model", "train",
                                            "verify-bounds", "sweep",    "study",     "report"};
    std::map<std::string, CLI::App*> subs;
    for (const auto& verb : verbs) {
        CLI::App* sub = app.add_subcommand(verb);
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed_override, "root seed override");
        sub->add_option("--jobs", jobs, "parallel worker cap");
        subs[verb] = sub;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << e.what() << "\n";
        return kExitConfig;
    }

    try {
        const std::string verb = app.get_subcommands().front()->get_name();
        const std::string config_bytes = read_file(config_path);
        const json cfg = load_config(config_path);
        std::uint64_t seed = 0;
        if (cfg.is_object() && cfg.contains("seed")) seed = cfg.at("seed").get<std::uint64_t>();
        if (seed_override) seed = static_cast<std::uint64_t>(*seed_override);

        Outputs out;
        out.dir = out_dir;
        int rc = 0;
        if (verb == "gen-mdp") {
            rc = cmd_gen_mdp(cfg, out, seed);
        } else if (verb == "gen-data") {
            rc = cmd_gen_data(cfg, out, seed);
        } else if (verb == "fit-model") {
            rc = cmd_fit_model(cfg, out, seed);
        } else if (verb == "train") {
            rc = cmd_train(cfg, out, seed);
        } else if (verb == "verify-bounds") {
            rc = cmd_verify_bounds(cfg, out, seed, jobs);
        } else if (verb == "sweep") {
            rc = cmd_sweep(cfg, out, seed, jobs);
        } else if (verb == "study") {
            rc = cmd_study(cfg, out, seed, jobs);
        } else if (verb == "report") {
            rc = cmd_report(cfg, out);
        }
        if (rc == 0) out.write_manifest(verb, config_bytes, seed);
        return rc;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
