#include "milo/datagen.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace milo {

std::string to_string(GeneratorTag tag) {
    switch (tag) {
        case GeneratorTag::Expert: return "expert";
        case GeneratorTag::BehaviorWide: return "behavior_wide";
        case GeneratorTag::BehaviorNarrow: return "behavior_narrow";
        case GeneratorTag::Custom: return "custom";
    }
    throw std::logic_error("unknown GeneratorTag");
}

GeneratorTag generator_tag_from_string(const std::string& s) {
    if (s == "expert") return GeneratorTag::Expert;
    if (s == "behavior_wide") return GeneratorTag::BehaviorWide;
    if (s == "behavior_narrow") return GeneratorTag::BehaviorNarrow;
    if (s == "custom") return GeneratorTag::Custom;
    throw std::invalid_argument("unknown generator tag: " + s);
}

std::string TransitionDataset::to_jsonl() const {
    std::ostringstream out;
    nlohmann::json header;
    header["generator_tag"] = to_string(generator_tag);
    header["source_policy_id"] = source_policy_id;
    header["seed"] = seed;
    header["n"] = samples.size();
    if (!member_counts.empty()) header["member_counts"] = member_counts;
    out << header.dump() << '\n';
    for (const auto& sample : samples) {
        nlohmann::json j;
        j["s"] = sample.s;
        j["a"] = sample.a;
        j["s_next"] = sample.s_next;
        if (sample.r) j["r"] = *sample.r;
        out << j.dump() << '\n';
    }
    return out.str();
}

TransitionDataset TransitionDataset::from_jsonl(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("dataset: empty input");
    const auto header = nlohmann::json::parse(line);
    TransitionDataset data;
    data.generator_tag = generator_tag_from_string(header.at("generator_tag").get<std::string>());
    data.source_policy_id = header.at("source_policy_id").get<std::string>();
    data.seed = header.at("seed").get<std::uint64_t>();
    if (header.contains("member_counts")) {
        data.member_counts = header.at("member_counts").get<std::vector<int>>();
    }
    const auto n = header.at("n").get<std::size_t>();
    data.samples.reserve(n);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        TransitionSample sample;
        sample.s = j.at("s").get<int>();
        sample.a = j.at("a").get<int>();
        sample.s_next = j.at("s_next").get<int>();
        if (j.contains("r")) sample.r = j.at("r").get<double>();
        data.samples.push_back(sample);
    }
    if (data.samples.size() != n) throw std::invalid_argument("dataset: sample count mismatch");
    return data;
}

namespace {

// value iteration on the optimal Bellman operator; returns Q*
Eigen::MatrixXd value_iteration_q(const MdpSpec& mdp, double tol) {
    const int ns = mdp.n_states();
    const int na = mdp.n_actions();
    Eigen::VectorXd v = Eigen::VectorXd::Zero(ns);
    Eigen::MatrixXd q(ns, na);
    for (;;) {
        for (int a = 0; a < na; ++a) {
            q.col(a) = mdp.reward().col(a) + mdp.gamma() * (mdp.trans_for_action(a) * v);
        }
        const Eigen::VectorXd v_next = q.rowwise().maxCoeff();
        const double residual = (v_next - v).cwiseAbs().maxCoeff();
        v = v_next;
        if (residual <= tol) break;
    }
    for (int a = 0; a < na; ++a) {
        q.col(a) = mdp.reward().col(a) + mdp.gamma() * (mdp.trans_for_action(a) * v);
    }
    return q;
}

double normalized_score_of(const MdpSpec& mdp, const TabularPolicy& policy, double v_expert,
                           double v_random) {
    return (value(policy, mdp) - v_random) / (v_expert - v_random);
}

TabularPolicy softmax_of(const Eigen::MatrixXd& q, double tau) {
    Eigen::MatrixXd probs(q.rows(), q.cols());
    for (int s = 0; s < q.rows(); ++s) {
        const Eigen::RowVectorXd scaled = tau * q.row(s);
        const Eigen::RowVectorXd shifted = scaled.array() - scaled.maxCoeff();
        const Eigen::RowVectorXd e = shifted.array().exp();
        probs.row(s) = e / e.sum();
    }
    return TabularPolicy(std::move(probs));
}

}  // namespace

TabularPolicy solve_expert(const MdpSpec& mdp) {
    const Eigen::MatrixXd q = value_iteration_q(mdp, 1e-10);
    std::vector<int> best(mdp.n_states());
    for (int s = 0; s < mdp.n_states(); ++s) {
        int arg = 0;
        for (int a = 1; a < mdp.n_actions(); ++a) {
            if (q(s, a) > q(s, arg)) arg = a;
        }
        best[s] = arg;
    }
    return TabularPolicy::deterministic(best, mdp.n_actions());
}

Eigen::MatrixXd optimal_q_values(const MdpSpec& mdp) { return value_iteration_q(mdp, 1e-10); }

Occupancy BehaviorMixture::occupancy_sa(const MdpSpec& mdp) const {
    Eigen::VectorXd blend = Eigen::VectorXd::Zero(mdp.n_states() * mdp.n_actions());
    for (std::size_t k = 0; k < members.size(); ++k) {
        blend += weights[static_cast<int>(k)] * milo::occupancy_sa(members[k], mdp).values;
    }
    return Occupancy::state_action(std::move(blend));
}

double BehaviorMixture::value(const MdpSpec& mdp) const {
    double total = 0.0;
    for (std::size_t k = 0; k < members.size(); ++k) {
        total += weights[static_cast<int>(k)] * milo::value(members[k], mdp);
    }
    return total;
}

TabularPolicy softmax_policy_at_score(const MdpSpec& mdp, const Eigen::MatrixXd& q_star,
                                      double target_score) {
    const double v_expert = value(solve_expert(mdp), mdp);
    const double v_random = value(TabularPolicy::uniform(mdp.n_states(), mdp.n_actions()), mdp);
    if (std::abs(v_expert - v_random) < 1e-12) {
        throw std::invalid_argument("softmax_policy_at_score: degenerate MDP, expert == random");
    }
    auto score_at = [&](double tau) {
        return normalized_score_of(mdp, softmax_of(q_star, tau), v_expert, v_random);
    };
    double lo = 0.0;
    double hi = 1.0;
    int expansions = 0;
    while (score_at(hi) < target_score) {
        lo = hi;
        hi *= 2.0;
        if (++expansions > 60) break;  // argmax plateau; take the closest we can get
    }
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (score_at(mid) < target_score) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return softmax_of(q_star, 0.5 * (lo + hi));
}

BehaviorMixture make_behavior_policy(const MdpSpec& mdp, BehaviorProfile profile, Rng& rng,
                                     const WideProfileConfig& cfg) {
    (void)rng;  // construction is deterministic; the parameter mirrors the sampling interface
    BehaviorMixture mix;
    if (profile == BehaviorProfile::Narrow) {
        mix.members.push_back(TabularPolicy::uniform(mdp.n_states(), mdp.n_actions()));
        mix.weights = Eigen::VectorXd::Ones(1);
        return mix;
    }
    if (cfg.levels < 2) throw std::invalid_argument("wide profile needs at least 2 levels");
    const Eigen::MatrixXd q_star = optimal_q_values(mdp);
    mix.members.push_back(TabularPolicy::uniform(mdp.n_states(), mdp.n_actions()));
    for (int k = 1; k < cfg.levels; ++k) {
        const double frac = static_cast<double>(k) / (cfg.levels - 1);
        const double target = cfg.top_score * std::pow(frac, cfg.score_exponent);
        mix.members.push_back(softmax_policy_at_score(mdp, q_star, target));
    }
    mix.weights = Eigen::VectorXd(cfg.levels);
    for (int k = 0; k < cfg.levels; ++k) mix.weights[k] = std::pow(cfg.weight_decay, k);
    mix.weights /= mix.weights.sum();
    return mix;
}

namespace {

TransitionDataset sample_from_occupancies(const std::vector<const TabularPolicy*>& members,
                                          const Eigen::VectorXd& weights, const MdpSpec& mdp,
                                          int n, Rng& rng, GeneratorTag tag, bool include_reward) {
    if (n < 1) throw std::invalid_argument("sample_dataset: n must be >= 1");
    const int na = mdp.n_actions();
    std::vector<CategoricalSampler> occ_samplers;
    occ_samplers.reserve(members.size());
    for (const auto* policy : members) {
        occ_samplers.emplace_back(occupancy_sa(*policy, mdp).values);
    }
    std::vector<CategoricalSampler> next_samplers;
    next_samplers.reserve(mdp.n_states() * na);
    for (int s = 0; s < mdp.n_states(); ++s) {
        for (int a = 0; a < na; ++a) {
            next_samplers.emplace_back(mdp.trans_row(s, a).transpose());
        }
    }
    TransitionDataset data;
    data.generator_tag = tag;
    data.samples.reserve(n);
    data.member_counts.assign(members.size(), 0);
    const bool mixture = members.size() > 1;
    for (int i = 0; i < n; ++i) {
        const int k = mixture ? rng.categorical(weights) : 0;
        ++data.member_counts[k];
        const int sa = occ_samplers[k].sample(rng);
        const int s = sa / na;
        const int a = sa % na;
        const int s_next = next_samplers[sa].sample(rng);
        TransitionSample sample{s, a, s_next, std::nullopt};
        if (include_reward) sample.r = mdp.reward()(s, a);
        data.samples.push_back(sample);
    }
    if (!mixture) data.member_counts.clear();
    return data;
}

}  // namespace

TransitionDataset sample_dataset(const TabularPolicy& policy, const MdpSpec& mdp, int n, Rng& rng,
                                 GeneratorTag tag, bool include_reward) {
    return sample_from_occupancies({&policy}, Eigen::VectorXd::Ones(1), mdp, n, rng, tag,
                                   include_reward);
}

TransitionDataset sample_dataset(const BehaviorMixture& mixture, const MdpSpec& mdp, int n,
                                 Rng& rng, GeneratorTag tag, bool include_reward) {
    std::vector<const TabularPolicy*> members;
    members.reserve(mixture.members.size());
    for (const auto& m : mixture.members) members.push_back(&m);
    return sample_from_occupancies(members, mixture.weights, mdp, n, rng, tag, include_reward);
}

TransitionDataset sample_dataset_trajectories(const TabularPolicy& policy, const MdpSpec& mdp,
                                              int n, Rng& rng, GeneratorTag tag,
                                              bool include_reward) {
    if (n < 1) throw std::invalid_argument("sample_dataset_trajectories: n must be >= 1");
    const int horizon = static_cast<int>(std::ceil(1.0 / (1.0 - mdp.gamma()) - 1e-9));
    TransitionDataset data;
    data.generator_tag = tag;
    data.samples.reserve(n);
    while (data.size() < n) {
        const Trajectory traj = rollout(policy, mdp, mdp.init_dist(), horizon, rng);
        for (const auto& step : traj.steps) {
            if (data.size() >= n) break;
            TransitionSample sample{step.state, step.action, step.next_state, std::nullopt};
            if (include_reward) sample.r = mdp.reward()(step.state, step.action);
            data.samples.push_back(sample);
        }
    }
    return data;
}

}  // namespace milo
