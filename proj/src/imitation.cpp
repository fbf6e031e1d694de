#include "milo/imitation.hpp"

#include <cmath>
#include <stdexcept>

namespace milo {

nlohmann::json Witness::to_json() const {
    nlohmann::json j;
    j["kind"] = kind == OccKind::State ? "state" : "state_action";
    auto vals = nlohmann::json::array();
    for (int i = 0; i < values.size(); ++i) vals.push_back(values[i]);
    j["values"] = std::move(vals);
    return j;
}

Witness Witness::from_json(const nlohmann::json& j) {
    Witness w;
    w.kind = j.at("kind").get<std::string>() == "state" ? OccKind::State : OccKind::StateAction;
    const auto& vals = j.at("values");
    w.values.resize(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) w.values[static_cast<int>(i)] = vals.at(i).get<double>();
    return w;
}

std::string to_string(StartDist s) {
    switch (s) {
        case StartDist::Init: return "init";
        case StartDist::ExpertStates: return "expert_states";
        case StartDist::BehaviorStates: return "behavior_states";
        case StartDist::Arbitrary: return "arbitrary";
    }
    throw std::logic_error("unknown StartDist");
}

StartDist start_dist_from_string(const std::string& s) {
    if (s == "init") return StartDist::Init;
    if (s == "expert_states") return StartDist::ExpertStates;
    if (s == "behavior_states") return StartDist::BehaviorStates;
    if (s == "arbitrary") return StartDist::Arbitrary;
    throw std::invalid_argument("unknown start_dist: " + s);
}

nlohmann::json TrainConfig::to_json() const {
    nlohmann::json j;
    j["iters"] = iters;
    j["learner_lr"] = learner_lr;
    j["lambda_u"] = lambda_u;
    j["bc_weight"] = bc_weight;
    j["start_dist"] = to_string(start_dist);
    j["horizon_h"] = horizon_h;
    j["delta"] = delta;
    j["seed"] = seed;
    j["penalty_mode"] = penalty_mode == PenaltyMode::StateAveraged ? "state_averaged" : "state_action";
    return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
    TrainConfig cfg;
    cfg.iters = j.value("iters", cfg.iters);
    cfg.learner_lr = j.value("learner_lr", cfg.learner_lr);
    cfg.lambda_u = j.value("lambda_u", cfg.lambda_u);
    cfg.bc_weight = j.value("bc_weight", cfg.bc_weight);
    if (j.contains("start_dist")) cfg.start_dist = start_dist_from_string(j.at("start_dist"));
    cfg.horizon_h = j.value("horizon_h", cfg.horizon_h);
    cfg.delta = j.value("delta", cfg.delta);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("penalty_mode")) {
        const std::string mode = j.at("penalty_mode").get<std::string>();
        if (mode == "state_averaged") {
            cfg.penalty_mode = PenaltyMode::StateAveraged;
        } else if (mode == "state_action") {
            cfg.penalty_mode = PenaltyMode::StateAction;
        } else {
            throw std::invalid_argument("unknown penalty_mode: " + mode);
        }
    }
    if (cfg.iters <= 0) throw std::invalid_argument("TrainConfig: iters must be positive");
    if (!(cfg.learner_lr > 0.0)) throw std::invalid_argument("TrainConfig: learner_lr must be positive");
    if (cfg.lambda_u < 0.0) throw std::invalid_argument("TrainConfig: lambda_u must be >= 0");
    if (cfg.bc_weight < 0.0) throw std::invalid_argument("TrainConfig: bc_weight must be >= 0");
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw std::invalid_argument("TrainConfig: delta in (0,1)");
    return cfg;
}

nlohmann::json LearnerOutput::to_json() const {
    nlohmann::json j;
    j["policy"] = policy.to_json();
    j["final_witness"] = final_witness.to_json();
    j["final_ipm"] = final_ipm;
    auto rows = nlohmann::json::array();
    for (const auto& p : curve) {
        rows.push_back({{"iter", p.iter},
                        {"ipm_value", p.ipm_value},
                        {"bc_loss", p.bc_loss},
                        {"mean_uncertainty", p.mean_uncertainty}});
    }
    j["training_curve"] = std::move(rows);
    return j;
}

LearnerOutput LearnerOutput::from_json(const nlohmann::json& j) {
    LearnerOutput out{TabularPolicy::from_json(j.at("policy")),
                      Witness::from_json(j.at("final_witness")),
                      {},
                      j.at("final_ipm").get<double>()};
    for (const auto& row : j.at("training_curve")) {
        out.curve.push_back({row.at("iter").get<int>(), row.at("ipm_value").get<double>(),
                             row.at("bc_loss").get<double>(),
                             row.at("mean_uncertainty").get<double>()});
    }
    return out;
}

TabularPolicy bc_fit(const TransitionDataset& expert_data, int n_states, int n_actions,
                     BcFallback fallback) {
    if (expert_data.size() == 0) throw std::invalid_argument("bc_fit: empty expert data");
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n_states, n_actions);
    for (const auto& sample : expert_data.samples) {
        if (sample.s < 0 || sample.s >= n_states || sample.a < 0 || sample.a >= n_actions) {
            throw std::invalid_argument("bc_fit: sample index out of range");
        }
        counts(sample.s, sample.a) += 1.0;
    }
    Eigen::RowVectorXd action_prior = counts.colwise().sum();
    int prior_argmax = 0;
    action_prior.maxCoeff(&prior_argmax);
    Eigen::MatrixXd probs(n_states, n_actions);
    for (int s = 0; s < n_states; ++s) {
        const double total = counts.row(s).sum();
        if (total > 0.0) {
            probs.row(s) = counts.row(s) / total;
        } else if (fallback == BcFallback::Uniform) {
            probs.row(s).setConstant(1.0 / n_actions);
        } else {
            probs.row(s).setZero();
            probs(s, prior_argmax) = 1.0;
        }
    }
    return TabularPolicy(std::move(probs));
}

Occupancy empirical_state_hist(const TransitionDataset& data, int n_states) {
    if (data.size() == 0) throw std::invalid_argument("empirical_state_hist: empty dataset");
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(n_states);
    for (const auto& sample : data.samples) counts[sample.s] += 1.0;
    return Occupancy::state(counts / counts.sum());
}

Occupancy empirical_sa_hist(const TransitionDataset& data, int n_states, int n_actions) {
    if (data.size() == 0) throw std::invalid_argument("empirical_sa_hist: empty dataset");
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(n_states * n_actions);
    for (const auto& sample : data.samples) counts[sample.s * n_actions + sample.a] += 1.0;
    return Occupancy::state_action(counts / counts.sum());
}

Witness best_witness(const Occupancy& target, const Occupancy& current) {
    if (target.kind != current.kind) throw std::invalid_argument("best_witness: kind mismatch");
    if (target.values.size() != current.values.size()) {
        throw std::invalid_argument("best_witness: dimension mismatch");
    }
    Witness f{target.kind, Eigen::VectorXd::Zero(target.values.size())};
    for (int i = 0; i < target.values.size(); ++i) {
        const double d = target.values[i] - current.values[i];
        if (d > 0.0) {
            f.values[i] = 1.0;
        } else if (d < 0.0) {
            f.values[i] = -1.0;
        }
    }
    return f;
}

double witness_ipm(const Witness& f, const Occupancy& target, const Occupancy& current) {
    if (f.kind != target.kind || target.kind != current.kind) {
        throw std::invalid_argument("witness_ipm: kind mismatch");
    }
    return f.values.dot(target.values) - f.values.dot(current.values);
}

namespace {

// reward table induced by a witness-style signal
Eigen::MatrixXd signal_as_reward(const Witness& signal, int n_states, int n_actions) {
    Eigen::MatrixXd reward(n_states, n_actions);
    if (signal.kind == OccKind::State) {
        if (signal.values.size() != n_states) {
            throw std::invalid_argument("signal: state dimension mismatch");
        }
        for (int a = 0; a < n_actions; ++a) reward.col(a) = signal.values;
    } else {
        if (signal.values.size() != n_states * n_actions) {
            throw std::invalid_argument("signal: state-action dimension mismatch");
        }
        for (int s = 0; s < n_states; ++s) {
            for (int a = 0; a < n_actions; ++a) reward(s, a) = signal.values[s * n_actions + a];
        }
    }
    return reward;
}

// per-state visit weights and the empirical BC conditional
struct BcTerms {
    Eigen::VectorXd state_weight;  // count(s) / M
    TabularPolicy conditional;

    BcTerms(const TransitionDataset& data, int n_states, int n_actions)
        : state_weight(Eigen::VectorXd::Zero(n_states)),
          conditional(bc_fit(data, n_states, n_actions, BcFallback::Uniform)) {
        for (const auto& sample : data.samples) state_weight[sample.s] += 1.0;
        state_weight /= static_cast<double>(data.size());
    }

    double loss(const TabularPolicy& policy) const {
        double total = 0.0;
        for (int s = 0; s < state_weight.size(); ++s) {
            if (state_weight[s] <= 0.0) continue;
            total += state_weight[s] *
                     (conditional.probs().row(s) - policy.probs().row(s)).cwiseAbs().sum();
        }
        return total;
    }

    // ascent direction of -loss w.r.t. pi(a|s)
    Eigen::MatrixXd gradient(const TabularPolicy& policy) const {
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(policy.n_states(), policy.n_actions());
        for (int s = 0; s < state_weight.size(); ++s) {
            if (state_weight[s] <= 0.0) continue;
            for (int a = 0; a < policy.n_actions(); ++a) {
                const double d = conditional.prob(s, a) - policy.prob(s, a);
                if (d > 0.0) {
                    g(s, a) = state_weight[s];
                } else if (d < 0.0) {
                    g(s, a) = -state_weight[s];
                }
            }
        }
        return g;
    }
};

TabularPolicy exp_gradient_step(const TabularPolicy& current, const Eigen::MatrixXd& exponent) {
    Eigen::MatrixXd next(current.n_states(), current.n_actions());
    for (int s = 0; s < current.n_states(); ++s) {
        const Eigen::RowVectorXd shifted =
            exponent.row(s).array() - exponent.row(s).maxCoeff();
        Eigen::RowVectorXd row =
            current.probs().row(s).array() * shifted.array().exp();
        // keep every action revivable under later sign flips of the signal
        row = row.cwiseMax(1e-30);
        next.row(s) = row / row.sum();
    }
    return TabularPolicy(std::move(next));
}

}  // namespace

TabularPolicy inner_policy_step(const TabularPolicy& current, const Witness& signal,
                                const MdpSpec& model, double bc_grad_weight,
                                const TransitionDataset* expert_data, double lr) {
    if (current.n_states() != model.n_states() || current.n_actions() != model.n_actions()) {
        throw std::invalid_argument("inner_policy_step: policy shape does not match model");
    }
    const Eigen::MatrixXd reward = signal_as_reward(signal, model.n_states(), model.n_actions());
    const Eigen::MatrixXd q = policy_q_values(current, model, reward);
    Eigen::MatrixXd exponent = lr * q;
    if (bc_grad_weight > 0.0) {
        if (expert_data == nullptr) {
            throw std::invalid_argument("inner_policy_step: BC weight set but no expert data");
        }
        const BcTerms bc(*expert_data, model.n_states(), model.n_actions());
        exponent += lr * bc_grad_weight * bc.gradient(current);
    }
    return exp_gradient_step(current, exponent);
}

namespace {

struct AdversarialSpec {
    Occupancy target;                   // what the witness compares against
    const MdpSpec* model;               // dynamics occupied and planned in
    Eigen::VectorXd start;
    int horizon;                        // 0 = exact
    const Eigen::MatrixXd* penalty;     // lambda-scaled Uhat table, or nullptr
    PenaltyMode penalty_mode = PenaltyMode::StateAveraged;
    const TransitionDataset* bc_data = nullptr;
    double bc_weight = 0.0;
    int iters = 300;
    double lr = 1.0;
};

Occupancy matched_occupancy(const TabularPolicy& policy, const AdversarialSpec& spec) {
    if (spec.horizon > 0) {
        return occupancy_sa_truncated(policy, *spec.model, spec.start, spec.horizon);
    }
    return occupancy_sa(policy, *spec.model, spec.start);
}

LearnerOutput run_adversarial(const AdversarialSpec& spec) {
    const MdpSpec& model = *spec.model;
    const int ns = model.n_states();
    const int na = model.n_actions();
    const bool state_kind = spec.target.kind == OccKind::State;

    std::optional<BcTerms> bc;
    if (spec.bc_data != nullptr) bc.emplace(*spec.bc_data, ns, na);

    TabularPolicy policy = TabularPolicy::uniform(ns, na);
    Eigen::VectorXd occ_sum = Eigen::VectorXd::Zero(ns * na);
    Eigen::MatrixXd policy_sum = Eigen::MatrixXd::Zero(ns, na);
    int averaged_iters = 0;
    LearnerOutput out{policy, Witness{spec.target.kind, Eigen::VectorXd::Zero(ns)}, {}, 0.0};
    out.curve.reserve(spec.iters);

    for (int t = 0; t < spec.iters; ++t) {
        const Occupancy occ_sa = matched_occupancy(policy, spec);
        const Occupancy current =
            state_kind ? marginal_state(occ_sa, ns, na) : occ_sa;
        const Witness f = best_witness(spec.target, current);
        const double ipm = witness_ipm(f, spec.target, current);

        // assemble the (possibly penalized) signal for the policy step
        Witness signal = f;
        double mean_uncertainty = 0.0;
        if (spec.penalty != nullptr) {
            const Eigen::MatrixXd& pen = *spec.penalty;
            for (int s = 0; s < ns; ++s) {
                for (int a = 0; a < na; ++a) {
                    mean_uncertainty += occ_sa.values[s * na + a] * pen(s, a);
                }
            }
            if (spec.penalty_mode == PenaltyMode::StateAveraged && state_kind) {
                for (int s = 0; s < ns; ++s) {
                    double avg = 0.0;
                    for (int a = 0; a < na; ++a) avg += policy.prob(s, a) * pen(s, a);
                    signal.values[s] -= avg;
                }
            } else {
                Witness sa_signal{OccKind::StateAction, Eigen::VectorXd(ns * na)};
                for (int s = 0; s < ns; ++s) {
                    for (int a = 0; a < na; ++a) {
                        const double base =
                            state_kind ? f.values[s] : f.values[s * na + a];
                        sa_signal.values[s * na + a] = base - pen(s, a);
                    }
                }
                signal = std::move(sa_signal);
            }
        }

        const double bc_loss = bc ? bc->loss(policy) : 0.0;
        out.curve.push_back({t, ipm, bc_loss, mean_uncertainty});

        // average the tail half of the run; the no-regret argument holds on
        // any suffix and this drops the uniform-start transient
        if (2 * t >= spec.iters) {
            occ_sum += occ_sa.values;
            policy_sum += policy.probs();
            ++averaged_iters;
        }

        const Eigen::MatrixXd reward = signal_as_reward(signal, ns, na);
        const Eigen::MatrixXd q = policy_q_values(policy, model, reward);
        Eigen::MatrixXd exponent = spec.lr * q;
        if (bc && spec.bc_weight > 0.0) {
            exponent += spec.lr * spec.bc_weight * bc->gradient(policy);
        }
        policy = exp_gradient_step(policy, exponent);
    }

    // fictitious-play average: the policy whose occupancy is the mean of the
    // iterates' occupancies; rows never reached fall back to the plain
    // iterate average
    Eigen::MatrixXd avg(ns, na);
    for (int s = 0; s < ns; ++s) {
        double mass = 0.0;
        for (int a = 0; a < na; ++a) mass += occ_sum[s * na + a];
        if (mass > 1e-300) {
            for (int a = 0; a < na; ++a) avg(s, a) = occ_sum[s * na + a] / mass;
        } else {
            avg.row(s) = policy_sum.row(s) / static_cast<double>(averaged_iters);
        }
        avg.row(s) /= avg.row(s).sum();
    }
    out.policy = TabularPolicy(std::move(avg));

    const Occupancy final_occ = matched_occupancy(out.policy, spec);
    const Occupancy final_current =
        state_kind ? marginal_state(final_occ, ns, na) : final_occ;
    out.final_witness = best_witness(spec.target, final_current);
    out.final_ipm = witness_ipm(out.final_witness, spec.target, final_current);
    return out;
}

}  // namespace

int resolve_horizon(const TrainConfig& cfg, double gamma) {
    if (cfg.horizon_h == TrainConfig::kHorizonExact) return 0;
    if (cfg.horizon_h == TrainConfig::kHorizonAuto) return effective_horizon(gamma, 0.1);
    if (cfg.horizon_h < 0) throw std::invalid_argument("TrainConfig: bad horizon_h");
    return cfg.horizon_h;
}

Eigen::VectorXd resolve_start_dist(StartDist start, const MdpSpec& mdp,
                                   const TransitionDataset* expert_data,
                                   const TransitionDataset* behavior_data) {
    switch (start) {
        case StartDist::Init:
            return mdp.init_dist();
        case StartDist::ExpertStates:
            if (expert_data == nullptr || expert_data->size() == 0) {
                throw std::invalid_argument("start_dist=expert_states needs expert data");
            }
            return empirical_state_hist(*expert_data, mdp.n_states()).values;
        case StartDist::BehaviorStates:
            if (behavior_data == nullptr || behavior_data->size() == 0) {
                throw std::invalid_argument("start_dist=behavior_states needs behavior data");
            }
            return empirical_state_hist(*behavior_data, mdp.n_states()).values;
        case StartDist::Arbitrary:
            return Eigen::VectorXd::Constant(mdp.n_states(), 1.0 / mdp.n_states());
    }
    throw std::logic_error("unknown StartDist");
}

namespace {

// learners scale the step by (1-gamma) so configured rates are horizon-free:
// witness Q values grow like 1/(1-gamma)
double learner_step(const TrainConfig& cfg, double gamma) {
    return cfg.learner_lr * (1.0 - gamma);
}

}  // namespace

LearnerOutput adversarial_il_true_model(const TransitionDataset& expert_data,
                                        const MdpSpec& mdp_true, const TrainConfig& cfg) {
    if (expert_data.size() == 0) {
        throw std::invalid_argument("adversarial_il_true_model: expert data must be nonempty");
    }
    AdversarialSpec spec{empirical_sa_hist(expert_data, mdp_true.n_states(), mdp_true.n_actions()),
                         &mdp_true,
                         mdp_true.init_dist(),
                         0,
                         nullptr,
                         PenaltyMode::StateAveraged,
                         &expert_data,
                         0.0,
                         cfg.iters,
                         learner_step(cfg, mdp_true.gamma())};
    return run_adversarial(spec);
}

LearnerOutput algorithm1(const TransitionDataset& expert_data, const MdpSpec& tl,
                         const TrainConfig& cfg) {
    if (expert_data.size() == 0) {
        throw std::invalid_argument("algorithm1: expert data must be nonempty");
    }
    AdversarialSpec spec{empirical_sa_hist(expert_data, tl.n_states(), tl.n_actions()),
                         &tl,
                         tl.init_dist(),
                         0,
                         nullptr,
                         PenaltyMode::StateAveraged,
                         &expert_data,
                         0.0,
                         cfg.iters,
                         learner_step(cfg, tl.gamma())};
    return run_adversarial(spec);
}

LearnerOutput algorithm2(const TransitionDataset& expert_data, const MdpSpec& tl,
                         const ModelEnsemble& ensemble, const TrainConfig& cfg,
                         const TransitionDataset* behavior_data) {
    if (expert_data.size() == 0) {
        throw std::invalid_argument("algorithm2: expert data must be nonempty");
    }
    const Eigen::MatrixXd penalty = cfg.lambda_u * uncertainty_table(ensemble);
    AdversarialSpec spec{empirical_state_hist(expert_data, tl.n_states()),
                         &tl,
                         resolve_start_dist(cfg.start_dist, tl, &expert_data, behavior_data),
                         resolve_horizon(cfg, tl.gamma()),
                         cfg.lambda_u > 0.0 ? &penalty : nullptr,
                         cfg.penalty_mode,
                         &expert_data,
                         cfg.bc_weight,
                         cfg.iters,
                         learner_step(cfg, tl.gamma())};
    return run_adversarial(spec);
}

LearnerOutput adversarial_match(const Occupancy& target, const MdpSpec& model,
                                const TrainConfig& cfg, const Eigen::VectorXd& start) {
    AdversarialSpec spec{target,
                         &model,
                         start,
                         resolve_horizon(cfg, model.gamma()),
                         nullptr,
                         PenaltyMode::StateAveraged,
                         nullptr,
                         0.0,
                         cfg.iters,
                         learner_step(cfg, model.gamma())};
    return run_adversarial(spec);
}

double normalized_score(const TabularPolicy& policy, const MdpSpec& mdp_true,
                        const TabularPolicy& expert_policy, const TabularPolicy& random_policy) {
    const double v_expert = value(expert_policy, mdp_true);
    const double v_random = value(random_policy, mdp_true);
    if (std::abs(v_expert - v_random) < 1e-12) {
        throw std::invalid_argument("normalized_score: expert and random values coincide");
    }
    return (value(policy, mdp_true) - v_random) / (v_expert - v_random);
}

}  // namespace milo
