#pragma once

#include <optional>
#include <string>
#include <vector>

#include "milo/datagen.hpp"
#include "milo/mdp.hpp"
#include "milo/model.hpp"

namespace milo {

/// Discriminating function over states or state-action pairs. Witnesses
/// produced by best_witness satisfy the sup-norm bound |f| <= 1; the
/// uncertainty-penalized signal fed back into the policy step may exceed it.
struct Witness {
    OccKind kind;
    Eigen::VectorXd values;

    nlohmann::json to_json() const;
    static Witness from_json(const nlohmann::json& j);
};

enum class StartDist { Init, ExpertStates, BehaviorStates, Arbitrary };
std::string to_string(StartDist s);
StartDist start_dist_from_string(const std::string& s);

/// Where the lambda * Uhat penalty enters: folded into the state witness as
/// the policy-averaged uncertainty, or applied per state-action pair on the
/// policy's reward signal.
enum class PenaltyMode { StateAveraged, StateAction };

struct TrainConfig {
    int iters = 300;
    double learner_lr = 2.0;  // exponent scale of the mirror-descent step
    double lambda_u = 0.0;
    double bc_weight = 0.0;
    StartDist start_dist = StartDist::Init;
    /// Rollout truncation: kHorizonExact matches the full discounted
    /// occupancy; kHorizonAuto picks H so the discount tail is <= 0.1.
    int horizon_h = -1;
    double delta = 0.1;
    std::uint64_t seed = 0;
    PenaltyMode penalty_mode = PenaltyMode::StateAveraged;

    static constexpr int kHorizonAuto = -1;
    static constexpr int kHorizonExact = 0;

    nlohmann::json to_json() const;
    static TrainConfig from_json(const nlohmann::json& j);
};

struct CurvePoint {
    int iter;
    double ipm_value;
    double bc_loss;
    double mean_uncertainty;
};

struct LearnerOutput {
    TabularPolicy policy;
    Witness final_witness;
    std::vector<CurvePoint> curve;
    /// Achieved IPM of the averaged output policy against the target.
    double final_ipm = 0.0;

    nlohmann::json to_json() const;
    static LearnerOutput from_json(const nlohmann::json& j);
};

enum class BcFallback { Uniform, ArgmaxPrior };

/// Count-based conditional pi(a|s) = count(s,a) / count(s) on visited
/// states; the fallback rule fills unvisited rows.
TabularPolicy bc_fit(const TransitionDataset& expert_data, int n_states, int n_actions,
                     BcFallback fallback = BcFallback::Uniform);

/// Empirical state (or state-action) histogram of a dataset, as an
/// occupancy.
Occupancy empirical_state_hist(const TransitionDataset& data, int n_states);
Occupancy empirical_sa_hist(const TransitionDataset& data, int n_states, int n_actions);

/// Closed-form TV-dual witness: +1 where target exceeds current, -1 where
/// it falls short, 0 on ties. Its achieved IPM equals the L1 distance.
Witness best_witness(const Occupancy& target, const Occupancy& current);

/// E_target[f] - E_current[f].
double witness_ipm(const Witness& f, const Occupancy& target, const Occupancy& current);

/// One exponentiated-gradient update per policy row:
/// pi'(a|s) proportional to pi(a|s) * exp(lr * Q_f(s,a) + lr * bc_grad_weight * g_bc(s,a)),
/// with Q_f the exact discounted action-value of the signal-as-reward in
/// `model` and g_bc the per-state subgradient of the empirical BC L1 loss.
TabularPolicy inner_policy_step(const TabularPolicy& current, const Witness& signal,
                                const MdpSpec& model, double bc_grad_weight,
                                const TransitionDataset* expert_data, double lr);

/// Oracle baseline: adversarial imitation with the true dynamics,
/// state-action witness against the empirical expert histogram, iterate
/// averaging in occupancy space.
LearnerOutput adversarial_il_true_model(const TransitionDataset& expert_data,
                                        const MdpSpec& mdp_true, const TrainConfig& cfg);

/// Same loop with every learner occupancy computed inside the learned
/// dynamics.
LearnerOutput algorithm1(const TransitionDataset& expert_data, const MdpSpec& tl,
                         const TrainConfig& cfg);

/// State-witness variant with the BC loss term, configurable rollout start
/// distribution and the lambda * Uhat uncertainty penalty. `behavior_data`
/// is only required when cfg.start_dist == BehaviorStates.
LearnerOutput algorithm2(const TransitionDataset& expert_data, const MdpSpec& tl,
                         const ModelEnsemble& ensemble, const TrainConfig& cfg,
                         const TransitionDataset* behavior_data = nullptr);

/// Exact-target variant used by the bound harness and the convergence
/// property tests: matches a given occupancy instead of an empirical
/// histogram. Kind selects the state or state-action loop.
LearnerOutput adversarial_match(const Occupancy& target, const MdpSpec& model,
                                const TrainConfig& cfg, const Eigen::VectorXd& start);

/// (V^pi - V^random) / (V^expert - V^random) in the true MDP.
double normalized_score(const TabularPolicy& policy, const MdpSpec& mdp_true,
                        const TabularPolicy& expert_policy, const TabularPolicy& random_policy);

/// Resolves a TrainConfig start distribution against the available data.
Eigen::VectorXd resolve_start_dist(StartDist start, const MdpSpec& mdp,
                                   const TransitionDataset* expert_data,
                                   const TransitionDataset* behavior_data);

/// Horizon actually used by a config in a given MDP (auto rule: discount
/// tail <= 0.1); kHorizonExact maps to 0.
int resolve_horizon(const TrainConfig& cfg, double gamma);

}  // namespace milo
