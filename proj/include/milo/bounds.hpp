#pragma once

#include <map>
#include <string>
#include <vector>

#include "milo/datagen.hpp"
#include "milo/imitation.hpp"
#include "milo/mdp.hpp"
#include "milo/model.hpp"

namespace milo {

/// All terms of one inequality plus the measured quantity and the verdict.
/// `holds` is always measured <= bound + 1e-9 (infinity-aware); a vacuous
/// report is one whose bound is infinite by construction.
struct BoundReport {
    std::string theorem_id;
    std::map<std::string, double> terms;
    double bound_value = 0.0;
    double measured_value = 0.0;
    bool holds = false;
    bool vacuous = false;
    std::string notes;

    double slack() const { return bound_value - measured_value; }

    nlohmann::json to_json() const;
};

/// The proofs use the two-sided Hoeffding constant; the theorem statements
/// drop the factor 2. The harness checks the proof-consistent form and
/// reports both.
double eps_s_proof(double f_size, double delta, int m);
double eps_s_statement(double f_size, double delta, int m);
double eps_pi_proof(double delta, int m);

/// Default |F|: ordered policy pairs times available transition models.
double default_f_size(double n_policies, double n_transitions);

/// Reward-unit normalization; every check rescales so its assumption on
/// r_max holds and records the factor.
struct RewardScale {
    MdpSpec mdp;
    double factor;
};
RewardScale rescale_rewards(const MdpSpec& mdp, double target_r_max);

/// Performance difference of two policies against the expected policy gap
/// under the first policy's visitation (r_max <= 1/2 assumption).
BoundReport check_lemma1(const TabularPolicy& pi, const TabularPolicy& pi_hat, const MdpSpec& mdp);

/// Suboptimality of the true-model adversarial learner against the
/// 2 eps_s / (1-gamma) sampling bound.
BoundReport check_theorem2(const TransitionDataset& expert_data, const LearnerOutput& learner_out,
                           const MdpSpec& mdp_true, double delta, double f_size);

/// Learned-model variant with the coverage-weighted model error term.
BoundReport check_theorem3(const TransitionDataset& expert_data, const LearnerOutput& learner_out,
                           const MdpSpec& tl, const MdpSpec& mdp_true, const Occupancy& behavior_p,
                           const std::vector<TabularPolicy>& policy_set, double delta,
                           double f_size);

/// State-witness variant with the extra BC sampling term.
BoundReport check_theorem4(const TransitionDataset& expert_data, const LearnerOutput& learner_out,
                           const MdpSpec& tl, const MdpSpec& mdp_true, const Occupancy& behavior_p,
                           const std::vector<TabularPolicy>& policy_set, double delta,
                           double f_size);

/// Coverage-free bound through the policy-uncertainty terms; never vacuous.
BoundReport check_corollary2(const TransitionDataset& expert_data, const LearnerOutput& learner_out,
                             const MdpSpec& tl, const MdpSpec& mdp_true,
                             const Occupancy& behavior_p, double delta, double f_size);

/// Occupancy gap between the same policy in two dynamics against the
/// expected transition gap; both expectation directions are checked.
BoundReport check_lemma6(const TabularPolicy& pi, const MdpSpec& tt, const MdpSpec& tl);

/// v_pi^k: distance from the expert occupancy to the k-step pushforward of
/// nu under the policy's true-dynamics operator.
double recovery_variable(const TabularPolicy& pi, int k, const Eigen::VectorXd& nu,
                         const MdpSpec& mdp, const Occupancy& expert_occ);

/// Recovery bound: k-step pushforward gap plus k times the worst stepwise
/// model error plus the Pinsker coverage term.
BoundReport check_proposition1(const TabularPolicy& pi, int k, const Eigen::VectorXd& nu,
                               const MdpSpec& tl, const MdpSpec& tt, const Occupancy& behavior_d,
                               double c_value);

/// Planner for the offline-RL reduction: argmax of expected reward inside
/// the learned dynamics, by value iteration.
TabularPolicy offline_rl_policy(const MdpSpec& tl, const Eigen::MatrixXd& reward);

/// Per-(s,a) empirical mean of dataset reward labels; zero on unseen pairs.
Eigen::MatrixXd fitted_reward(const TransitionDataset& data, int n_states, int n_actions);

/// True-reward offline RL bound 2 C eps_T / (1-gamma)^2.
BoundReport check_theorem5(const MdpSpec& tl, const MdpSpec& mdp_true, const Occupancy& behavior_p,
                           const std::vector<TabularPolicy>& policy_set);

/// Label-only variant with the reward-fit error term.
BoundReport check_corollary4(const TransitionDataset& labeled_data, const MdpSpec& tl,
                             const MdpSpec& mdp_true, const Occupancy& behavior_p,
                             const std::vector<TabularPolicy>& policy_set);

/// Standalone check of the state-visitation minimization chain evaluated at
/// an algorithm2 output.
BoundReport check_state_visitation(const TransitionDataset& expert_data,
                                   const LearnerOutput& learner_out, const MdpSpec& tl,
                                   const MdpSpec& mdp_true, const Occupancy& behavior_p,
                                   const std::vector<TabularPolicy>& policy_set, double delta,
                                   double f_size);

struct AuditSummary {
    std::string theorem_id;
    int n = 0;
    int n_holds = 0;
    double holds_rate = 0.0;
    double median_slack = 0.0;
    std::vector<BoundReport> reports;

    nlohmann::json to_json(bool include_reports = true) const;
};

AuditSummary summarize(const std::string& theorem_id, std::vector<BoundReport> reports);

/// Randomized audits. Each instance draws a small random MDP (and, where a
/// learner is involved, runs the full data -> model -> training pipeline)
/// and re-checks the inequality.
AuditSummary audit_lemma1(int n_instances, std::uint64_t seed);
AuditSummary audit_lemma6(int n_instances, std::uint64_t seed);
AuditSummary audit_theorem2(const MdpSpec& mdp, const std::vector<int>& m_values, int n_redraws,
                            const TrainConfig& cfg, double delta, std::uint64_t seed);
AuditSummary audit_theorem3(int n_instances, std::uint64_t seed, const TrainConfig& cfg);
AuditSummary audit_theorem4(int n_instances, std::uint64_t seed, const TrainConfig& cfg);
AuditSummary audit_corollary2(int n_instances, std::uint64_t seed, const TrainConfig& cfg);
AuditSummary audit_proposition1(int n_instances, std::uint64_t seed);
AuditSummary audit_theorem5(int n_instances, std::uint64_t seed);
AuditSummary audit_corollary4(int n_instances, std::uint64_t seed);
AuditSummary audit_state_visitation(int n_instances, std::uint64_t seed, const TrainConfig& cfg);

}  // namespace milo
