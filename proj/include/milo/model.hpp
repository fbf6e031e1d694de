#pragma once

#include <vector>

#include "milo/datagen.hpp"
#include "milo/mdp.hpp"

namespace milo {

/// Count-based learned dynamics. Rows are
/// (count(s,a,s') + pseudocount) / (n(s,a) + pseudocount * S); with
/// pseudocount 0 an unvisited (s,a) is left flagged and any attempt to plan
/// through it is an error.
class LearnedModel {
  public:
    LearnedModel(std::vector<Eigen::MatrixXd> transition, Eigen::MatrixXd visit_counts,
                 double pseudocount, std::vector<std::vector<bool>> row_defined);

    int n_states() const { return n_states_; }
    int n_actions() const { return n_actions_; }
    double pseudocount() const { return pseudocount_; }
    const Eigen::MatrixXd& visit_counts() const { return visit_counts_; }
    const std::vector<Eigen::MatrixXd>& transition() const { return transition_; }
    Eigen::RowVectorXd trans_row(int s, int a) const { return transition_[a].row(s); }

    bool row_defined(int s, int a) const { return row_defined_[s][a]; }
    bool fully_defined() const;

    /// Plants these dynamics into the reward / start / discount structure of
    /// `like`. Throws if any row is flagged undefined.
    MdpSpec to_mdp(const MdpSpec& like) const;

    nlohmann::json to_json() const;
    static LearnedModel from_json(const nlohmann::json& j);

  private:
    int n_states_;
    int n_actions_;
    std::vector<Eigen::MatrixXd> transition_;
    Eigen::MatrixXd visit_counts_;
    double pseudocount_;
    std::vector<std::vector<bool>> row_defined_;
};

LearnedModel fit_model(const TransitionDataset& data, int n_states, int n_actions,
                       double pseudocount);

/// How ensemble disagreement is turned into a scalar per (s,a).
enum class UncertaintyStrategy { MaxPairwiseL1, MaxDistanceToMean };

/// Bootstrap ensemble of learned models; `point` averages the member rows.
struct ModelEnsemble {
    std::vector<LearnedModel> members;
    LearnedModel point;

    int k() const { return static_cast<int>(members.size()); }

    nlohmann::json to_json() const;
    static ModelEnsemble from_json(const nlohmann::json& j);
};

/// K models fit on bootstrap resamples (with replacement, original size).
ModelEnsemble fit_ensemble(const TransitionDataset& data, int n_states, int n_actions, int k,
                           double pseudocount, Rng& rng);

/// Per-(s,a) L1 gap between two transition tensors.
Eigen::MatrixXd transition_gap(const MdpSpec& x, const MdpSpec& y);
Eigen::MatrixXd transition_gap(const LearnedModel& x, const MdpSpec& y);

/// eps_T: expected per-row L1 model error under a state-action weighting.
double model_error(const LearnedModel& tl, const MdpSpec& tt, const Occupancy& weight);
double model_error(const MdpSpec& tl, const MdpSpec& tt, const Occupancy& weight);

/// Ensemble disagreement at one state-action pair, in [0, 2].
double uncertainty_hat(const ModelEnsemble& ens, int s, int a,
                       UncertaintyStrategy strategy = UncertaintyStrategy::MaxPairwiseL1);

/// Full S x A table of uncertainty_hat values.
Eigen::MatrixXd uncertainty_table(const ModelEnsemble& ens,
                                  UncertaintyStrategy strategy = UncertaintyStrategy::MaxPairwiseL1);

/// U(pi): absolute gap between the model error weighted by the policy's own
/// occupancy inside the learned dynamics and by the behavior distribution.
/// The learner occupancy starts from `start` (the recorded convention;
/// defaults to the true MDP's initial distribution).
double policy_uncertainty(const TabularPolicy& policy, const MdpSpec& tl_as_mdp,
                          const MdpSpec& tt, const Occupancy& behavior_weight);
double policy_uncertainty(const TabularPolicy& policy, const MdpSpec& tl_as_mdp,
                          const MdpSpec& tt, const Occupancy& behavior_weight,
                          const Eigen::VectorXd& start);

struct ConcentrabilityResult {
    double value = 1.0;
    bool infinite = false;
    bool exact = true;  // false when the sup was only sampled (lower bound)
};

/// C over an explicit policy set: max over policies and (s,a) of
/// p^pi_{T_l}(s,a) / behavior(s,a); a structural zero in the denominator
/// with learner mass on it yields the infinite marker.
ConcentrabilityResult concentrability(const std::vector<TabularPolicy>& policy_set,
                                      const MdpSpec& tl, const Occupancy& behavior_p,
                                      const Eigen::VectorXd& start);

/// C over all of Pi: enumerates deterministic policies when A^S fits under
/// `enum_limit`, otherwise samples random policies plus hill-climbing and
/// reports a lower bound (exact = false).
ConcentrabilityResult concentrability_sup(const MdpSpec& tl, const Occupancy& behavior_p,
                                          const Eigen::VectorXd& start,
                                          std::uint64_t enum_limit = 1000000, int n_samples = 256,
                                          Rng* rng = nullptr);

/// Rollout where each step's next state is drawn from a uniformly random
/// ensemble member.
Trajectory rollout_ensemble(const TabularPolicy& policy, const ModelEnsemble& ens,
                            const Eigen::VectorXd& start, int horizon, Rng& rng);

}  // namespace milo
