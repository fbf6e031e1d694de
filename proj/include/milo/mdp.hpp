#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "milo/rng.hpp"

namespace milo {

/// Finite discounted MDP. Transition rows, the reward table and the initial
/// distribution are validated on construction; instances are immutable
/// afterwards and safe to share across threads.
class MdpSpec {
  public:
    MdpSpec(int n_states, int n_actions, std::vector<Eigen::MatrixXd> transition,
            Eigen::MatrixXd reward, Eigen::VectorXd init_dist, double gamma);

    int n_states() const { return n_states_; }
    int n_actions() const { return n_actions_; }
    double gamma() const { return gamma_; }

    /// T(s'|s,a); per-action matrices are row-stochastic over s'.
    double trans(int s, int a, int s_next) const { return transition_[a](s, s_next); }
    const Eigen::MatrixXd& trans_for_action(int a) const { return transition_[a]; }
    Eigen::RowVectorXd trans_row(int s, int a) const { return transition_[a].row(s); }

    const Eigen::MatrixXd& reward() const { return reward_; }
    const Eigen::VectorXd& init_dist() const { return init_dist_; }
    double r_max() const { return r_max_; }

    /// Same dynamics/shape with a different reward table.
    MdpSpec with_reward(Eigen::MatrixXd reward) const;
    /// Same everything with different transition tensor (used to plant a
    /// learned model into the true MDP's reward/initial structure).
    MdpSpec with_transition(std::vector<Eigen::MatrixXd> transition) const;

    nlohmann::json to_json() const;
    static MdpSpec from_json(const nlohmann::json& j);

  private:
    int n_states_;
    int n_actions_;
    std::vector<Eigen::MatrixXd> transition_;  // [a](s, s')
    Eigen::MatrixXd reward_;                   // (s, a)
    Eigen::VectorXd init_dist_;
    double gamma_;
    double r_max_;
};

/// Row-stochastic state-conditional action distribution pi(a|s).
class TabularPolicy {
  public:
    explicit TabularPolicy(Eigen::MatrixXd probs);

    static TabularPolicy uniform(int n_states, int n_actions);
    static TabularPolicy deterministic(const std::vector<int>& actions, int n_actions);

    int n_states() const { return static_cast<int>(probs_.rows()); }
    int n_actions() const { return static_cast<int>(probs_.cols()); }
    double prob(int s, int a) const { return probs_(s, a); }
    const Eigen::MatrixXd& probs() const { return probs_; }

    int sample_action(int s, Rng& rng) const;

    nlohmann::json to_json() const;
    static TabularPolicy from_json(const nlohmann::json& j);

  private:
    Eigen::MatrixXd probs_;
};

enum class OccKind { State, StateAction };

/// Normalized discounted visitation distribution over states or
/// state-action pairs.
struct Occupancy {
    OccKind kind;
    Eigen::VectorXd values;  // length S or S*A, flat index s * A + a

    Occupancy(OccKind k, Eigen::VectorXd v);
    static Occupancy state(Eigen::VectorXd v) { return Occupancy(OccKind::State, std::move(v)); }
    static Occupancy state_action(Eigen::VectorXd v) {
        return Occupancy(OccKind::StateAction, std::move(v));
    }
};

struct TrajectoryStep {
    int state;
    int action;
    int next_state;
};

/// Chained rollout record: next_state of step t equals state of step t+1.
struct Trajectory {
    int start_state{0};
    std::vector<TrajectoryStep> steps;
};

/// Transition operator P with P(s', s) = sum_a T(s'|s,a) pi(a|s); columns
/// are distributions over next states, so P acts on state densities by
/// left multiplication.
Eigen::MatrixXd transition_operator(const TabularPolicy& policy, const MdpSpec& mdp);

/// Discounted state occupancy d = (1-gamma) (I - gamma P)^{-1} start,
/// computed by a dense linear solve.
Occupancy occupancy(const TabularPolicy& policy, const MdpSpec& mdp, const Eigen::VectorXd& start);

/// State occupancy from the MDP's own initial distribution.
Occupancy occupancy(const TabularPolicy& policy, const MdpSpec& mdp);

/// State-action occupancy p(s,a) = d(s) pi(a|s).
Occupancy occupancy_sa(const TabularPolicy& policy, const MdpSpec& mdp, const Eigen::VectorXd& start);
Occupancy occupancy_sa(const TabularPolicy& policy, const MdpSpec& mdp);

/// Normalized discounted distribution over the first `horizon` steps:
/// proportional to sum_{t<H} gamma^t P^t start. Matches `occupancy` as
/// horizon -> infinity.
Occupancy occupancy_truncated(const TabularPolicy& policy, const MdpSpec& mdp,
                              const Eigen::VectorXd& start, int horizon);
Occupancy occupancy_sa_truncated(const TabularPolicy& policy, const MdpSpec& mdp,
                                 const Eigen::VectorXd& start, int horizon);

/// Expands a state occupancy to the state-action kind under the policy;
/// passes state-action occupancies through unchanged.
Occupancy expand_to_state_action(const Occupancy& occ, const TabularPolicy& policy);

/// Marginalizes a state-action occupancy onto states.
Occupancy marginal_state(const Occupancy& occ, int n_states, int n_actions);

/// Expected discounted return V = 1/(1-gamma) sum_{s,a} p(s,a) r(s,a) under
/// the given reward table (which may differ from mdp.reward()).
double value(const TabularPolicy& policy, const MdpSpec& mdp, const Eigen::MatrixXd& reward);
double value(const TabularPolicy& policy, const MdpSpec& mdp);

/// State values and Q table of a fixed policy for an arbitrary reward
/// table, via dense policy evaluation.
Eigen::VectorXd policy_state_values(const TabularPolicy& policy, const MdpSpec& mdp,
                                    const Eigen::MatrixXd& reward);
Eigen::MatrixXd policy_q_values(const TabularPolicy& policy, const MdpSpec& mdp,
                                const Eigen::MatrixXd& reward);

/// L1 distance between two occupancies of the same kind; in [0, 2].
double l1_distance(const Occupancy& x, const Occupancy& y);

/// Samples a `horizon`-step trajectory; start state from `start`, actions
/// from the policy, next states from the dynamics.
Trajectory rollout(const TabularPolicy& policy, const MdpSpec& mdp, const Eigen::VectorXd& start,
                   int horizon, Rng& rng);

/// Horizon at which the discount tail gamma^H drops below `tail_mass`.
int effective_horizon(double gamma, double tail_mass);

/// Random MDP with Dirichlet(1) transition rows and uniform rewards in
/// [0, r_max]. `support` < n_states restricts each row to a random subset
/// of successor states (0 means dense rows); `state_rewards` ties the
/// reward to the state alone.
MdpSpec random_mdp(int n_states, int n_actions, double gamma, Rng& rng, double r_max = 1.0,
                   int support = 0, bool state_rewards = false);

/// Random row-stochastic policy (Dirichlet(1) rows).
TabularPolicy random_policy(int n_states, int n_actions, Rng& rng);

/// All A^S deterministic policies; throws if A^S exceeds `limit`.
std::vector<TabularPolicy> all_deterministic_policies(int n_states, int n_actions,
                                                      std::uint64_t limit = 1000000);

}  // namespace milo
