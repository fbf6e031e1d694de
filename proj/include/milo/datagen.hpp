#pragma once

#include <optional>
#include <string>
#include <vector>

#include "milo/mdp.hpp"

namespace milo {

enum class GeneratorTag { Expert, BehaviorWide, BehaviorNarrow, Custom };

std::string to_string(GeneratorTag tag);
GeneratorTag generator_tag_from_string(const std::string& s);

struct TransitionSample {
    int s;
    int a;
    int s_next;
    std::optional<double> r;
};

/// Finite multiset of (s, a, s'[, r]) samples plus generator metadata.
struct TransitionDataset {
    std::vector<TransitionSample> samples;
    GeneratorTag generator_tag = GeneratorTag::Custom;
    std::string source_policy_id;
    std::uint64_t seed = 0;
    /// Per-member draw counts when sampled from a mixture (empty otherwise).
    std::vector<int> member_counts;

    int size() const { return static_cast<int>(samples.size()); }

    /// JSON-lines: a header record followed by one record per sample.
    std::string to_jsonl() const;
    static TransitionDataset from_jsonl(const std::string& text);
};

/// Deterministic optimal policy by value iteration (Bellman residual 1e-10,
/// ties broken toward the lowest action index).
TabularPolicy solve_expert(const MdpSpec& mdp);

/// Optimal Q table, from the same value iteration.
Eigen::MatrixXd optimal_q_values(const MdpSpec& mdp);

enum class BehaviorProfile { Wide, Narrow };

/// Mixture of policies with sampling weights.
struct BehaviorMixture {
    std::vector<TabularPolicy> members;
    Eigen::VectorXd weights;

    /// Exact blended state-action occupancy sum_k w_k p^{pi_k}.
    Occupancy occupancy_sa(const MdpSpec& mdp) const;
    /// Value of the blend, sum_k w_k V^{pi_k}.
    double value(const MdpSpec& mdp) const;
};

struct WideProfileConfig {
    int levels = 7;           // member count including the tau=0 random policy
    double weight_decay = 0.9;  // geometric decay toward better members
    double top_score = 0.5;     // normalized-score target of the best member
    double score_exponent = 0.25;  // member k targets top_score * (k/(L-1))^exp
};

/// Narrow: a single uniform-random policy. Wide: a pyramidal mixture of
/// softmax(tau Q*) policies whose best member reaches roughly half the
/// expert's normalized score, with geometrically decaying weights toward
/// the better members.
BehaviorMixture make_behavior_policy(const MdpSpec& mdp, BehaviorProfile profile, Rng& rng,
                                     const WideProfileConfig& cfg = {});

/// Softmax(tau * Q*) policy with the temperature found by bisection so its
/// normalized score lands at `target_score`.
TabularPolicy softmax_policy_at_score(const MdpSpec& mdp, const Eigen::MatrixXd& q_star,
                                      double target_score);

/// n i.i.d. (s, a) pairs from the exact discounted occupancy of the policy,
/// completed with s' ~ T(.|s,a) and r = r(s,a).
TransitionDataset sample_dataset(const TabularPolicy& policy, const MdpSpec& mdp, int n, Rng& rng,
                                 GeneratorTag tag = GeneratorTag::Custom,
                                 bool include_reward = true);

/// Mixture variant: each sample first draws a member by weight.
TransitionDataset sample_dataset(const BehaviorMixture& mixture, const MdpSpec& mdp, int n,
                                 Rng& rng, GeneratorTag tag, bool include_reward = true);

/// Trajectory mode: contiguous rollouts from d0, each of the effective
/// horizon ceil(1/(1-gamma)) steps, concatenated and truncated to n samples.
TransitionDataset sample_dataset_trajectories(const TabularPolicy& policy, const MdpSpec& mdp,
                                              int n, Rng& rng,
                                              GeneratorTag tag = GeneratorTag::Custom,
                                              bool include_reward = true);

}  // namespace milo
