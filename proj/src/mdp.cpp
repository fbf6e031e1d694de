#include "milo/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace milo {

namespace {

constexpr double kRowSumTol = 1e-12;

void check_distribution(const Eigen::VectorXd& v, const char* what, double tol) {
    if ((v.array() < -tol).any()) {
        throw std::invalid_argument(std::string(what) + ": negative entries");
    }
    if (std::abs(v.sum() - 1.0) > tol) {
        throw std::invalid_argument(std::string(what) + ": does not sum to 1");
    }
}

// Clamps the tiny negative entries a linear solve can leave behind and
// renormalizes. Anything below -1e-9 is a genuine bug, not roundoff.
Eigen::VectorXd sanitize_distribution(Eigen::VectorXd v, const char* what) {
    if ((v.array() < -1e-9).any()) {
        throw std::runtime_error(std::string(what) + ": solver produced negative mass");
    }
    v = v.cwiseMax(0.0);
    const double total = v.sum();
    if (!(total > 0.0)) {
        throw std::runtime_error(std::string(what) + ": zero total mass");
    }
    return v / total;
}

}  // namespace

MdpSpec::MdpSpec(int n_states, int n_actions, std::vector<Eigen::MatrixXd> transition,
                 Eigen::MatrixXd reward, Eigen::VectorXd init_dist, double gamma)
    : n_states_(n_states),
      n_actions_(n_actions),
      transition_(std::move(transition)),
      reward_(std::move(reward)),
      init_dist_(std::move(init_dist)),
      gamma_(gamma) {
    if (n_states_ <= 0 || n_actions_ <= 0) {
        throw std::invalid_argument("MdpSpec: state and action counts must be positive");
    }
    if (!(gamma_ > 0.0 && gamma_ < 1.0)) {
        throw std::invalid_argument("MdpSpec: gamma must lie in (0, 1)");
    }
    if (static_cast<int>(transition_.size()) != n_actions_) {
        throw std::invalid_argument("MdpSpec: transition tensor has wrong action count");
    }
    for (const auto& m : transition_) {
        if (m.rows() != n_states_ || m.cols() != n_states_) {
            throw std::invalid_argument("MdpSpec: transition matrix has wrong shape");
        }
        for (int s = 0; s < n_states_; ++s) {
            if ((m.row(s).array() < -kRowSumTol).any() ||
                std::abs(m.row(s).sum() - 1.0) > kRowSumTol) {
                throw std::invalid_argument("MdpSpec: transition row is not a distribution");
            }
        }
    }
    if (reward_.rows() != n_states_ || reward_.cols() != n_actions_) {
        throw std::invalid_argument("MdpSpec: reward table has wrong shape");
    }
    if ((reward_.array() < 0.0).any()) {
        throw std::invalid_argument("MdpSpec: rewards must be nonnegative");
    }
    if (init_dist_.size() != n_states_) {
        throw std::invalid_argument("MdpSpec: init_dist has wrong length");
    }
    check_distribution(init_dist_, "MdpSpec init_dist", kRowSumTol);
    r_max_ = reward_.maxCoeff();
}

MdpSpec MdpSpec::with_reward(Eigen::MatrixXd reward) const {
    return MdpSpec(n_states_, n_actions_, transition_, std::move(reward), init_dist_, gamma_);
}

MdpSpec MdpSpec::with_transition(std::vector<Eigen::MatrixXd> transition) const {
    return MdpSpec(n_states_, n_actions_, std::move(transition), reward_, init_dist_, gamma_);
}

nlohmann::json MdpSpec::to_json() const {
    nlohmann::json j;
    j["n_states"] = n_states_;
    j["n_actions"] = n_actions_;
    j["gamma"] = gamma_;
    auto trans = nlohmann::json::array();
    for (int s = 0; s < n_states_; ++s) {
        auto per_action = nlohmann::json::array();
        for (int a = 0; a < n_actions_; ++a) {
            auto row = nlohmann::json::array();
            for (int sn = 0; sn < n_states_; ++sn) row.push_back(transition_[a](s, sn));
            per_action.push_back(std::move(row));
        }
        trans.push_back(std::move(per_action));
    }
    j["transition"] = std::move(trans);
    auto rew = nlohmann::json::array();
    for (int s = 0; s < n_states_; ++s) {
        auto row = nlohmann::json::array();
        for (int a = 0; a < n_actions_; ++a) row.push_back(reward_(s, a));
        rew.push_back(std::move(row));
    }
    j["reward"] = std::move(rew);
    auto d0 = nlohmann::json::array();
    for (int s = 0; s < n_states_; ++s) d0.push_back(init_dist_[s]);
    j["init_dist"] = std::move(d0);
    return j;
}

MdpSpec MdpSpec::from_json(const nlohmann::json& j) {
    const int ns = j.at("n_states").get<int>();
    const int na = j.at("n_actions").get<int>();
    const double gamma = j.at("gamma").get<double>();
    std::vector<Eigen::MatrixXd> trans(na, Eigen::MatrixXd::Zero(ns, ns));
    const auto& jt = j.at("transition");
    if (static_cast<int>(jt.size()) != ns) {
        throw std::invalid_argument("MdpSpec JSON: transition tensor has wrong state count");
    }
    for (int s = 0; s < ns; ++s) {
        for (int a = 0; a < na; ++a) {
            const auto& row = jt.at(s).at(a);
            for (int sn = 0; sn < ns; ++sn) trans[a](s, sn) = row.at(sn).get<double>();
        }
    }
    Eigen::MatrixXd rew(ns, na);
    for (int s = 0; s < ns; ++s) {
        for (int a = 0; a < na; ++a) rew(s, a) = j.at("reward").at(s).at(a).get<double>();
    }
    Eigen::VectorXd d0(ns);
    for (int s = 0; s < ns; ++s) d0[s] = j.at("init_dist").at(s).get<double>();
    return MdpSpec(ns, na, std::move(trans), std::move(rew), std::move(d0), gamma);
}

TabularPolicy::TabularPolicy(Eigen::MatrixXd probs) : probs_(std::move(probs)) {
    if (probs_.rows() <= 0 || probs_.cols() <= 0) {
        throw std::invalid_argument("TabularPolicy: empty matrix");
    }
    for (int s = 0; s < probs_.rows(); ++s) {
        if ((probs_.row(s).array() < -kRowSumTol).any() ||
            std::abs(probs_.row(s).sum() - 1.0) > kRowSumTol) {
            throw std::invalid_argument("TabularPolicy: row is not a distribution");
        }
    }
}

TabularPolicy TabularPolicy::uniform(int n_states, int n_actions) {
    return TabularPolicy(Eigen::MatrixXd::Constant(n_states, n_actions, 1.0 / n_actions));
}

TabularPolicy TabularPolicy::deterministic(const std::vector<int>& actions, int n_actions) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(static_cast<int>(actions.size()), n_actions);
    for (int s = 0; s < static_cast<int>(actions.size()); ++s) {
        if (actions[s] < 0 || actions[s] >= n_actions) {
            throw std::invalid_argument("TabularPolicy: action index out of range");
        }
        p(s, actions[s]) = 1.0;
    }
    return TabularPolicy(std::move(p));
}

int TabularPolicy::sample_action(int s, Rng& rng) const {
    return rng.categorical(probs_.row(s).transpose());
}

nlohmann::json TabularPolicy::to_json() const {
    auto rows = nlohmann::json::array();
    for (int s = 0; s < probs_.rows(); ++s) {
        auto row = nlohmann::json::array();
        for (int a = 0; a < probs_.cols(); ++a) row.push_back(probs_(s, a));
        rows.push_back(std::move(row));
    }
    return rows;
}

TabularPolicy TabularPolicy::from_json(const nlohmann::json& j) {
    const int ns = static_cast<int>(j.size());
    const int na = static_cast<int>(j.at(0).size());
    Eigen::MatrixXd p(ns, na);
    for (int s = 0; s < ns; ++s) {
        for (int a = 0; a < na; ++a) p(s, a) = j.at(s).at(a).get<double>();
    }
    return TabularPolicy(std::move(p));
}

Occupancy::Occupancy(OccKind k, Eigen::VectorXd v) : kind(k), values(std::move(v)) {
    if ((values.array() < 0.0).any() || std::abs(values.sum() - 1.0) > 1e-9) {
        throw std::invalid_argument("Occupancy: values must form a distribution");
    }
}

Eigen::MatrixXd transition_operator(const TabularPolicy& policy, const MdpSpec& mdp) {
    if (policy.n_states() != mdp.n_states() || policy.n_actions() != mdp.n_actions()) {
        throw std::invalid_argument("transition_operator: policy shape does not match MDP");
    }
    const int ns = mdp.n_states();
    Eigen::MatrixXd row_stochastic = Eigen::MatrixXd::Zero(ns, ns);
    for (int a = 0; a < mdp.n_actions(); ++a) {
        row_stochastic += policy.probs().col(a).asDiagonal() * mdp.trans_for_action(a);
    }
    return row_stochastic.transpose();
}

Occupancy occupancy(const TabularPolicy& policy, const MdpSpec& mdp, const Eigen::VectorXd& start) {
    check_distribution(start, "occupancy start", 1e-9);
    const int ns = mdp.n_states();
    const Eigen::MatrixXd p = transition_operator(policy, mdp);
    const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(ns, ns) - mdp.gamma() * p;
    Eigen::VectorXd d = system.partialPivLu().solve((1.0 - mdp.gamma()) * start);
    return Occupancy::state(sanitize_distribution(std::move(d), "occupancy"));
}

Occupancy occupancy(const TabularPolicy& policy, const MdpSpec& mdp) {
    return occupancy(policy, mdp, mdp.init_dist());
}

Occupancy occupancy_sa(const TabularPolicy& policy, const MdpSpec& mdp,
                       const Eigen::VectorXd& start) {
    return expand_to_state_action(occupancy(policy, mdp, start), policy);
}

Occupancy occupancy_sa(const TabularPolicy& policy, const MdpSpec& mdp) {
    return occupancy_sa(policy, mdp, mdp.init_dist());
}

Occupancy occupancy_truncated(const TabularPolicy& policy, const MdpSpec& mdp,
                              const Eigen::VectorXd& start, int horizon) {
    if (horizon < 1) throw std::invalid_argument("occupancy_truncated: horizon must be >= 1");
    check_distribution(start, "occupancy start", 1e-9);
    const Eigen::MatrixXd p = transition_operator(policy, mdp);
    Eigen::VectorXd current = start;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(mdp.n_states());
    double w = 1.0;
    for (int t = 0; t < horizon; ++t) {
        acc += w * current;
        if (t + 1 < horizon) {
            current = p * current;
            w *= mdp.gamma();
        }
    }
    return Occupancy::state(sanitize_distribution(std::move(acc), "occupancy_truncated"));
}

Occupancy occupancy_sa_truncated(const TabularPolicy& policy, const MdpSpec& mdp,
                                 const Eigen::VectorXd& start, int horizon) {
    return expand_to_state_action(occupancy_truncated(policy, mdp, start, horizon), policy);
}

Occupancy expand_to_state_action(const Occupancy& occ, const TabularPolicy& policy) {
    if (occ.kind == OccKind::StateAction) return occ;
    const int ns = policy.n_states();
    const int na = policy.n_actions();
    Eigen::VectorXd p(ns * na);
    for (int s = 0; s < ns; ++s) {
        for (int a = 0; a < na; ++a) p[s * na + a] = occ.values[s] * policy.prob(s, a);
    }
    return Occupancy::state_action(std::move(p));
}

Occupancy marginal_state(const Occupancy& occ, int n_states, int n_actions) {
    if (occ.kind == OccKind::State) return occ;
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n_states);
    for (int s = 0; s < n_states; ++s) {
        for (int a = 0; a < n_actions; ++a) d[s] += occ.values[s * n_actions + a];
    }
    return Occupancy::state(std::move(d));
}

double value(const TabularPolicy& policy, const MdpSpec& mdp, const Eigen::MatrixXd& reward) {
    if (reward.rows() != mdp.n_states() || reward.cols() != mdp.n_actions()) {
        throw std::invalid_argument("value: reward table has wrong shape");
    }
    const Occupancy p = occupancy_sa(policy, mdp);
    double total = 0.0;
    for (int s = 0; s < mdp.n_states(); ++s) {
        for (int a = 0; a < mdp.n_actions(); ++a) {
            total += p.values[s * mdp.n_actions() + a] * reward(s, a);
        }
    }
    return total / (1.0 - mdp.gamma());
}

double value(const TabularPolicy& policy, const MdpSpec& mdp) {
    return value(policy, mdp, mdp.reward());
}

Eigen::VectorXd policy_state_values(const TabularPolicy& policy, const MdpSpec& mdp,
                                    const Eigen::MatrixXd& reward) {
    const int ns = mdp.n_states();
    Eigen::VectorXd r_pi = Eigen::VectorXd::Zero(ns);
    for (int s = 0; s < ns; ++s) {
        for (int a = 0; a < mdp.n_actions(); ++a) r_pi[s] += policy.prob(s, a) * reward(s, a);
    }
    // row-stochastic operator acts on value functions from the left
    const Eigen::MatrixXd p_row = transition_operator(policy, mdp).transpose();
    const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(ns, ns) - mdp.gamma() * p_row;
    return system.partialPivLu().solve(r_pi);
}

Eigen::MatrixXd policy_q_values(const TabularPolicy& policy, const MdpSpec& mdp,
                                const Eigen::MatrixXd& reward) {
    const Eigen::VectorXd v = policy_state_values(policy, mdp, reward);
    Eigen::MatrixXd q(mdp.n_states(), mdp.n_actions());
    for (int a = 0; a < mdp.n_actions(); ++a) {
        q.col(a) = reward.col(a) + mdp.gamma() * (mdp.trans_for_action(a) * v);
    }
    return q;
}

double l1_distance(const Occupancy& x, const Occupancy& y) {
    if (x.kind != y.kind) throw std::invalid_argument("l1_distance: occupancy kinds differ");
    if (x.values.size() != y.values.size()) {
        throw std::invalid_argument("l1_distance: dimensions differ");
    }
    return (x.values - y.values).cwiseAbs().sum();
}

Trajectory rollout(const TabularPolicy& policy, const MdpSpec& mdp, const Eigen::VectorXd& start,
                   int horizon, Rng& rng) {
    if (horizon < 1) throw std::invalid_argument("rollout: horizon must be >= 1");
    check_distribution(start, "rollout start", 1e-9);
    Trajectory traj;
    traj.start_state = rng.categorical(start);
    int s = traj.start_state;
    traj.steps.reserve(horizon);
    for (int t = 0; t < horizon; ++t) {
        const int a = policy.sample_action(s, rng);
        const int sn = rng.categorical(mdp.trans_row(s, a).transpose());
        traj.steps.push_back({s, a, sn});
        s = sn;
    }
    return traj;
}

int effective_horizon(double gamma, double tail_mass) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("effective_horizon: bad gamma");
    if (!(tail_mass > 0.0 && tail_mass < 1.0)) {
        throw std::invalid_argument("effective_horizon: bad tail mass");
    }
    return std::max(1, static_cast<int>(std::ceil(std::log(tail_mass) / std::log(gamma))));
}

MdpSpec random_mdp(int n_states, int n_actions, double gamma, Rng& rng, double r_max,
                   int support, bool state_rewards) {
    std::vector<Eigen::MatrixXd> trans(n_actions, Eigen::MatrixXd::Zero(n_states, n_states));
    for (int s = 0; s < n_states; ++s) {
        for (int a = 0; a < n_actions; ++a) {
            if (support <= 0 || support >= n_states) {
                trans[a].row(s) = rng.dirichlet(1.0, n_states).transpose();
            } else {
                // random successor subset, Dirichlet weights on it
                std::vector<int> idx(n_states);
                for (int i = 0; i < n_states; ++i) idx[i] = i;
                for (int i = 0; i < support; ++i) {
                    const int j = i + rng.uniform_int(n_states - i);
                    std::swap(idx[i], idx[j]);
                }
                const Eigen::VectorXd w = rng.dirichlet(1.0, support);
                for (int i = 0; i < support; ++i) trans[a](s, idx[i]) = w[i];
            }
        }
    }
    Eigen::MatrixXd reward(n_states, n_actions);
    for (int s = 0; s < n_states; ++s) {
        const double state_r = r_max * rng.uniform();
        for (int a = 0; a < n_actions; ++a) {
            reward(s, a) = state_rewards ? state_r : r_max * rng.uniform();
        }
    }
    const Eigen::VectorXd d0 = rng.dirichlet(1.0, n_states);
    return MdpSpec(n_states, n_actions, std::move(trans), std::move(reward), d0, gamma);
}

TabularPolicy random_policy(int n_states, int n_actions, Rng& rng) {
    Eigen::MatrixXd p(n_states, n_actions);
    for (int s = 0; s < n_states; ++s) p.row(s) = rng.dirichlet(1.0, n_actions).transpose();
    return TabularPolicy(std::move(p));
}

std::vector<TabularPolicy> all_deterministic_policies(int n_states, int n_actions,
                                                      std::uint64_t limit) {
    std::uint64_t count = 1;
    for (int s = 0; s < n_states; ++s) {
        count *= static_cast<std::uint64_t>(n_actions);
        if (count > limit) {
            throw std::invalid_argument("all_deterministic_policies: A^S exceeds limit");
        }
    }
    std::vector<TabularPolicy> out;
    out.reserve(count);
    std::vector<int> actions(n_states, 0);
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint64_t code = i;
        for (int s = 0; s < n_states; ++s) {
            actions[s] = static_cast<int>(code % n_actions);
            code /= n_actions;
        }
        out.push_back(TabularPolicy::deterministic(actions, n_actions));
    }
    return out;
}

}  // namespace milo
