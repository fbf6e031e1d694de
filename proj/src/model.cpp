#include "milo/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace milo {

namespace {
// below this, occupancy mass is treated as a structural zero when forming
// coverage ratios
constexpr double kSupportEps = 1e-13;
}  // namespace

LearnedModel::LearnedModel(std::vector<Eigen::MatrixXd> transition, Eigen::MatrixXd visit_counts,
                           double pseudocount, std::vector<std::vector<bool>> row_defined)
    : n_states_(static_cast<int>(visit_counts.rows())),
      n_actions_(static_cast<int>(visit_counts.cols())),
      transition_(std::move(transition)),
      visit_counts_(std::move(visit_counts)),
      pseudocount_(pseudocount),
      row_defined_(std::move(row_defined)) {
    if (static_cast<int>(transition_.size()) != n_actions_) {
        throw std::invalid_argument("LearnedModel: transition tensor shape mismatch");
    }
    for (const auto& m : transition_) {
        if (m.rows() != n_states_ || m.cols() != n_states_) {
            throw std::invalid_argument("LearnedModel: transition matrix shape mismatch");
        }
    }
}

bool LearnedModel::fully_defined() const {
    for (const auto& row : row_defined_) {
        for (const bool d : row) {
            if (!d) return false;
        }
    }
    return true;
}

MdpSpec LearnedModel::to_mdp(const MdpSpec& like) const {
    if (like.n_states() != n_states_ || like.n_actions() != n_actions_) {
        throw std::invalid_argument("LearnedModel::to_mdp: shape mismatch");
    }
    if (!fully_defined()) {
        throw std::runtime_error(
            "LearnedModel::to_mdp: model has unvisited rows with pseudocount 0");
    }
    return like.with_transition(transition_);
}

nlohmann::json LearnedModel::to_json() const {
    nlohmann::json j;
    j["n_states"] = n_states_;
    j["n_actions"] = n_actions_;
    j["pseudocount"] = pseudocount_;
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
    auto counts = nlohmann::json::array();
    for (int s = 0; s < n_states_; ++s) {
        auto row = nlohmann::json::array();
        for (int a = 0; a < n_actions_; ++a) row.push_back(visit_counts_(s, a));
        counts.push_back(std::move(row));
    }
    j["visit_counts"] = std::move(counts);
    return j;
}

LearnedModel LearnedModel::from_json(const nlohmann::json& j) {
    const int ns = j.at("n_states").get<int>();
    const int na = j.at("n_actions").get<int>();
    const double pseudocount = j.at("pseudocount").get<double>();
    std::vector<Eigen::MatrixXd> trans(na, Eigen::MatrixXd::Zero(ns, ns));
    for (int s = 0; s < ns; ++s) {
        for (int a = 0; a < na; ++a) {
            const auto& row = j.at("transition").at(s).at(a);
            for (int sn = 0; sn < ns; ++sn) trans[a](s, sn) = row.at(sn).get<double>();
        }
    }
    Eigen::MatrixXd counts(ns, na);
    for (int s = 0; s < ns; ++s) {
        for (int a = 0; a < na; ++a) counts(s, a) = j.at("visit_counts").at(s).at(a).get<double>();
    }
    std::vector<std::vector<bool>> defined(ns, std::vector<bool>(na));
    for (int s = 0; s < ns; ++s) {
        for (int a = 0; a < na; ++a) defined[s][a] = pseudocount > 0.0 || counts(s, a) > 0.0;
    }
    return LearnedModel(std::move(trans), std::move(counts), pseudocount, std::move(defined));
}

namespace {

LearnedModel fit_from_counts(const std::vector<Eigen::MatrixXd>& counts3,
                             const Eigen::MatrixXd& visit_counts, int n_states, int n_actions,
                             double pseudocount) {
    std::vector<Eigen::MatrixXd> trans(n_actions, Eigen::MatrixXd::Zero(n_states, n_states));
    std::vector<std::vector<bool>> defined(n_states, std::vector<bool>(n_actions, true));
    for (int s = 0; s < n_states; ++s) {
        for (int a = 0; a < n_actions; ++a) {
            const double denom = visit_counts(s, a) + pseudocount * n_states;
            if (denom > 0.0) {
                trans[a].row(s) =
                    (counts3[a].row(s).array() + pseudocount) / denom;
            } else {
                // flagged: uniform placeholder, unusable for planning
                trans[a].row(s).setConstant(1.0 / n_states);
                defined[s][a] = false;
            }
        }
    }
    return LearnedModel(std::move(trans), visit_counts, pseudocount, std::move(defined));
}

}  // namespace

LearnedModel fit_model(const TransitionDataset& data, int n_states, int n_actions,
                       double pseudocount) {
    if (pseudocount < 0.0) throw std::invalid_argument("fit_model: pseudocount must be >= 0");
    std::vector<Eigen::MatrixXd> counts3(n_actions, Eigen::MatrixXd::Zero(n_states, n_states));
    Eigen::MatrixXd visits = Eigen::MatrixXd::Zero(n_states, n_actions);
    for (const auto& sample : data.samples) {
        if (sample.s < 0 || sample.s >= n_states || sample.a < 0 || sample.a >= n_actions ||
            sample.s_next < 0 || sample.s_next >= n_states) {
            throw std::invalid_argument("fit_model: sample index out of range");
        }
        counts3[sample.a](sample.s, sample.s_next) += 1.0;
        visits(sample.s, sample.a) += 1.0;
    }
    return fit_from_counts(counts3, visits, n_states, n_actions, pseudocount);
}

nlohmann::json ModelEnsemble::to_json() const {
    nlohmann::json j;
    j["k"] = k();
    auto arr = nlohmann::json::array();
    for (const auto& m : members) arr.push_back(m.to_json());
    j["members"] = std::move(arr);
    j["point"] = point.to_json();
    return j;
}

ModelEnsemble ModelEnsemble::from_json(const nlohmann::json& j) {
    std::vector<LearnedModel> members;
    for (const auto& jm : j.at("members")) members.push_back(LearnedModel::from_json(jm));
    if (members.size() < 2) throw std::invalid_argument("ModelEnsemble: need k >= 2");
    LearnedModel point = LearnedModel::from_json(j.at("point"));
    return ModelEnsemble{std::move(members), std::move(point)};
}

ModelEnsemble fit_ensemble(const TransitionDataset& data, int n_states, int n_actions, int k,
                           double pseudocount, Rng& rng) {
    if (k < 2) throw std::invalid_argument("fit_ensemble: need k >= 2");
    if (data.size() == 0) throw std::invalid_argument("fit_ensemble: empty dataset");
    const int n = data.size();
    std::vector<LearnedModel> members;
    members.reserve(k);
    for (int i = 0; i < k; ++i) {
        TransitionDataset resample;
        resample.generator_tag = data.generator_tag;
        resample.samples.reserve(n);
        for (int j = 0; j < n; ++j) {
            resample.samples.push_back(data.samples[rng.uniform_int(n)]);
        }
        members.push_back(fit_model(resample, n_states, n_actions, pseudocount));
    }
    // point estimate: average of member rows; counts from the full dataset
    std::vector<Eigen::MatrixXd> avg(n_actions, Eigen::MatrixXd::Zero(n_states, n_states));
    for (const auto& m : members) {
        for (int a = 0; a < n_actions; ++a) avg[a] += m.transition()[a];
    }
    for (int a = 0; a < n_actions; ++a) avg[a] /= static_cast<double>(k);
    const LearnedModel full_fit = fit_model(data, n_states, n_actions, pseudocount);
    std::vector<std::vector<bool>> defined(n_states, std::vector<bool>(n_actions));
    for (int s = 0; s < n_states; ++s) {
        for (int a = 0; a < n_actions; ++a) {
            bool all_defined = true;
            for (const auto& m : members) all_defined = all_defined && m.row_defined(s, a);
            defined[s][a] = all_defined;
        }
    }
    LearnedModel point(std::move(avg), full_fit.visit_counts(), pseudocount, std::move(defined));
    return ModelEnsemble{std::move(members), std::move(point)};
}

Eigen::MatrixXd transition_gap(const MdpSpec& x, const MdpSpec& y) {
    if (x.n_states() != y.n_states() || x.n_actions() != y.n_actions()) {
        throw std::invalid_argument("transition_gap: shape mismatch");
    }
    Eigen::MatrixXd gap(x.n_states(), x.n_actions());
    for (int s = 0; s < x.n_states(); ++s) {
        for (int a = 0; a < x.n_actions(); ++a) {
            gap(s, a) = (x.trans_row(s, a) - y.trans_row(s, a)).cwiseAbs().sum();
        }
    }
    return gap;
}

Eigen::MatrixXd transition_gap(const LearnedModel& x, const MdpSpec& y) {
    if (x.n_states() != y.n_states() || x.n_actions() != y.n_actions()) {
        throw std::invalid_argument("transition_gap: shape mismatch");
    }
    Eigen::MatrixXd gap(x.n_states(), x.n_actions());
    for (int s = 0; s < x.n_states(); ++s) {
        for (int a = 0; a < x.n_actions(); ++a) {
            gap(s, a) = (x.trans_row(s, a) - y.trans_row(s, a)).cwiseAbs().sum();
        }
    }
    return gap;
}

namespace {

double weighted_gap(const Eigen::MatrixXd& gap, const Occupancy& weight) {
    if (weight.kind != OccKind::StateAction) {
        throw std::invalid_argument("model_error: weight must be a state-action occupancy");
    }
    const int na = static_cast<int>(gap.cols());
    if (weight.values.size() != gap.rows() * gap.cols()) {
        throw std::invalid_argument("model_error: weight dimension mismatch");
    }
    double total = 0.0;
    for (int s = 0; s < gap.rows(); ++s) {
        for (int a = 0; a < na; ++a) total += weight.values[s * na + a] * gap(s, a);
    }
    return total;
}

}  // namespace

double model_error(const LearnedModel& tl, const MdpSpec& tt, const Occupancy& weight) {
    return weighted_gap(transition_gap(tl, tt), weight);
}

double model_error(const MdpSpec& tl, const MdpSpec& tt, const Occupancy& weight) {
    return weighted_gap(transition_gap(tl, tt), weight);
}

double uncertainty_hat(const ModelEnsemble& ens, int s, int a, UncertaintyStrategy strategy) {
    if (s < 0 || s >= ens.point.n_states() || a < 0 || a >= ens.point.n_actions()) {
        throw std::invalid_argument("uncertainty_hat: index out of range");
    }
    double worst = 0.0;
    if (strategy == UncertaintyStrategy::MaxPairwiseL1) {
        for (std::size_t i = 0; i < ens.members.size(); ++i) {
            for (std::size_t j = i + 1; j < ens.members.size(); ++j) {
                const double d = (ens.members[i].trans_row(s, a) - ens.members[j].trans_row(s, a))
                                     .cwiseAbs()
                                     .sum();
                worst = std::max(worst, d);
            }
        }
    } else {
        for (const auto& m : ens.members) {
            const double d = (m.trans_row(s, a) - ens.point.trans_row(s, a)).cwiseAbs().sum();
            worst = std::max(worst, d);
        }
    }
    return worst;
}

Eigen::MatrixXd uncertainty_table(const ModelEnsemble& ens, UncertaintyStrategy strategy) {
    Eigen::MatrixXd table(ens.point.n_states(), ens.point.n_actions());
    for (int s = 0; s < table.rows(); ++s) {
        for (int a = 0; a < table.cols(); ++a) table(s, a) = uncertainty_hat(ens, s, a, strategy);
    }
    return table;
}

double policy_uncertainty(const TabularPolicy& policy, const MdpSpec& tl_as_mdp, const MdpSpec& tt,
                          const Occupancy& behavior_weight) {
    return policy_uncertainty(policy, tl_as_mdp, tt, behavior_weight, tt.init_dist());
}

double policy_uncertainty(const TabularPolicy& policy, const MdpSpec& tl_as_mdp, const MdpSpec& tt,
                          const Occupancy& behavior_weight, const Eigen::VectorXd& start) {
    const Eigen::MatrixXd gap = transition_gap(tl_as_mdp, tt);
    const Occupancy p_pi_tl = occupancy_sa(policy, tl_as_mdp, start);
    return std::abs(weighted_gap(gap, p_pi_tl) - weighted_gap(gap, behavior_weight));
}

namespace {

// max ratio of one policy's occupancy against the behavior distribution
double ratio_for(const TabularPolicy& policy, const MdpSpec& tl, const Occupancy& behavior_p,
                 const Eigen::VectorXd& start, bool* infinite) {
    const Occupancy nu = occupancy_sa(policy, tl, start);
    double worst = 0.0;
    for (int i = 0; i < nu.values.size(); ++i) {
        if (nu.values[i] <= kSupportEps) continue;
        if (behavior_p.values[i] <= kSupportEps) {
            *infinite = true;
            return std::numeric_limits<double>::infinity();
        }
        worst = std::max(worst, nu.values[i] / behavior_p.values[i]);
    }
    return worst;
}

}  // namespace

ConcentrabilityResult concentrability(const std::vector<TabularPolicy>& policy_set,
                                      const MdpSpec& tl, const Occupancy& behavior_p,
                                      const Eigen::VectorXd& start) {
    if (behavior_p.kind != OccKind::StateAction) {
        throw std::invalid_argument("concentrability: behavior weight must be state-action");
    }
    if (policy_set.empty()) throw std::invalid_argument("concentrability: empty policy set");
    ConcentrabilityResult result;
    result.value = 0.0;
    for (const auto& policy : policy_set) {
        bool infinite = false;
        const double r = ratio_for(policy, tl, behavior_p, start, &infinite);
        if (infinite) {
            result.infinite = true;
            result.value = std::numeric_limits<double>::infinity();
            return result;
        }
        result.value = std::max(result.value, r);
    }
    return result;
}

ConcentrabilityResult concentrability_sup(const MdpSpec& tl, const Occupancy& behavior_p,
                                          const Eigen::VectorXd& start, std::uint64_t enum_limit,
                                          int n_samples, Rng* rng) {
    std::uint64_t count = 1;
    bool enumerable = true;
    for (int s = 0; s < tl.n_states(); ++s) {
        count *= static_cast<std::uint64_t>(tl.n_actions());
        if (count > enum_limit) {
            enumerable = false;
            break;
        }
    }
    if (enumerable) {
        // the ratio is linear in the occupancy for each fixed (s,a), so the
        // sup over Pi is attained at a vertex of the occupancy polytope,
        // i.e. at a deterministic policy
        return concentrability(all_deterministic_policies(tl.n_states(), tl.n_actions()), tl,
                               behavior_p, start);
    }
    if (rng == nullptr) {
        throw std::invalid_argument("concentrability_sup: sampling mode needs an rng");
    }
    ConcentrabilityResult result;
    result.exact = false;
    result.value = 0.0;
    const int ns = tl.n_states();
    const int na = tl.n_actions();
    for (int i = 0; i < n_samples; ++i) {
        std::vector<int> actions(ns);
        for (int s = 0; s < ns; ++s) actions[s] = rng->uniform_int(na);
        bool infinite = false;
        double best = ratio_for(TabularPolicy::deterministic(actions, na), tl, behavior_p, start,
                                &infinite);
        // greedy single-state improvement until no swap helps
        bool improved = !infinite;
        while (improved && !infinite) {
            improved = false;
            for (int s = 0; s < ns && !infinite; ++s) {
                int keep = actions[s];
                for (int a = 0; a < na; ++a) {
                    if (a == keep) continue;
                    actions[s] = a;
                    const double r = ratio_for(TabularPolicy::deterministic(actions, na), tl,
                                               behavior_p, start, &infinite);
                    if (infinite || r > best) {
                        best = r;
                        keep = a;
                        improved = true;
                    }
                }
                actions[s] = keep;
            }
        }
        if (infinite) {
            result.infinite = true;
            result.value = std::numeric_limits<double>::infinity();
            return result;
        }
        result.value = std::max(result.value, best);
    }
    return result;
}

Trajectory rollout_ensemble(const TabularPolicy& policy, const ModelEnsemble& ens,
                            const Eigen::VectorXd& start, int horizon, Rng& rng) {
    if (horizon < 1) throw std::invalid_argument("rollout_ensemble: horizon must be >= 1");
    Trajectory traj;
    traj.start_state = rng.categorical(start);
    int s = traj.start_state;
    traj.steps.reserve(horizon);
    for (int t = 0; t < horizon; ++t) {
        const int a = policy.sample_action(s, rng);
        const int member = rng.uniform_int(ens.k());
        const int sn = rng.categorical(ens.members[member].trans_row(s, a).transpose());
        traj.steps.push_back({s, a, sn});
        s = sn;
    }
    return traj;
}

}  // namespace milo
