#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "milo/datagen.hpp"
#include "milo/envs.hpp"
#include "milo/model.hpp"

using namespace milo;

namespace {

// every (s,a,s') of a deterministic MDP exactly once
TransitionDataset exhaustive_deterministic(const MdpSpec& mdp) {
    TransitionDataset data;
    for (int s = 0; s < mdp.n_states(); ++s) {
        for (int a = 0; a < mdp.n_actions(); ++a) {
            for (int sn = 0; sn < mdp.n_states(); ++sn) {
                if (mdp.trans(s, a, sn) == 1.0) data.samples.push_back({s, a, sn, std::nullopt});
            }
        }
    }
    return data;
}

}  // namespace

TEST_CASE("fit_model recovers deterministic dynamics from one pass") {
    const MdpSpec c2 = chain2(0.9);
    const LearnedModel tl = fit_model(exhaustive_deterministic(c2), 2, 2, 0.0);
    CHECK(tl.fully_defined());
    const MdpSpec as_mdp = tl.to_mdp(c2);
    for (int a = 0; a < 2; ++a) {
        CHECK((as_mdp.trans_for_action(a) - c2.trans_for_action(a)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("fit_model flags unvisited rows at pseudocount zero, smooths otherwise") {
    const MdpSpec c2 = chain2(0.9);
    TransitionDataset data;
    data.samples.push_back({0, 0, 1, std::nullopt});
    const LearnedModel mle = fit_model(data, 2, 2, 0.0);
    CHECK(!mle.fully_defined());
    CHECK(mle.row_defined(0, 0));
    CHECK(!mle.row_defined(1, 1));
    CHECK_THROWS_AS(mle.to_mdp(c2), std::runtime_error);

    const LearnedModel smoothed = fit_model(data, 2, 2, 1.0);
    CHECK(smoothed.fully_defined());
    CHECK(smoothed.trans_row(1, 1)[0] == doctest::Approx(0.5));  // unvisited -> uniform
    CHECK(smoothed.trans_row(0, 0)[1] == doctest::Approx(2.0 / 3.0));  // (1+1)/(1+2)
}

TEST_CASE("model error decreases with dataset size (median over seeds)") {
    Rng mdp_rng(40);
    const MdpSpec mdp = random_mdp(6, 2, 0.9, mdp_rng);
    const TabularPolicy behavior = TabularPolicy::uniform(6, 2);
    const Occupancy weight = occupancy_sa(behavior, mdp);
    auto median_eps = [&](int n) {
        std::vector<double> vals;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            Rng rng(derive_seed(seed, "eps_t", n));
            const TransitionDataset data = sample_dataset(behavior, mdp, n, rng);
            vals.push_back(model_error(fit_model(data, 6, 2, 0.1), mdp, weight));
        }
        std::sort(vals.begin(), vals.end());
        return vals[vals.size() / 2];
    };
    const double e2 = median_eps(100);
    const double e3 = median_eps(1000);
    const double e4 = median_eps(10000);
    const double e5 = median_eps(100000);
    CHECK(e3 <= e2);
    CHECK(e4 <= e3);
    CHECK(e5 <= e4);
    CHECK(e5 <= 0.02);
}

TEST_CASE("model_error closed forms") {
    Rng rng(41);
    const MdpSpec mdp = random_mdp(4, 2, 0.9, rng);
    const Occupancy w = occupancy_sa(TabularPolicy::uniform(4, 2), mdp);
    CHECK(model_error(mdp, mdp, w) == 0.0);

    // uniform rows against deterministic rows with S=4: per-row L1 is 1.5
    std::vector<Eigen::MatrixXd> det(2, Eigen::MatrixXd::Zero(4, 4));
    for (int s = 0; s < 4; ++s) {
        det[0](s, (s + 1) % 4) = 1.0;
        det[1](s, s) = 1.0;
    }
    const MdpSpec tt = mdp.with_transition(det);
    std::vector<Eigen::MatrixXd> unif(2, Eigen::MatrixXd::Constant(4, 4, 0.25));
    const MdpSpec tl = mdp.with_transition(unif);
    CHECK(model_error(tl, tt, w) == doctest::Approx(1.5).epsilon(1e-12));

    // weight concentrated on one pair picks out that row's gap
    Eigen::VectorXd point = Eigen::VectorXd::Zero(8);
    point[3] = 1.0;  // (s=1, a=1)
    CHECK(model_error(tl, tt, Occupancy::state_action(point)) == doctest::Approx(1.5));
}

TEST_CASE("ensemble disagreement behaves on trivial and concentrated data") {
    const MdpSpec c2 = chain2(0.9);
    TransitionDataset tiny;
    tiny.samples.push_back({0, 0, 1, std::nullopt});
    Rng rng(42);
    const ModelEnsemble ens = fit_ensemble(tiny, 2, 2, 2, 0.5, rng);
    // both members bootstrap the same single sample: identical models
    CHECK(uncertainty_hat(ens, 0, 0) == 0.0);
    // unvisited pairs are uniform in every member
    CHECK(uncertainty_hat(ens, 1, 1) == 0.0);
    CHECK_THROWS_AS(uncertainty_hat(ens, 5, 0), std::invalid_argument);

    // heavy data: members agree to within binomial concentration
    Rng data_rng(43);
    const TransitionDataset big =
        sample_dataset(TabularPolicy::uniform(2, 2), c2, 20000, data_rng);
    Rng ens_rng(44);
    const ModelEnsemble big_ens = fit_ensemble(big, 2, 2, 5, 0.1, ens_rng);
    const Eigen::MatrixXd table = uncertainty_table(big_ens);
    CHECK(table.maxCoeff() <= 0.2);
}

TEST_CASE("uncertainty is higher on unvisited pairs") {
    Rng mdp_rng(45);
    const MdpSpec mdp = random_mdp(6, 2, 0.9, mdp_rng);
    // behavior visits only action 0
    double visited_sum = 0.0;
    double unvisited_sum = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(derive_seed(seed, "uhat"));
        TransitionDataset data;
        for (int i = 0; i < 200; ++i) {
            const int s = rng.uniform_int(6);
            const int sn = rng.categorical(mdp.trans_row(s, 0).transpose());
            data.samples.push_back({s, 0, sn, std::nullopt});
        }
        Rng ens_rng(derive_seed(seed, "uhat-ens"));
        const ModelEnsemble ens = fit_ensemble(data, 6, 2, 5, 0.1, ens_rng);
        for (int s = 0; s < 6; ++s) {
            visited_sum += uncertainty_hat(ens, s, 0);
            unvisited_sum += uncertainty_hat(ens, s, 1);
        }
    }
    CHECK(visited_sum > unvisited_sum);  // unvisited rows all collapse to uniform
}

TEST_CASE("uncertainty_hat is symmetric under member permutation") {
    const MdpSpec c2 = chain2(0.9);
    Rng data_rng(46);
    const TransitionDataset data =
        sample_dataset(TabularPolicy::uniform(2, 2), c2, 200, data_rng);
    Rng ens_rng(47);
    ModelEnsemble ens = fit_ensemble(data, 2, 2, 4, 0.1, ens_rng);
    const double before = uncertainty_hat(ens, 0, 0);
    std::reverse(ens.members.begin(), ens.members.end());
    CHECK(uncertainty_hat(ens, 0, 0) == before);
}

TEST_CASE("policy uncertainty zeroes and the two-room separation") {
    Rng rng(48);
    const MdpSpec mdp = random_mdp(5, 2, 0.9, rng);
    const Occupancy behavior_w = occupancy_sa(TabularPolicy::uniform(5, 2), mdp);
    // perfect model: both expectations vanish
    CHECK(policy_uncertainty(random_policy(5, 2, rng), mdp, mdp, behavior_w) == 0.0);
    CHECK(policy_uncertainty(random_policy(5, 2, rng), mdp, mdp, behavior_w) >= 0.0);

    // two-room: a policy pushing into the unvisited room has higher U than
    // one staying where the behavior data lives
    const MdpSpec rooms = two_room(0.95, 0.0);
    const int ns = rooms.n_states();
    const TabularPolicy confined = two_room_confined_behavior();
    Rng data_rng(49);
    const TransitionDataset data = sample_dataset(confined, rooms, 3000, data_rng);
    const LearnedModel tl = fit_model(data, ns, 2, 0.1);
    const MdpSpec tl_mdp = tl.to_mdp(rooms);
    const Occupancy behavior_p = occupancy_sa(confined, rooms);
    const TabularPolicy crosser = TabularPolicy::deterministic(std::vector<int>(ns, 1), 2);
    const TabularPolicy homebody = TabularPolicy::deterministic(std::vector<int>(ns, 0), 2);
    const double u_crosser = policy_uncertainty(crosser, tl_mdp, rooms, behavior_p);
    const double u_homebody = policy_uncertainty(homebody, tl_mdp, rooms, behavior_p);
    CHECK(u_crosser > u_homebody);
}

TEST_CASE("concentrability closed forms and brute-force agreement") {
    Rng rng(50);
    const MdpSpec mdp = random_mdp(5, 2, 0.9, rng);
    const TabularPolicy mu = TabularPolicy::uniform(5, 2);
    const Occupancy behavior_p = occupancy_sa(mu, mdp);
    // ratio of a distribution to itself
    const ConcentrabilityResult self = concentrability({mu}, mdp, behavior_p, mdp.init_dist());
    CHECK(!self.infinite);
    CHECK(self.value == doctest::Approx(1.0).epsilon(1e-9));

    // uniform behavior over S*A: C = S*A * max p
    const Occupancy flat = Occupancy::state_action(Eigen::VectorXd::Constant(10, 0.1));
    const TabularPolicy pi = random_policy(5, 2, rng);
    const ConcentrabilityResult flat_c = concentrability({pi}, mdp, behavior_p, mdp.init_dist());
    const Occupancy p_pi = occupancy_sa(pi, mdp);
    const ConcentrabilityResult against_flat = concentrability({pi}, mdp, flat, mdp.init_dist());
    CHECK(against_flat.value == doctest::Approx(10.0 * p_pi.values.maxCoeff()));
    CHECK(against_flat.value <= 10.0 + 1e-9);
    CHECK(flat_c.value >= 1.0 - 1e-9);

    // enumerator against an independent brute-force loop
    const ConcentrabilityResult sup = concentrability_sup(mdp, behavior_p, mdp.init_dist());
    CHECK(sup.exact);
    double brute = 0.0;
    std::vector<int> actions(5, 0);
    for (int code = 0; code < 32; ++code) {
        int c = code;
        for (int s = 0; s < 5; ++s) {
            actions[s] = c % 2;
            c /= 2;
        }
        const Occupancy nu = occupancy_sa(TabularPolicy::deterministic(actions, 2), mdp,
                                          mdp.init_dist());
        for (int i = 0; i < 10; ++i) {
            if (nu.values[i] > 1e-13) brute = std::max(brute, nu.values[i] / behavior_p.values[i]);
        }
    }
    CHECK(sup.value == doctest::Approx(brute).epsilon(1e-10));
}

TEST_CASE("concentrability flags structural zeros as infinite") {
    const MdpSpec rooms = two_room(0.95, 0.0);
    const TabularPolicy confined = two_room_confined_behavior();
    const Occupancy behavior_p = occupancy_sa(confined, rooms);
    Rng data_rng(51);
    const TransitionDataset data = sample_dataset(confined, rooms, 2000, data_rng);
    const MdpSpec tl = fit_model(data, rooms.n_states(), 2, 0.1).to_mdp(rooms);
    const ConcentrabilityResult c = concentrability_sup(tl, behavior_p, rooms.init_dist());
    CHECK(c.infinite);
    CHECK(std::isinf(c.value));
}

TEST_CASE("ensemble rollout is deterministic given a seed") {
    const MdpSpec c2 = chain2(0.9);
    Rng data_rng(52);
    const TransitionDataset data =
        sample_dataset(TabularPolicy::uniform(2, 2), c2, 500, data_rng);
    Rng ens_rng(53);
    const ModelEnsemble ens = fit_ensemble(data, 2, 2, 3, 0.1, ens_rng);
    Rng r1(99), r2(99);
    const Trajectory t1 = rollout_ensemble(TabularPolicy::uniform(2, 2), ens, c2.init_dist(), 30, r1);
    const Trajectory t2 = rollout_ensemble(TabularPolicy::uniform(2, 2), ens, c2.init_dist(), 30, r2);
    for (int t = 0; t < 30; ++t) CHECK(t1.steps[t].next_state == t2.steps[t].next_state);
}

TEST_CASE("learned model JSON round trip") {
    const MdpSpec c2 = chain2(0.9);
    Rng data_rng(54);
    const TransitionDataset data =
        sample_dataset(TabularPolicy::uniform(2, 2), c2, 300, data_rng);
    const LearnedModel model = fit_model(data, 2, 2, 0.1);
    const LearnedModel back = LearnedModel::from_json(
        nlohmann::json::parse(model.to_json().dump()));
    CHECK(back.pseudocount() == model.pseudocount());
    CHECK((back.visit_counts() - model.visit_counts()).cwiseAbs().maxCoeff() == 0.0);
    for (int a = 0; a < 2; ++a) {
        CHECK((back.transition()[a] - model.transition()[a]).cwiseAbs().maxCoeff() == 0.0);
    }

    Rng ens_rng(55);
    const ModelEnsemble ens = fit_ensemble(data, 2, 2, 3, 0.1, ens_rng);
    const ModelEnsemble ens_back =
        ModelEnsemble::from_json(nlohmann::json::parse(ens.to_json().dump()));
    CHECK(ens_back.k() == 3);
    CHECK((ens_back.point.transition()[0] - ens.point.transition()[0]).cwiseAbs().maxCoeff() ==
          0.0);
}
