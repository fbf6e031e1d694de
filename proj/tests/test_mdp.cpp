#include <doctest.h>

#include <cmath>

#include "milo/envs.hpp"
#include "milo/mdp.hpp"
#include "oracles.hpp"

using namespace milo;

namespace {

MdpSpec single_state_mdp(double gamma = 0.5, double r = 1.0) {
    std::vector<Eigen::MatrixXd> trans(1, Eigen::MatrixXd::Ones(1, 1));
    Eigen::MatrixXd reward(1, 1);
    reward << r;
    Eigen::VectorXd d0 = Eigen::VectorXd::Ones(1);
    return MdpSpec(1, 1, std::move(trans), std::move(reward), std::move(d0), gamma);
}

TabularPolicy always(int action, int n_states, int n_actions) {
    return TabularPolicy::deterministic(std::vector<int>(n_states, action), n_actions);
}

}  // namespace

TEST_CASE("MdpSpec validates invariants") {
    CHECK_THROWS_AS(single_state_mdp(1.0), std::invalid_argument);
    CHECK_THROWS_AS(single_state_mdp(0.0), std::invalid_argument);
    std::vector<Eigen::MatrixXd> bad_trans(1, Eigen::MatrixXd::Constant(1, 1, 0.5));
    CHECK_THROWS_AS(MdpSpec(1, 1, bad_trans, Eigen::MatrixXd::Zero(1, 1),
                            Eigen::VectorXd::Ones(1), 0.9),
                    std::invalid_argument);
}

TEST_CASE("transition operator on trivial MDPs") {
    const MdpSpec one = single_state_mdp();
    const Eigen::MatrixXd p1 = transition_operator(always(0, 1, 1), one);
    CHECK(p1.rows() == 1);
    CHECK(p1(0, 0) == doctest::Approx(1.0));

    const MdpSpec c2 = chain2(0.5);
    const Eigen::MatrixXd p_go = transition_operator(always(0, 2, 2), c2);
    // columns are next-state distributions
    CHECK(p_go(1, 0) == doctest::Approx(1.0));
    CHECK(p_go(1, 1) == doctest::Approx(1.0));
    CHECK(p_go.colwise().sum().minCoeff() == doctest::Approx(1.0));

    Eigen::MatrixXd probs(2, 2);
    probs << 0.5, 0.5, 1.0, 0.0;
    const Eigen::MatrixXd p_mix = transition_operator(TabularPolicy(probs), c2);
    CHECK(p_mix(0, 0) == doctest::Approx(0.5));
    CHECK(p_mix(1, 0) == doctest::Approx(0.5));

    CHECK_THROWS_AS(transition_operator(always(0, 3, 2), c2), std::invalid_argument);
}

TEST_CASE("occupancy matches hand-computed values") {
    const Occupancy d1 = occupancy(always(0, 1, 1), single_state_mdp());
    CHECK(d1.values[0] == doctest::Approx(1.0));

    // Chain2, start at 0, gamma 0.5, always-go: geometric series leaves half
    // the discounted mass at state 0 and half at state 1
    const MdpSpec c2 = chain2(0.5);
    const Occupancy d2 = occupancy(always(0, 2, 2), c2);
    CHECK(d2.values[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(d2.values[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("occupancy sums to one and is nonnegative on random MDPs") {
    Rng rng(123);
    for (int i = 0; i < 50; ++i) {
        const int ns = 2 + rng.uniform_int(9);
        const int na = 2 + rng.uniform_int(3);
        const MdpSpec mdp = random_mdp(ns, na, 0.5 + 0.45 * rng.uniform(), rng);
        const TabularPolicy pi = random_policy(ns, na, rng);
        const Occupancy d = occupancy(pi, mdp);
        CHECK(d.values.sum() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(d.values.minCoeff() >= 0.0);
        const Occupancy p = occupancy_sa(pi, mdp);
        CHECK(p.values.sum() == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("value equals occupancy form on examples") {
    const MdpSpec c2 = chain2(0.5);
    CHECK(value(always(0, 2, 2), c2, Eigen::MatrixXd::Zero(2, 2)) == doctest::Approx(0.0));
    CHECK(value(always(0, 1, 1), single_state_mdp(0.5, 1.0)) == doctest::Approx(2.0));
    // reward 1 at state 1 only, always-go: sum_{t>=1} 0.5^t = 1
    CHECK(value(always(0, 2, 2), c2) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("value via occupancy equals Bellman iteration on 100 random MDPs") {
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        const int ns = 2 + rng.uniform_int(9);
        const int na = 2 + rng.uniform_int(3);
        const MdpSpec mdp = random_mdp(ns, na, 0.5 + 0.45 * rng.uniform(), rng);
        const TabularPolicy pi = random_policy(ns, na, rng);
        const double via_occ = value(pi, mdp);
        const double via_bellman = test::bellman_value(pi, mdp, mdp.reward());
        CHECK(via_occ == doctest::Approx(via_bellman).epsilon(1e-9));
    }
}

TEST_CASE("truncated Neumann series matches the linear solve") {
    Rng rng(11);
    for (int i = 0; i < 20; ++i) {
        const int ns = 2 + rng.uniform_int(6);
        const MdpSpec mdp = random_mdp(ns, 2, 0.5 + 0.4 * rng.uniform(), rng);
        const TabularPolicy pi = random_policy(ns, 2, rng);
        const Eigen::VectorXd series = test::neumann_occupancy(pi, mdp, mdp.init_dist());
        const Occupancy solved = occupancy(pi, mdp);
        CHECK((series - solved.values).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("l1_distance basic identities and metric properties") {
    const Occupancy a = Occupancy::state((Eigen::VectorXd(2) << 0.5, 0.5).finished());
    const Occupancy b = Occupancy::state((Eigen::VectorXd(2) << 0.25, 0.75).finished());
    const Occupancy pt0 = Occupancy::state((Eigen::VectorXd(2) << 1.0, 0.0).finished());
    const Occupancy pt1 = Occupancy::state((Eigen::VectorXd(2) << 0.0, 1.0).finished());
    CHECK(l1_distance(a, a) == 0.0);
    CHECK(l1_distance(pt0, pt1) == 2.0);
    CHECK(l1_distance(a, b) == doctest::Approx(0.5));
    const Occupancy sa = Occupancy::state_action((Eigen::VectorXd(2) << 0.5, 0.5).finished());
    CHECK_THROWS_AS(l1_distance(a, sa), std::invalid_argument);

    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const int n = 2 + rng.uniform_int(8);
        const Occupancy x = Occupancy::state(rng.dirichlet(1.0, n));
        const Occupancy y = Occupancy::state(rng.dirichlet(1.0, n));
        const Occupancy z = Occupancy::state(rng.dirichlet(1.0, n));
        CHECK(l1_distance(x, y) == doctest::Approx(l1_distance(y, x)));
        CHECK(l1_distance(x, x) == 0.0);
        CHECK(l1_distance(x, z) <= l1_distance(x, y) + l1_distance(y, z) + 1e-12);
    }
}

TEST_CASE("rollout follows deterministic paths and respects seeds") {
    const MdpSpec c2 = chain2(0.5);
    Rng rng(5);
    const Trajectory traj = rollout(always(0, 2, 2), c2, c2.init_dist(), 3, rng);
    REQUIRE(traj.steps.size() == 3);
    CHECK(traj.steps[0].state == 0);
    CHECK(traj.steps[1].state == 1);
    CHECK(traj.steps[2].state == 1);
    for (std::size_t t = 0; t + 1 < traj.steps.size(); ++t) {
        CHECK(traj.steps[t].next_state == traj.steps[t + 1].state);
    }

    Rng r1(42), r2(42);
    const MdpSpec mdp = [&] {
        Rng g(9);
        return random_mdp(5, 3, 0.9, g);
    }();
    const TabularPolicy pi = [&] {
        Rng g(10);
        return random_policy(5, 3, g);
    }();
    const Trajectory t1 = rollout(pi, mdp, mdp.init_dist(), 50, r1);
    const Trajectory t2 = rollout(pi, mdp, mdp.init_dist(), 50, r2);
    for (int t = 0; t < 50; ++t) {
        CHECK(t1.steps[t].state == t2.steps[t].state);
        CHECK(t1.steps[t].action == t2.steps[t].action);
    }
}

TEST_CASE("discount-weighted rollout frequencies approach the exact occupancy") {
    Rng mdp_rng(21);
    const MdpSpec mdp = random_mdp(6, 2, 0.9, mdp_rng);
    const TabularPolicy pi = random_policy(6, 2, mdp_rng);
    const Occupancy exact = occupancy(pi, mdp);
    const int horizon = effective_horizon(mdp.gamma(), 1e-10);
    Eigen::VectorXd freq = Eigen::VectorXd::Zero(6);
    Rng rng(22);
    const int n_rollouts = 20000;
    for (int i = 0; i < n_rollouts; ++i) {
        const Trajectory traj = rollout(pi, mdp, mdp.init_dist(), horizon, rng);
        double w = 1.0;
        for (const auto& step : traj.steps) {
            freq[step.state] += w;
            w *= mdp.gamma();
        }
    }
    freq /= freq.sum();
    CHECK((freq - exact.values).cwiseAbs().sum() <= 0.02);
}

TEST_CASE("truncated occupancy interpolates to the exact one") {
    Rng rng(31);
    const MdpSpec mdp = random_mdp(5, 2, 0.9, rng);
    const TabularPolicy pi = random_policy(5, 2, rng);
    const Occupancy exact = occupancy(pi, mdp);
    const Occupancy h400 = occupancy_truncated(pi, mdp, mdp.init_dist(), 400);
    CHECK(l1_distance(exact, h400) <= 1e-8);
    const Occupancy h1 = occupancy_truncated(pi, mdp, mdp.init_dist(), 1);
    CHECK((h1.values - mdp.init_dist()).cwiseAbs().sum() <= 1e-12);
}

TEST_CASE("MDP JSON round-trip is bit-exact") {
    Rng rng(17);
    const MdpSpec mdp = random_mdp(7, 3, 0.913, rng, 2.5);
    const nlohmann::json j = mdp.to_json();
    const MdpSpec back = MdpSpec::from_json(nlohmann::json::parse(j.dump()));
    for (int a = 0; a < 3; ++a) {
        CHECK((back.trans_for_action(a) - mdp.trans_for_action(a)).cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK((back.reward() - mdp.reward()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.init_dist() - mdp.init_dist()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.gamma() == mdp.gamma());
}

TEST_CASE("policy q values are consistent with policy value") {
    Rng rng(19);
    const MdpSpec mdp = random_mdp(6, 3, 0.85, rng);
    const TabularPolicy pi = random_policy(6, 3, rng);
    const Eigen::VectorXd v = policy_state_values(pi, mdp, mdp.reward());
    const Eigen::MatrixXd q = policy_q_values(pi, mdp, mdp.reward());
    for (int s = 0; s < 6; ++s) {
        double vq = 0.0;
        for (int a = 0; a < 3; ++a) vq += pi.prob(s, a) * q(s, a);
        CHECK(vq == doctest::Approx(v[s]).epsilon(1e-10));
    }
    CHECK(mdp.init_dist().dot(v) == doctest::Approx(value(pi, mdp)).epsilon(1e-10));
}

TEST_CASE("effective horizon covers the discount tail") {
    const int h = effective_horizon(0.9, 0.1);
    CHECK(std::pow(0.9, h) <= 0.1 + 1e-12);
    CHECK(std::pow(0.9, h - 1) > 0.1);
}

TEST_CASE("all_deterministic_policies enumerates A^S") {
    const auto set = all_deterministic_policies(3, 2);
    CHECK(set.size() == 8);
    CHECK_THROWS_AS(all_deterministic_policies(40, 4), std::invalid_argument);
}
