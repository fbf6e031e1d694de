#include "milo/envs.hpp"

#include <stdexcept>

namespace milo {

MdpSpec chain2(double gamma) {
    std::vector<Eigen::MatrixXd> trans(2, Eigen::MatrixXd::Zero(2, 2));
    // action 0: go
    trans[0](0, 1) = 1.0;
    trans[0](1, 1) = 1.0;
    // action 1: stay
    trans[1](0, 0) = 1.0;
    trans[1](1, 1) = 1.0;
    Eigen::MatrixXd reward = Eigen::MatrixXd::Zero(2, 2);
    reward.row(1).setConstant(1.0);
    Eigen::VectorXd d0(2);
    d0 << 1.0, 0.0;
    return MdpSpec(2, 2, std::move(trans), std::move(reward), std::move(d0), gamma);
}

MdpSpec cliff_chain(int chain_len, int n_actions, double gamma, double p_slip, int cliff_zone) {
    if (chain_len < 2 || n_actions < 2 || cliff_zone < 1) {
        throw std::invalid_argument(
            "cliff_chain: need chain_len >= 2, n_actions >= 2, cliff_zone >= 1");
    }
    if (p_slip < 0.0 || p_slip >= 1.0) {
        throw std::invalid_argument("cliff_chain: p_slip must lie in [0, 1)");
    }
    const int ns = chain_len + cliff_zone;
    std::vector<Eigen::MatrixXd> trans(n_actions, Eigen::MatrixXd::Zero(ns, ns));
    for (int s = 0; s < chain_len; ++s) {
        // action 0 advances; slips land on a uniformly random chain state
        trans[0](s, (s + 1) % chain_len) += 1.0 - p_slip;
        for (int t = 0; t < chain_len; ++t) trans[0](s, t) += p_slip / chain_len;
        // falls land at the zone edge; the deeper zone states are
        // unreachable observation-space junk that no dataset ever visits
        for (int a = 1; a < n_actions; ++a) trans[a](s, chain_len) = 1.0;
    }
    for (int c = 0; c < cliff_zone; ++c) {
        for (int a = 0; a < n_actions; ++a) trans[a](chain_len + c, chain_len + c) = 1.0;
    }
    Eigen::MatrixXd reward = Eigen::MatrixXd::Ones(ns, n_actions);
    reward.bottomRows(cliff_zone).setZero();
    Eigen::VectorXd d0 = Eigen::VectorXd::Zero(ns);
    d0[0] = 1.0;
    return MdpSpec(ns, n_actions, std::move(trans), std::move(reward), std::move(d0), gamma);
}

MdpSpec two_room(double gamma, double p_slip) {
    if (p_slip < 0.0 || p_slip >= 0.5) {
        throw std::invalid_argument("two_room: p_slip must lie in [0, 0.5)");
    }
    // Loop task. Room one is a corridor 0..13 with the reward at home
    // (state 0) and the door at 13; collecting at home teleports back to
    // the door, so good play walks the corridor over and over. The door's
    // away action (and door slips) lead into room two, 14..17, a drift
    // trap whose only exit re-enters at the door.
    const int ns = 18;
    const int na = 2;
    const int home = 0;  // action 0 = toward home, action 1 = away
    const int door = 13;
    std::vector<Eigen::MatrixXd> trans(na, Eigen::MatrixXd::Zero(ns, ns));
    auto intend = [&](int s, int a) {
        if (s == home) return a == 0 ? door : 1;
        return a == 0 ? s - 1 : s + 1;
    };
    for (int s = home; s <= door; ++s) {
        for (int a = 0; a < na; ++a) {
            trans[a](s, intend(s, a)) += 1.0 - p_slip;
            trans[a](s, intend(s, 1 - a)) += p_slip;
        }
    }
    for (int s = door + 1; s <= ns - 2; ++s) {
        trans[0](s, s) = 0.3;  // holding against the drift
        trans[0](s, s + 1) = 0.7;
        trans[1](s, s + 1) = 1.0;
    }
    trans[0](ns - 1, door) = 1.0;
    trans[1](ns - 1, ns - 1) = 1.0;
    Eigen::MatrixXd reward = Eigen::MatrixXd::Zero(ns, na);
    reward(home, 0) = 1.0;  // collect-and-restart is the rewarded move
    Eigen::VectorXd d0 = Eigen::VectorXd::Zero(ns);
    d0[door] = 1.0;
    return MdpSpec(ns, na, std::move(trans), std::move(reward), std::move(d0), gamma);
}

TabularPolicy two_room_confined_behavior() {
    Eigen::MatrixXd probs(18, 2);
    for (int s = 0; s < 18; ++s) {
        if (s == 13) {
            probs.row(s) << 1.0, 0.0;  // never step through the door
        } else if (s < 13) {
            probs.row(s) << 0.5, 0.5;
        } else {
            probs.row(s) << 1.0, 0.0;  // irrelevant: room two is unreachable
        }
    }
    return TabularPolicy(std::move(probs));
}

std::vector<NamedMdp> suite_mdps(std::uint64_t seed) {
    std::vector<NamedMdp> out;
    out.push_back({"cliffchain", cliff_chain(32, 2, 0.95, 0.1, 12)});
    out.push_back({"tworoom", two_room(0.95, 0.1)});
    // sparse random member with a fixed spawn state, mirroring the
    // episodic tasks the other two model
    Rng rng(derive_seed(seed, "suite_random"));
    const MdpSpec base = random_mdp(16, 2, 0.95, rng, 1.0, 2, /*state_rewards=*/true);
    Eigen::VectorXd d0 = Eigen::VectorXd::Zero(base.n_states());
    d0[0] = 1.0;
    std::vector<Eigen::MatrixXd> trans;
    trans.reserve(base.n_actions());
    for (int a = 0; a < base.n_actions(); ++a) trans.push_back(base.trans_for_action(a));
    out.push_back({"random", MdpSpec(base.n_states(), base.n_actions(), std::move(trans),
                                     base.reward(), std::move(d0), base.gamma())});
    return out;
}

}  // namespace milo
