// Independent oracles used to freeze expected values. These deliberately
// avoid the library's linear-solve code paths.
#pragma once

#include <Eigen/Dense>

#include "milo/mdp.hpp"

namespace milo::test {

/// Policy value by plain Bellman iteration on V, then E_{d0}[V].
inline double bellman_value(const TabularPolicy& policy, const MdpSpec& mdp,
                            const Eigen::MatrixXd& reward, double tol = 1e-12) {
    const int ns = mdp.n_states();
    Eigen::VectorXd v = Eigen::VectorXd::Zero(ns);
    for (;;) {
        Eigen::VectorXd next = Eigen::VectorXd::Zero(ns);
        for (int s = 0; s < ns; ++s) {
            for (int a = 0; a < mdp.n_actions(); ++a) {
                const double p = policy.prob(s, a);
                if (p == 0.0) continue;
                next[s] += p * (reward(s, a) + mdp.gamma() * mdp.trans_row(s, a).dot(v));
            }
        }
        const double residual = (next - v).cwiseAbs().maxCoeff();
        v = next;
        if (residual <= tol) break;
    }
    return mdp.init_dist().dot(v);
}

/// Truncated Neumann series (1-gamma) sum_k gamma^k P^k d0, stopping when
/// the tail gamma^k drops below tail_mass.
inline Eigen::VectorXd neumann_occupancy(const TabularPolicy& policy, const MdpSpec& mdp,
                                         const Eigen::VectorXd& start, double tail_mass = 1e-10) {
    const Eigen::MatrixXd p = transition_operator(policy, mdp);
    Eigen::VectorXd current = start;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(mdp.n_states());
    double w = 1.0 - mdp.gamma();
    double tail = 1.0;
    while (tail > tail_mass) {
        acc += w * current;
        current = p * current;
        w *= mdp.gamma();
        tail *= mdp.gamma();
    }
    return acc;
}

}  // namespace milo::test
