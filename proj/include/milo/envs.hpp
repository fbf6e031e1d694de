#pragma once

#include <string>
#include <vector>

#include "milo/mdp.hpp"

namespace milo {

/// Two-state, two-action chain: action 0 ("go") moves 0 -> 1 and keeps 1,
/// action 1 ("stay") self-loops. Reward 1 at state 1, start at state 0.
MdpSpec chain2(double gamma);

/// Cyclic chain of `chain_len` reward-1 states plus an absorbing reward-0
/// cliff zone. Action 0 advances along the chain (slipping to a uniformly
/// random chain state with probability p_slip); every other action falls
/// into a uniformly random cliff state. One wrong action in the true
/// dynamics is unrecoverable, which is what makes behavioral cloning
/// compound its errors here. `cliff_zone` sizes the junk part of the state
/// space (all zone states are equivalent absorbing sinks).
MdpSpec cliff_chain(int chain_len, int n_actions, double gamma, double p_slip,
                    int cliff_zone = 1);

/// Eight-state corridor split into two rooms with a one-way drift trap on
/// the far side of the door. Reward 1 at state 0; start at the door
/// (state 3). Action 0 moves toward home, action 1 away; in room two the
/// dynamics drift toward state 7, whose only exit re-enters at the door.
MdpSpec two_room(double gamma, double p_slip);

/// Behavior policy for two_room that never crosses the door: uniform in
/// the interior of room one, always homeward at the door. Its occupancy
/// puts zero mass on room two, so the coverage ratio against any policy
/// that wanders there is unbounded.
TabularPolicy two_room_confined_behavior();

struct NamedMdp {
    std::string id;
    MdpSpec mdp;
};

/// The three-environment suite used by the scripted studies: a cliff
/// chain, the two-room corridor and a seeded sparse random MDP with a
/// fixed spawn state.
std::vector<NamedMdp> suite_mdps(std::uint64_t seed = 330u);

}  // namespace milo
