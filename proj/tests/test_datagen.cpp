#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "milo/datagen.hpp"
#include "milo/envs.hpp"
#include "milo/imitation.hpp"

using namespace milo;

namespace {

double score_of(const TabularPolicy& pi, const MdpSpec& mdp) {
    return normalized_score(pi, mdp, solve_expert(mdp),
                            TabularPolicy::uniform(mdp.n_states(), mdp.n_actions()));
}

}  // namespace

TEST_CASE("solve_expert on trivial and verifiable MDPs") {
    // single-action MDP: the only policy
    std::vector<Eigen::MatrixXd> trans(1, Eigen::MatrixXd::Identity(2, 2));
    MdpSpec single(2, 1, trans, Eigen::MatrixXd::Ones(2, 1),
                   (Eigen::VectorXd(2) << 0.5, 0.5).finished(), 0.9);
    CHECK(solve_expert(single).prob(0, 0) == 1.0);

    const MdpSpec c2 = chain2(0.9);
    const TabularPolicy expert = solve_expert(c2);
    CHECK(expert.prob(0, 0) == 1.0);  // "go" dominates at state 0

    Rng rng(100);
    const MdpSpec mdp = random_mdp(8, 3, 0.9, rng);
    const TabularPolicy star = solve_expert(mdp);
    const double v_star = value(star, mdp);
    for (int i = 0; i < 200; ++i) {
        CHECK(v_star >= value(random_policy(8, 3, rng), mdp) - 1e-9);
    }
}

TEST_CASE("narrow profile is a single uniform policy") {
    Rng rng(1);
    const MdpSpec mdp = chain2(0.9);
    const BehaviorMixture mix = make_behavior_policy(mdp, BehaviorProfile::Narrow, rng);
    REQUIRE(mix.members.size() == 1);
    CHECK(mix.weights[0] == 1.0);
    CHECK(mix.members[0].prob(0, 0) == doctest::Approx(0.5));
    CHECK(mix.members[0].prob(1, 1) == doctest::Approx(0.5));
}

TEST_CASE("wide profile: random base member, pyramid weights, mid-band mixture value") {
    Rng rng(2);
    for (const std::uint64_t seed : {11u, 22u, 33u, 44u, 55u}) {
        Rng mdp_rng(seed);
        const MdpSpec mdp = random_mdp(8, 3, 0.92, mdp_rng);
        const BehaviorMixture mix = make_behavior_policy(mdp, BehaviorProfile::Wide, rng);
        // tau=0 member is uniform
        CHECK((mix.members[0].probs().array() - 1.0 / 3).abs().maxCoeff() <= 1e-12);
        // weights decay toward better members
        for (int k = 1; k < mix.weights.size(); ++k) CHECK(mix.weights[k] < mix.weights[k - 1]);
        // best member lands at roughly half the expert's returns
        const double top = score_of(mix.members.back(), mdp);
        CHECK(top >= 0.45);
        CHECK(top <= 0.55);
        // blended value sits in the mid band
        const double v_expert = value(solve_expert(mdp), mdp);
        const double v_random = value(TabularPolicy::uniform(8, 3), mdp);
        const double mix_score = (mix.value(mdp) - v_random) / (v_expert - v_random);
        CHECK(mix_score >= 0.3);
        CHECK(mix_score <= 0.7);
    }
}

TEST_CASE("sample_dataset on a single-state single-action MDP") {
    std::vector<Eigen::MatrixXd> trans(1, Eigen::MatrixXd::Ones(1, 1));
    MdpSpec mdp(1, 1, trans, Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Ones(1), 0.5);
    Rng rng(3);
    const TransitionDataset data =
        sample_dataset(TabularPolicy::uniform(1, 1), mdp, 1, rng, GeneratorTag::Expert);
    REQUIRE(data.size() == 1);
    CHECK(data.samples[0].s == 0);
    CHECK(data.samples[0].a == 0);
    CHECK(data.samples[0].s_next == 0);
    CHECK(*data.samples[0].r == 1.0);
}

TEST_CASE("empirical frequencies match the exact occupancy") {
    Rng mdp_rng(4);
    const MdpSpec mdp = random_mdp(6, 2, 0.9, mdp_rng);
    const TabularPolicy pi = random_policy(6, 2, mdp_rng);
    const Occupancy p = occupancy_sa(pi, mdp);
    Rng rng(5);
    const TransitionDataset data = sample_dataset(pi, mdp, 100000, rng);
    Eigen::VectorXd freq = Eigen::VectorXd::Zero(12);
    for (const auto& s : data.samples) freq[s.s * 2 + s.a] += 1.0;
    freq /= freq.sum();
    CHECK((freq - p.values).cwiseAbs().sum() <= 0.02);
    // support check: every sampled pair has positive exact occupancy
    for (const auto& s : data.samples) CHECK(p.values[s.s * 2 + s.a] > 0.0);
}

TEST_CASE("mixture sampling respects the weights within binomial noise") {
    Rng mdp_rng(6);
    const MdpSpec mdp = random_mdp(5, 2, 0.9, mdp_rng);
    Rng mix_rng(7);
    const BehaviorMixture mix = make_behavior_policy(mdp, BehaviorProfile::Wide, mix_rng);
    Rng rng(8);
    const int n = 50000;
    const TransitionDataset data =
        sample_dataset(mix, mdp, n, rng, GeneratorTag::BehaviorWide);
    REQUIRE(static_cast<int>(data.member_counts.size()) == mix.weights.size());
    for (int k = 0; k < mix.weights.size(); ++k) {
        const double expected = n * mix.weights[k];
        const double sigma = std::sqrt(n * mix.weights[k] * (1.0 - mix.weights[k]));
        CHECK(std::abs(data.member_counts[k] - expected) <= 3.0 * sigma);
    }
}

TEST_CASE("dataset sampling is reproducible and serializable") {
    Rng mdp_rng(9);
    const MdpSpec mdp = random_mdp(4, 2, 0.8, mdp_rng);
    const TabularPolicy pi = random_policy(4, 2, mdp_rng);
    Rng r1(77), r2(77);
    const TransitionDataset d1 = sample_dataset(pi, mdp, 500, r1, GeneratorTag::Expert);
    const TransitionDataset d2 = sample_dataset(pi, mdp, 500, r2, GeneratorTag::Expert);
    REQUIRE(d1.size() == d2.size());
    for (int i = 0; i < d1.size(); ++i) {
        CHECK(d1.samples[i].s == d2.samples[i].s);
        CHECK(d1.samples[i].a == d2.samples[i].a);
        CHECK(d1.samples[i].s_next == d2.samples[i].s_next);
    }
    TransitionDataset tagged = d1;
    tagged.source_policy_id = "pi-77";
    tagged.seed = 77;
    const TransitionDataset back = TransitionDataset::from_jsonl(tagged.to_jsonl());
    CHECK(back.generator_tag == GeneratorTag::Expert);
    CHECK(back.source_policy_id == "pi-77");
    CHECK(back.seed == 77);
    REQUIRE(back.size() == tagged.size());
    for (int i = 0; i < back.size(); ++i) {
        CHECK(back.samples[i].s == tagged.samples[i].s);
        CHECK(*back.samples[i].r == *tagged.samples[i].r);
    }
}

TEST_CASE("trajectory mode emits chained segments of the effective horizon") {
    const MdpSpec c2 = chain2(0.9);  // effective horizon 10
    Rng rng(10);
    const TransitionDataset data = sample_dataset_trajectories(
        solve_expert(c2), c2, 25, rng, GeneratorTag::Expert);
    CHECK(data.size() == 25);
    // each 10-step block starts back at d0 = state 0
    CHECK(data.samples[0].s == 0);
    CHECK(data.samples[10].s == 0);
    CHECK(data.samples[20].s == 0);
    for (int i = 1; i < 10; ++i) CHECK(data.samples[i].s == data.samples[i - 1].s_next);
}

TEST_CASE("BC fit of growing expert datasets approaches the expert score") {
    Rng mdp_rng(12);
    const MdpSpec mdp = random_mdp(8, 3, 0.9, mdp_rng);
    auto median_score = [&](int m) {
        std::vector<double> scores;
        for (std::uint64_t seed = 0; seed < 9; ++seed) {
            Rng rng(derive_seed(seed, "bcfit", m));
            const TransitionDataset data =
                sample_dataset(solve_expert(mdp), mdp, m, rng, GeneratorTag::Expert);
            scores.push_back(score_of(bc_fit(data, 8, 3), mdp));
        }
        std::sort(scores.begin(), scores.end());
        return scores[scores.size() / 2];
    };
    const double small = median_score(8);
    const double mid = median_score(80);
    const double large = median_score(2000);
    CHECK(mid >= small - 0.05);
    CHECK(large >= mid - 0.05);
    CHECK(large >= 0.95);
}
