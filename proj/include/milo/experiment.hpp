#pragma once

#include <map>
#include <string>
#include <vector>

#include "milo/bounds.hpp"
#include "milo/datagen.hpp"
#include "milo/envs.hpp"
#include "milo/imitation.hpp"
#include "milo/mdp.hpp"
#include "milo/model.hpp"

namespace milo {

struct SweepConfig {
    std::vector<NamedMdp> mdps;
    std::vector<int> m_grid;
    int n_behavior = 100000;
    std::vector<std::string> profiles = {"wide"};  // wide | narrow | expert_only
    std::vector<std::string> learners = {"bc", "alg2"};  // bc | adv_il | alg1 | alg2
    std::vector<std::uint64_t> seeds = {1};
    TrainConfig train;
    int ensemble_k = 5;
    double pseudocount = 0.1;
    bool expert_trajectories = false;
    bool compute_bound_slack = true;
};

struct ResultRow {
    std::string mdp_id;
    std::string learner;
    std::string profile;
    int m = 0;
    std::uint64_t seed = 0;
    double normalized_score = 0.0;
    double u_hat_pi = 0.0;
    double bound_slack = 0.0;
};

struct ResultsTable {
    std::vector<ResultRow> rows;

    std::string to_csv() const;
    static ResultsTable from_csv(const std::string& text);
};

struct CellAggregate {
    std::string mdp_id;
    std::string learner;
    std::string profile;
    int m = 0;
    int n = 0;
    double mean = 0.0;
    double stddev = 0.0;
};

std::vector<CellAggregate> aggregate(const ResultsTable& table);
std::string aggregates_to_csv(const std::vector<CellAggregate>& cells);
nlohmann::json aggregates_to_json(const std::vector<CellAggregate>& cells);

/// Full grid: for every (mdp x learner x profile x M x seed) cell, generate
/// data, fit the ensemble, train, and score in the true MDP. Datasets are
/// shared across learners within a cell so comparisons are paired.
ResultsTable run_sweep(const SweepConfig& cfg, int jobs = 1);

/// Table-2 style study: algorithm 2 across the four rollout start options
/// at a single expert dataset size. The option lands in the profile column.
ResultsTable starting_state_study(const SweepConfig& cfg, int jobs = 1);

struct HorizonStudyConfig {
    std::vector<double> gamma_grid = {0.8, 0.9, 0.95, 0.98};
    int chain_len = 20;
    int n_actions = 2;
    double p_slip = 0.1;
    int m = 100;
    int n_behavior = 20000;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    TrainConfig train;
    int ensemble_k = 5;
    double pseudocount = 0.1;
    double lr_scale = 1.0;  // learner_lr applied at every grid point
};

struct HorizonCell {
    double gamma = 0.0;
    std::string learner;
    double mean_subopt = 0.0;
    bool floored = false;  // clamped for the log fit
};

struct HorizonStudyResult {
    std::vector<HorizonCell> cells;
    std::map<std::string, double> slopes;     // learner -> log-log slope
    std::map<std::string, bool> degenerate;   // any floored cell in the fit

    std::string to_csv() const;
};

/// Cliff-chain suboptimality scaling in the effective horizon: fits
/// log(mean suboptimality) against log(1/(1-gamma)) per learner.
HorizonStudyResult horizon_scaling_study(const HorizonStudyConfig& cfg, int jobs = 1);

struct TraceRow {
    int t = 0;
    double mean = 0.0;
    double stddev = 0.0;
    std::string policy_tag;
};

struct TraceResult {
    std::vector<TraceRow> rows;
    double alpha = 1.0;
    double beta = 1.0;

    std::string to_csv() const;
    /// Mean trace value of one policy at a given step.
    double mean_at(const std::string& tag, int t) const;
};

/// Rolls two policies through the learned dynamics and records the
/// expert-only model's combined disagreement/log-likelihood statistic per
/// step, standardized so expert demonstration transitions sit at zero.
/// Each seed averages a batch of parallel rollouts; the batches share
/// start states across the two policies so the comparison is paired.
TraceResult uncertainty_trace(const TabularPolicy& policy_a, const std::string& tag_a,
                              const TabularPolicy& policy_b, const std::string& tag_b,
                              const MdpSpec& tl, const ModelEnsemble& expert_only_model,
                              const TransitionDataset& expert_data, const Eigen::VectorXd& start,
                              int horizon, double alpha, double beta,
                              const std::vector<std::uint64_t>& seeds, int batch = 200);

/// Table-3 style study: the model is fit solely on expert demonstrations;
/// compares bc, alg2 on the expert-only model (expert-state starts) and
/// alg2 on wide behavior data.
ResultsTable expert_only_study(const SweepConfig& cfg, int jobs = 1);

}  // namespace milo
