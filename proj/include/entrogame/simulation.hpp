#ifndef ENTROGAME_SIMULATION_HPP
#define ENTROGAME_SIMULATION_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "entrogame/aggregation.hpp"
#include "entrogame/entropy.hpp"
#include "entrogame/loss.hpp"
#include "entrogame/sources.hpp"
#include "entrogame/strategies.hpp"

namespace entrogame {

// Configuration of a Monte Carlo convergence experiment. Either `strategy`
// (loss-rate of a single predictor) or `pool` (aggregating strategy) is
// used depending on the operation invoked.
struct ExperimentSpec {
    ExperimentSpec(Game g, SourceModel s) : game(std::move(g)), source(std::move(s)) {}

    Game game;
    SourceModel source;
    std::size_t n = 100000;
    std::size_t path_count = 20;
    std::uint64_t seed = 0;
    std::vector<std::size_t> checkpoints;  // sorted, each <= n
    StrategyPtr strategy;                  // null = pointwise optimal
    std::optional<PoolSpec> pool;
    int threads = 0;                       // 0 = hardware concurrency
    std::size_t early_steps = 32;          // per-step means recorded up to here
    bool record_traces = false;            // keep per-path superloss traces

    void validate() const;  // throws ConfigError
};

struct ConvergenceResult {
    std::vector<std::size_t> checkpoints;
    std::vector<std::vector<double>> path_rates;  // [path][checkpoint] Loss/n
    std::vector<double> mean_rate;
    std::vector<double> sd_rate;
    double target_h = 0.0;
    double final_abs_deviation = 0.0;
    // mean loss incurred at step k across paths, k < early_steps; matches
    // H_{1|k} in expectation.
    std::vector<double> early_step_mean_loss;
    std::vector<SuperlossTrace> traces;  // filled when record_traces

    nlohmann::json to_json() const;
    std::string to_csv() const;  // long format: path, checkpoint, rate
};

// Loss rate of the pointwise optimal strategy (or a supplied one) on
// sampled paths, against the generalized entropy rate of the source.
// Refuses non-ergodic sources.
ConvergenceResult smb_experiment(const ExperimentSpec& spec);

// Aggregator loss rate over the expert pool on sampled paths. Refuses
// non-ergodic sources and non-mixable (game, eta) configurations. Also
// records each expert's cumulative loss so regret bounds can be audited.
struct AggregateResult {
    ConvergenceResult convergence;
    // [path][checkpoint]: min over experts of cumulative expert loss.
    std::vector<std::vector<double>> best_expert_loss;
    // [path][checkpoint]: aggregator cumulative loss.
    std::vector<std::vector<double>> aggregator_loss;
};
AggregateResult predictive_rate_experiment(const ExperimentSpec& spec);

// Per-checkpoint comparison of the aggregator against the entropy rate
// (both sides of the convergence statement) and against the best expert
// (the regret side, bounded by ln N / (eta n)).
struct TwoSidedRateReport {
    std::vector<std::size_t> checkpoints;
    std::vector<double> rate_minus_h;          // mean aggregator rate - H
    std::vector<double> gap_to_best_expert;    // mean (agg - best)/n, >= 0
    std::vector<double> regret_bound;          // ln N / (eta * n)
    double target_h = 0.0;

    nlohmann::json to_json() const;
    std::string to_csv() const;
};
TwoSidedRateReport two_sided_rate_report(const ExperimentSpec& spec);

}  // namespace entrogame

#endif
