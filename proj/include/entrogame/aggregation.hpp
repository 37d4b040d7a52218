#ifndef ENTROGAME_AGGREGATION_HPP
#define ENTROGAME_AGGREGATION_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "entrogame/loss.hpp"
#include "entrogame/sources.hpp"
#include "entrogame/strategies.hpp"

namespace entrogame {

struct MixabilityResult {
    double beta = 0.0;
    double eta = 0.0;  // beta = exp(-eta)
    bool mixable = false;
    double max_concavity_violation = 0.0;  // relative to local segment scale
    int resolution = 0;
};

// Tests beta-mixability: maps the superprediction curve through
// (x,y) -> (beta^x, beta^y) (beta^inf = 0 exactly) and checks that the
// Pareto frontier of the image turns consistently — every cross product of
// successive segments must be >= -tol relative to the segment scale.
MixabilityResult mixability_test(const Game& game, double beta, int resolution = 10000,
                                 double tol = 1e-9);

// Largest eta with exp(-eta)-mixability on the tested grid, by bisection
// over [1e-4, 64]; nullopt when even the smallest eta fails.
std::optional<double> max_mixability_eta(const Game& game, int resolution = 10000,
                                         double tol = 1e-9, double eta_tol = 1e-4);

// Online aggregating strategy over a finite expert pool with exponential
// weights in the log domain. Construction verifies that eta is mixable for
// the game. This is the computable stand-in for a universal superloss
// process: it trails every expert by at most ln(N)/eta.
class Aggregator {
  public:
    Aggregator(Game game, std::vector<StrategyPtr> experts, double eta,
               std::vector<double> prior_weights = {},  // default uniform
               int mixability_resolution = 10000);

    // Generalized prediction folded back into [0,1]: the substitution
    // gamma minimizing max_b(lambda(b,gamma) - g(b)), where
    // g(b) = -(1/eta) ln sum_i w_i exp(-eta lambda(b, gamma_i)).
    Prediction predict(std::span<const std::uint8_t> history) const;

    // Exponential weight update on the revealed outcome; throws
    // PreconditionError if every expert incurs infinite loss on it.
    void update(std::span<const std::uint8_t> history, int outcome);

    std::size_t expert_count() const { return experts_.size(); }
    const std::vector<StrategyPtr>& experts() const { return experts_; }
    double eta() const { return eta_; }
    std::uint64_t step() const { return step_; }
    std::vector<double> weights() const;  // normalized, linear domain
    const std::vector<double>& log_weights() const { return log_weights_; }

    // (g(0), g(1)) for the current weights and expert predictions — always
    // a superscore when eta is mixable.
    Superscore generalized_prediction(std::span<const std::uint8_t> history) const;

  private:
    std::vector<double> expert_predictions(std::span<const std::uint8_t> history) const;
    Superscore generalized_from(const std::vector<double>& gammas) const;
    Prediction substitute(const Superscore& g, const std::vector<double>& gammas) const;

    Game game_;
    std::vector<StrategyPtr> experts_;
    double eta_;
    std::vector<double> log_weights_;  // kept normalized: logsumexp = 0
    std::uint64_t step_ = 0;
};

// Values of a superloss-style process along one outcome path: the value at
// every prefix of the path plus both one-bit extensions of each prefix.
// value(empty) must be 0 for a valid superloss process.
class SuperlossTrace {
  public:
    SuperlossTrace() = default;
    explicit SuperlossTrace(double root_value) : root_(root_value) {}

    // Append one step: the values at prefix.0 and prefix.1, then follow
    // path_bit. Both children are required so every node can be checked.
    void push(double value_child0, double value_child1, int path_bit);

    // Cumulative losses of a strategy along w.
    static SuperlossTrace from_strategy(const Game& game, const Strategy& strategy,
                                        std::span<const std::uint8_t> w);

    std::size_t steps() const { return child0_.size(); }
    double root_value() const { return root_; }
    double value_at(std::size_t prefix_len) const;  // along the path
    // (value(x0) - value(x), value(x1) - value(x)) at depth d.
    Superscore increment(std::size_t depth) const;
    int path_bit(std::size_t depth) const { return path_[depth]; }

    std::string to_csv() const;  // n, increment0, increment1, cumulative

  private:
    double root_ = 0.0;
    std::vector<double> child0_, child1_;
    std::vector<std::uint8_t> path_;
    std::vector<double> along_;  // value at each prefix 1..n
};

// Conditions 1-2 of a superloss process: zero at the root and every
// increment pair a superscore within tol.
bool verify_superloss_trace(const Game& game, const SuperlossTrace& trace, double tol);

// |value(xb) - value(x)| <= c ln(n) with n = |x| + 1, checked for n >= 2
// on both children of every prefix.
bool increment_bound_check(const SuperlossTrace& trace, double c);

// Expert-pool descriptor:
//   {"experts":[{"kind":"constant","gamma":0.5},
//               {"kind":"markov_opt","k":1,"p1_given":{"0":0.3,"1":0.7}}],
//    "eta":1.0}
struct PoolSpec {
    std::vector<StrategyPtr> experts;
    double eta = 1.0;
};
PoolSpec pool_from_json(const Game& game, const nlohmann::json& j);

// Source-matched expert pool: pointwise-optimal predictors for the order-j
// Markov approximations of `source`, j = 0..k_max (their tables are the
// source's own length-j conditionals), optionally padded with constant
// experts on an 11-point gamma grid.
std::vector<StrategyPtr> default_expert_pool(const Game& game, const SourceModel& source,
                                             int k_max, bool add_constant_grid = false);

}  // namespace entrogame

#endif
