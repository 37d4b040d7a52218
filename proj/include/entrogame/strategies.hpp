#ifndef ENTROGAME_STRATEGIES_HPP
#define ENTROGAME_STRATEGIES_HPP

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "entrogame/loss.hpp"
#include "entrogame/sources.hpp"

namespace entrogame {

// A deterministic prediction strategy: one prediction for every finite
// history. Implementations must be total (defined on all histories, even
// ones the source cannot produce) and pure.
class Strategy {
  public:
    virtual ~Strategy() = default;
    virtual Prediction predict(std::span<const std::uint8_t> history) const = 0;
    virtual const std::string& label() const { return label_; }

  protected:
    explicit Strategy(std::string label) : label_(std::move(label)) {}
    std::string label_;
};

using StrategyPtr = std::shared_ptr<const Strategy>;

// gamma* minimizing the expected one-step loss under P(next=1) = p1, to
// within opt_tol in the argument. Convex losses use golden section with the
// endpoints always compared (so degenerate p1 in {0,1} lands exactly on the
// boundary); non-convex custom losses fall back to a grid scan with local
// refinement and ties broken toward the smallest gamma.
Prediction optimal_prediction(const LossFunction& loss, double p1,
                              double opt_tol = 1e-10);

// Same minimization, also reporting the attained expected loss.
struct OptimalStep {
    Prediction gamma = 0.0;
    LossValue value = 0.0;
};
OptimalStep optimal_one_step(const LossFunction& loss, double p1,
                             double opt_tol = 1e-10);

// Memo for s(p1). Two modes: exact keys on the bit pattern of p1 (lossless;
// the default for exact computations) or quantized keys on a fixed step
// (the classic simulation cache). Not synchronized — replicate one per
// task, which behaves exactly as if every lookup recomputed the value.
class OptimalPredictionCache {
  public:
    OptimalPredictionCache(LossFunction loss, double opt_tol = 1e-10,
                           double quantization_step = 0.0 /* 0 = exact keys */);

    OptimalStep lookup(double p1);
    std::size_t size() const { return map_.size(); }
    double quantization_step() const { return step_; }

  private:
    LossFunction loss_;
    double opt_tol_;
    double step_;
    std::unordered_map<std::uint64_t, OptimalStep> map_;
};

class ConstantStrategy : public Strategy {
  public:
    ConstantStrategy(Prediction gamma, std::string label = "");
    Prediction predict(std::span<const std::uint8_t> history) const override;
    Prediction gamma() const { return gamma_; }

  private:
    Prediction gamma_;
};

// history |-> s(P(next=1 | history)) for a given source: the strategy that
// attains H_n for every n. Total on all histories: impossible histories are
// handled by the lenient filter (Markov predictions depend only on the last
// k bits anyway, which keeps the hot path O(k)).
class PointwiseOptimalStrategy : public Strategy {
  public:
    PointwiseOptimalStrategy(Game game, SourceModel source, double opt_tol = 1e-10,
                             std::string label = "");
    Prediction predict(std::span<const std::uint8_t> history) const override;

    const SourceModel& source() const { return source_; }
    const Game& game() const { return game_; }

  private:
    Game game_;
    SourceModel source_;
    double opt_tol_;
    // Conditional laws repeat (finitely many for Markov sources), so the
    // minimization is memoized; synchronized, observationally pure.
    mutable std::mutex mu_;
    mutable std::unordered_map<std::uint64_t, double> gamma_by_p1_;
};

struct LossLedger {
    std::vector<LossValue> per_step;
    std::vector<LossValue> cumulative;  // cumulative[i] = sum per_step[0..i]
    LossValue total() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
    std::string to_csv() const;  // step, loss, cumulative, cumulative/n
};

// Per-bit losses of a strategy along w; totals may be +inf.
LossLedger cumulative_loss(const Game& game, const Strategy& strategy,
                           std::span<const std::uint8_t> w);

// lambda(next, s(P(next=1 | window))): the per-step loss of the optimal
// strategy given a length-k window of recent bits. Throws on
// zero-probability windows.
LossValue optimal_loss_function_g(const Game& game, const SourceModel& source,
                                  int k, std::span<const std::uint8_t> window,
                                  int next, double opt_tol = 1e-10);

}  // namespace entrogame

#endif
