#include "entrogame/strategies.hpp"

#include <bit>
#include <cmath>
#include <sstream>

#include "entrogame/csvio.hpp"
#include "entrogame/errors.hpp"
#include "entrogame/numeric.hpp"

namespace entrogame {

namespace {

// Pure comparison search bottoms out near sqrt(eps) in the argument; a few
// guarded finite-difference Newton steps push an interior minimizer of a
// smooth convex objective down to ~1e-11, which realized (not expected)
// losses are sensitive to.
MinResult newton_polish(const std::function<double(double)>& f, MinResult best) {
    const double h = 1e-5;
    if (!(best.x > h && best.x < 1.0 - h) || is_inf(best.value)) return best;
    for (int it = 0; it < 3; ++it) {
        const double fp = f(best.x + h), fm = f(best.x - h);
        if (is_inf(fp) || is_inf(fm)) break;
        const double d1 = (fp - fm) / (2.0 * h);
        const double d2 = (fp - 2.0 * best.value + fm) / (h * h);
        if (!(d2 > 0.0)) break;
        const double x = std::min(1.0 - h, std::max(h, best.x - d1 / d2));
        const double v = f(x);
        if (!(v <= best.value)) break;
        best = {x, v};
    }
    return best;
}

}  // namespace

OptimalStep optimal_one_step(const LossFunction& loss, double p1, double opt_tol) {
    if (std::isnan(p1) || p1 < 0.0 || p1 > 1.0)
        throw ConfigError("optimal_prediction: p1 must lie in [0,1]");
    auto f = [&](double g) { return expected_one_step_loss(loss, p1, g); };
    MinResult best = minimize_unit_interval(f, loss.convex_in_gamma(), opt_tol);
    if (best.value == kInf)
        throw PreconditionError("loss '" + loss.name() +
                                "' has infinite expected loss for every prediction");
    if (best.x != 0.0 && best.x != 1.0) best = newton_polish(f, best);
    return {best.x, best.value};
}

Prediction optimal_prediction(const LossFunction& loss, double p1, double opt_tol) {
    return optimal_one_step(loss, p1, opt_tol).gamma;
}

OptimalPredictionCache::OptimalPredictionCache(LossFunction loss, double opt_tol,
                                               double quantization_step)
    : loss_(std::move(loss)), opt_tol_(opt_tol), step_(quantization_step) {}

OptimalStep OptimalPredictionCache::lookup(double p1) {
    std::uint64_t key;
    double rep = p1;
    if (step_ > 0.0) {
        const auto q = static_cast<std::int64_t>(std::llround(p1 / step_));
        key = static_cast<std::uint64_t>(q);
        rep = std::min(1.0, std::max(0.0, static_cast<double>(q) * step_));
    } else {
        key = std::bit_cast<std::uint64_t>(p1);
    }
    auto it = map_.find(key);
    if (it != map_.end()) return it->second;
    const OptimalStep step = optimal_one_step(loss_, rep, opt_tol_);
    map_.emplace(key, step);
    return step;
}

ConstantStrategy::ConstantStrategy(Prediction gamma, std::string label)
    : Strategy(std::move(label)), gamma_(gamma) {
    if (gamma_ < 0.0 || gamma_ > 1.0)
        throw ConfigError("constant strategy: gamma must lie in [0,1]");
    if (label_.empty()) label_ = "const(" + fmt_double(gamma_) + ")";
}

Prediction ConstantStrategy::predict(std::span<const std::uint8_t>) const {
    return gamma_;
}

PointwiseOptimalStrategy::PointwiseOptimalStrategy(Game game, SourceModel source,
                                                   double opt_tol, std::string label)
    : Strategy(std::move(label)),
      game_(std::move(game)),
      source_(std::move(source)),
      opt_tol_(opt_tol) {
    if (label_.empty()) label_ = "optimal[" + source_.id() + "]";
}

Prediction PointwiseOptimalStrategy::predict(std::span<const std::uint8_t> history) const {
    // Strategies are total: impossible histories just reset the lenient
    // filter, and Markov predictions only ever need the last k bits.
    SourceModel::Filter f = source_.filter();
    std::span<const std::uint8_t> tail = history;
    if (source_.kind() == SourceModel::Kind::kMarkov &&
        history.size() > static_cast<std::size_t>(source_.markov_order()))
        tail = history.subspan(history.size() - source_.markov_order());
    for (std::uint8_t b : tail) f.observe(b);
    const double p1 = f.prob_next_one();

    const std::uint64_t key = std::bit_cast<std::uint64_t>(p1);
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = gamma_by_p1_.find(key);
        if (it != gamma_by_p1_.end()) return it->second;
    }
    const Prediction g = optimal_prediction(game_.loss, p1, opt_tol_);
    std::lock_guard<std::mutex> lock(mu_);
    gamma_by_p1_.emplace(key, g);
    return g;
}

LossLedger cumulative_loss(const Game& game, const Strategy& strategy,
                           std::span<const std::uint8_t> w) {
    LossLedger ledger;
    ledger.per_step.reserve(w.size());
    ledger.cumulative.reserve(w.size());
    double running = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const Prediction g = strategy.predict(w.first(i));
        const LossValue l = game.loss(w[i], g);
        ledger.per_step.push_back(l);
        running += l;
        ledger.cumulative.push_back(running);
    }
    return ledger;
}

std::string LossLedger::to_csv() const {
    std::ostringstream out;
    out << "step,loss,cumulative,rate\n";
    for (std::size_t i = 0; i < per_step.size(); ++i) {
        out << i << ',' << fmt_double(per_step[i]) << ',' << fmt_double(cumulative[i])
            << ',' << fmt_double(cumulative[i] / static_cast<double>(i + 1)) << '\n';
    }
    return out.str();
}

LossValue optimal_loss_function_g(const Game& game, const SourceModel& source, int k,
                                  std::span<const std::uint8_t> window, int next,
                                  double opt_tol) {
    if (window.size() != static_cast<std::size_t>(k))
        throw ConfigError("optimal_loss_function_g: window length must equal k");
    const double p1 = source.conditional_next_probability(window);
    return game.loss(next, optimal_prediction(game.loss, p1, opt_tol));
}

}  // namespace entrogame
