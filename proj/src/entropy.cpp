#include "entrogame/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "entrogame/csvio.hpp"
#include "entrogame/errors.hpp"
#include "entrogame/numeric.hpp"
#include "entrogame/rng.hpp"
#include "entrogame/strategies.hpp"

namespace entrogame {

namespace {

// Sum over all histories of length `depth_left` continuing the filter
// state: P(history) * min_gamma E[lambda | history]. The recursion adds
// subtree sums pairwise, which keeps the accumulated rounding at
// O(log n) * eps instead of O(2^n) * eps.
double enumerate_histories(SourceModel::Filter f, double prob, int depth_left,
                           OptimalPredictionCache& memo) {
    if (prob == 0.0) return 0.0;
    if (depth_left == 0) return prob * memo.lookup(f.prob_next_one()).value;
    const double p1 = f.prob_next_one();
    double total = 0.0;
    if (p1 < 1.0) {
        SourceModel::Filter f0 = f;
        f0.observe(0);
        total += enumerate_histories(std::move(f0), prob * (1.0 - p1), depth_left - 1, memo);
    }
    if (p1 > 0.0) {
        f.observe(1);
        total += enumerate_histories(std::move(f), prob * p1, depth_left - 1, memo);
    }
    return total;
}

double h_step_value(const SourceModel& source, int n, OptimalPredictionCache& memo,
                    int n_max_exact) {
    if (n < 0) throw ConfigError("one_step_conditional_entropy: n must be >= 0");
    if (n > n_max_exact)
        throw PreconditionError(
            "exact enumeration capped at n = " + std::to_string(n_max_exact) +
            "; use monte_carlo_conditional_entropy for longer conditioning");

    switch (source.kind()) {
        case SourceModel::Kind::kBernoulli:
            // i.i.d.: every history has the same conditional law.
            return memo.lookup(source.conditional_next_probability({})).value;
        case SourceModel::Kind::kMarkov: {
            const int k = source.markov_order();
            if (n >= k) {
                // Stationarity makes the time-n context law the stationary
                // law, so the sum over histories collapses to the contexts.
                const std::vector<double> pi = source.stationary_distribution();
                double total = 0.0;
                for (std::size_t c = 0; c < pi.size(); ++c) {
                    if (pi[c] == 0.0) continue;
                    std::vector<std::uint8_t> ctx(k);
                    for (int i = 0; i < k; ++i)
                        ctx[i] = static_cast<std::uint8_t>((c >> (k - 1 - i)) & 1);
                    total += pi[c] *
                             memo.lookup(source.conditional_next_probability(ctx)).value;
                }
                return total;
            }
            return enumerate_histories(source.filter(), 1.0, n, memo);
        }
        case SourceModel::Kind::kHmm:
            return enumerate_histories(source.filter(), 1.0, n, memo);
    }
    return 0.0;
}

double default_rate_tol(const SourceModel& source) {
    // HMM conditionals only converge geometrically.
    return source.kind() == SourceModel::Kind::kHmm ? 1e-6 : 1e-9;
}

}  // namespace

double one_step_conditional_entropy(const Game& game, const SourceModel& source, int n,
                                    double opt_tol, int n_max_exact) {
    OptimalPredictionCache memo(game.loss, opt_tol);
    return h_step_value(source, n, memo, n_max_exact);
}

double n_step_entropy(const Game& game, const SourceModel& source, int n,
                      double opt_tol, int n_max_exact) {
    if (n < 1) throw ConfigError("n_step_entropy: n must be >= 1");
    OptimalPredictionCache memo(game.loss, opt_tol);
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += h_step_value(source, i, memo, n_max_exact);
    return total;
}

double conditional_entropy(const Game& game, const SourceModel& source, int n, int m,
                           double opt_tol, int n_max_exact) {
    if (n < 0 || m < 0) throw ConfigError("conditional_entropy: n, m must be >= 0");
    OptimalPredictionCache memo(game.loss, opt_tol);
    double total = 0.0;
    for (int i = m; i < m + n; ++i)
        total += h_step_value(source, i, memo, n_max_exact);
    return total;
}

// ---------------------------------------------------------------------------
// Direct-definition oracles. Whole strings are enumerated and every
// conditional is a ratio of string probabilities; nothing is shared with
// the incremental route above except the loss itself.

namespace {

constexpr int kDirectCap = 12;

struct PrefixMinimizer {
    const Game& game;
    const SourceModel& source;
    double opt_tol;
    std::unordered_map<std::uint64_t, double> gamma_by_prefix;

    double gamma_for(std::span<const std::uint8_t> prefix) {
        std::uint64_t key = 1;  // length tag
        for (std::uint8_t b : prefix) key = (key << 1) | b;
        auto it = gamma_by_prefix.find(key);
        if (it != gamma_by_prefix.end()) return it->second;

        std::vector<std::uint8_t> ext(prefix.begin(), prefix.end());
        ext.push_back(1);
        const double pw = source.string_probability(prefix);
        const double p1 = source.string_probability(ext) / pw;
        const double g = optimal_prediction(game.loss, p1, opt_tol);
        gamma_by_prefix.emplace(key, g);
        return g;
    }
};

double direct_sum(const Game& game, const SourceModel& source, int len, int start,
                  double opt_tol) {
    if (len > kDirectCap)
        throw PreconditionError("direct-definition oracle capped at n + m = " +
                                std::to_string(kDirectCap));
    PrefixMinimizer minimizer{game, source, opt_tol, {}};
    double total = 0.0;
    std::vector<std::uint8_t> bits(len);
    for (std::uint64_t z = 0; z < (std::uint64_t{1} << len); ++z) {
        for (int i = 0; i < len; ++i)
            bits[i] = static_cast<std::uint8_t>((z >> (len - 1 - i)) & 1);
        const double pz = source.string_probability(bits);
        if (pz == 0.0) continue;
        double contrib = 0.0;
        for (int i = start; i < len; ++i) {
            const double g = minimizer.gamma_for(std::span(bits).first(i));
            contrib += game.loss(bits[i], g);
        }
        total += pz * contrib;
    }
    return total;
}

}  // namespace

double n_step_entropy_direct(const Game& game, const SourceModel& source, int n,
                             double opt_tol) {
    if (n < 1) throw ConfigError("n_step_entropy_direct: n must be >= 1");
    return direct_sum(game, source, n, 0, opt_tol);
}

double conditional_entropy_direct(const Game& game, const SourceModel& source, int n,
                                  int m, double opt_tol) {
    if (n < 0 || m < 0) throw ConfigError("conditional_entropy_direct: n, m >= 0");
    return direct_sum(game, source, n + m, m, opt_tol);
}

// ---------------------------------------------------------------------------

EntropyReport entropy_rate(const Game& game, const SourceModel& source, double tol,
                           int n_cap, double opt_tol) {
    EntropyReport rep;
    rep.tolerance = tol > 0.0 ? tol : default_rate_tol(source);
    const int cap = std::max(0, std::min(n_cap, kNMaxExact));

    OptimalPredictionCache memo(game.loss, opt_tol);
    for (int n = 0; n <= cap; ++n) {
        rep.h_step.push_back(h_step_value(source, n, memo, kNMaxExact));
        if (n >= 1 &&
            std::fabs(rep.h_step[n] - rep.h_step[n - 1]) < rep.tolerance) {
            rep.converged = true;
            rep.converged_at = n - 1;
            break;
        }
    }

    rep.n_max = static_cast<int>(rep.h_step.size());
    rep.h_n.resize(rep.h_step.size());
    double run = 0.0;
    for (std::size_t i = 0; i < rep.h_step.size(); ++i) {
        run += rep.h_step[i];
        rep.h_n[i] = run;
    }
    rep.rate_estimate = rep.h_step.back();
    rep.bracket_low = rep.h_step.back();
    rep.bracket_high = rep.h_step.front();
    return rep;
}

McEstimate monte_carlo_conditional_entropy(const Game& game, const SourceModel& source,
                                           int n, std::uint64_t samples,
                                           std::uint64_t seed, bool exhaustive_debug,
                                           double opt_tol) {
    if (samples < 1) throw ConfigError("monte_carlo_conditional_entropy: samples >= 1");
    OptimalPredictionCache memo(game.loss, opt_tol);

    if (exhaustive_debug || n == 0) {
        McEstimate est;
        est.value = n == 0 ? memo.lookup(source.conditional_next_probability({})).value
                           : enumerate_histories(source.filter(), 1.0, n, memo);
        est.std_error = 0.0;
        est.samples = n == 0 ? 1 : (std::uint64_t{1} << n);
        return est;
    }

    double sum = 0.0, sumsq = 0.0;
    for (std::uint64_t s = 0; s < samples; ++s) {
        const PathSample path = source.sample_path(static_cast<std::size_t>(n),
                                                   derive_seed(seed, s));
        SourceModel::Filter f = source.filter();
        for (std::uint8_t b : path.bits) f.observe(b);
        const double v = memo.lookup(f.prob_next_one()).value;
        sum += v;
        sumsq += v * v;
    }
    McEstimate est;
    est.samples = samples;
    est.value = sum / static_cast<double>(samples);
    if (samples > 1) {
        const double var =
            std::max(0.0, (sumsq - sum * est.value) / static_cast<double>(samples - 1));
        est.std_error = std::sqrt(var / static_cast<double>(samples));
    }
    return est;
}

// ---------------------------------------------------------------------------

nlohmann::json EntropyReport::to_json() const {
    nlohmann::json j;
    j["schema"] = "entrogame.entropy_report/1";
    j["unit"] = "nats";
    j["n_max"] = n_max;
    j["H_step"] = h_step;
    j["H_n"] = h_n;
    j["rate_estimate"] = rate_estimate;
    j["bracket"] = {bracket_low, bracket_high};
    j["converged"] = converged;
    j["converged_at"] = converged_at;
    j["tolerance"] = tolerance;
    return j;
}

std::string EntropyReport::to_csv() const {
    std::ostringstream out;
    out << "n,H_step\n";
    for (std::size_t i = 0; i < h_step.size(); ++i)
        out << i << ',' << fmt_double(h_step[i]) << '\n';
    return out.str();
}

}  // namespace entrogame
