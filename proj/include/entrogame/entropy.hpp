#ifndef ENTROGAME_ENTROPY_HPP
#define ENTROGAME_ENTROPY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "entrogame/loss.hpp"
#include "entrogame/sources.hpp"

namespace entrogame {

// Exact enumeration cap: 2^22 histories is the largest exact sum we run at
// desk scale; beyond it use monte_carlo_conditional_entropy.
inline constexpr int kNMaxExact = 22;

struct EntropyReport {
    int n_max = 0;                       // number of H_{1|n} values computed
    std::vector<double> h_step;          // H_{1|0} .. H_{1|n_max-1}
    std::vector<double> h_n;             // H_1 .. H_{n_max} (prefix sums)
    double rate_estimate = 0.0;          // last H_{1|n}
    double bracket_low = 0.0;            // H_{1|n_max-1}, the running estimate
    double bracket_high = 0.0;           // H_1, upper bound for the rate
    bool converged = false;
    int converged_at = -1;               // smallest n with a stabilized H_{1|n}
    double tolerance = 0.0;

    nlohmann::json to_json() const;
    std::string to_csv() const;  // columns: n, H_step
};

// H_{1|n}: expected optimal one-step loss after n observed bits. Exact sum
// over all length-n histories with a per-history convex minimization;
// zero-probability histories contribute nothing.
double one_step_conditional_entropy(const Game& game, const SourceModel& source,
                                    int n, double opt_tol = 1e-10,
                                    int n_max_exact = kNMaxExact);

// H_n = sum of H_{1|i} for i < n (chain rule).
double n_step_entropy(const Game& game, const SourceModel& source, int n,
                      double opt_tol = 1e-10, int n_max_exact = kNMaxExact);

// H_{n|m} = H_{n+m} - H_m via the chain rule.
double conditional_entropy(const Game& game, const SourceModel& source, int n,
                           int m, double opt_tol = 1e-10,
                           int n_max_exact = kNMaxExact);

// Independent oracle routes. These enumerate whole strings and take every
// conditional as a ratio of string probabilities, with a fresh minimization
// per prefix — no shared code path with the incremental-filter computation
// above. Exponential in n; capped at n + m <= 12.
double n_step_entropy_direct(const Game& game, const SourceModel& source, int n,
                             double opt_tol = 1e-10);
double conditional_entropy_direct(const Game& game, const SourceModel& source,
                                  int n, int m, double opt_tol = 1e-10);

// Iterates H_{1|n} until successive values differ by less than tol (or
// n_cap is hit). converged_at is the first n whose value already equals the
// limit within tol; for an order-k Markov source this is exactly k.
// Defaults: tol 1e-9 (1e-6 for HMM sources), n_cap 20.
EntropyReport entropy_rate(const Game& game, const SourceModel& source,
                           double tol = -1.0, int n_cap = 20,
                           double opt_tol = 1e-10);

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t samples = 0;
};

// Monte Carlo estimate of H_{1|n}: sample histories from the source and
// average the per-history optimal expected loss. With exhaustive_debug the
// estimator enumerates all of Sigma^n weighted exactly instead of sampling
// (std_error 0), which must reproduce the exact sum.
McEstimate monte_carlo_conditional_entropy(const Game& game,
                                           const SourceModel& source, int n,
                                           std::uint64_t samples,
                                           std::uint64_t seed,
                                           bool exhaustive_debug = false,
                                           double opt_tol = 1e-10);

}  // namespace entrogame

#endif
