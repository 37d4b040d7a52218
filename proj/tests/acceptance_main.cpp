// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Run directly or through ctest (-R acceptance).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "entrogame/aggregation.hpp"
#include "entrogame/entropy.hpp"
#include "entrogame/loss.hpp"
#include "entrogame/rng.hpp"
#include "entrogame/simulation.hpp"
#include "entrogame/sources.hpp"
#include "entrogame/strategies.hpp"

using namespace entrogame;

namespace {

const double kH02 = 0.5004024235381879;  // binary entropy of 0.2, nats
const double kH03 = 0.6108643020548935;  // binary entropy of 0.3, nats

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& why) {
        if (!cond && ok) {
            ok = false;
            detail = why;
        }
    }
};

Game log_game() { return Game{LossFunction::log_loss()}; }
Game square_game() { return Game{LossFunction::square_loss()}; }
Game abs_game() { return Game{LossFunction::absolute_loss()}; }

std::vector<Game> all_games() { return {log_game(), square_game(), abs_game()}; }

std::vector<SourceModel> all_sources() {
    return {
        SourceModel::bernoulli(0.3),
        SourceModel::markov(1, {0.2, 0.8}),
        SourceModel::hmm({{0.85, 0.15}, {0.25, 0.75}}, {0.1, 0.8}),
    };
}

double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

// --------------------------------------------------------------------------

void c1_shannon_correspondence(Check& c) {
    for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const double h1 = n_step_entropy(log_game(), SourceModel::bernoulli(p), 1);
        c.require(std::fabs(h1 - binary_entropy(p)) <= 1e-8,
                  "H1 mismatch at p=" + std::to_string(p));
    }
}

void c2_square_loss_entropy(Check& c) {
    for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const EntropyReport rep = entropy_rate(square_game(), SourceModel::bernoulli(p));
        c.require(std::fabs(rep.rate_estimate - p * (1.0 - p)) <= 1e-8,
                  "H mismatch at p=" + std::to_string(p));
    }
}

void c3_chain_rule(Check& c) {
    for (const Game& game : all_games())
        for (const SourceModel& src : all_sources())
            for (int total = 2; total <= 10; ++total)
                for (int m = 1; m < total; ++m) {
                    const int n = total - m;
                    const double lhs = n_step_entropy(game, src, total);
                    const double rhs = n_step_entropy(game, src, m) +
                                       conditional_entropy_direct(game, src, n, m);
                    c.require(std::fabs(lhs - rhs) <= 1e-8,
                              "chain rule off at m=" + std::to_string(m) +
                                  " n=" + std::to_string(n) + " (" + game.loss.name() +
                                  ", " + src.id() + ")");
                }
}

void c4_monotone_and_shannon(Check& c) {
    for (const Game& game : all_games())
        for (const SourceModel& src : all_sources()) {
            std::vector<double> h;
            for (int n = 0; n <= 10; ++n)
                h.push_back(one_step_conditional_entropy(game, src, n));
            for (int n = 1; n <= 10; ++n)
                c.require(h[n] <= h[n - 1] + 1e-9, "H_{1|n} increased at n=" +
                                                       std::to_string(n) + " (" +
                                                       game.loss.name() + ")");
            for (int n = 0; n <= 10; ++n)
                c.require(h[n] <= h[0] + 1e-9, "H_{1|n} above H_1");
        }
}

void c5_markov_exactness(Check& c) {
    const SourceModel m1 = SourceModel::markov(1, {0.2, 0.8});
    for (const Game& game : all_games()) {
        const double at_k = one_step_conditional_entropy(game, m1, 1);
        for (int n = 2; n <= 4; ++n)
            c.require(std::fabs(one_step_conditional_entropy(game, m1, n) - at_k) <= 1e-10,
                      "H_{1|n} not constant beyond k (" + game.loss.name() + ")");
    }
    const EntropyReport rep = entropy_rate(log_game(), m1);
    c.require(rep.converged && rep.converged_at == 1, "rate did not converge at n=k");
    c.require(std::fabs(rep.rate_estimate - kH02) <= 1e-6,
              "rate off the hand value 0.500402");

    const SourceModel m2 = SourceModel::markov(2, {0.1, 0.4, 0.6, 0.9});
    const EntropyReport rep2 = entropy_rate(log_game(), m2);
    c.require(rep2.converged && rep2.converged_at == 2, "order-2 rate not converged at 2");
}

void c6_bruteforce_equivalence(Check& c) {
    for (const Game& game : all_games())
        for (const SourceModel& src : all_sources())
            for (int n = 1; n <= 4; ++n)
                c.require(std::fabs(n_step_entropy_direct(game, src, n) -
                                    n_step_entropy(game, src, n)) <= 1e-9,
                          "direct vs chain H_n at n=" + std::to_string(n) + " (" +
                              game.loss.name() + ", " + src.id() + ")");
}

ConvergenceResult run_smb_markov03(std::uint64_t seed) {
    ExperimentSpec spec(log_game(), SourceModel::markov(1, {0.3, 0.7}));
    spec.n = 100000;
    spec.path_count = 20;
    spec.seed = seed;
    spec.checkpoints = {100, 1000, 10000, 100000};
    return smb_experiment(spec);
}

void c7_smb(Check& c, ConvergenceResult& out) {
    out = run_smb_markov03(20240283);
    c.require(std::fabs(out.mean_rate.back() - kH03) <= 0.01,
              "mean rate deviates from H by " +
                  std::to_string(std::fabs(out.mean_rate.back() - kH03)));
    int within = 0;
    for (const auto& rates : out.path_rates)
        if (std::fabs(rates.back() - kH03) <= 0.02) ++within;
    c.require(within >= 18, "only " + std::to_string(within) + "/20 paths within 0.02");
}

void c8_mixability(Check& c) {
    c.require(mixability_test(log_game(), std::exp(-1.0)).mixable,
              "log loss not mixable at eta=1");
    c.require(mixability_test(square_game(), std::exp(-2.0)).mixable,
              "square loss not mixable at eta=2");

    const auto log_eta = max_mixability_eta(log_game());
    c.require(log_eta && std::fabs(*log_eta - 1.0) <= 0.01, "log-loss eta* not ~1");
    const auto sq_eta = max_mixability_eta(square_game());
    c.require(sq_eta && std::fabs(*sq_eta - 2.0) <= 0.02, "square-loss eta* not ~2");

    for (int i = 0; i < 50; ++i) {
        const double eta = 0.01 * std::pow(3200.0, i / 49.0);
        c.require(!mixability_test(abs_game(), std::exp(-eta)).mixable,
                  "absolute loss mixable at eta=" + std::to_string(eta));
    }
}

void c9_aggregating_bound(Check& c) {
    for (const Game& game : {log_game(), square_game()}) {
        const double eta = game.loss.kind() == LossKind::kLogLoss ? 1.0 : 2.0;
        std::vector<StrategyPtr> experts;
        for (int i = 0; i <= 10; ++i)
            experts.push_back(std::make_shared<ConstantStrategy>(i / 10.0));
        experts.push_back(std::make_shared<PointwiseOptimalStrategy>(
            game, SourceModel::markov(1, {0.4, 0.6})));
        const double bound = std::log(12.0) / eta;

        const Aggregator prototype(game, experts, eta);
        for (std::uint64_t s = 0; s < 100; ++s) {
            SplitMix64 rng(derive_seed(424242, s));
            Aggregator agg = prototype;
            std::vector<double> expert_loss(experts.size(), 0.0);
            double agg_loss = 0.0;
            std::vector<std::uint8_t> hist;
            hist.reserve(1000);
            for (int t = 0; t < 1000; ++t) {
                const std::uint8_t b = rng.uniform01() < 0.5;
                agg_loss += game.loss(b, agg.predict(hist));
                for (std::size_t i = 0; i < experts.size(); ++i)
                    expert_loss[i] += game.loss(b, experts[i]->predict(hist));
                agg.update(hist, b);
                hist.push_back(b);
            }
            double best = kInf;
            for (double l : expert_loss) best = std::min(best, l);
            c.require(agg_loss <= best + bound + 1e-6,
                      "bound violated on string " + std::to_string(s) + " (" +
                          game.loss.name() + "): excess " +
                          std::to_string(agg_loss - best - bound));
        }
    }
}

AggregateResult run_aggregate_markov03(std::uint64_t seed, bool traces) {
    const SourceModel src = SourceModel::markov(1, {0.3, 0.7});
    ExperimentSpec spec(log_game(), src);
    spec.n = 100000;
    spec.path_count = 20;
    spec.seed = seed;
    spec.checkpoints = {100, 1000, 10000, 100000};
    spec.record_traces = traces;
    spec.pool = PoolSpec{default_expert_pool(log_game(), src, 2), 1.0};
    return predictive_rate_experiment(spec);
}

void c10_predictive_rate(Check& c, AggregateResult& out) {
    out = run_aggregate_markov03(20240283, true);
    c.require(std::fabs(out.convergence.mean_rate.back() - kH03) <= 0.01,
              "aggregator mean rate deviates by " +
                  std::to_string(std::fabs(out.convergence.mean_rate.back() - kH03)));
    for (std::size_t p = 0; p < out.convergence.traces.size(); ++p) {
        const SuperlossTrace& t = out.convergence.traces[p];
        c.require(verify_superloss_trace(log_game(), t, 1e-8),
                  "superloss conditions fail on path " + std::to_string(p));
        c.require(increment_bound_check(t, 10.0),
                  "increment bound fails on path " + std::to_string(p));
    }
}

void c11_determinism(Check& c, const ConvergenceResult& smb_first,
                     const AggregateResult& agg_first) {
    const ConvergenceResult smb_again = run_smb_markov03(20240283);
    c.require(smb_again.to_csv() == smb_first.to_csv(), "smb rerun CSV differs");
    const AggregateResult agg_again = run_aggregate_markov03(20240283, false);
    c.require(agg_again.convergence.to_csv() == agg_first.convergence.to_csv(),
              "aggregate rerun CSV differs");
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<void(Check&)> fn;
    };

    ConvergenceResult smb_result;
    AggregateResult agg_result;

    const std::vector<Criterion> criteria = {
        {1, "Shannon correspondence of log-loss H1 on the Bernoulli grid",
         c1_shannon_correspondence},
        {2, "square-loss entropy rate equals p(1-p)", c2_square_loss_entropy},
        {3, "chain rule H_{m+n} = H_m + H_{n|m} for m+n <= 10", c3_chain_rule},
        {4, "monotonicity and generalized Shannon inequality up to n=10",
         c4_monotone_and_shannon},
        {5, "Markov exactness and rate convergence at n = k", c5_markov_exactness},
        {6, "per-history brute force equals chain rule for n <= 4",
         c6_bruteforce_equivalence},
        {7, "optimal-strategy loss rate reaches H (20 paths of 1e5)",
         [&](Check& c) { c7_smb(c, smb_result); }},
        {8, "mixability geometry: log eta*=1, square eta*=2, absolute none",
         c8_mixability},
        {9, "aggregating bound: loss <= best expert + ln(N)/eta on 100 strings",
         c9_aggregating_bound},
        {10, "aggregator rate reaches H; superloss trace and increment bound",
         [&](Check& c) { c10_predictive_rate(c, agg_result); }},
        {11, "determinism: identical seeds give byte-identical CSV bodies",
         [&](Check& c) { c11_determinism(c, smb_result, agg_result); }},
    };

    int failures = 0;
    for (const Criterion& cr : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Check check;
        try {
            cr.fn(check);
        } catch (const std::exception& e) {
            check.ok = false;
            check.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        std::printf("[%s] criterion %2d: %s (%.2f s)%s%s\n",
                    check.ok ? "PASS" : "FAIL", cr.id, cr.name, secs,
                    check.ok ? "" : " -- ", check.ok ? "" : check.detail.c_str());
        std::fflush(stdout);
        if (!check.ok) ++failures;
    }

    if (failures == 0) {
        std::printf("acceptance: all %zu criteria passed\n", criteria.size());
        return 0;
    }
    std::printf("acceptance: %d criteria FAILED\n", failures);
    return 1;
}
