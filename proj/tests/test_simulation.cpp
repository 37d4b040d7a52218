#include <doctest.h>

#include <cmath>
#include <vector>

#include "entrogame/errors.hpp"
#include "entrogame/simulation.hpp"

using namespace entrogame;

namespace {

Game log_game() { return Game{LossFunction::log_loss()}; }
Game square_game() { return Game{LossFunction::square_loss()}; }

SourceModel symmetric_markov(double q) { return SourceModel::markov(1, {q, 1.0 - q}); }

const double kH03 = 0.6108643020548935;  // binary entropy of 0.3 in nats

}  // namespace

TEST_CASE("a deterministic source incurs zero optimal loss on every path") {
    ExperimentSpec spec(log_game(), SourceModel::bernoulli(1.0));
    spec.n = 1000;
    spec.path_count = 3;
    spec.checkpoints = {10, 100, 1000};
    const ConvergenceResult res = smb_experiment(spec);
    for (const auto& path : res.path_rates)
        for (double r : path) CHECK(r == 0.0);
    CHECK(res.target_h == 0.0);
}

TEST_CASE("loss rates of the optimal strategy approach the entropy rate") {
    ExperimentSpec spec(log_game(), symmetric_markov(0.3));
    spec.n = 20000;
    spec.path_count = 5;
    spec.seed = 77;
    const ConvergenceResult res = smb_experiment(spec);
    CHECK(res.target_h == doctest::Approx(kH03).epsilon(1e-9));
    CHECK(std::fabs(res.mean_rate.back() - kH03) < 0.03);

    ExperimentSpec sq(square_game(), SourceModel::bernoulli(0.5));
    sq.n = 20000;
    sq.path_count = 5;
    const ConvergenceResult res2 = smb_experiment(sq);
    CHECK(std::fabs(res2.mean_rate.back() - 0.25) < 0.01);
}

TEST_CASE("experiments are bit-reproducible") {
    ExperimentSpec spec(log_game(), symmetric_markov(0.3));
    spec.n = 5000;
    spec.path_count = 4;
    spec.seed = 5;
    const ConvergenceResult a = smb_experiment(spec);
    const ConvergenceResult b = smb_experiment(spec);
    CHECK(a.to_csv() == b.to_csv());
    CHECK(a.path_rates == b.path_rates);

    spec.seed = 6;
    const ConvergenceResult c = smb_experiment(spec);
    CHECK(a.to_csv() != c.to_csv());
}

TEST_CASE("threaded runs assemble the same result") {
    ExperimentSpec spec(log_game(), symmetric_markov(0.3));
    spec.n = 2000;
    spec.path_count = 6;
    spec.threads = 1;
    const ConvergenceResult serial = smb_experiment(spec);
    spec.threads = 3;
    const ConvergenceResult parallel = smb_experiment(spec);
    CHECK(serial.to_csv() == parallel.to_csv());
}

TEST_CASE("non-ergodic sources and invalid specs are refused") {
    ExperimentSpec bad(log_game(), SourceModel::markov(1, {0.0, 1.0}));
    bad.n = 10;
    CHECK_THROWS_AS(smb_experiment(bad), PreconditionError);

    ExperimentSpec unsorted(log_game(), symmetric_markov(0.3));
    unsorted.n = 100;
    unsorted.checkpoints = {50, 20};
    CHECK_THROWS_AS(smb_experiment(unsorted), ConfigError);

    ExperimentSpec no_pool(log_game(), symmetric_markov(0.3));
    no_pool.n = 100;
    CHECK_THROWS_AS(predictive_rate_experiment(no_pool), ConfigError);
}

TEST_CASE("early per-step mean losses match the conditional entropies") {
    ExperimentSpec spec(log_game(), symmetric_markov(0.2));
    spec.n = 16;
    spec.path_count = 400;
    spec.seed = 11;
    spec.early_steps = 8;
    const ConvergenceResult res = smb_experiment(spec);
    // step-k loss has mean H_{1|k}; sd of the mean <= max-loss/sqrt(paths)
    for (std::size_t k = 0; k < 8; ++k) {
        const double exact =
            one_step_conditional_entropy(log_game(), symmetric_markov(0.2), static_cast<int>(k));
        const double se = 1.7 / std::sqrt(400.0);  // losses here are <= -ln 0.2
        CHECK(std::fabs(res.early_step_mean_loss[k] - exact) <= 3.0 * se);
    }
}

TEST_CASE("path-rate dispersion shrinks as the horizon grows") {
    ExperimentSpec spec(log_game(), symmetric_markov(0.3));
    spec.n = 100000;
    spec.path_count = 20;
    spec.seed = 42;
    spec.checkpoints = {1000, 10000, 100000};
    const ConvergenceResult res = smb_experiment(spec);
    for (std::size_t c = 1; c < res.checkpoints.size(); ++c) {
        const double scale = std::sqrt(static_cast<double>(res.checkpoints[c - 1]) /
                                       static_cast<double>(res.checkpoints[c]));
        CHECK(res.sd_rate[c] <= 1.5 * scale * res.sd_rate[c - 1]);
    }
}

TEST_CASE("aggregator rates converge and respect the regret bound everywhere") {
    ExperimentSpec spec(log_game(), symmetric_markov(0.3));
    spec.n = 20000;
    spec.path_count = 5;
    spec.seed = 9;
    spec.pool = PoolSpec{default_expert_pool(log_game(), symmetric_markov(0.3), 2), 1.0};
    const AggregateResult res = predictive_rate_experiment(spec);
    CHECK(std::fabs(res.convergence.mean_rate.back() - kH03) < 0.03);

    const double bound = std::log(3.0) / 1.0;
    for (std::size_t p = 0; p < spec.path_count; ++p)
        for (std::size_t c = 0; c < res.convergence.checkpoints.size(); ++c)
            CHECK(res.aggregator_loss[p][c] <= res.best_expert_loss[p][c] + bound + 1e-6);
}

TEST_CASE("square-loss aggregation over constant experts finds p(1-p)") {
    const SourceModel src = SourceModel::bernoulli(0.3);
    ExperimentSpec spec(square_game(), src);
    spec.n = 30000;
    spec.path_count = 6;
    spec.seed = 31;
    std::vector<StrategyPtr> experts;
    for (int i = 0; i <= 10; ++i)
        experts.push_back(std::make_shared<ConstantStrategy>(i / 10.0));
    spec.pool = PoolSpec{experts, 2.0};
    const AggregateResult res = predictive_rate_experiment(spec);
    CHECK(res.convergence.target_h == doctest::Approx(0.21).epsilon(1e-9));
    CHECK(std::fabs(res.convergence.mean_rate.back() - 0.21) < 0.005);
}

TEST_CASE("a single-expert pool reproduces the optimal-strategy experiment") {
    const SourceModel src = symmetric_markov(0.3);
    ExperimentSpec smb_spec(log_game(), src);
    smb_spec.n = 3000;
    smb_spec.path_count = 3;
    smb_spec.seed = 21;
    const ConvergenceResult smb = smb_experiment(smb_spec);

    ExperimentSpec agg_spec(log_game(), src);
    agg_spec.n = 3000;
    agg_spec.path_count = 3;
    agg_spec.seed = 21;
    agg_spec.pool = PoolSpec{
        {std::make_shared<PointwiseOptimalStrategy>(log_game(), src)}, 1.0};
    const AggregateResult agg = predictive_rate_experiment(agg_spec);

    CHECK(agg.convergence.to_csv() == smb.to_csv());  // byte-identical trajectories
}

TEST_CASE("non-mixable pool configurations are refused") {
    ExperimentSpec spec(Game{LossFunction::absolute_loss()}, symmetric_markov(0.3));
    spec.n = 100;
    spec.pool = PoolSpec{{std::make_shared<ConstantStrategy>(0.5)}, 1.0};
    CHECK_THROWS_AS(predictive_rate_experiment(spec), PreconditionError);
}

TEST_CASE("two-sided report: gap to best expert is tiny and zero for one expert") {
    const SourceModel src = symmetric_markov(0.3);
    ExperimentSpec spec(log_game(), src);
    spec.n = 10000;
    spec.path_count = 3;
    spec.seed = 2;
    spec.pool = PoolSpec{default_expert_pool(log_game(), src, 1), 1.0};
    const TwoSidedRateReport rep = two_sided_rate_report(spec);
    for (std::size_t c = 0; c < rep.checkpoints.size(); ++c) {
        CHECK(rep.gap_to_best_expert[c] >= -1e-9);
        CHECK(rep.gap_to_best_expert[c] <= rep.regret_bound[c] + 1e-9);
    }
    CHECK(std::fabs(rep.rate_minus_h.back()) < 0.05);

    ExperimentSpec solo(log_game(), src);
    solo.n = 2000;
    solo.path_count = 2;
    solo.pool =
        PoolSpec{{std::make_shared<PointwiseOptimalStrategy>(log_game(), src)}, 1.0};
    const TwoSidedRateReport solo_rep = two_sided_rate_report(solo);
    for (double g : solo_rep.gap_to_best_expert) CHECK(g == 0.0);
}

TEST_CASE("recorded traces verify as superloss processes") {
    const SourceModel src = symmetric_markov(0.3);
    ExperimentSpec spec(log_game(), src);
    spec.n = 500;
    spec.path_count = 2;
    spec.record_traces = true;
    spec.pool = PoolSpec{default_expert_pool(log_game(), src, 1), 1.0};
    const AggregateResult res = predictive_rate_experiment(spec);
    REQUIRE(res.convergence.traces.size() == 2);
    for (const SuperlossTrace& t : res.convergence.traces) {
        CHECK(verify_superloss_trace(log_game(), t, 1e-8));
        CHECK(increment_bound_check(t, 10.0));
    }
    // the trace cumulative equals the aggregator cumulative loss
    CHECK(res.convergence.traces[0].value_at(spec.n) ==
          doctest::Approx(res.aggregator_loss[0].back()).epsilon(1e-12));
}

TEST_CASE("convergence results serialize") {
    ExperimentSpec spec(log_game(), symmetric_markov(0.3));
    spec.n = 200;
    spec.path_count = 2;
    spec.checkpoints = {100, 200};
    const ConvergenceResult res = smb_experiment(spec);
    CHECK(res.to_csv().find("path,checkpoint,rate") == 0);
    const auto j = res.to_json();
    CHECK(j["unit"] == "nats");
    CHECK(j["checkpoints"].size() == 2);
    CHECK(j["paths"].size() == 2);
}
