#include "entrogame/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "entrogame/csvio.hpp"
#include "entrogame/errors.hpp"
#include "entrogame/numeric.hpp"
#include "entrogame/rng.hpp"

namespace entrogame {

namespace {

// Draws bits with the exact draw pattern of SourceModel::sample_path while
// exposing the observable conditional P(next=1 | bits so far). HMM paths
// are simulated through the hidden chain; the filter tracks what a
// predictor can see.
class BitSampler {
  public:
    BitSampler(const SourceModel& source, std::uint64_t seed)
        : src_(&source), filter_(source.filter()), rng_(seed) {
        if (src_->kind() == SourceModel::Kind::kHmm)
            state_ = draw_categorical(src_->stationary_distribution(), rng_.uniform01());
    }

    double prob_next_one() const { return filter_.prob_next_one(); }

    int next_bit() {
        if (src_->kind() == SourceModel::Kind::kHmm) {
            const int bit = rng_.uniform01() < src_->emission_p1(state_) ? 1 : 0;
            state_ = draw_categorical(src_->transition_row(state_), rng_.uniform01());
            filter_.observe(bit);
            return bit;
        }
        const int bit = rng_.uniform01() < filter_.prob_next_one() ? 1 : 0;
        filter_.observe(bit);
        return bit;
    }

  private:
    const SourceModel* src_;
    SourceModel::Filter filter_;
    SplitMix64 rng_;
    std::size_t state_ = 0;
};

std::vector<std::size_t> effective_checkpoints(const ExperimentSpec& spec) {
    if (!spec.checkpoints.empty()) return spec.checkpoints;
    std::vector<std::size_t> cps;
    for (std::size_t c = 100; c < spec.n; c *= 10) cps.push_back(c);
    cps.push_back(spec.n);
    return cps;
}

double target_rate(const ExperimentSpec& spec) {
    return entropy_rate(spec.game, spec.source).rate_estimate;
}

void refuse_non_ergodic(const ExperimentSpec& spec) {
    const ErgodicityReport erg = spec.source.ergodicity();
    if (!erg.is_ergodic)
        throw PreconditionError("experiment requires an ergodic source (" + erg.detail +
                                ")");
}

// Runs fn(path_index) for every path, spreading paths across threads.
// Results must be written into per-path slots so assembly stays
// deterministic.
void run_paths(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    unsigned t = threads > 0 ? static_cast<unsigned>(threads)
                             : std::max(1u, std::thread::hardware_concurrency());
    t = std::min<unsigned>(t, static_cast<unsigned>(count));
    if (t <= 1) {
        for (std::size_t p = 0; p < count; ++p) fn(p);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(t);
    for (unsigned w = 0; w < t; ++w) {
        workers.emplace_back([&, w] {
            for (std::size_t p = w; p < count; p += t) fn(p);
        });
    }
    for (auto& th : workers) th.join();
}

void finalize_stats(ConvergenceResult& result, double target_h, std::size_t paths) {
    const std::size_t cps = result.checkpoints.size();
    result.mean_rate.assign(cps, 0.0);
    result.sd_rate.assign(cps, 0.0);
    for (std::size_t c = 0; c < cps; ++c) {
        double sum = 0.0;
        for (std::size_t p = 0; p < paths; ++p) sum += result.path_rates[p][c];
        const double mean = sum / static_cast<double>(paths);
        double ss = 0.0;
        for (std::size_t p = 0; p < paths; ++p) {
            const double d = result.path_rates[p][c] - mean;
            ss += d * d;
        }
        result.mean_rate[c] = mean;
        result.sd_rate[c] =
            paths > 1 ? std::sqrt(ss / static_cast<double>(paths - 1)) : 0.0;
    }
    result.target_h = target_h;
    result.final_abs_deviation = std::fabs(result.mean_rate.back() - target_h);
}

}  // namespace

void ExperimentSpec::validate() const {
    if (n < 1) throw ConfigError("experiment: n must be >= 1");
    if (path_count < 1) throw ConfigError("experiment: path count must be >= 1");
    std::size_t prev = 0;
    for (std::size_t c : checkpoints) {
        if (c <= prev) throw ConfigError("experiment: checkpoints must be increasing");
        if (c > n) throw ConfigError("experiment: checkpoints must not exceed n");
        prev = c;
    }
}

ConvergenceResult smb_experiment(const ExperimentSpec& spec) {
    spec.validate();
    refuse_non_ergodic(spec);

    ConvergenceResult result;
    result.checkpoints = effective_checkpoints(spec);
    result.path_rates.assign(spec.path_count, {});
    const std::size_t early = std::min<std::size_t>(spec.early_steps, spec.n);
    std::vector<std::vector<double>> early_losses(spec.path_count);
    if (spec.record_traces) result.traces.resize(spec.path_count);

    run_paths(spec.path_count, spec.threads, [&](std::size_t p) {
        BitSampler sampler(spec.source, derive_seed(spec.seed, p));
        OptimalPredictionCache cache(spec.game.loss, 1e-10);
        std::vector<std::uint8_t> history;
        if (spec.strategy) history.reserve(spec.n);

        std::vector<double>& rates = result.path_rates[p];
        rates.reserve(result.checkpoints.size());
        std::vector<double>& early_here = early_losses[p];
        early_here.reserve(early);

        double cum = 0.0;
        std::size_t next_cp = 0;
        for (std::size_t step = 0; step < spec.n; ++step) {
            Prediction gamma;
            if (spec.strategy) {
                gamma = spec.strategy->predict(history);
            } else {
                gamma = cache.lookup(sampler.prob_next_one()).gamma;
            }
            const int bit = sampler.next_bit();
            const double l0 = spec.game.loss(0, gamma);
            const double l1 = spec.game.loss(1, gamma);
            const double l = bit ? l1 : l0;
            cum += l;
            if (step < early) early_here.push_back(l);
            if (spec.record_traces) {
                SuperlossTrace& t = result.traces[p];
                t.push(t.value_at(step) + l0, t.value_at(step) + l1, bit);
            }
            if (spec.strategy) history.push_back(static_cast<std::uint8_t>(bit));
            if (next_cp < result.checkpoints.size() &&
                step + 1 == result.checkpoints[next_cp]) {
                rates.push_back(cum / static_cast<double>(step + 1));
                ++next_cp;
            }
        }
    });

    result.early_step_mean_loss.assign(early, 0.0);
    for (std::size_t k = 0; k < early; ++k) {
        double sum = 0.0;
        for (std::size_t p = 0; p < spec.path_count; ++p) sum += early_losses[p][k];
        result.early_step_mean_loss[k] = sum / static_cast<double>(spec.path_count);
    }
    finalize_stats(result, target_rate(spec), spec.path_count);
    return result;
}

AggregateResult predictive_rate_experiment(const ExperimentSpec& spec) {
    spec.validate();
    refuse_non_ergodic(spec);
    if (!spec.pool) throw ConfigError("predictive_rate_experiment: pool required");

    // Constructing the prototype validates mixability once up front.
    const Aggregator prototype(spec.game, spec.pool->experts, spec.pool->eta);
    const std::size_t n_experts = prototype.expert_count();

    AggregateResult out;
    ConvergenceResult& result = out.convergence;
    result.checkpoints = effective_checkpoints(spec);
    result.path_rates.assign(spec.path_count, {});
    out.best_expert_loss.assign(spec.path_count, {});
    out.aggregator_loss.assign(spec.path_count, {});
    const std::size_t early = std::min<std::size_t>(spec.early_steps, spec.n);
    std::vector<std::vector<double>> early_losses(spec.path_count);
    if (spec.record_traces) result.traces.resize(spec.path_count);

    run_paths(spec.path_count, spec.threads, [&](std::size_t p) {
        BitSampler sampler(spec.source, derive_seed(spec.seed, p));
        Aggregator agg = prototype;
        std::vector<std::uint8_t> history;
        history.reserve(spec.n);
        std::vector<double> expert_cum(n_experts, 0.0);

        std::vector<double>& rates = result.path_rates[p];
        std::vector<double>& best = out.best_expert_loss[p];
        std::vector<double>& aggl = out.aggregator_loss[p];
        std::vector<double>& early_here = early_losses[p];

        double cum = 0.0;
        std::size_t next_cp = 0;
        for (std::size_t step = 0; step < spec.n; ++step) {
            const Prediction gamma = agg.predict(history);
            const int bit = sampler.next_bit();
            const double l0 = spec.game.loss(0, gamma);
            const double l1 = spec.game.loss(1, gamma);
            const double l = bit ? l1 : l0;
            cum += l;
            if (step < early) early_here.push_back(l);
            if (spec.record_traces) {
                SuperlossTrace& t = result.traces[p];
                t.push(t.value_at(step) + l0, t.value_at(step) + l1, bit);
            }
            for (std::size_t i = 0; i < n_experts; ++i)
                expert_cum[i] +=
                    spec.game.loss(bit, agg.experts()[i]->predict(history));
            agg.update(history, bit);
            history.push_back(static_cast<std::uint8_t>(bit));

            if (next_cp < result.checkpoints.size() &&
                step + 1 == result.checkpoints[next_cp]) {
                rates.push_back(cum / static_cast<double>(step + 1));
                aggl.push_back(cum);
                best.push_back(*std::min_element(expert_cum.begin(), expert_cum.end()));
                ++next_cp;
            }
        }
    });

    result.early_step_mean_loss.assign(early, 0.0);
    for (std::size_t k = 0; k < early; ++k) {
        double sum = 0.0;
        for (std::size_t p = 0; p < spec.path_count; ++p) sum += early_losses[p][k];
        result.early_step_mean_loss[k] = sum / static_cast<double>(spec.path_count);
    }
    finalize_stats(result, target_rate(spec), spec.path_count);
    return out;
}

TwoSidedRateReport two_sided_rate_report(const ExperimentSpec& spec) {
    const AggregateResult agg = predictive_rate_experiment(spec);
    TwoSidedRateReport rep;
    rep.checkpoints = agg.convergence.checkpoints;
    rep.target_h = agg.convergence.target_h;

    const std::size_t cps = rep.checkpoints.size();
    const double ln_n_experts =
        std::log(static_cast<double>(spec.pool->experts.size()));
    for (std::size_t c = 0; c < cps; ++c) {
        rep.rate_minus_h.push_back(agg.convergence.mean_rate[c] - rep.target_h);
        double gap = 0.0;
        for (std::size_t p = 0; p < spec.path_count; ++p)
            gap += (agg.aggregator_loss[p][c] - agg.best_expert_loss[p][c]) /
                   static_cast<double>(rep.checkpoints[c]);
        rep.gap_to_best_expert.push_back(gap / static_cast<double>(spec.path_count));
        rep.regret_bound.push_back(ln_n_experts /
                                   (spec.pool->eta * static_cast<double>(rep.checkpoints[c])));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json ConvergenceResult::to_json() const {
    nlohmann::json j;
    j["schema"] = "entrogame.convergence_result/1";
    j["unit"] = "nats";
    j["checkpoints"] = checkpoints;
    j["mean_rate"] = mean_rate;
    j["sd_rate"] = sd_rate;
    j["target_H"] = target_h;
    j["final_abs_deviation"] = final_abs_deviation;
    j["early_step_mean_loss"] = early_step_mean_loss;
    nlohmann::json paths = nlohmann::json::array();
    for (std::size_t p = 0; p < path_rates.size(); ++p)
        paths.push_back({{"path", p}, {"rates", path_rates[p]}});
    j["paths"] = std::move(paths);
    return j;
}

std::string ConvergenceResult::to_csv() const {
    std::ostringstream out;
    out << "path,checkpoint,rate\n";
    for (std::size_t p = 0; p < path_rates.size(); ++p)
        for (std::size_t c = 0; c < checkpoints.size(); ++c)
            out << p << ',' << checkpoints[c] << ',' << fmt_double(path_rates[p][c])
                << '\n';
    return out.str();
}

nlohmann::json TwoSidedRateReport::to_json() const {
    nlohmann::json j;
    j["schema"] = "entrogame.two_sided_rate_report/1";
    j["unit"] = "nats";
    j["checkpoints"] = checkpoints;
    j["rate_minus_H"] = rate_minus_h;
    j["gap_to_best_expert"] = gap_to_best_expert;
    j["regret_bound"] = regret_bound;
    j["target_H"] = target_h;
    return j;
}

std::string TwoSidedRateReport::to_csv() const {
    std::ostringstream out;
    out << "checkpoint,rate_minus_H,gap_to_best_expert,regret_bound\n";
    for (std::size_t c = 0; c < checkpoints.size(); ++c)
        out << checkpoints[c] << ',' << fmt_double(rate_minus_h[c]) << ','
            << fmt_double(gap_to_best_expert[c]) << ',' << fmt_double(regret_bound[c])
            << '\n';
    return out.str();
}

}  // namespace entrogame
