#include "entrogame/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "entrogame/aggregation.hpp"
#include "entrogame/csvio.hpp"
#include "entrogame/entropy.hpp"
#include "entrogame/errors.hpp"
#include "entrogame/loss.hpp"
#include "entrogame/numeric.hpp"
#include "entrogame/rng.hpp"
#include "entrogame/simulation.hpp"
#include "entrogame/sources.hpp"
#include "entrogame/strategies.hpp"

namespace entrogame {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json load_json_spec(const std::string& spec, const char* what) {
    try {
        if (!spec.empty() && spec.front() == '{') return json::parse(spec);
        std::ifstream in(spec);
        if (!in) throw ConfigError(std::string(what) + ": cannot open file '" + spec + "'");
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string(what) + ": invalid JSON (" + e.what() + ")");
    }
}

Game load_game(const std::string& spec) {
    if (spec == "logloss") return Game{LossFunction::log_loss()};
    if (spec == "squareloss") return Game{LossFunction::square_loss()};
    if (spec == "absloss") return Game{LossFunction::absolute_loss()};
    return Game{LossFunction::from_json(load_json_spec(spec, "game"))};
}

SourceModel load_source(const std::string& spec) {
    if (spec.empty()) throw ConfigError("a --source descriptor is required");
    return SourceModel::from_json(load_json_spec(spec, "source"));
}

double display_value(double nats, const std::string& unit) {
    return unit == "bits" ? nats / std::log(2.0) : nats;
}

void write_artifact(const fs::path& dir, const std::string& name,
                    const std::string& kind, const std::string& body) {
    write_text_file(dir / name, csv_schema_line(kind) + csv_timestamp_line() + body);
}

void write_json_artifact(const fs::path& dir, const std::string& name, const json& j) {
    write_text_file(dir / name, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

int cmd_entropy(const RunConfig& cfg) {
    const Game game = load_game(cfg.game_spec);
    const SourceModel source = load_source(cfg.source_spec);
    const EntropyReport rep = entropy_rate(game, source, cfg.tol, cfg.n_cap);

    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    write_json_artifact(dir, "entropy_report.json", rep.to_json());
    write_artifact(dir, "entropy_report.csv", "entropy_report", rep.to_csv());

    std::cout << "entropy rate estimate: "
              << fmt_double(display_value(rep.rate_estimate, cfg.unit)) << " " << cfg.unit
              << (rep.converged ? " (converged at n=" + std::to_string(rep.converged_at) + ")"
                                : " (not converged)")
              << "\n";
    return kExitOk;
}

int cmd_smb(const RunConfig& cfg) {
    ExperimentSpec spec(load_game(cfg.game_spec), load_source(cfg.source_spec));
    spec.n = cfg.n;
    spec.path_count = cfg.paths;
    spec.seed = cfg.seed;
    spec.checkpoints = cfg.checkpoints;
    spec.threads = cfg.threads;

    const ConvergenceResult res = smb_experiment(spec);
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    write_json_artifact(dir, "smb_result.json", res.to_json());
    write_artifact(dir, "smb_result.csv", "convergence_result", res.to_csv());

    std::cout << "mean final rate: "
              << fmt_double(display_value(res.mean_rate.back(), cfg.unit)) << " " << cfg.unit
              << ", target H: " << fmt_double(display_value(res.target_h, cfg.unit))
              << ", |dev|: " << fmt_double(display_value(res.final_abs_deviation, cfg.unit))
              << "\n";
    return kExitOk;
}

int cmd_aggregate(const RunConfig& cfg) {
    ExperimentSpec spec(load_game(cfg.game_spec), load_source(cfg.source_spec));
    spec.n = cfg.n;
    spec.path_count = cfg.paths;
    spec.seed = cfg.seed;
    spec.checkpoints = cfg.checkpoints;
    spec.threads = cfg.threads;
    spec.record_traces = cfg.export_trace;

    PoolSpec pool;
    if (!cfg.pool_spec.empty()) {
        pool = pool_from_json(spec.game, load_json_spec(cfg.pool_spec, "pool"));
        if (cfg.eta > 0.0) pool.eta = cfg.eta;  // flag overrides the descriptor
    } else if (cfg.pool_default_kmax >= 0) {
        pool.experts =
            default_expert_pool(spec.game, spec.source, cfg.pool_default_kmax, true);
        pool.eta = cfg.eta > 0.0 ? cfg.eta : 1.0;
    } else {
        throw ConfigError("aggregate: provide --pool or --pool-default");
    }
    spec.pool = std::move(pool);

    const AggregateResult res = predictive_rate_experiment(spec);
    const TwoSidedRateReport two = two_sided_rate_report(spec);

    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    write_json_artifact(dir, "aggregate_result.json", res.convergence.to_json());
    write_artifact(dir, "aggregate_result.csv", "convergence_result",
                   res.convergence.to_csv());
    write_artifact(dir, "two_sided.csv", "two_sided_rate_report", two.to_csv());
    if (cfg.export_trace && !res.convergence.traces.empty())
        write_artifact(dir, "trace_path0.csv", "superloss_trace",
                       res.convergence.traces.front().to_csv());

    std::cout << "aggregator mean final rate: "
              << fmt_double(display_value(res.convergence.mean_rate.back(), cfg.unit)) << " "
              << cfg.unit << ", target H: "
              << fmt_double(display_value(res.convergence.target_h, cfg.unit)) << "\n";
    return kExitOk;
}

int cmd_mixability(const RunConfig& cfg) {
    const Game game = load_game(cfg.game_spec);
    if (cfg.eta_grid < 1) throw ConfigError("mixability: --eta-grid must be >= 1");
    if (!(cfg.eta_min > 0.0) || !(cfg.eta_max > cfg.eta_min))
        throw ConfigError("mixability: need 0 < eta-min < eta-max");

    std::ostringstream body;
    body << "eta,beta,mixable,max_concavity_violation\n";
    json rows = json::array();
    const double ratio = std::pow(cfg.eta_max / cfg.eta_min,
                                  cfg.eta_grid > 1 ? 1.0 / (cfg.eta_grid - 1) : 0.0);
    double eta = cfg.eta_min;
    for (int i = 0; i < cfg.eta_grid; ++i) {
        const MixabilityResult r =
            mixability_test(game, std::exp(-eta), cfg.resolution);
        body << fmt_double(r.eta) << ',' << fmt_double(r.beta) << ','
             << (r.mixable ? "true" : "false") << ','
             << fmt_double(r.max_concavity_violation) << '\n';
        rows.push_back({{"eta", r.eta},
                        {"beta", r.beta},
                        {"mixable", r.mixable},
                        {"max_concavity_violation", r.max_concavity_violation}});
        eta *= ratio;
    }
    const std::optional<double> eta_star = max_mixability_eta(game, cfg.resolution);

    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    write_artifact(dir, "mixability.csv", "mixability_sweep", body.str());
    json j;
    j["schema"] = "entrogame.mixability_sweep/1";
    j["rows"] = std::move(rows);
    if (eta_star)
        j["eta_star"] = *eta_star;
    else
        j["eta_star"] = nullptr;
    write_json_artifact(dir, "mixability.json", j);

    std::cout << "game '" << game.loss.name() << "': "
              << (eta_star ? "mixable, eta* ~= " + fmt_double(*eta_star)
                           : "not mixable for any tested eta")
              << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// verify: one named check per structural identity the library promises.

struct VerifyContext {
    bool quick = false;
    std::uint64_t seed = 0;
    std::ostringstream table;
    bool all_ok = true;

    void record(const std::string& name, bool ok, const std::string& detail = "") {
        table << (ok ? "PASS  " : "FAIL  ") << name;
        if (!detail.empty()) table << "  (" << detail << ")";
        table << "\n";
        std::cout << (ok ? "PASS  " : "FAIL  ") << name << "\n";
        all_ok = all_ok && ok;
    }
};

std::vector<SourceModel> verify_sources() {
    return {
        SourceModel::bernoulli(0.3),
        SourceModel::markov(1, {0.2, 0.8}),  // symmetric flip q = 0.2
        SourceModel::hmm({{0.85, 0.15}, {0.25, 0.75}}, {0.1, 0.8}),
    };
}

std::vector<Game> verify_games() {
    return {Game{LossFunction::log_loss()}, Game{LossFunction::square_loss()},
            Game{LossFunction::absolute_loss()}};
}

void verify_stationarity(VerifyContext& ctx) {
    const int max_len = ctx.quick ? 6 : 10;
    bool ok = true;
    for (const SourceModel& src : verify_sources()) {
        for (int len = 0; len <= max_len && ok; ++len) {
            double total = 0.0;
            for (std::uint64_t w = 0; w < (std::uint64_t{1} << len); ++w) {
                std::vector<std::uint8_t> bits(len);
                for (int i = 0; i < len; ++i)
                    bits[i] = static_cast<std::uint8_t>((w >> (len - 1 - i)) & 1);
                const double pw = src.string_probability(bits);
                total += pw;

                double left = 0.0, right = 0.0;
                for (int b = 0; b < 2; ++b) {
                    std::vector<std::uint8_t> pre(bits.size() + 1);
                    pre[0] = static_cast<std::uint8_t>(b);
                    std::copy(bits.begin(), bits.end(), pre.begin() + 1);
                    left += src.string_probability(pre);
                    std::vector<std::uint8_t> post(bits);
                    post.push_back(static_cast<std::uint8_t>(b));
                    right += src.string_probability(post);
                }
                if (std::fabs(left - pw) > 1e-10 || std::fabs(right - pw) > 1e-10)
                    ok = false;
            }
            if (std::fabs(total - 1.0) > 1e-10) ok = false;
        }
    }
    ctx.record("stationarity: sum_b P(bw) = P(w) = sum_b P(wb), normalization", ok);
}

void verify_entropy_inequalities(VerifyContext& ctx) {
    const int max_n = ctx.quick ? 6 : 10;
    bool mono_ok = true, shannon_ok = true, cesaro_ok = true;
    for (const Game& game : verify_games()) {
        for (const SourceModel& src : verify_sources()) {
            std::vector<double> h;
            for (int n = 0; n <= max_n; ++n)
                h.push_back(one_step_conditional_entropy(game, src, n));
            for (std::size_t i = 1; i < h.size(); ++i)
                if (h[i] > h[i - 1] + 1e-9) mono_ok = false;
            for (double v : h)
                if (v > h[0] + 1e-9) shannon_ok = false;
            double prefix = 0.0;
            for (std::size_t i = 0; i < h.size(); ++i) {
                prefix += h[i];
                // H_{1|n-1} <= H_n / n up to rounding (Cesaro mean of a
                // non-increasing sequence).
                if (h[i] > prefix / static_cast<double>(i + 1) + 1e-9) cesaro_ok = false;
            }
        }
    }
    ctx.record("monotonicity: H_{1|n} non-increasing", mono_ok);
    ctx.record("generalized Shannon inequality: H_{1|n} <= H_1", shannon_ok);
    ctx.record("entropy-rate existence: Cesaro consistency of H_n/n", cesaro_ok);
}

void verify_chain_rule(VerifyContext& ctx) {
    const int cap = ctx.quick ? 6 : 10;
    bool ok = true;
    double worst = 0.0;
    for (const Game& game : verify_games()) {
        for (const SourceModel& src : verify_sources()) {
            for (int total = 2; total <= cap; ++total) {
                for (int m = 1; m + 1 <= total; ++m) {
                    const int n = total - m;
                    const double h_mn = n_step_entropy(game, src, total);
                    const double h_m = n_step_entropy(game, src, m);
                    const double h_cond = conditional_entropy_direct(game, src, n, m);
                    const double err = std::fabs(h_mn - h_m - h_cond);
                    worst = std::max(worst, err);
                    if (err > 1e-8) ok = false;
                }
            }
        }
    }
    ctx.record("chain rule: H_{m+n} = H_m + H_{n|m} (direct oracle)", ok,
               "worst " + fmt_double(worst));
}

void verify_infimum_swap(VerifyContext& ctx) {
    const int cap = ctx.quick ? 3 : 4;
    bool ok = true;
    for (const Game& game : verify_games())
        for (const SourceModel& src : verify_sources())
            for (int n = 1; n <= cap; ++n)
                if (std::fabs(n_step_entropy_direct(game, src, n) -
                              n_step_entropy(game, src, n)) > 1e-9)
                    ok = false;
    ctx.record("infimum swap: per-history minimization matches chain rule", ok);
}

void verify_mixability(VerifyContext& ctx) {
    const Game log_game{LossFunction::log_loss()};
    const Game sq_game{LossFunction::square_loss()};
    const Game abs_game{LossFunction::absolute_loss()};
    const int res = ctx.quick ? 2000 : 10000;

    bool ok = mixability_test(log_game, std::exp(-1.0), res).mixable;
    ok = ok && mixability_test(sq_game, std::exp(-2.0), res).mixable;
    bool abs_none = true;
    for (int i = 0; i < (ctx.quick ? 10 : 50); ++i) {
        const double eta = 0.01 * std::pow(3200.0, i / double(ctx.quick ? 9 : 49));
        if (mixability_test(abs_game, std::exp(-eta), res).mixable) abs_none = false;
    }
    ctx.record("mixability: logloss at eta=1, squareloss at eta=2, absloss never",
               ok && abs_none);
}

void verify_superloss(VerifyContext& ctx) {
    const Game game{LossFunction::log_loss()};
    const SourceModel src = SourceModel::markov(1, {0.3, 0.7});
    const std::size_t n = ctx.quick ? 200 : 1000;
    const PathSample path = src.sample_path(n, ctx.seed);

    const PointwiseOptimalStrategy opt(game, src);
    const SuperlossTrace strat_trace = SuperlossTrace::from_strategy(game, opt, path.bits);
    bool ok = verify_superloss_trace(game, strat_trace, 1e-9);

    Aggregator agg(game, default_expert_pool(game, src, 1), 1.0);
    SuperlossTrace agg_trace;
    std::vector<std::uint8_t> hist;
    for (std::size_t i = 0; i < path.bits.size(); ++i) {
        const Prediction g = agg.predict(hist);
        agg_trace.push(agg_trace.value_at(i) + game.loss(0, g),
                       agg_trace.value_at(i) + game.loss(1, g), path.bits[i]);
        agg.update(hist, path.bits[i]);
        hist.push_back(path.bits[i]);
    }
    ok = ok && verify_superloss_trace(game, agg_trace, 1e-8);
    ok = ok && increment_bound_check(agg_trace, 10.0);
    ctx.record("superloss process: strategy and aggregator traces, increment bound", ok);
}

void verify_convergence(VerifyContext& ctx) {
    const double h = 0.6108643020548935;  // -0.3 ln 0.3 - 0.7 ln 0.7
    ExperimentSpec spec(Game{LossFunction::log_loss()}, SourceModel::markov(1, {0.3, 0.7}));
    spec.n = ctx.quick ? 5000 : 20000;
    spec.path_count = ctx.quick ? 4 : 10;
    spec.seed = ctx.seed;
    spec.checkpoints = {spec.n};

    const ConvergenceResult smb = smb_experiment(spec);
    bool ok = std::fabs(smb.mean_rate.back() - h) < 0.05;

    spec.pool = PoolSpec{default_expert_pool(spec.game, spec.source, 1), 1.0};
    const AggregateResult agg = predictive_rate_experiment(spec);
    ok = ok && std::fabs(agg.convergence.mean_rate.back() - h) < 0.05;
    const double bound = std::log(static_cast<double>(spec.pool->experts.size()));
    for (std::size_t p = 0; p < spec.path_count; ++p)
        if (agg.aggregator_loss[p].back() >
            agg.best_expert_loss[p].back() + bound + 1e-6)
            ok = false;
    ctx.record("convergence: loss rates approach H; aggregating bound holds", ok);
}

int cmd_verify(const RunConfig& cfg) {
    VerifyContext ctx;
    ctx.quick = cfg.quick;
    ctx.seed = cfg.seed;

    verify_stationarity(ctx);
    verify_entropy_inequalities(ctx);
    verify_chain_rule(ctx);
    verify_infimum_swap(ctx);
    verify_mixability(ctx);
    verify_superloss(ctx);
    verify_convergence(ctx);

    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    write_artifact(dir, "verify.txt", "verify_table", ctx.table.str());
    std::cout << (ctx.all_ok ? "all invariant groups passed\n"
                             : "invariant failures detected\n");
    return ctx.all_ok ? kExitOk : kExitInvariantFailure;
}

}  // namespace

int run(RunConfig config) {
    try {
        if (const char* env_seed = std::getenv("ENTROGAME_SEED")) {
            try {
                config.seed = std::stoull(env_seed);
            } catch (const std::exception&) {
                throw ConfigError("ENTROGAME_SEED must be an unsigned integer");
            }
        }
        if (config.unit != "nats" && config.unit != "bits")
            throw ConfigError("--unit must be nats or bits");

        switch (config.command) {
            case Command::kEntropy: return cmd_entropy(config);
            case Command::kSmb: return cmd_smb(config);
            case Command::kAggregate: return cmd_aggregate(config);
            case Command::kMixability: return cmd_mixability(config);
            case Command::kVerify: return cmd_verify(config);
        }
        return kExitConfigError;
    } catch (const PreconditionError& e) {
        std::cerr << "precondition refused: " << e.what() << "\n";
        return kExitPreconditionRefused;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }
}

}  // namespace entrogame
