#include "entrogame/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "entrogame/csvio.hpp"
#include "entrogame/errors.hpp"
#include "entrogame/numeric.hpp"

namespace entrogame {

namespace {

// Transformed curve point in log-image coordinates: the image point is
// (exp(u), exp(v)) with u = -eta * lambda0, so infinite losses map to an
// exact coordinate 0.
struct LogPoint {
    double u;
    double v;
};

// Signed coordinate difference exp(b) - exp(a), computed through expm1 so
// nearby points lose no relative precision (the cross products below
// cancel almost completely for near-mixable games).
double exp_diff(double a, double b) {
    if (a == -kInf && b == -kInf) return 0.0;
    if (a == -kInf) return std::exp(b);
    if (b == -kInf) return -std::exp(a);
    return std::exp(a) * std::expm1(b - a);
}

}  // namespace

MixabilityResult mixability_test(const Game& game, double beta, int resolution,
                                 double tol) {
    if (!(beta > 0.0 && beta < 1.0))
        throw ConfigError("mixability_test: beta must lie in (0,1)");
    if (resolution < 3) throw ConfigError("mixability_test: resolution must be >= 3");

    MixabilityResult res;
    res.beta = beta;
    res.eta = -std::log(beta);
    res.resolution = resolution;

    std::vector<LogPoint> pts;
    pts.reserve(resolution);
    for (int i = 0; i < resolution; ++i) {
        const double g = static_cast<double>(i) / (resolution - 1);
        const double l0 = game.loss(0, g);
        const double l1 = game.loss(1, g);
        pts.push_back({is_inf(l0) ? -kInf : -res.eta * l0,
                       is_inf(l1) ? -kInf : -res.eta * l1});
    }

    // The image of the superscore set is the union of the boxes
    // [0,x_i] x [0,y_i]; only the Pareto frontier of the points shapes its
    // boundary. Sort by x descending and sweep for strictly increasing y.
    std::sort(pts.begin(), pts.end(), [](const LogPoint& a, const LogPoint& b) {
        if (a.u != b.u) return a.u > b.u;
        return a.v > b.v;
    });
    std::vector<LogPoint> frontier;
    double best_v = -kInf;
    bool any_v = false;
    for (const LogPoint& p : pts) {
        if (!any_v || p.v > best_v) {  // equal-u runs keep only their top point
            frontier.push_back(p);
            best_v = p.v;
            any_v = true;
        }
    }

    // Convexity of the image region == the frontier only ever turns left
    // while traversed with x decreasing and y increasing.
    double worst = 0.0;
    for (std::size_t i = 0; i + 2 < frontier.size(); ++i) {
        const double s1x = exp_diff(frontier[i].u, frontier[i + 1].u);
        const double s1y = exp_diff(frontier[i].v, frontier[i + 1].v);
        const double s2x = exp_diff(frontier[i + 1].u, frontier[i + 2].u);
        const double s2y = exp_diff(frontier[i + 1].v, frontier[i + 2].v);
        const double cross = s1x * s2y - s1y * s2x;
        if (cross >= 0.0) continue;
        const double scale = std::hypot(s1x, s1y) * std::hypot(s2x, s2y);
        if (scale == 0.0) continue;
        worst = std::max(worst, -cross / scale);
    }
    res.max_concavity_violation = worst;
    res.mixable = worst <= tol;
    return res;
}

std::optional<double> max_mixability_eta(const Game& game, int resolution, double tol,
                                         double eta_tol) {
    const double kEtaMin = 1e-4, kEtaMax = 64.0;
    auto mixable_at = [&](double eta) {
        return mixability_test(game, std::exp(-eta), resolution, tol).mixable;
    };
    if (!mixable_at(kEtaMin)) return std::nullopt;
    if (mixable_at(kEtaMax)) return kEtaMax;
    double lo = kEtaMin, hi = kEtaMax;
    while (hi - lo > eta_tol) {
        const double mid = 0.5 * (lo + hi);
        (mixable_at(mid) ? lo : hi) = mid;
    }
    return lo;
}

// ---------------------------------------------------------------------------
// Aggregator

Aggregator::Aggregator(Game game, std::vector<StrategyPtr> experts, double eta,
                       std::vector<double> prior_weights, int mixability_resolution)
    : game_(std::move(game)), experts_(std::move(experts)), eta_(eta) {
    if (experts_.empty()) throw ConfigError("aggregator: expert pool is empty");
    for (const auto& e : experts_)
        if (!e) throw ConfigError("aggregator: null expert");
    if (!(eta_ > 0.0)) throw ConfigError("aggregator: eta must be positive");

    const MixabilityResult mix =
        mixability_test(game_, std::exp(-eta_), mixability_resolution);
    if (!mix.mixable)
        throw PreconditionError("game '" + game_.loss.name() + "' is not mixable at eta=" +
                                fmt_double(eta_) + " (worst concavity violation " +
                                fmt_double(mix.max_concavity_violation) + ")");

    if (prior_weights.empty()) {
        log_weights_.assign(experts_.size(),
                            -std::log(static_cast<double>(experts_.size())));
    } else {
        if (prior_weights.size() != experts_.size())
            throw ConfigError("aggregator: prior size must match expert count");
        double sum = 0.0;
        for (double w : prior_weights) {
            if (w < 0.0) throw ConfigError("aggregator: negative prior weight");
            sum += w;
        }
        if (sum <= 0.0) throw ConfigError("aggregator: prior weights sum to zero");
        for (double w : prior_weights)
            log_weights_.push_back(w > 0.0 ? std::log(w / sum) : -kInf);
    }
}

std::vector<double> Aggregator::expert_predictions(
    std::span<const std::uint8_t> history) const {
    std::vector<double> gammas;
    gammas.reserve(experts_.size());
    for (const auto& e : experts_) gammas.push_back(e->predict(history));
    return gammas;
}

Superscore Aggregator::generalized_from(const std::vector<double>& gammas) const {
    Superscore g;
    std::vector<double> terms(gammas.size());
    for (int b = 0; b < 2; ++b) {
        for (std::size_t i = 0; i < gammas.size(); ++i) {
            const double l = game_.loss(b, gammas[i]);
            terms[i] = is_inf(l) ? -kInf : log_weights_[i] - eta_ * l;
        }
        const double lse = log_sum_exp(terms);
        const double gb = lse == -kInf ? kInf : -lse / eta_;
        (b == 0 ? g.s0 : g.s1) = gb;
    }
    return g;
}

Prediction Aggregator::substitute(const Superscore& g,
                                  const std::vector<double>& gammas) const {
    auto residual = [&](double x) -> double {
        double r = -kInf;
        if (!is_inf(g.s0)) {
            const double l = game_.loss(0, x);
            r = std::max(r, is_inf(l) ? kInf : l - g.s0);
        }
        if (!is_inf(g.s1)) {
            const double l = game_.loss(1, x);
            r = std::max(r, is_inf(l) ? kInf : l - g.s1);
        }
        return r;
    };
    if (is_inf(g.s0) && is_inf(g.s1)) return gammas.front();

    MinResult best = minimize_unit_interval(residual, game_.loss.convex_in_gamma(), 1e-12);
    // The expert predictions themselves are natural candidates (a single
    // expert must be reproduced bit-exactly).
    for (double cand : gammas) {
        const double r = residual(cand);
        if (r < best.value || (r == best.value && cand < best.x)) best = {cand, r};
    }
    return best.x;
}

Prediction Aggregator::predict(std::span<const std::uint8_t> history) const {
    const std::vector<double> gammas = expert_predictions(history);
    const bool all_equal =
        std::all_of(gammas.begin(), gammas.end(), [&](double x) { return x == gammas[0]; });
    if (all_equal) return gammas[0];
    return substitute(generalized_from(gammas), gammas);
}

Superscore Aggregator::generalized_prediction(std::span<const std::uint8_t> history) const {
    return generalized_from(expert_predictions(history));
}

void Aggregator::update(std::span<const std::uint8_t> history, int outcome) {
    const std::vector<double> gammas = expert_predictions(history);
    for (std::size_t i = 0; i < experts_.size(); ++i) {
        const double l = game_.loss(outcome, gammas[i]);
        log_weights_[i] = is_inf(l) ? -kInf : log_weights_[i] - eta_ * l;
    }
    const double z = log_sum_exp(log_weights_);
    if (z == -kInf)
        throw PreconditionError("aggregator: every expert incurred infinite loss on outcome " +
                                std::to_string(outcome));
    for (double& lw : log_weights_)
        if (lw != -kInf) lw -= z;
    ++step_;
}

std::vector<double> Aggregator::weights() const {
    std::vector<double> w;
    w.reserve(log_weights_.size());
    for (double lw : log_weights_) w.push_back(lw == -kInf ? 0.0 : std::exp(lw));
    return w;
}

// ---------------------------------------------------------------------------
// Superloss traces

void SuperlossTrace::push(double value_child0, double value_child1, int path_bit) {
    child0_.push_back(value_child0);
    child1_.push_back(value_child1);
    path_.push_back(static_cast<std::uint8_t>(path_bit));
    along_.push_back(path_bit ? value_child1 : value_child0);
}

SuperlossTrace SuperlossTrace::from_strategy(const Game& game, const Strategy& strategy,
                                             std::span<const std::uint8_t> w) {
    SuperlossTrace trace;
    double v = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const Prediction g = strategy.predict(w.first(i));
        trace.push(v + game.loss(0, g), v + game.loss(1, g), w[i]);
        v = trace.along_.back();
    }
    return trace;
}

double SuperlossTrace::value_at(std::size_t prefix_len) const {
    return prefix_len == 0 ? root_ : along_[prefix_len - 1];
}

Superscore SuperlossTrace::increment(std::size_t depth) const {
    const double v = value_at(depth);
    return {child0_[depth] - v, child1_[depth] - v};
}

std::string SuperlossTrace::to_csv() const {
    std::ostringstream out;
    out << "n,increment0,increment1,cumulative\n";
    for (std::size_t d = 0; d < steps(); ++d) {
        const Superscore inc = increment(d);
        out << (d + 1) << ',' << fmt_double(inc.s0) << ',' << fmt_double(inc.s1) << ','
            << fmt_double(value_at(d + 1)) << '\n';
    }
    return out.str();
}

bool verify_superloss_trace(const Game& game, const SuperlossTrace& trace, double tol) {
    for (std::size_t d = 0; d < trace.steps(); ++d) {
        const Superscore inc = trace.increment(d);
        if (std::isnan(inc.s0) || std::isnan(inc.s1))
            throw ConfigError("superloss trace: missing child value at depth " +
                              std::to_string(d));
    }
    if (std::fabs(trace.root_value()) > tol) return false;
    for (std::size_t d = 0; d < trace.steps(); ++d)
        if (!is_superscore(game, trace.increment(d), tol)) return false;
    return true;
}

bool increment_bound_check(const SuperlossTrace& trace, double c) {
    for (std::size_t d = 1; d < trace.steps(); ++d) {  // position n = d + 1 >= 2
        const Superscore inc = trace.increment(d);
        const double bound = c * std::log(static_cast<double>(d + 1));
        if (!(std::fabs(inc.s0) <= bound) || !(std::fabs(inc.s1) <= bound)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Pools

PoolSpec pool_from_json(const Game& game, const nlohmann::json& j) {
    PoolSpec pool;
    pool.eta = j.value("eta", 1.0);
    if (!j.contains("experts") || !j.at("experts").is_array() || j.at("experts").empty())
        throw ConfigError("pool descriptor: non-empty experts array required");
    for (const auto& e : j.at("experts")) {
        const std::string kind = e.value("kind", "");
        if (kind == "constant") {
            if (!e.contains("gamma")) throw ConfigError("constant expert requires gamma");
            pool.experts.push_back(
                std::make_shared<ConstantStrategy>(e.at("gamma").get<double>()));
        } else if (kind == "markov_opt") {
            nlohmann::json src = e;
            src["kind"] = "markov";
            pool.experts.push_back(std::make_shared<PointwiseOptimalStrategy>(
                game, SourceModel::from_json(src)));
        } else {
            throw ConfigError("pool descriptor: unknown expert kind '" + kind + "'");
        }
    }
    return pool;
}

std::vector<StrategyPtr> default_expert_pool(const Game& game, const SourceModel& source,
                                             int k_max, bool add_constant_grid) {
    if (k_max < 0) throw ConfigError("default_expert_pool: k_max must be >= 0");
    std::vector<StrategyPtr> pool;
    for (int k = 0; k <= k_max; ++k) {
        const std::size_t contexts = std::size_t{1} << k;
        std::vector<double> table(contexts);
        std::vector<std::uint8_t> ctx(k);
        for (std::size_t c = 0; c < contexts; ++c) {
            for (int i = 0; i < k; ++i)
                ctx[i] = static_cast<std::uint8_t>((c >> (k - 1 - i)) & 1);
            const double pc = source.string_probability(ctx);
            if (pc > 0.0) {
                std::vector<std::uint8_t> ext(ctx.begin(), ctx.end());
                ext.push_back(1);
                table[c] = source.string_probability(ext) / pc;
            } else {
                table[c] = 0.5;  // unreachable context, value immaterial
            }
        }
        pool.push_back(std::make_shared<PointwiseOptimalStrategy>(
            game, SourceModel::markov(k, std::move(table)), 1e-10,
            "markov_opt(k=" + std::to_string(k) + ")"));
    }
    if (add_constant_grid) {
        for (int i = 0; i <= 10; ++i)
            pool.push_back(std::make_shared<ConstantStrategy>(static_cast<double>(i) / 10.0));
    }
    return pool;
}

}  // namespace entrogame
