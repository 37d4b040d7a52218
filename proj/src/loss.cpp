#include "entrogame/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "entrogame/errors.hpp"

namespace entrogame {

LossFunction LossFunction::log_loss() {
    return LossFunction(LossKind::kLogLoss, true, "logloss", nullptr);
}

LossFunction LossFunction::square_loss() {
    return LossFunction(LossKind::kSquareLoss, true, "squareloss", nullptr);
}

LossFunction LossFunction::absolute_loss() {
    return LossFunction(LossKind::kAbsoluteLoss, true, "absloss", nullptr);
}

LossFunction LossFunction::custom(std::string name, Evaluator eval, bool convex_in_gamma) {
    if (!eval) throw ConfigError("custom loss requires an evaluator");
    return LossFunction(LossKind::kCustom, convex_in_gamma, std::move(name), std::move(eval));
}

double LossFunction::eval_checked(int outcome, double gamma) const {
    const double v = eval_(outcome, gamma);
    if (std::isnan(v) || v < 0.0)
        throw std::domain_error("custom loss '" + name_ + "' returned " +
                                std::to_string(v) + " at gamma=" + std::to_string(gamma));
    return v;
}

namespace {

// Linear interpolation in the extended reals: anything strictly between a
// finite knot and an infinite knot is infinite.
double lerp_ext(double a, double b, double t) {
    if (t <= 0.0) return a;
    if (t >= 1.0) return b;
    if (is_inf(a) || is_inf(b)) return kInf;
    return a + t * (b - a);
}

}  // namespace

LossFunction LossFunction::table(std::vector<double> grid, std::vector<double> loss0,
                                 std::vector<double> loss1, bool convex_in_gamma,
                                 std::string name) {
    const std::size_t n = grid.size();
    if (n < 2) throw ConfigError("table loss needs at least two grid points");
    if (loss0.size() != n || loss1.size() != n)
        throw ConfigError("table loss: grid/loss0/loss1 sizes differ");
    if (grid.front() != 0.0 || grid.back() != 1.0)
        throw ConfigError("table loss: grid must span [0,1]");
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (!(grid[i] < grid[i + 1]))
            throw ConfigError("table loss: grid must be strictly increasing");
    for (std::size_t i = 0; i < n; ++i) {
        for (double v : {loss0[i], loss1[i]})
            if (std::isnan(v) || v < 0.0)
                throw ConfigError("table loss: values must be non-negative or inf");
    }

    auto eval = [grid = std::move(grid), loss0 = std::move(loss0),
                 loss1 = std::move(loss1)](int outcome, double gamma) -> double {
        const std::vector<double>& ys = outcome ? loss1 : loss0;
        auto it = std::upper_bound(grid.begin(), grid.end(), gamma);
        if (it == grid.begin()) return ys.front();
        if (it == grid.end()) return ys.back();
        const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
        const std::size_t lo = hi - 1;
        const double t = (gamma - grid[lo]) / (grid[hi] - grid[lo]);
        return lerp_ext(ys[lo], ys[hi], t);
    };
    return LossFunction(LossKind::kCustom, convex_in_gamma, std::move(name), std::move(eval));
}

namespace {

double json_loss_value(const nlohmann::json& v) {
    if (v.is_string()) {
        if (v.get<std::string>() == "inf") return kInf;
        throw ConfigError("loss table entry: expected number or \"inf\"");
    }
    if (!v.is_number()) throw ConfigError("loss table entry: expected number or \"inf\"");
    return v.get<double>();
}

}  // namespace

LossFunction LossFunction::from_json(const nlohmann::json& j) {
    const std::string kind = j.value("kind", "");
    if (kind != "table")
        throw ConfigError("loss descriptor: unsupported kind '" + kind + "'");
    if (!j.contains("grid") || !j.contains("loss0") || !j.contains("loss1"))
        throw ConfigError("loss descriptor: table requires grid, loss0, loss1");
    if (!j.contains("convex_in_gamma"))
        throw ConfigError("loss descriptor: custom losses must declare convex_in_gamma");

    std::vector<double> grid = j.at("grid").get<std::vector<double>>();
    std::vector<double> l0, l1;
    for (const auto& v : j.at("loss0")) l0.push_back(json_loss_value(v));
    for (const auto& v : j.at("loss1")) l1.push_back(json_loss_value(v));
    return table(std::move(grid), std::move(l0), std::move(l1),
                 j.at("convex_in_gamma").get<bool>(), j.value("name", "table"));
}

RegularityReport check_regularity(const Game& game, int grid_resolution) {
    if (grid_resolution < 2) throw ConfigError("check_regularity: resolution must be >= 2");
    RegularityReport rep;
    rep.resolution = grid_resolution;
    rep.gamma_compact = true;  // [0,1] by construction

    const int n = grid_resolution;
    std::vector<double> l0(n), l1(n);
    for (int i = 0; i < n; ++i) {
        const double g = static_cast<double>(i) / (n - 1);
        l0[i] = game.loss(0, g);
        l1[i] = game.loss(1, g);
    }

    rep.finite_loss_prediction_exists = false;
    for (int i = 0; i < n; ++i)
        if (!is_inf(l0[i]) && !is_inf(l1[i])) {
            rep.finite_loss_prediction_exists = true;
            break;
        }

    // Oscillation check away from infinite-loss points. A sqrt(n)-step
    // neighbourhood of every infinite point is excluded so that losses with
    // integrable singularities (like log loss) still register as
    // continuous; the oscillation bound shrinks with the resolution.
    const int guard = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    const double osc_tol = 10.0 / std::sqrt(static_cast<double>(n));
    rep.loss_continuous = true;
    for (const std::vector<double>* ls : {&l0, &l1}) {
        std::vector<char> excluded(n, 0);
        for (int i = 0; i < n; ++i) {
            if (!is_inf((*ls)[i])) continue;
            for (int d = -guard; d <= guard; ++d) {
                const int j = i + d;
                if (j >= 0 && j < n) excluded[j] = 1;
            }
        }
        for (int i = 0; i + 1 < n; ++i) {
            if (excluded[i] || excluded[i + 1]) continue;
            if (std::fabs((*ls)[i + 1] - (*ls)[i]) > osc_tol) {
                rep.loss_continuous = false;
                break;
            }
        }
        if (!rep.loss_continuous) break;
    }

    // Every infinite-loss grid point must have a finite-loss neighbour.
    rep.infinite_loss_approachable = true;
    for (const std::vector<double>* ls : {&l0, &l1}) {
        for (int i = 0; i < n; ++i) {
            if (!is_inf((*ls)[i])) continue;
            const bool left_ok = i > 0 && !is_inf((*ls)[i - 1]);
            const bool right_ok = i + 1 < n && !is_inf((*ls)[i + 1]);
            if (!left_ok && !right_ok) {
                rep.infinite_loss_approachable = false;
                break;
            }
        }
        if (!rep.infinite_loss_approachable) break;
    }

    rep.is_regular = rep.gamma_compact && rep.loss_continuous &&
                     rep.finite_loss_prediction_exists && rep.infinite_loss_approachable;
    return rep;
}

std::vector<Superscore> superprediction_curve(const Game& game, int resolution) {
    if (resolution < 2) throw ConfigError("superprediction_curve: resolution must be >= 2");
    std::vector<Superscore> curve;
    curve.reserve(resolution);
    for (int i = 0; i < resolution; ++i) {
        const double g = static_cast<double>(i) / (resolution - 1);
        curve.push_back({game.loss(0, g), game.loss(1, g)});
    }
    return curve;
}

bool is_superscore(const Game& game, const Superscore& pair, double tol) {
    // residual(g) = max_b (lambda(b,g) - s_b); a superscore admits g with
    // residual <= 0. Infinite bounds make their component vacuous.
    auto residual = [&](double g) -> double {
        double r = -kInf;
        if (!is_inf(pair.s0)) {
            const double l = game.loss(0, g);
            r = std::max(r, is_inf(l) ? kInf : l - pair.s0);
        }
        if (!is_inf(pair.s1)) {
            const double l = game.loss(1, g);
            r = std::max(r, is_inf(l) ? kInf : l - pair.s1);
        }
        return r;
    };
    if (is_inf(pair.s0) && is_inf(pair.s1)) return true;

    // Coarse scan with early exit, then local refinement around the best.
    const int kCoarse = 65;
    double best = kInf;
    int best_i = 0;
    for (int i = 0; i < kCoarse; ++i) {
        const double g = static_cast<double>(i) / (kCoarse - 1);
        const double r = residual(g);
        if (r <= tol) return true;
        if (r < best) {
            best = r;
            best_i = i;
        }
    }
    const double lo = std::max(0.0, static_cast<double>(best_i - 1) / (kCoarse - 1));
    const double hi = std::min(1.0, static_cast<double>(best_i + 1) / (kCoarse - 1));
    MinResult refined = golden_section_min(residual, lo, hi, 1e-12);
    return refined.value <= tol;
}

}  // namespace entrogame
