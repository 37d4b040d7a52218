#ifndef ENTROGAME_LOSS_HPP
#define ENTROGAME_LOSS_HPP

#include <cassert>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "entrogame/numeric.hpp"

namespace entrogame {

// A prediction is a point of the unit interval: the weight placed on the
// next outcome being 1.
using Prediction = double;

// Losses are extended non-negative reals in nats. +inf is a genuine value
// (never a sentinel float) and propagates through sums.
using LossValue = double;

enum class LossKind { kLogLoss, kSquareLoss, kAbsoluteLoss, kCustom };

// Binary-outcome loss function lambda(b, gamma) -> [0, inf].
//
// Built-in kinds use their closed forms:
//   log loss      -ln(gamma)        if b = 1,  -ln(1 - gamma) if b = 0
//   square loss   (b - gamma)^2
//   absolute loss |b - gamma|
//
// Custom losses supply an evaluator and must declare whether they are
// convex in gamma; non-convex ones are minimized by grid search.
class LossFunction {
  public:
    using Evaluator = std::function<double(int outcome, double gamma)>;

    static LossFunction log_loss();
    static LossFunction square_loss();
    static LossFunction absolute_loss();
    static LossFunction custom(std::string name, Evaluator eval, bool convex_in_gamma);

    // Piecewise-linear loss from a table descriptor:
    //   {"kind":"table","grid":[g...],"loss0":[...],"loss1":[...],
    //    "convex_in_gamma":bool}
    // "inf" entries encode +infinity; interpolation toward an infinite knot
    // is +infinity everywhere strictly between the knots.
    static LossFunction table(std::vector<double> grid, std::vector<double> loss0,
                              std::vector<double> loss1, bool convex_in_gamma,
                              std::string name = "table");
    static LossFunction from_json(const nlohmann::json& j);

    LossKind kind() const { return kind_; }
    bool convex_in_gamma() const { return convex_; }
    const std::string& name() const { return name_; }

    double operator()(int outcome, double gamma) const {
        assert(outcome == 0 || outcome == 1);
        assert(gamma >= 0.0 && gamma <= 1.0);
        switch (kind_) {
            case LossKind::kLogLoss:
                return outcome ? neg_ln(gamma) : neg_ln(1.0 - gamma);
            case LossKind::kSquareLoss: {
                const double d = static_cast<double>(outcome) - gamma;
                return d * d;
            }
            case LossKind::kAbsoluteLoss:
                return std::fabs(static_cast<double>(outcome) - gamma);
            case LossKind::kCustom:
                return eval_checked(outcome, gamma);
        }
        return kInf;  // unreachable
    }

  private:
    LossFunction(LossKind kind, bool convex, std::string name, Evaluator eval)
        : kind_(kind), convex_(convex), name_(std::move(name)), eval_(std::move(eval)) {}

    double eval_checked(int outcome, double gamma) const;

    LossKind kind_;
    bool convex_;
    std::string name_;
    Evaluator eval_;  // only set for kCustom
};

// The game triple: binary outcome alphabet, predictions in [0,1], and a
// loss function. Alphabet and prediction space are fixed; the loss varies.
struct Game {
    static constexpr int kAlphabetSize = 2;
    LossFunction loss;
};

// A pair of loss bounds, one per outcome. Valid for a game iff some
// prediction is at least as good on both outcomes simultaneously.
struct Superscore {
    double s0 = 0.0;
    double s1 = 0.0;
};

struct RegularityReport {
    bool gamma_compact = false;
    bool loss_continuous = false;
    bool finite_loss_prediction_exists = false;
    bool infinite_loss_approachable = false;
    bool is_regular = false;
    int resolution = 0;  // grid used by the finite-resolution checks
};

// lambda(outcome, gamma), checked form of LossFunction::operator().
inline LossValue loss_eval(const LossFunction& loss, int outcome, Prediction gamma) {
    return loss(outcome, gamma);
}

// Finite-resolution regularity verdict: compactness of the prediction
// space, bounded oscillation away from infinite-loss points, existence of
// an everywhere-finite prediction, and approachability of infinite-loss
// predictions by finite-loss neighbours.
RegularityReport check_regularity(const Game& game, int grid_resolution);

// The loss pairs (lambda(0,g_i), lambda(1,g_i)) on a uniform grid of [0,1].
// The superscore set of the game is the componentwise up-closure of this
// curve.
std::vector<Superscore> superprediction_curve(const Game& game, int resolution);

// True iff some prediction dominates the pair within tol, located by a
// coarse scan plus local refinement of max(lambda(0,g)-s0, lambda(1,g)-s1).
bool is_superscore(const Game& game, const Superscore& pair, double tol);

// (1-p1)*lambda(0,gamma) + p1*lambda(1,gamma) with 0*inf = 0.
inline LossValue expected_one_step_loss(const LossFunction& loss, double p1,
                                        Prediction gamma) {
    return weighted(1.0 - p1, loss(0, gamma)) + weighted(p1, loss(1, gamma));
}

}  // namespace entrogame

#endif
