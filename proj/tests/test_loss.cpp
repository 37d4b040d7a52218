#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "entrogame/errors.hpp"
#include "entrogame/loss.hpp"

using namespace entrogame;

namespace {
const double kLn2 = std::log(2.0);
}

TEST_CASE("loss_eval closed forms") {
    const LossFunction log_l = LossFunction::log_loss();
    const LossFunction sq = LossFunction::square_loss();
    const LossFunction ab = LossFunction::absolute_loss();

    CHECK(loss_eval(log_l, 0, 0.5) == doctest::Approx(kLn2).epsilon(1e-14));
    CHECK(loss_eval(sq, 1, 1.0) == 0.0);
    CHECK(is_inf(loss_eval(log_l, 1, 0.0)));
    CHECK(is_inf(loss_eval(log_l, 0, 1.0)));
    CHECK(loss_eval(ab, 1, 0.25) == 0.75);
    CHECK(loss_eval(sq, 0, 0.3) == doctest::Approx(0.09).epsilon(1e-14));
}

TEST_CASE("custom losses reject negative and NaN values") {
    const LossFunction bad_neg =
        LossFunction::custom("neg", [](int, double) { return -1.0; }, true);
    CHECK_THROWS_AS(loss_eval(bad_neg, 0, 0.5), std::domain_error);
    const LossFunction bad_nan =
        LossFunction::custom("nan", [](int, double) { return std::nan(""); }, true);
    CHECK_THROWS_AS(loss_eval(bad_nan, 1, 0.5), std::domain_error);
}

TEST_CASE("regularity of the built-in games") {
    const int res = 10000;
    const RegularityReport log_rep = check_regularity(Game{LossFunction::log_loss()}, res);
    CHECK(log_rep.is_regular);
    CHECK(log_rep.gamma_compact);
    CHECK(log_rep.loss_continuous);
    CHECK(log_rep.finite_loss_prediction_exists);
    CHECK(log_rep.infinite_loss_approachable);

    CHECK(check_regularity(Game{LossFunction::square_loss()}, res).is_regular);
    CHECK(check_regularity(Game{LossFunction::absolute_loss()}, res).is_regular);
}

TEST_CASE("an everywhere-infinite loss is not regular") {
    const LossFunction all_inf =
        LossFunction::custom("allinf", [](int, double) { return kInf; }, true);
    const RegularityReport rep = check_regularity(Game{all_inf}, 1000);
    CHECK_FALSE(rep.finite_loss_prediction_exists);
    CHECK_FALSE(rep.is_regular);
}

TEST_CASE("a step discontinuity is flagged") {
    const LossFunction step = LossFunction::custom(
        "step", [](int, double g) { return g < 0.5 ? 0.0 : 1.0; }, false);
    CHECK_FALSE(check_regularity(Game{step}, 10000).loss_continuous);
}

TEST_CASE("superprediction curve samples the loss pairs") {
    const auto sq = superprediction_curve(Game{LossFunction::square_loss()}, 3);
    CHECK(sq[0].s0 == 0.0);
    CHECK(sq[0].s1 == 1.0);
    const auto lg = superprediction_curve(Game{LossFunction::log_loss()}, 3);
    CHECK(lg[1].s0 == doctest::Approx(kLn2).epsilon(1e-14));
    CHECK(lg[1].s1 == doctest::Approx(kLn2).epsilon(1e-14));
    const auto ab = superprediction_curve(Game{LossFunction::absolute_loss()}, 5);
    CHECK(ab[1].s0 == 0.25);
    CHECK(ab[1].s1 == 0.75);
}

TEST_CASE("is_superscore examples") {
    const Game lg{LossFunction::log_loss()};
    CHECK(is_superscore(lg, {kLn2, kLn2}, 1e-9));
    CHECK_FALSE(is_superscore(lg, {0.0, 0.0}, 1e-9));
    CHECK(is_superscore(Game{LossFunction::square_loss()}, {1.0, 1.0}, 1e-9));
    CHECK(is_superscore(lg, {kInf, kInf}, 0.0));
}

TEST_CASE("expected one-step losses") {
    CHECK(expected_one_step_loss(LossFunction::log_loss(), 0.5, 0.5) ==
          doctest::Approx(kLn2).epsilon(1e-14));
    CHECK(expected_one_step_loss(LossFunction::square_loss(), 0.3, 0.3) ==
          doctest::Approx(0.21).epsilon(1e-14));
    CHECK(is_inf(expected_one_step_loss(LossFunction::log_loss(), 1.0, 0.0)));
    // 0 * inf = 0: the impossible outcome does not poison the expectation.
    CHECK(expected_one_step_loss(LossFunction::log_loss(), 1.0, 1.0) == 0.0);
}

TEST_CASE("built-in losses are non-negative and convex on a fine grid") {
    const int n = 10000;
    for (const LossFunction& loss : {LossFunction::log_loss(), LossFunction::square_loss(),
                                     LossFunction::absolute_loss()}) {
        for (int b = 0; b < 2; ++b) {
            double prev2 = -1.0, prev1 = -1.0;
            for (int i = 0; i < n; ++i) {
                const double g = static_cast<double>(i) / (n - 1);
                const double v = loss(b, g);
                CHECK(v >= 0.0);
                if (i >= 2 && !is_inf(v) && !is_inf(prev1) && !is_inf(prev2)) {
                    // convexity: second difference >= -1e-9
                    CHECK(v - 2.0 * prev1 + prev2 >= -1e-9);
                }
                prev2 = prev1;
                prev1 = v;
            }
        }
    }
}

TEST_CASE("curve points are superscores and the set is up-closed") {
    for (const LossFunction& loss : {LossFunction::log_loss(), LossFunction::square_loss(),
                                     LossFunction::absolute_loss()}) {
        const Game game{loss};
        const auto curve = superprediction_curve(game, 101);
        for (const Superscore& s : curve) CHECK(is_superscore(game, s, 1e-9));
        // up-closure on sampled offsets
        for (std::size_t i = 0; i < curve.size(); i += 17) {
            for (double d0 : {0.0, 0.3, 2.0})
                for (double d1 : {0.0, 1.1}) {
                    Superscore up{curve[i].s0 + d0, curve[i].s1 + d1};
                    CHECK(is_superscore(game, up, 1e-9));
                }
        }
    }
}

TEST_CASE("expected_one_step_loss matches its defining expression bit for bit") {
    const LossFunction sq = LossFunction::square_loss();
    for (double p1 : {0.0, 0.12, 0.5, 0.77, 1.0})
        for (double g : {0.0, 0.25, 0.6, 1.0}) {
            const double direct = weighted(p1, sq(1, g)) + weighted(1.0 - p1, sq(0, g));
            CHECK(expected_one_step_loss(sq, p1, g) == direct);
        }
}

TEST_CASE("table losses interpolate linearly and parse inf knots") {
    nlohmann::json j = {
        {"kind", "table"},
        {"grid", {0.0, 0.5, 1.0}},
        {"loss0", {0.0, 0.25, "inf"}},
        {"loss1", {1.0, 0.25, 0.0}},
        {"convex_in_gamma", true},
    };
    const LossFunction t = LossFunction::from_json(j);
    CHECK(t.kind() == LossKind::kCustom);
    CHECK(t(1, 0.25) == doctest::Approx(0.625).epsilon(1e-14));
    CHECK(t(0, 0.25) == doctest::Approx(0.125).epsilon(1e-14));
    CHECK(t(0, 0.5) == 0.25);
    CHECK(is_inf(t(0, 1.0)));
    CHECK(is_inf(t(0, 0.75)));  // interpolation toward an infinite knot

    SUBCASE("missing convexity declaration is rejected") {
        j.erase("convex_in_gamma");
        CHECK_THROWS_AS(LossFunction::from_json(j), ConfigError);
    }
    SUBCASE("size mismatches are rejected") {
        j["loss0"] = {0.0, 0.25};
        CHECK_THROWS_AS(LossFunction::from_json(j), ConfigError);
    }
    SUBCASE("grids not spanning [0,1] are rejected") {
        j["grid"] = {0.0, 0.5, 0.9};
        CHECK_THROWS_AS(LossFunction::from_json(j), ConfigError);
    }
}
