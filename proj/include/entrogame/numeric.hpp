#ifndef ENTROGAME_NUMERIC_HPP
#define ENTROGAME_NUMERIC_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace entrogame {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool is_inf(double x) { return std::isinf(x) && x > 0; }

// -ln(x) on [0,1], with -ln(0) = +inf.
inline double neg_ln(double x) {
    if (x <= 0.0) return kInf;
    return -std::log(x);
}

// w * v with the 0 * inf = 0 convention used for expectations.
inline double weighted(double w, double v) {
    if (w == 0.0) return 0.0;
    return w * v;
}

// log(sum_i exp(x_i)) with the usual max shift; -inf entries are dropped,
// all -inf gives -inf.
inline double log_sum_exp(std::span<const double> xs) {
    double m = -kInf;
    for (double x : xs)
        if (x > m) m = x;
    if (m == -kInf) return -kInf;
    double s = 0.0;
    for (double x : xs)
        if (x != -kInf) s += std::exp(x - m);
    return m + std::log(s);
}

struct MinResult {
    double x = 0.0;
    double value = kInf;
};

// Golden-section search for a unimodal (in particular convex) function on
// [a,b]. Returns an interior minimizer to within x_tol; callers that care
// about boundary minima must compare against the endpoints themselves.
MinResult golden_section_min(const std::function<double(double)>& f, double a,
                             double b, double x_tol, int max_iter = 200);

// Minimizer over the unit interval. convex -> golden section; otherwise a
// grid scan followed by local golden refinement. Endpoints are always
// candidates; ties go to the smallest argument.
MinResult minimize_unit_interval(const std::function<double(double)>& f,
                                 bool convex, double x_tol,
                                 int grid_points = 1025);

}  // namespace entrogame

#endif
