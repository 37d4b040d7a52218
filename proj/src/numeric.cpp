#include "entrogame/numeric.hpp"

#include <algorithm>

namespace entrogame {

MinResult golden_section_min(const std::function<double(double)>& f, double a,
                             double b, double x_tol, int max_iter) {
    static const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;   // 0.618...
    static const double kInvPhi2 = (3.0 - std::sqrt(5.0)) / 2.0;  // 0.382...

    double h = b - a;
    double c = a + kInvPhi2 * h;
    double d = a + kInvPhi * h;
    double fc = f(c);
    double fd = f(d);

    for (int it = 0; it < max_iter && h > x_tol; ++it) {
        if (fc <= fd) {  // with infinities, <= keeps the finite side when equal
            b = d;
            d = c;
            fd = fc;
            h = b - a;
            c = a + kInvPhi2 * h;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            h = b - a;
            d = a + kInvPhi * h;
            fd = f(d);
        }
    }
    if (fc <= fd) return {c, fc};
    return {d, fd};
}

MinResult minimize_unit_interval(const std::function<double(double)>& f,
                                 bool convex, double x_tol, int grid_points) {
    MinResult best{0.0, f(0.0)};
    const double f1 = f(1.0);

    bool grid_scan = !convex;
    if (convex) {
        MinResult inner = golden_section_min(f, 0.0, 1.0, x_tol);
        if (inner.value < best.value) best = inner;
        // An everywhere-infinite probe path means the finite region eluded
        // the bracketing; rescan on the grid.
        if (inner.value == kInf && f1 == kInf) grid_scan = true;
    }
    if (grid_scan) {
        // Strict improvement keeps ties on the smallest gamma.
        const int n = std::max(grid_points, 3);
        int best_i = -1;
        for (int i = 1; i + 1 < n; ++i) {
            const double x = static_cast<double>(i) / (n - 1);
            const double v = f(x);
            if (v < best.value) {
                best = {x, v};
                best_i = i;
            }
        }
        if (best_i >= 0) {  // refine inside the bracketing cell pair
            const double lo = static_cast<double>(best_i - 1) / (n - 1);
            const double hi = static_cast<double>(best_i + 1) / (n - 1);
            MinResult refined = golden_section_min(f, lo, hi, x_tol);
            if (refined.value < best.value) best = refined;
        }
    }

    if (f1 < best.value) best = {1.0, f1};
    return best;
}

}  // namespace entrogame
