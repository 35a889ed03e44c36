#include "wavelab/quadrature.hpp"

#include <cmath>

namespace wavelab::quadrature {

namespace {

double simpson_panel(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double recurse(const std::function<double(double)>& f, double a, double fa, double b,
               double fb, double m, double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson_panel(a, fa, m, fm, flm);
    const double right = simpson_panel(m, fm, b, fb, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol, int max_depth) {
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double whole = simpson_panel(a, fa, b, fb, fm);
    // absolute tolerance pinned to the first estimate, with a floor that
    // keeps zero integrands cheap
    const double tol = rel_tol * std::max(std::abs(whole), 1e-300);
    return recurse(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

}  // namespace wavelab::quadrature
