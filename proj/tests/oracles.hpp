#pragma once

// Independent reference computations for the test suites: direct O(N^2)
// transforms, fixed-grid Simpson quadrature, closed forms.  Nothing here
// shares code with the library paths it checks.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

// Direct sine-sum analysis of w_j = r_j u_j: a_n = 2/(N+1) sum_j w_j sin(pi n j/(N+1)).
inline std::vector<cplx> naive_sine_analyze(const std::vector<cplx>& values, double radius) {
    const int n = static_cast<int>(values.size());
    std::vector<cplx> coeffs(values.size());
    for (int m = 1; m <= n; ++m) {
        cplx acc(0.0, 0.0);
        for (int j = 1; j <= n; ++j) {
            const double r = radius * j / (n + 1);
            acc += values[j - 1] * r * std::sin(std::numbers::pi * m * j / (n + 1));
        }
        coeffs[m - 1] = 2.0 / (n + 1) * acc;
    }
    return coeffs;
}

inline std::vector<cplx> naive_sine_synthesize(const std::vector<cplx>& coeffs,
                                               double radius) {
    const int n = static_cast<int>(coeffs.size());
    std::vector<cplx> values(coeffs.size());
    for (int j = 1; j <= n; ++j) {
        const double r = radius * j / (n + 1);
        cplx acc(0.0, 0.0);
        for (int m = 1; m <= n; ++m)
            acc += coeffs[m - 1] * std::sin(std::numbers::pi * m * j / (n + 1));
        values[j - 1] = acc / r;
    }
    return values;
}

// Fixed-grid composite Simpson (n_panels even).
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int n_panels) {
    const double h = (b - a) / n_panels;
    double acc = f(a) + f(b);
    for (int k = 1; k < n_panels; ++k) acc += f(a + k * h) * (k % 2 == 1 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

// 4 pi int_0^R f(r) r^2 dr by fine Simpson.
inline double radial_integral(const std::function<double(double)>& f, double radius,
                              int n_panels = 1 << 16) {
    return 4.0 * std::numbers::pi *
           simpson([&f](double r) { return f(r) * r * r; }, 0.0, radius, n_panels);
}

// int_a^b dy/(y g(y)^2) by fine Simpson directly in y.
inline double inv_y_g2(const std::function<double(double)>& g, double a, double b,
                       int n_panels = 1 << 20) {
    return simpson([&g](double y) { return 1.0 / (y * g(y) * g(y)); }, a, b, n_panels);
}

}  // namespace oracle
