#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wavelab/errors.hpp"

namespace wavelab::gfun {

// Critical Sobolev exponent 3/2 - 2/(p-1) of the power-p wave equation.
double sp_exponent(double p);

class GLadder;

// Evaluable slowly-growing nonlinearity factor with closed-form first and
// second derivatives on x >= 0.
class GFunction {
public:
    enum class Kind { constant, log_type, loglog_type, ladder_rung };

    static GFunction constant(double c);
    static GFunction log_of_square();              // log(2 + x^2)
    static GFunction loglog_power(double c);       // log^c log(10 + x^2)
    static GFunction ladder_rung(std::shared_ptr<const GLadder> ladder, int rung);

    double operator()(double x) const;
    double deriv(double x) const;
    double second_deriv(double x) const;

    Kind kind() const { return kind_; }
    double param() const { return param_; }
    int rung() const { return rung_; }
    const std::shared_ptr<const GLadder>& ladder() const { return ladder_; }

    // Canonical short name, stable across runs (enters config fingerprints).
    std::string name() const;

    nlohmann::json to_json() const;
    static GFunction from_json(const nlohmann::json& j);

private:
    GFunction(Kind kind, double param, std::shared_ptr<const GLadder> ladder, int rung)
        : kind_(kind), param_(param), ladder_(std::move(ladder)), rung_(rung) {}

    Kind kind_;
    double param_ = 0.0;
    std::shared_ptr<const GLadder> ladder_;
    int rung_ = 0;
};

// One bridge of the ladder: g_i climbs from i to i+1 over
// [bridge_start, plateau_start] via a quintic smoothstep in log x.
struct LadderRung {
    int index;            // i >= 1
    double c_prev;        // ledger constant C_{i-1} supplied at build time
    double plateau_start; // C'_i
    double log_span;      // L = log(plateau_start / bridge_start)
    double bridge_start;  // A*C_{i-1}, or 1 for the first rung
};

// The rung sequence {g_i, C_{i-1}, C'_i}.  g_0 = 1 with C_0 = C'_0 = 0;
// each rung extends the previous function and plateaus at i+1.  Immutable:
// with_rung returns a new ladder.
class GLadder {
public:
    explicit GLadder(double threshold_multiplier);

    double threshold_multiplier() const { return a_; }
    int rung_count() const { return static_cast<int>(rungs_.size()); }
    const std::vector<LadderRung>& rungs() const { return rungs_; }

    // Build rung i from the ledger constant C_{i-1}.  Chooses
    // C'_i = bridge_start * exp(max(4, i(i+1)^2)), which keeps
    // x g_i' <= 15/(8L) <= 1, keeps x^2 g_i'' bounded, and makes the bridge
    // integral of 1/(y g_i^2) at least L/(i+1)^2 >= i.
    GLadder with_rung(int i, double c_prev) const;

    // Default ledger constant for the next build: C_i = max(i, C'_i).
    double suggested_c(int i) const;

    // g_i and its derivatives, defined for all x >= 0.
    double eval_rung(int i, double x) const;
    double rung_deriv(int i, double x) const;
    double rung_second_deriv(int i, double x) const;

    // Limit-function evaluation: value of the first rung whose plateau
    // covers x; raises NeedsMoreRungsError past the last plateau start.
    double eval(double x) const;

    nlohmann::json to_json() const;
    static GLadder from_json(const nlohmann::json& j);

private:
    double a_;
    std::vector<LadderRung> rungs_;
};

void save_ladder(const GLadder& ladder, const std::string& path);
GLadder load_ladder(const std::string& path);

// Growth-condition scan of a candidate g over [0, x_max].
struct ConditionReport {
    double slow_growth_sup = 0.0;   // sup x g'(x)
    double deriv_min = 0.0;         // min g'(x) (nonnegative for monotone g)
    double curvature_sup = 0.0;     // sup x^2 |g''(x)|
    enum class Tail { diverges, converges, inconclusive } tail_verdict;
    std::array<double, 3> cutoffs{};   // geometric: x_max^{1/3}, x_max^{2/3}, x_max
    std::array<double, 3> partials{};  // int_1^cutoff dy/(y g^2(y))
    double partial_integral() const { return partials[2]; }
};

// The tail verdict is heuristic: partial integrals at three geometric
// cutoffs, ratio threshold 1.05 for "diverges".
ConditionReport validate_conditions(const GFunction& g, double x_max, double tol = 1e-8);

// int_a^b dy/(y g^2(y)) by adaptive quadrature in log y, relative
// tolerance 1e-8; requires 1 <= a < b.
double rung_integral(const GFunction& g, double a, double b);

// Shared integrand helper without the a >= 1 restriction (used by the
// rung-count solver, whose lower limit is 2CA).
double inv_y_g2_integral(const GFunction& g, double a, double b, double rel_tol = 1e-8);

// sup over a log-spaced probe grid of |g_i(x) - (i+1)| x^{(p-1)/2 - 0.01};
// finite because the deficit h_i is supported in [0, C'_i].
double h_bound_probe(const GLadder& ladder, int i, double p, int grid_points = 4096);

}  // namespace wavelab::gfun
