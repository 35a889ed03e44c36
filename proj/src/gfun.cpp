#include "wavelab/gfun.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "wavelab/quadrature.hpp"

namespace wavelab::gfun {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Quintic smoothstep: C^2 joints with vanishing first and second
// derivatives at both ends.
double smoothstep(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
double smoothstep_d1(double t) { return 30.0 * t * t * (1.0 - t) * (1.0 - t); }
double smoothstep_d2(double t) { return 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t); }

}  // namespace

double sp_exponent(double p) {
    if (!(p > 3.0)) throw DomainError("sp_exponent: requires p > 3");
    return 1.5 - 2.0 / (p - 1.0);
}

GFunction GFunction::constant(double c) {
    if (!(c > 0.0)) throw DomainError("GFunction::constant: factor must be positive");
    return GFunction(Kind::constant, c, nullptr, 0);
}

GFunction GFunction::log_of_square() { return GFunction(Kind::log_type, 0.0, nullptr, 0); }

GFunction GFunction::loglog_power(double c) {
    if (!(c > 0.0)) throw DomainError("GFunction::loglog_power: exponent must be positive");
    return GFunction(Kind::loglog_type, c, nullptr, 0);
}

GFunction GFunction::ladder_rung(std::shared_ptr<const GLadder> ladder, int rung) {
    if (!ladder) throw DomainError("GFunction::ladder_rung: null ladder");
    if (rung < 1 || rung > ladder->rung_count())
        throw DomainError("GFunction::ladder_rung: rung not built");
    return GFunction(Kind::ladder_rung, 0.0, std::move(ladder), rung);
}

double GFunction::operator()(double x) const {
    switch (kind_) {
        case Kind::constant:
            return param_;
        case Kind::log_type:
            return std::log(2.0 + x * x);
        case Kind::loglog_type:
            return std::pow(std::log(std::log(10.0 + x * x)), param_);
        case Kind::ladder_rung:
            return ladder_->eval_rung(rung_, x);
    }
    return 0.0;
}

double GFunction::deriv(double x) const {
    switch (kind_) {
        case Kind::constant:
            return 0.0;
        case Kind::log_type:
            return 2.0 * x / (2.0 + x * x);
        case Kind::loglog_type: {
            const double u = 10.0 + x * x;
            const double l = std::log(u);
            const double m = std::log(l);
            return param_ * std::pow(m, param_ - 1.0) * (2.0 * x) / (u * l);
        }
        case Kind::ladder_rung:
            return ladder_->rung_deriv(rung_, x);
    }
    return 0.0;
}

double GFunction::second_deriv(double x) const {
    switch (kind_) {
        case Kind::constant:
            return 0.0;
        case Kind::log_type: {
            const double d = 2.0 + x * x;
            return 2.0 * (2.0 - x * x) / (d * d);
        }
        case Kind::loglog_type: {
            const double u = 10.0 + x * x;
            const double up = 2.0 * x;
            const double l = std::log(u);
            const double m = std::log(l);
            const double mp = up / (u * l);
            const double inner = (2.0 * u * l - up * up * (l + 1.0)) / (u * l * u * l);
            return param_ * ((param_ - 1.0) * std::pow(m, param_ - 2.0) * mp * mp +
                             std::pow(m, param_ - 1.0) * inner);
        }
        case Kind::ladder_rung:
            return ladder_->rung_second_deriv(rung_, x);
    }
    return 0.0;
}

std::string GFunction::name() const {
    switch (kind_) {
        case Kind::constant:
            return "const:" + fmt_double(param_);
        case Kind::log_type:
            return "log";
        case Kind::loglog_type:
            return "loglog:" + fmt_double(param_);
        case Kind::ladder_rung:
            return "ladder[A=" + fmt_double(ladder_->threshold_multiplier()) +
                   ",rungs=" + std::to_string(ladder_->rung_count()) +
                   "]:" + std::to_string(rung_);
    }
    return "?";
}

nlohmann::json GFunction::to_json() const {
    switch (kind_) {
        case Kind::constant:
            return {{"kind", "constant"}, {"c", param_}};
        case Kind::log_type:
            return {{"kind", "log"}};
        case Kind::loglog_type:
            return {{"kind", "loglog"}, {"c", param_}};
        case Kind::ladder_rung:
            return {{"kind", "ladder-rung"}, {"rung", rung_}, {"ladder", ladder_->to_json()}};
    }
    return {};
}

GFunction GFunction::from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") return constant(j.at("c").get<double>());
    if (kind == "log") return log_of_square();
    if (kind == "loglog") return loglog_power(j.at("c").get<double>());
    if (kind == "ladder-rung") {
        auto ladder = std::make_shared<GLadder>(GLadder::from_json(j.at("ladder")));
        return ladder_rung(ladder, j.at("rung").get<int>());
    }
    throw DomainError("GFunction::from_json: unknown kind '" + kind + "'");
}

GLadder::GLadder(double threshold_multiplier) : a_(threshold_multiplier) {
    if (!(a_ > 1.0)) throw DomainError("GLadder: threshold multiplier A must exceed 1");
}

GLadder GLadder::with_rung(int i, double c_prev) const {
    if (i != rung_count() + 1)
        throw ConstructionError("with_rung: rungs must be built sequentially; next is " +
                                std::to_string(rung_count() + 1));
    if (i == 1) {
        if (c_prev != 0.0)
            throw ConstructionError("with_rung: C_0 = 0 is required for the first rung");
    } else {
        const auto& prev = rungs_.back();
        if (!(c_prev >= i - 1))
            throw ConstructionError("with_rung: violated C_{i-1} >= i-1 (i=" +
                                    std::to_string(i) + ", C=" + fmt_double(c_prev) + ")");
        if (!(a_ * c_prev >= prev.plateau_start))
            throw ConstructionError("with_rung: violated A*C_{i-1} >= C'_{i-1} (i=" +
                                    std::to_string(i) + ")");
    }
    LadderRung rung;
    rung.index = i;
    rung.c_prev = c_prev;
    rung.bridge_start = (i == 1) ? 1.0 : a_ * c_prev;
    rung.log_span = std::max(4.0, static_cast<double>(i) * (i + 1.0) * (i + 1.0));
    rung.plateau_start = rung.bridge_start * std::exp(rung.log_span);
    if (!std::isfinite(rung.plateau_start))
        throw ConstructionError("with_rung: plateau start C'_" + std::to_string(i) +
                                " overflows double precision");
    GLadder out(*this);
    out.rungs_.push_back(rung);
    return out;
}

double GLadder::suggested_c(int i) const {
    if (i < 1 || i > rung_count()) throw DomainError("suggested_c: rung not built");
    return std::max(static_cast<double>(i), rungs_[i - 1].plateau_start);
}

double GLadder::eval_rung(int i, double x) const {
    if (i < 0 || i > rung_count()) throw DomainError("eval_rung: rung not built");
    if (x < 0.0) throw DomainError("eval_rung: negative argument");
    for (int j = 1; j <= i; ++j) {
        const auto& r = rungs_[j - 1];
        if (x <= r.bridge_start) return static_cast<double>(j);
        if (x < r.plateau_start) {
            double t = (std::log(x) - std::log(r.bridge_start)) / r.log_span;
            t = std::clamp(t, 0.0, 1.0);
            return j + smoothstep(t);
        }
    }
    return i + 1.0;
}

double GLadder::rung_deriv(int i, double x) const {
    if (i < 0 || i > rung_count()) throw DomainError("rung_deriv: rung not built");
    if (x <= 0.0) return 0.0;
    for (int j = 1; j <= i; ++j) {
        const auto& r = rungs_[j - 1];
        if (x <= r.bridge_start) return 0.0;
        if (x < r.plateau_start) {
            const double t = (std::log(x) - std::log(r.bridge_start)) / r.log_span;
            return smoothstep_d1(std::clamp(t, 0.0, 1.0)) / (x * r.log_span);
        }
    }
    return 0.0;
}

double GLadder::rung_second_deriv(int i, double x) const {
    if (i < 0 || i > rung_count()) throw DomainError("rung_second_deriv: rung not built");
    if (x <= 0.0) return 0.0;
    for (int j = 1; j <= i; ++j) {
        const auto& r = rungs_[j - 1];
        if (x <= r.bridge_start) return 0.0;
        if (x < r.plateau_start) {
            const double t =
                std::clamp((std::log(x) - std::log(r.bridge_start)) / r.log_span, 0.0, 1.0);
            const double l = r.log_span;
            return (smoothstep_d2(t) / (l * l) - smoothstep_d1(t) / l) / (x * x);
        }
    }
    return 0.0;
}

double GLadder::eval(double x) const {
    if (x < 0.0) throw DomainError("GLadder::eval: negative argument");
    for (int j = 1; j <= rung_count(); ++j) {
        if (x < rungs_[j - 1].plateau_start) return eval_rung(j, x);
    }
    throw NeedsMoreRungsError("GLadder::eval: x = " + fmt_double(x) +
                              " is past the last built plateau start");
}

nlohmann::json GLadder::to_json() const {
    nlohmann::json rungs = nlohmann::json::array();
    for (const auto& r : rungs_) {
        rungs.push_back({{"i", r.index},
                         {"C_prev", r.c_prev},
                         {"Cp_i", r.plateau_start},
                         {"L", r.log_span}});
    }
    return {{"version", 1}, {"A", a_}, {"rungs", rungs}};
}

GLadder GLadder::from_json(const nlohmann::json& j) {
    if (j.at("version").get<int>() != 1)
        throw DomainError("GLadder::from_json: unsupported version");
    GLadder ladder(j.at("A").get<double>());
    for (const auto& rj : j.at("rungs")) {
        LadderRung r;
        r.index = rj.at("i").get<int>();
        r.c_prev = rj.at("C_prev").get<double>();
        r.plateau_start = rj.at("Cp_i").get<double>();
        r.log_span = rj.at("L").get<double>();
        r.bridge_start = (r.index == 1) ? 1.0 : ladder.a_ * r.c_prev;
        if (r.index != ladder.rung_count() + 1)
            throw StructuralError("GLadder::from_json: rungs out of order");
        if (!(r.plateau_start > r.bridge_start) || !(r.log_span > 0.0))
            throw StructuralError("GLadder::from_json: inconsistent rung geometry");
        ladder.rungs_.push_back(r);
    }
    return ladder;
}

void save_ladder(const GLadder& ladder, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("save_ladder: cannot open " + path);
    out << ladder.to_json().dump(2) << "\n";
}

GLadder load_ladder(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("load_ladder: cannot open " + path);
    nlohmann::json j;
    in >> j;
    return GLadder::from_json(j);
}

double inv_y_g2_integral(const GFunction& g, double a, double b, double rel_tol) {
    if (!(a > 0.0 && b > a)) throw DomainError("inv_y_g2_integral: need 0 < a < b");
    const double sa = std::log(a);
    const double sb = std::log(b);
    auto integrand = [&g](double s) {
        const double gy = g(std::exp(s));
        return 1.0 / (gy * gy);
    };
    // Pre-split so that narrow bridges inside long plateau stretches cannot
    // be skipped by a lucky first Simpson estimate.
    const int segments = std::max(16, static_cast<int>(std::ceil(sb - sa)));
    double total = 0.0;
    for (int s = 0; s < segments; ++s) {
        const double lo = sa + (sb - sa) * s / segments;
        const double hi = sa + (sb - sa) * (s + 1) / segments;
        total += quadrature::adaptive_simpson(integrand, lo, hi, rel_tol);
    }
    return total;
}

double rung_integral(const GFunction& g, double a, double b) {
    if (!(a >= 1.0 && b > a)) throw DomainError("rung_integral: need 1 <= a < b");
    return inv_y_g2_integral(g, a, b, 1e-8);
}

ConditionReport validate_conditions(const GFunction& g, double x_max, double tol) {
    if (!(x_max >= 10.0)) throw DomainError("validate_conditions: x_max must be >= 10");
    ConditionReport report;
    const int n_probe = 4096;
    const double x_lo = 1e-6;
    double slow_sup = 0.0;
    double deriv_min = std::numeric_limits<double>::infinity();
    double curve_sup = 0.0;
    for (int k = 0; k <= n_probe; ++k) {
        const double x =
            x_lo * std::pow(x_max / x_lo, static_cast<double>(k) / n_probe);
        const double d1 = g.deriv(x);
        const double d2 = g.second_deriv(x);
        slow_sup = std::max(slow_sup, x * d1);
        deriv_min = std::min(deriv_min, d1);
        curve_sup = std::max(curve_sup, x * x * std::abs(d2));
    }
    report.slow_growth_sup = slow_sup;
    report.deriv_min = std::min(deriv_min, g.deriv(0.0));
    report.curvature_sup = curve_sup;

    for (int k = 0; k < 3; ++k)
        report.cutoffs[k] = std::pow(x_max, (k + 1) / 3.0);
    double acc = 0.0;
    double prev = 1.0;
    for (int k = 0; k < 3; ++k) {
        acc += inv_y_g2_integral(g, prev, report.cutoffs[k], tol);
        report.partials[k] = acc;
        prev = report.cutoffs[k];
    }

    const double i1 = report.partials[0];
    const double i2 = report.partials[1];
    const double i3 = report.partials[2];
    using Tail = ConditionReport::Tail;
    if (i2 > 0.0 && i3 / i2 >= 1.05) {
        report.tail_verdict = Tail::diverges;
    } else if (i3 == 0.0) {
        report.tail_verdict = Tail::converges;
    } else {
        const double first_inc = i2 - i1;
        const double second_inc = i3 - i2;
        report.tail_verdict = (first_inc <= 0.0 || second_inc / first_inc < 0.8)
                                  ? Tail::converges
                                  : Tail::inconclusive;
    }
    return report;
}

double h_bound_probe(const GLadder& ladder, int i, double p, int grid_points) {
    if (i < 1 || i > ladder.rung_count()) throw DomainError("h_bound_probe: rung not built");
    const double exponent = 0.5 * (p - 1.0) - 0.01;
    const double hi = ladder.rungs()[i - 1].plateau_start;
    const double lo = 1e-6;
    // work in logs: the weight x^{(p-1)/2} is astronomically large where the
    // deficit is astronomically small
    double log_sup = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= grid_points; ++k) {
        const double x = lo * std::pow(hi / lo, static_cast<double>(k) / grid_points);
        const double deficit = std::abs(ladder.eval_rung(i, x) - (i + 1.0));
        if (deficit == 0.0) continue;
        log_sup = std::max(log_sup, std::log(deficit) + exponent * std::log(x));
    }
    return std::exp(log_sup);
}

}  // namespace wavelab::gfun
