#include "wavelab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <thread>

#include "wavelab/propagator.hpp"
#include "wavelab/spectral.hpp"

namespace wavelab::norms {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool expo_match(double a, double b) {
    if (std::isinf(a) || std::isinf(b)) return std::isinf(a) && std::isinf(b);
    return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

std::string fmt_expo(double v) {
    if (std::isinf(v)) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::string fmt_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Trapezoid prefix integral of nonnegative samples with piecewise-linear
// interpolation inside panels; supports continuous evaluation and inversion
// of the cumulative integral.
class Cumulative {
public:
    Cumulative(const std::vector<double>& times, std::vector<double> density)
        : t_(times), f_(std::move(density)), prefix_(t_.size(), 0.0) {
        for (size_t k = 1; k < t_.size(); ++k)
            prefix_[k] = prefix_[k - 1] + 0.5 * (f_[k - 1] + f_[k]) * (t_[k] - t_[k - 1]);
    }

    double eval(double x) const {
        if (t_.empty()) return 0.0;
        if (x <= t_.front()) return 0.0;
        if (x >= t_.back()) return prefix_.back();
        const auto it = std::upper_bound(t_.begin(), t_.end(), x);
        const size_t k = static_cast<size_t>(it - t_.begin()) - 1;
        const double dt = t_[k + 1] - t_[k];
        const double frac = dt > 0.0 ? (x - t_[k]) / dt : 0.0;
        const double f_interp = f_[k] + (f_[k + 1] - f_[k]) * frac;
        return prefix_[k] + 0.5 * (f_[k] + f_interp) * (x - t_[k]);
    }

    // smallest b in [a, t_end] with eval(b) - eval(a) >= target
    double invert(double a, double target) const {
        double lo = a;
        double hi = t_.back();
        const double base = eval(a);
        for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
            const double mid = 0.5 * (lo + hi);
            (eval(mid) - base >= target ? hi : lo) = mid;
        }
        return hi;
    }

    double total() const { return prefix_.empty() ? 0.0 : prefix_.back(); }
    double panel_mass(size_t k) const {
        return 0.5 * (f_[k] + f_[k + 1]) * (t_[k + 1] - t_[k]);
    }

private:
    const std::vector<double>& t_;
    std::vector<double> f_;
    std::vector<double> prefix_;
};

void check_window(const NormLedger& ledger, const TimeInterval& w) {
    if (ledger.times().empty()) throw StructuralError("empty ledger");
    const double t0 = ledger.times().front();
    const double t1 = ledger.times().back();
    const double slack = 1e-9 * std::max(1.0, t1 - t0);
    if (!(w.a <= w.b) || w.a < t0 - slack || w.b > t1 + slack)
        throw DomainError("window outside the ledger's time range");
}

std::vector<double> channel_power(const NormLedger::Channel& ch, double q) {
    std::vector<double> d(ch.values.size());
    for (size_t k = 0; k < d.size(); ++k) d[k] = std::pow(ch.values[k], q);
    return d;
}

double mixed_norm(const NormLedger& ledger, const NormLedger::Channel& ch, double q,
                  TimeInterval w) {
    check_window(ledger, w);
    if (std::isinf(q)) {
        double m = 0.0;
        const double slack = 1e-9 * std::max(1.0, ledger.times().back());
        for (size_t k = 0; k < ledger.times().size(); ++k)
            if (ledger.times()[k] >= w.a - slack && ledger.times()[k] <= w.b + slack)
                m = std::max(m, ch.values[k]);
        return m;
    }
    Cumulative cum(ledger.times(), channel_power(ch, q));
    return std::pow(std::max(0.0, cum.eval(w.b) - cum.eval(w.a)), 1.0 / q);
}

double row_max(const NormLedger& ledger, TimeInterval w,
               const std::function<double(size_t)>& row_value) {
    check_window(ledger, w);
    const double slack = 1e-9 * std::max(1.0, ledger.times().back());
    double m = 0.0;
    for (size_t k = 0; k < ledger.times().size(); ++k)
        if (ledger.times()[k] >= w.a - slack && ledger.times()[k] <= w.b + slack)
            m = std::max(m, row_value(k));
    return m;
}

}  // namespace

bool admissible_check(double q, double r, double m) {
    if (std::isnan(q) || !(q > 2.0)) return false;
    if (std::isnan(r) || !(r >= 2.0)) return false;
    const double inv_q = std::isinf(q) ? 0.0 : 1.0 / q;
    const double inv_r = std::isinf(r) ? 0.0 : 1.0 / r;
    return std::abs(inv_q + 3.0 * inv_r - (1.5 - m)) <= 1e-12;
}

NormLedger NormLedger::create(double p, double epsilon) {
    if (!(p > 3.0)) throw DomainError("NormLedger: p must exceed 3");
    if (!(epsilon > 0.0)) throw DomainError("NormLedger: epsilon must be positive");
    NormLedger ledger;
    ledger.p_ = p;
    ledger.epsilon_ = epsilon;
    const double sp = gfun::sp_exponent(p);

    auto add = [&ledger](Quantity qty, double alpha, double expo, std::string name) {
        for (const auto& ch : ledger.channels_)
            if (ch.quantity == qty && expo_match(ch.alpha, alpha) && expo_match(ch.expo, expo))
                return;
        ledger.channels_.push_back(Channel{qty, alpha, expo, std::move(name), {}});
    };
    for (double r : {2.0 * (p - 1.0), 4.0, 3.0 + epsilon, 2.0, kInf})
        add(Quantity::lebesgue_u, 0.0, r, "Lx_norm_r=" + fmt_expo(r));
    for (auto [alpha, r] : {std::pair{sp - 0.5, 4.0}, {1.5, 4.0}, {sp - 0.5, 3.0 + epsilon}})
        add(Quantity::frac_lebesgue_u, alpha, r,
            "DLx_norm_a=" + fmt_expo(alpha) + "_r=" + fmt_expo(r));
    for (double s : {sp, 2.0})
        add(Quantity::sobolev_u, 0.0, s, "Hdot_s=" + fmt_expo(s));
    for (double s : {sp - 1.0, 1.0})
        add(Quantity::sobolev_ut, 0.0, s, "Hdot_dt_s=" + fmt_expo(s));
    return ledger;
}

bool NormLedger::append_row(double t, const WaveState& state) {
    if (truncated_) throw StructuralError("NormLedger: appending to a truncated ledger");
    if (!times_.empty() && !(t > times_.back()))
        throw StructuralError("NormLedger: sample times must be strictly increasing");

    // fractional-derivative fields appearing in the active set
    std::vector<std::pair<double, RadialField>> frac_fields;
    for (const auto& ch : channels_)
        if (ch.quantity == Quantity::frac_lebesgue_u) {
            bool have = false;
            for (const auto& [a, f] : frac_fields)
                if (expo_match(a, ch.alpha)) have = true;
            if (!have)
                frac_fields.emplace_back(ch.alpha,
                                         spectral::fractional_derivative(state.u, ch.alpha));
        }

    std::vector<double> row(channels_.size());
    for (size_t c = 0; c < channels_.size(); ++c) {
        const auto& ch = channels_[c];
        switch (ch.quantity) {
            case Quantity::lebesgue_u:
                row[c] = spectral::lebesgue_norm(state.u, ch.expo);
                break;
            case Quantity::frac_lebesgue_u: {
                const RadialField* f = nullptr;
                for (const auto& [a, fld] : frac_fields)
                    if (expo_match(a, ch.alpha)) f = &fld;
                row[c] = spectral::lebesgue_norm(*f, ch.expo);
                break;
            }
            case Quantity::sobolev_u:
                row[c] = spectral::sobolev_norm(state.u, ch.expo);
                break;
            case Quantity::sobolev_ut:
                row[c] = spectral::sobolev_norm(state.ut, ch.expo);
                break;
        }
        if (!std::isfinite(row[c])) {
            truncated_ = true;
            return false;
        }
    }
    times_.push_back(t);
    for (size_t c = 0; c < channels_.size(); ++c) channels_[c].values.push_back(row[c]);
    return true;
}

const NormLedger::Channel& NormLedger::lebesgue_channel(double r) const {
    for (const auto& ch : channels_)
        if (ch.quantity == Quantity::lebesgue_u && expo_match(ch.expo, r)) return ch;
    throw MissingChannelError("ledger does not track L_x^r for r=" + fmt_expo(r));
}

const NormLedger::Channel& NormLedger::frac_channel(double alpha, double r) const {
    for (const auto& ch : channels_)
        if (ch.quantity == Quantity::frac_lebesgue_u && expo_match(ch.alpha, alpha) &&
            expo_match(ch.expo, r))
            return ch;
    throw MissingChannelError("ledger does not track D^a u in L_x^r for a=" +
                              fmt_expo(alpha) + ", r=" + fmt_expo(r));
}

const NormLedger::Channel& NormLedger::sobolev_u_channel(double s) const {
    for (const auto& ch : channels_)
        if (ch.quantity == Quantity::sobolev_u && expo_match(ch.expo, s)) return ch;
    throw MissingChannelError("ledger does not track Hdot^s of u for s=" + fmt_expo(s));
}

const NormLedger::Channel& NormLedger::sobolev_ut_channel(double s) const {
    for (const auto& ch : channels_)
        if (ch.quantity == Quantity::sobolev_ut && expo_match(ch.expo, s)) return ch;
    throw MissingChannelError("ledger does not track Hdot^s of du/dt for s=" + fmt_expo(s));
}

double NormLedger::htilde_row_sum(size_t row) const {
    const double sp = gfun::sp_exponent(p_);
    return sobolev_u_channel(2.0).values.at(row) + sobolev_u_channel(sp).values.at(row) +
           sobolev_ut_channel(1.0).values.at(row) +
           sobolev_ut_channel(sp - 1.0).values.at(row);
}

double NormLedger::critical_row_sum(size_t row) const {
    const double sp = gfun::sp_exponent(p_);
    return sobolev_u_channel(sp).values.at(row) +
           sobolev_ut_channel(sp - 1.0).values.at(row);
}

NormLedger ledger_from_states(const std::vector<double>& times,
                              const std::vector<WaveState>& states, double p,
                              double epsilon) {
    if (times.size() != states.size())
        throw StructuralError("ledger_from_states: times/states mismatch");
    NormLedger ledger = NormLedger::create(p, epsilon);
    for (size_t k = 0; k < times.size(); ++k)
        if (!ledger.append_row(times[k], states[k])) break;
    return ledger;
}

void write_ledger_csv(const NormLedger& ledger, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("write_ledger_csv: cannot open " + path);
    out << "t";
    for (const auto& ch : ledger.channels()) out << "," << ch.name;
    out << "\n";
    for (size_t k = 0; k < ledger.rows(); ++k) {
        out << fmt_full(ledger.times()[k]);
        for (const auto& ch : ledger.channels()) out << "," << fmt_full(ch.values[k]);
        out << "\n";
    }
}

double spacetime_norm(const NormLedger& ledger, double q, double r, TimeInterval window) {
    return mixed_norm(ledger, ledger.lebesgue_channel(r), q, window);
}

double q_quantity(const NormLedger& ledger, TimeInterval window, double p) {
    const double sp = gfun::sp_exponent(p);
    const double w1 = mixed_norm(ledger, ledger.frac_channel(sp - 0.5, 4.0), 4.0, window);
    const double w2 = mixed_norm(ledger, ledger.frac_channel(1.5, 4.0), 4.0, window);
    const auto& s2 = ledger.sobolev_u_channel(2.0).values;
    const auto& ssp = ledger.sobolev_u_channel(sp).values;
    const auto& d1 = ledger.sobolev_ut_channel(1.0).values;
    const auto& dsp = ledger.sobolev_ut_channel(sp - 1.0).values;
    const double sup2 = row_max(ledger, window, [&](size_t k) { return s2[k] + ssp[k]; });
    const double sup1 = row_max(ledger, window, [&](size_t k) { return d1[k] + dsp[k]; });
    return w1 + w2 + sup2 + sup1;
}

double x_norm(const NormLedger& ledger, TimeInterval window, double p, double epsilon) {
    if (!expo_match(epsilon, ledger.epsilon()))
        throw DomainError("x_norm: epsilon differs from the ledger's epsilon");
    const double sp = gfun::sp_exponent(p);
    const double q_near_inf = (3.0 + epsilon) / epsilon;
    const double t1 = mixed_norm(ledger, ledger.frac_channel(sp - 0.5, 3.0 + epsilon),
                                 q_near_inf, window);
    const double t2 = mixed_norm(ledger, ledger.frac_channel(sp - 0.5, 4.0), 4.0, window);
    const double q_s = 2.0 * (p - 1.0);
    const double t3 = mixed_norm(ledger, ledger.lebesgue_channel(q_s), q_s, window);
    const auto& ssp = ledger.sobolev_u_channel(sp).values;
    const auto& dsp = ledger.sobolev_ut_channel(sp - 1.0).values;
    const double t4 = row_max(ledger, window, [&](size_t k) { return ssp[k]; });
    const double t5 = row_max(ledger, window, [&](size_t k) { return dsp[k]; });
    return t1 + t2 + t3 + t4 + t5;
}

PartitionReport partition_by_threshold(const NormLedger& ledger, TimeInterval window,
                                       double threshold) {
    if (!(threshold > 0.0))
        throw DomainError("partition_by_threshold: threshold must be positive");
    check_window(ledger, window);
    const double q = 2.0 * (ledger.p() - 1.0);
    const auto& ch = ledger.lebesgue_channel(q);
    Cumulative cum(ledger.times(), channel_power(ch, q));
    const double mass = std::pow(threshold, q);

    const double slack = 1e-9 * std::max(1.0, ledger.times().back());
    for (size_t k = 0; k + 1 < ledger.times().size(); ++k) {
        if (ledger.times()[k + 1] <= window.a + slack || ledger.times()[k] >= window.b - slack)
            continue;
        if (cum.panel_mass(k) > mass)
            throw ResolutionTooCoarseError(
                "partition_by_threshold: a single ledger step exceeds the threshold; "
                "refine dt_out");
    }

    PartitionReport report;
    double a = window.a;
    while (cum.eval(window.b) - cum.eval(a) > mass * (1.0 + 1e-12)) {
        const double b = cum.invert(a, mass);
        report.subintervals.push_back({a, b});
        report.s_norms.push_back(std::pow(std::max(0.0, cum.eval(b) - cum.eval(a)), 1.0 / q));
        a = b;
    }
    report.subintervals.push_back({a, window.b});
    report.s_norms.push_back(
        std::pow(std::max(0.0, cum.eval(window.b) - cum.eval(a)), 1.0 / q));
    report.rung_count = static_cast<int>(report.subintervals.size());
    return report;
}

int solve_rung_count(double a_constant, double c_constant, const gfun::GFunction& g,
                     double s_norm, double p, double margin) {
    if (!(a_constant > 0.0)) throw DomainError("solve_rung_count: A must be positive");
    const double two_c = 2.0 * c_constant;
    if (!(two_c > 1.0)) throw DomainError("solve_rung_count: 2C must exceed 1");
    if (!(margin > 1.0)) throw DomainError("solve_rung_count: margin must exceed 1");
    if (!(s_norm >= 0.0)) throw DomainError("solve_rung_count: negative S-norm");
    const double target = margin * std::pow(s_norm, 2.0 * (p - 1.0));
    if (target <= 0.0) return 1;

    double integral = 0.0;
    double y = two_c * a_constant;
    int n = 1;
    while (integral < target * (1.0 - 1e-9)) {
        const double y_next = y * two_c;
        if (!(y_next < 1e300) || n > 200000)
            throw NoRungCountError(
                "solve_rung_count: integral reached " + fmt_full(integral) + " of target " +
                    fmt_full(target) +
                    " before the upper limit left double range; the slow-average-growth "
                    "condition fails for this g at this target",
                integral, target);
        integral += gfun::inv_y_g2_integral(g, y, y_next);
        y = y_next;
        ++n;
    }
    return n;
}

AprioriReport apriori_bound_check(const NormLedger& ledger, TimeInterval window,
                                  double a_constant, double c_constant,
                                  const gfun::GFunction& g, double eta, double p) {
    check_window(ledger, window);
    AprioriReport report;
    const double slack = 1e-9 * std::max(1.0, ledger.times().back());
    size_t first = 0;
    while (first < ledger.rows() && ledger.times()[first] < window.a - slack) ++first;
    if (first >= ledger.rows()) throw DomainError("apriori_bound_check: empty window");

    report.initial_norm = ledger.htilde_row_sum(first);
    report.precondition_ok =
        a_constant >= report.initial_norm * (1.0 - 1e-12) && c_constant > 1.0;
    if (!report.precondition_ok) {
        report.note = "precondition violated: need A >= initial data norm and C > 1";
        return report;
    }
    const double q = 2.0 * (p - 1.0);
    report.s_norm = spacetime_norm(ledger, q, q, window);
    report.rung_count =
        solve_rung_count(a_constant, c_constant, g, report.s_norm, p, report.margin);
    report.bound = std::pow(2.0 * c_constant, report.rung_count) * a_constant;
    report.sup_norm = row_max(ledger, window,
                              [&](size_t k) { return ledger.htilde_row_sum(k); });
    report.holds = report.sup_norm <= report.bound;

    const double g_at_bound = g(report.bound);
    if (std::isfinite(g_at_bound) && g_at_bound > 0.0) {
        const double threshold = eta / std::pow(g_at_bound, 1.0 / (p - 1.0));
        if (threshold > 0.0) {
            try {
                auto part = partition_by_threshold(ledger, window, threshold);
                part.a_constant = a_constant;
                part.c_constant = c_constant;
                part.eta = eta;
                part.bound = report.bound;
                report.partition = std::move(part);
            } catch (const ResolutionTooCoarseError& e) {
                report.note = e.what();
            }
        }
    } else {
        report.note = "partition skipped: g overflows at the bound";
    }
    return report;
}

StrichartzResult strichartz_probe(const std::vector<WaveState>& ensemble,
                                  const AdmissiblePair& pair, double horizon,
                                  int n_samples, int jobs) {
    if (!admissible_check(pair))
        throw DomainError("strichartz_probe: pair is not wave admissible at its m");
    if (ensemble.empty()) throw DomainError("strichartz_probe: empty ensemble");
    if (n_samples < 2) throw DomainError("strichartz_probe: need at least 2 samples");

    StrichartzResult result;
    result.ratios.assign(ensemble.size(), 0.0);
    const double h = horizon / (n_samples - 1);

    auto worker = [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            const auto& datum = ensemble[i];
            const double denom = spectral::sobolev_norm(datum.u, pair.m) +
                                 spectral::sobolev_norm(datum.ut, pair.m - 1.0);
            if (denom == 0.0)
                throw DomainError("strichartz_probe: zero datum in ensemble");
            double numer;
            if (std::isinf(pair.q)) {
                double m = 0.0;
                for (int k = 0; k < n_samples; ++k)
                    m = std::max(m, spectral::lebesgue_norm(
                                        propagator::linear_flow(datum, k * h).u, pair.r));
                numer = m;
            } else {
                double integral = 0.0;
                double prev = 0.0;
                for (int k = 0; k < n_samples; ++k) {
                    const double v = std::pow(
                        spectral::lebesgue_norm(propagator::linear_flow(datum, k * h).u,
                                                pair.r),
                        pair.q);
                    if (k > 0) integral += 0.5 * (prev + v) * h;
                    prev = v;
                }
                numer = std::pow(integral, 1.0 / pair.q);
            }
            result.ratios[i] = numer / denom;
        }
    };

    if (jobs <= 1) {
        worker(0, ensemble.size());
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(static_cast<size_t>(jobs));
        const size_t chunk = (ensemble.size() + jobs - 1) / jobs;
        for (int j = 0; j < jobs; ++j) {
            const size_t b = std::min(ensemble.size(), j * chunk);
            const size_t e = std::min(ensemble.size(), (j + 1) * chunk);
            if (b < e)
                pool.emplace_back([&, j, b, e] {
                    try {
                        worker(b, e);
                    } catch (...) {
                        errors[j] = std::current_exception();
                    }
                });
        }
        for (auto& th : pool) th.join();
        for (const auto& err : errors)
            if (err) std::rethrow_exception(err);
    }
    result.max_ratio = *std::max_element(result.ratios.begin(), result.ratios.end());
    return result;
}

}  // namespace wavelab::norms
