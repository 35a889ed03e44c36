#include "wavelab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "wavelab/quadrature.hpp"
#include "wavelab/spectral.hpp"

namespace wavelab::analysis {

namespace {

// F(z) = int_0^z s^p g(s) ds at each node amplitude, evaluated as one
// cumulative pass over the sorted amplitudes so the quadrature cost is a
// single sweep instead of one integral per node.
std::vector<double> potential_at_nodes(const std::vector<cplx>& values, double p,
                                       const gfun::GFunction& g) {
    const size_t n = values.size();
    std::vector<double> amp(n);
    for (size_t j = 0; j < n; ++j) amp[j] = std::abs(values[j]);
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&amp](size_t a, size_t b) { return amp[a] < amp[b]; });

    auto integrand = [p, &g](double s) { return std::pow(s, p) * g(s); };
    std::vector<double> f(n);
    double acc = 0.0;
    double prev = 0.0;
    for (size_t idx : order) {
        const double z = amp[idx];
        if (z > prev) {
            acc += quadrature::adaptive_simpson(integrand, prev, z, 1e-10);
            prev = z;
        }
        f[idx] = acc;
    }
    return f;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    if (n < 2) return 0.0;
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < n; ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
    }
    return den == 0.0 ? 0.0 : num / den;
}

}  // namespace

double energy(const WaveState& state, double p, const gfun::GFunction& g) {
    if (!(p > 3.0)) throw DomainError("energy: p must exceed 3");
    const auto& grid = state.grid();
    const double scale = 2.0 * std::numbers::pi * grid.radius();
    const auto& kn = grid.wavenumbers();

    double kinetic = 0.0;
    for (const auto& b : state.ut.coeffs()) kinetic += std::norm(b);
    kinetic *= 0.5 * scale;

    double gradient = 0.0;
    const auto& a = state.u.coeffs();
    for (size_t n = 0; n < a.size(); ++n) gradient += kn[n] * kn[n] * std::norm(a[n]);
    gradient *= 0.5 * scale;

    // potential term with the same trapezoid convention as the spatial
    // Lebesgue norms
    const auto f = potential_at_nodes(state.u.values(), p, g);
    const auto& r = grid.nodes();
    const double h = grid.spacing();
    double sum = 0.0;
    double prev = 0.0;
    for (size_t j = 0; j < f.size(); ++j) {
        const double cur = f[j] * r[j] * r[j];
        sum += 0.5 * (prev + cur) * h;
        prev = cur;
    }
    sum += 0.5 * (prev + f.back() * grid.radius() * grid.radius()) * h;
    return kinetic + gradient + 4.0 * std::numbers::pi * sum;
}

double energy_drift(const propagator::Trajectory& traj, double p,
                    const gfun::GFunction& g) {
    if (traj.states.empty()) throw StructuralError("energy_drift: empty trajectory");
    const double e0 = energy(traj.states.front(), p, g);
    double drift = 0.0;
    for (const auto& st : traj.states)
        drift = std::max(drift, std::abs(energy(st, p, g) - e0));
    return drift / std::max(e0, 1e-30);
}

WaveState scaling_transform(const WaveState& state, double lambda, double p) {
    if (!(lambda > 0.0)) throw DomainError("scaling_transform: lambda must be positive");
    const auto& grid = state.grid();
    const auto& r = grid.nodes();

    const double peak =
        std::max(state.u.max_abs(), std::max(state.ut.max_abs(), 1e-300));
    double support = 0.0;
    for (size_t j = 0; j < r.size(); ++j) {
        if (std::abs(state.u.values()[j]) > 1e-10 * peak ||
            std::abs(state.ut.values()[j]) > 1e-10 * peak)
            support = r[j];
    }
    if (lambda * support > grid.radius())
        throw GeometryError("scaling_transform: rescaled support leaves the ball");

    const double amp = std::pow(lambda, -2.0 / (p - 1.0));
    std::vector<cplx> u_vals(r.size()), ut_vals(r.size());
    for (size_t j = 0; j < r.size(); ++j) {
        const double rs = r[j] / lambda;
        u_vals[j] = amp * state.u.eval(rs);
        ut_vals[j] = (amp / lambda) * state.ut.eval(rs);
    }
    return WaveState(RadialField::from_values(state.u.grid_ptr(), std::move(u_vals)),
                     RadialField::from_values(state.ut.grid_ptr(), std::move(ut_vals)));
}

BlowupReport blowup_monitor(const norms::NormLedger& ledger, double window) {
    if (!(window > 0.0)) throw DomainError("blowup_monitor: window must be positive");
    if (ledger.rows() < 2) {
        BlowupReport r;
        r.truncated = ledger.truncated();
        r.verdict = r.truncated ? BlowupReport::Verdict::blow_up_suspected
                                : BlowupReport::Verdict::quiescent;
        return r;
    }
    const double t0 = ledger.times().front();
    const double t1 = ledger.times().back();
    const double range = t1 - t0;
    int m = std::min(4, static_cast<int>(std::floor(range / window)));
    double w = window;
    if (m < 2) {
        m = 2;
        w = 0.5 * range;
    }

    BlowupReport report;
    report.truncated = ledger.truncated();
    std::vector<double> centers;
    const double q_expo = 2.0 * (ledger.p() - 1.0);
    for (int j = m; j >= 1; --j) {
        const norms::TimeInterval win{t1 - j * w, t1 - (j - 1) * w};
        report.window_s.push_back(norms::spacetime_norm(ledger, q_expo, q_expo, win));
        report.window_q.push_back(norms::q_quantity(ledger, win, ledger.p()));
        centers.push_back(0.5 * (win.a + win.b));
    }

    std::vector<double> log_s;
    for (double s : report.window_s) log_s.push_back(std::log(std::max(s, 1e-300)));
    report.growth_exponent = least_squares_slope(centers, log_s);

    using Verdict = BlowupReport::Verdict;
    const double first = report.window_s.front();
    const double last = report.window_s.back();
    if (report.truncated) {
        report.verdict = Verdict::blow_up_suspected;
    } else if (first <= 0.0) {
        report.verdict = last > 0.0 ? Verdict::growing : Verdict::quiescent;
    } else {
        const double ratio = last / first;
        const bool monotone = std::is_sorted(report.window_s.begin(), report.window_s.end());
        if (ratio >= 4.0 && monotone)
            report.verdict = Verdict::blow_up_suspected;
        else if (ratio >= 1.25)
            report.verdict = Verdict::growing;
        else
            report.verdict = Verdict::quiescent;
    }
    return report;
}

ScatterCandidate scattering_extract(const propagator::Trajectory& traj,
                                    const std::vector<double>& checkpoints) {
    if (checkpoints.size() < 4)
        throw DomainError("scattering_extract: need at least 4 checkpoints");
    for (size_t i = 1; i < checkpoints.size(); ++i)
        if (!(checkpoints[i] > checkpoints[i - 1]))
            throw DomainError("scattering_extract: checkpoints must be strictly increasing");
    if (traj.states.empty()) throw StructuralError("scattering_extract: empty trajectory");

    const double slack = 1e-9 * std::max(1.0, traj.times.back());
    std::vector<WaveState> pullbacks;
    for (double tc : checkpoints) {
        size_t idx = traj.times.size();
        for (size_t k = 0; k < traj.times.size(); ++k)
            if (std::abs(traj.times[k] - tc) <= slack) {
                idx = k;
                break;
            }
        if (idx == traj.times.size())
            throw DomainError("scattering_extract: checkpoint does not match a sample time");
        pullbacks.push_back(propagator::linear_flow(traj.states[idx], -tc));
    }

    ScatterCandidate cand{pullbacks.back(), {}, false};
    const double p = traj.config.p;
    for (size_t i = 1; i < pullbacks.size(); ++i) {
        std::vector<cplx> da(pullbacks[i].u.coeffs());
        std::vector<cplx> db(pullbacks[i].ut.coeffs());
        for (size_t n = 0; n < da.size(); ++n) {
            da[n] -= pullbacks[i - 1].u.coeffs()[n];
            db[n] -= pullbacks[i - 1].ut.coeffs()[n];
        }
        const WaveState diff(RadialField::from_coeffs(traj.config.grid, std::move(da)),
                             RadialField::from_coeffs(traj.config.grid, std::move(db)));
        const auto [du, dut] = spectral::htilde_norms(diff, p);
        cand.cauchy_differences.push_back(du + dut);
    }
    const auto& d = cand.cauchy_differences;
    if (d.size() >= 3) {
        const size_t n = d.size();
        cand.detected = d[n - 3] > d[n - 2] && d[n - 2] > d[n - 1];
    }
    return cand;
}

KenigMerleReport kenig_merle_monitor(const norms::NormLedger& ledger,
                                     norms::TimeInterval window) {
    KenigMerleReport report;
    report.truncated = ledger.truncated();
    const double slack = 1e-9 * std::max(1.0, ledger.times().back());
    for (size_t k = 0; k < ledger.rows(); ++k)
        if (ledger.times()[k] >= window.a - slack && ledger.times()[k] <= window.b + slack)
            report.sup = std::max(report.sup, ledger.critical_row_sum(k));
    return report;
}

PerturbationReport perturbation_compare(const WaveState& data, int rung,
                                        const gfun::GLadder& ladder, double p,
                                        double horizon,
                                        const propagator::SolverConfig& config) {
    if (rung < 1 || rung > ladder.rung_count())
        throw DomainError("perturbation_compare: rung not built");
    auto shared = std::make_shared<gfun::GLadder>(ladder);

    propagator::SolverConfig cfg_u = config;
    cfg_u.p = p;
    cfg_u.horizon = horizon;
    cfg_u.g = gfun::GFunction::ladder_rung(shared, rung);
    propagator::SolverConfig cfg_v = cfg_u;
    cfg_v.g = gfun::GFunction::constant(rung + 1.0);

    const auto run_u = propagator::evolve(data, cfg_u);
    const auto run_v = propagator::evolve(data, cfg_v);

    PerturbationReport report;
    report.u_truncated = run_u.trajectory.truncated;
    report.v_truncated = run_v.trajectory.truncated;
    const size_t m = std::min(run_u.trajectory.states.size(), run_v.trajectory.states.size());
    report.compared_samples = static_cast<int>(m);
    if (m == 0) return report;

    std::vector<double> times(run_u.trajectory.times.begin(),
                              run_u.trajectory.times.begin() + m);
    std::vector<WaveState> diffs;
    double sup_h2 = 0.0;
    for (size_t k = 0; k < m; ++k) {
        std::vector<cplx> da(run_u.trajectory.states[k].u.coeffs());
        std::vector<cplx> db(run_u.trajectory.states[k].ut.coeffs());
        for (size_t n = 0; n < da.size(); ++n) {
            da[n] -= run_v.trajectory.states[k].u.coeffs()[n];
            db[n] -= run_v.trajectory.states[k].ut.coeffs()[n];
        }
        diffs.emplace_back(RadialField::from_coeffs(config.grid, std::move(da)),
                           RadialField::from_coeffs(config.grid, std::move(db)));
        const double sp = gfun::sp_exponent(p);
        sup_h2 = std::max(sup_h2, spectral::sobolev_norm(diffs.back().u, 2.0) +
                                      spectral::sobolev_norm(diffs.back().u, sp));
    }
    report.sup_htilde2_diff = sup_h2;
    const auto diff_ledger = norms::ledger_from_states(times, diffs, p, config.epsilon);
    report.x_norm_diff =
        norms::x_norm(diff_ledger, {times.front(), times.back()}, p, config.epsilon);

    // rescaling identity: (i+1)^{1/(p-1)} v solves the unit-constant
    // equation, checked through the integral-form residual
    if (!report.v_truncated) {
        const double c = std::pow(rung + 1.0, 1.0 / (p - 1.0));
        propagator::Trajectory scaled = run_v.trajectory;
        for (auto& st : scaled.states) {
            st = WaveState(st.u.scaled(c), st.ut.scaled(c));
        }
        report.rescaling_residual =
            propagator::duhamel_residual(scaled, p, gfun::GFunction::constant(1.0));
    } else {
        report.rescaling_residual = std::numeric_limits<double>::quiet_NaN();
    }
    return report;
}

}  // namespace wavelab::analysis
