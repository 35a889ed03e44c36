#include "wavelab/propagator.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>

#include "wavelab/spectral.hpp"

namespace wavelab::propagator {

namespace {

double mode_sign(NonlinearityMode mode) {
    switch (mode) {
        case NonlinearityMode::defocusing: return -1.0;
        case NonlinearityMode::focusing: return 1.0;
        case NonlinearityMode::off: return 0.0;
    }
    return 0.0;
}

// Right-hand side samples sign * |u|^{p-1} u g(|u|).
void rhs_values(const std::vector<cplx>& u, double p, const gfun::GFunction& g,
                double sign, std::vector<cplx>& out) {
    out.resize(u.size());
    for (size_t j = 0; j < u.size(); ++j) {
        const double au = std::abs(u[j]);
        out[j] = au == 0.0 ? cplx(0.0, 0.0)
                           : sign * std::pow(au, p - 1.0) * g(au) * u[j];
    }
}

void check_amplitude(const std::vector<cplx>& u) {
    for (const auto& v : u) {
        const double a = std::abs(v);
        if (!(a <= kBlowupAmplitude))
            throw BlowupSignal("field amplitude exceeded the blow-up threshold");
    }
}

// In-place coefficient rotation of the pair (a, b) by time t.
void flow_coeffs(std::vector<cplx>& a, std::vector<cplx>& b,
                 const std::vector<double>& k, double t) {
    for (size_t n = 0; n < a.size(); ++n) {
        const double c = std::cos(k[n] * t);
        const double s = std::sin(k[n] * t);
        const cplx an = a[n];
        const cplx bn = b[n];
        a[n] = c * an + (s / k[n]) * bn;
        b[n] = -k[n] * s * an + c * bn;
    }
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string to_string(NonlinearityMode mode) {
    switch (mode) {
        case NonlinearityMode::defocusing: return "defocusing";
        case NonlinearityMode::focusing: return "focusing";
        case NonlinearityMode::off: return "off";
    }
    return "?";
}

NonlinearityMode nonlinearity_mode_from_string(const std::string& s) {
    if (s == "defocusing") return NonlinearityMode::defocusing;
    if (s == "focusing") return NonlinearityMode::focusing;
    if (s == "off") return NonlinearityMode::off;
    throw DomainError("unknown nonlinearity mode '" + s + "'");
}

void SolverConfig::validate() const {
    if (!grid) throw StructuralError("SolverConfig: no grid");
    if (!(p > 3.0)) throw DomainError("SolverConfig: p must exceed 3");
    if (!(dt > 0.0)) throw DomainError("SolverConfig: dt must be positive");
    if (!(horizon >= 0.0)) throw DomainError("SolverConfig: horizon must be nonnegative");
    if (!(epsilon > 0.0)) throw DomainError("SolverConfig: epsilon must be positive");
    const double cap = 0.5 * grid->spacing();
    if (dt > cap * (1.0 + 1e-12))
        throw DomainError("SolverConfig: dt exceeds the splitting guard 0.5 R/(N+1)");
    const double ratio = dt_out / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || std::round(ratio) < 1.0)
        throw DomainError("SolverConfig: dt_out must be an integer multiple of dt");
}

int SolverConfig::steps_per_sample() const {
    return static_cast<int>(std::round(dt_out / dt));
}

std::string SolverConfig::fingerprint() const {
    std::string s = "p=" + fmt(p) + ";g=" + g.name() + ";dt=" + fmt(dt) +
                    ";T=" + fmt(horizon) + ";dt_out=" + fmt(dt_out) +
                    ";N=" + std::to_string(grid ? grid->size() : 0) +
                    ";R=" + fmt(grid ? grid->radius() : 0.0) +
                    ";mode=" + to_string(mode) + ";eps=" + fmt(epsilon);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(s)));
    return buf;
}

WaveState linear_flow(const WaveState& state, double t) {
    std::vector<cplx> a = state.u.coeffs();
    std::vector<cplx> b = state.ut.coeffs();
    flow_coeffs(a, b, state.grid().wavenumbers(), t);
    return WaveState(RadialField::from_coeffs(state.u.grid_ptr(), std::move(a)),
                     RadialField::from_coeffs(state.ut.grid_ptr(), std::move(b)));
}

WaveState step_strang(const WaveState& state, double dt, double p,
                      const gfun::GFunction& g, NonlinearityMode mode) {
    const double sign = mode_sign(mode);
    const auto& grid = state.u.grid();
    check_amplitude(state.u.values());

    std::vector<cplx> u_vals = state.u.values();
    std::vector<cplx> v_vals = state.ut.values();
    std::vector<cplx> kick;
    if (sign != 0.0) {
        rhs_values(u_vals, p, g, sign, kick);
        for (size_t j = 0; j < v_vals.size(); ++j) v_vals[j] += 0.5 * dt * kick[j];
    }

    std::vector<cplx> a = state.u.coeffs();
    std::vector<cplx> b = sine_analyze(v_vals, grid);
    flow_coeffs(a, b, grid.wavenumbers(), dt);
    u_vals = sine_synthesize(a, grid);
    v_vals = sine_synthesize(b, grid);

    if (sign != 0.0) {
        rhs_values(u_vals, p, g, sign, kick);
        for (size_t j = 0; j < v_vals.size(); ++j) v_vals[j] += 0.5 * dt * kick[j];
    }
    check_amplitude(u_vals);
    return WaveState(RadialField::from_values(state.u.grid_ptr(), std::move(u_vals)),
                     RadialField::from_values(state.ut.grid_ptr(), std::move(v_vals)));
}

EvolveResult evolve(const WaveState& state0, const SolverConfig& config) {
    config.validate();
    if (!state0.grid().same_as(*config.grid))
        throw StructuralError("evolve: state grid differs from config grid");

    EvolveResult result;
    result.trajectory.config = config;
    result.trajectory.fingerprint = config.fingerprint();
    result.ledger = norms::NormLedger::create(config.p, config.epsilon);

    const int n_steps = static_cast<int>(std::round(config.horizon / config.dt));
    const int per_sample = config.steps_per_sample();

    WaveState state = state0;
    auto sample = [&](double t, const WaveState& s) {
        result.trajectory.times.push_back(t);
        result.trajectory.states.push_back(s);
        if (!result.ledger.append_row(t, s)) result.trajectory.truncated = true;
        return !result.trajectory.truncated;
    };
    if (!sample(0.0, state)) return result;

    for (int step = 1; step <= n_steps; ++step) {
        try {
            state = step_strang(state, config.dt, config.p, config.g, config.mode);
        } catch (const BlowupSignal&) {
            result.trajectory.truncated = true;
            result.ledger.mark_truncated();
            break;
        }
        if (!state.u.finite() || !state.ut.finite()) {
            result.trajectory.truncated = true;
            result.ledger.mark_truncated();
            break;
        }
        if (step % per_sample == 0 || step == n_steps) {
            if (!sample(step * config.dt, state)) break;
        }
    }
    return result;
}

SmallnessResult smallness_time(const WaveState& state0, double delta,
                               const SolverConfig& config) {
    config.validate();
    if (!(delta > 0.0)) throw DomainError("smallness_time: delta must be positive");
    const double q = 2.0 * (config.p - 1.0);
    const double ceiling = config.horizon;
    const int n = std::max(1, static_cast<int>(std::round(ceiling / config.dt)));
    const double h = ceiling / n;

    // instantaneous L^{2(p-1)} norms of the free evolution
    std::vector<double> density(static_cast<size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        const WaveState free_state = linear_flow(state0, k * h);
        density[k] = std::pow(spectral::lebesgue_norm(free_state.u, q), q);
    }
    std::vector<double> prefix(density.size(), 0.0);
    for (int k = 1; k <= n; ++k)
        prefix[k] = prefix[k - 1] + 0.5 * (density[k - 1] + density[k]) * h;

    auto s_norm_at = [&](double t) {
        const double pos = std::clamp(t / h, 0.0, static_cast<double>(n));
        const int k = std::min(static_cast<int>(pos), n - 1);
        const double frac = pos - k;
        const double f_interp = density[k] + (density[k + 1] - density[k]) * frac;
        const double integral =
            prefix[k] + 0.5 * (density[k] + f_interp) * frac * h;
        return std::pow(integral, 1.0 / q);
    };

    if (s_norm_at(ceiling) <= delta) return {ceiling, true, false};
    if (s_norm_at(config.dt) > delta) return {config.dt, false, true};

    double lo = config.dt;
    double hi = ceiling;
    while (hi - lo > 0.01 * lo) {
        const double mid = 0.5 * (lo + hi);
        (s_norm_at(mid) <= delta ? lo : hi) = mid;
    }
    return {lo, false, false};
}

namespace {

// Coefficient pair with value-space mirror of the position component.
struct IterateSample {
    std::vector<cplx> a;
    std::vector<cplx> b;
    std::vector<cplx> u_vals;
};

double composite_diff_norm(const std::vector<IterateSample>& cur,
                           const std::vector<IterateSample>& prev,
                           const RadialGrid& grid, double p, double h) {
    const double sp = gfun::sp_exponent(p);
    const double q = 2.0 * (p - 1.0);
    double sup_htilde = 0.0;
    double s_integral = 0.0;
    double prev_density = 0.0;
    for (size_t k = 0; k < cur.size(); ++k) {
        std::vector<cplx> da(cur[k].a.size()), dv(cur[k].u_vals.size());
        for (size_t n = 0; n < da.size(); ++n) da[n] = cur[k].a[n] - prev[k].a[n];
        for (size_t j = 0; j < dv.size(); ++j) dv[j] = cur[k].u_vals[j] - prev[k].u_vals[j];
        // Sobolev part straight from coefficients.
        const auto& kn = grid.wavenumbers();
        double s2 = 0.0, ssp = 0.0;
        for (size_t n = 0; n < da.size(); ++n) {
            const double w = std::norm(da[n]);
            s2 += std::pow(kn[n], 4.0) * w;
            ssp += std::pow(kn[n], 2.0 * sp) * w;
        }
        const double scale = 2.0 * std::numbers::pi * grid.radius();
        const double htilde = std::sqrt(scale * s2) + std::sqrt(scale * ssp);
        sup_htilde = std::max(sup_htilde, htilde);
        // S-norm density from the value-space difference.
        double sum = 0.0;
        double prev_val = 0.0;
        const auto& r = grid.nodes();
        const double hh = grid.spacing();
        for (size_t j = 0; j < dv.size(); ++j) {
            const double curv = std::pow(std::abs(dv[j]), q) * r[j] * r[j];
            sum += 0.5 * (prev_val + curv) * hh;
            prev_val = curv;
        }
        sum += 0.5 * (prev_val + std::pow(std::abs(dv.back()), q) * grid.radius() *
                                     grid.radius()) *
               hh;
        const double density = 4.0 * std::numbers::pi * sum;  // ||du||_{L^q}^q
        if (k > 0) s_integral += 0.5 * (prev_density + density) * h;
        prev_density = density;
    }
    return sup_htilde + std::pow(s_integral, 1.0 / q);
}

}  // namespace

PicardResult picard_solve(const WaveState& state0, double t_l, const SolverConfig& config,
                          int max_iter, double tol, PicardSeed seed) {
    config.validate();
    if (!(t_l > 0.0)) throw DomainError("picard_solve: interval length must be positive");
    const auto& grid = *config.grid;
    const auto& kn = grid.wavenumbers();
    const double sign = mode_sign(config.mode);
    const int m_panels = std::max(1, static_cast<int>(std::round(t_l / config.dt_out)));
    const double h = t_l / m_panels;
    const size_t nm = static_cast<size_t>(grid.size());

    // free evolution at the sample times
    std::vector<IterateSample> free_states(static_cast<size_t>(m_panels) + 1);
    for (int k = 0; k <= m_panels; ++k) {
        std::vector<cplx> a = state0.u.coeffs();
        std::vector<cplx> b = state0.ut.coeffs();
        flow_coeffs(a, b, kn, k * h);
        free_states[k].u_vals = sine_synthesize(a, grid);
        free_states[k].a = std::move(a);
        free_states[k].b = std::move(b);
    }

    std::vector<IterateSample> iterate;
    if (seed == PicardSeed::free_evolution) {
        iterate = free_states;
    } else {
        IterateSample zero;
        zero.a.assign(nm, cplx(0.0, 0.0));
        zero.b.assign(nm, cplx(0.0, 0.0));
        zero.u_vals.assign(nm, cplx(0.0, 0.0));
        iterate.assign(static_cast<size_t>(m_panels) + 1, zero);
    }

    PicardResult result;
    std::vector<std::vector<cplx>> rhs_coeffs(static_cast<size_t>(m_panels) + 1);
    std::vector<cplx> rhs_vals;
    int stall = 0;

    for (int sweep = 1; sweep <= max_iter; ++sweep) {
        for (int k = 0; k <= m_panels; ++k) {
            rhs_values(iterate[k].u_vals, config.p, config.g, sign, rhs_vals);
            rhs_coeffs[k] = sine_analyze(rhs_vals, grid);
        }
        std::vector<IterateSample> next(static_cast<size_t>(m_panels) + 1);
        next[0] = free_states[0];
        std::vector<cplx> acc_a(nm, cplx(0.0, 0.0));
        std::vector<cplx> acc_b(nm, cplx(0.0, 0.0));
        for (int k = 1; k <= m_panels; ++k) {
            // propagate the accumulated integral, then add the trapezoid
            // panel; per mode this reproduces the full trapezoid sum of
            // sin((t_k - t')D)/D exactly
            flow_coeffs(acc_a, acc_b, kn, h);
            for (size_t n = 0; n < nm; ++n) {
                const double c = std::cos(kn[n] * h);
                const double s = std::sin(kn[n] * h);
                acc_a[n] += 0.5 * h * (s / kn[n]) * rhs_coeffs[k - 1][n];
                acc_b[n] += 0.5 * h * (c * rhs_coeffs[k - 1][n] + rhs_coeffs[k][n]);
            }
            next[k].a.resize(nm);
            next[k].b.resize(nm);
            for (size_t n = 0; n < nm; ++n) {
                next[k].a[n] = free_states[k].a[n] + acc_a[n];
                next[k].b[n] = free_states[k].b[n] + acc_b[n];
            }
            next[k].u_vals = sine_synthesize(next[k].a, grid);
        }
        const double diff = composite_diff_norm(next, iterate, grid, config.p, h);
        result.diff_norms.push_back(diff);
        if (result.diff_norms.size() >= 2) {
            const double prev = result.diff_norms[result.diff_norms.size() - 2];
            const double ratio = prev == 0.0 ? 0.0 : diff / prev;
            result.ratios.push_back(ratio);
            stall = ratio >= 1.0 ? stall + 1 : 0;
            if (stall >= 3)
                throw NoContractionError(
                    "picard_solve: no contraction for 3 consecutive sweeps "
                    "(smallness condition violated)");
        }
        iterate = std::move(next);
        result.iterations = sweep;
        if (diff <= tol) {
            result.converged = true;
            break;
        }
    }

    result.trajectory.config = config;
    result.trajectory.config.horizon = t_l;
    result.trajectory.config.dt_out = h;
    result.trajectory.fingerprint = result.trajectory.config.fingerprint();
    for (int k = 0; k <= m_panels; ++k) {
        result.trajectory.times.push_back(k * h);
        result.trajectory.states.emplace_back(
            RadialField::from_coeffs(config.grid, iterate[k].a),
            RadialField::from_coeffs(config.grid, iterate[k].b));
    }
    return result;
}

double duhamel_residual(const Trajectory& traj, double p, const gfun::GFunction& g) {
    if (traj.states.empty()) throw StructuralError("duhamel_residual: empty trajectory");
    const auto& grid = traj.states.front().grid();
    const auto& kn = grid.wavenumbers();
    const double sp = gfun::sp_exponent(p);
    const double sign = mode_sign(traj.config.mode);
    const size_t nm = static_cast<size_t>(grid.size());
    const size_t m = traj.states.size();
    if (m < 2) return 0.0;
    const double h = traj.times[1] - traj.times[0];

    std::vector<cplx> free_a = traj.states.front().u.coeffs();
    std::vector<cplx> free_b = traj.states.front().ut.coeffs();
    std::vector<cplx> acc_a(nm, cplx(0.0, 0.0)), acc_b(nm, cplx(0.0, 0.0));
    std::vector<cplx> rhs_prev, rhs_cur, rhs_vals;
    rhs_values(traj.states.front().u.values(), p, g, sign, rhs_vals);
    rhs_prev = sine_analyze(rhs_vals, grid);

    const double scale = 2.0 * std::numbers::pi * grid.radius();
    double max_residual = 0.0;
    for (size_t k = 1; k < m; ++k) {
        const double step = traj.times[k] - traj.times[k - 1];
        if (std::abs(step - h) > 1e-9 * std::max(1.0, h))
            throw StructuralError("duhamel_residual: nonuniform sample times");
        rhs_values(traj.states[k].u.values(), p, g, sign, rhs_vals);
        rhs_cur = sine_analyze(rhs_vals, grid);
        flow_coeffs(acc_a, acc_b, kn, h);
        flow_coeffs(free_a, free_b, kn, h);
        double sum = 0.0;
        const auto& uk = traj.states[k].u.coeffs();
        for (size_t n = 0; n < nm; ++n) {
            const double c = std::cos(kn[n] * h);
            const double s = std::sin(kn[n] * h);
            acc_a[n] += 0.5 * h * (s / kn[n]) * rhs_prev[n];
            acc_b[n] += 0.5 * h * (c * rhs_prev[n] + rhs_cur[n]);
            const cplx defect = uk[n] - (free_a[n] + acc_a[n]);
            sum += std::pow(kn[n], 2.0 * sp) * std::norm(defect);
        }
        max_residual = std::max(max_residual, std::sqrt(scale * sum));
        std::swap(rhs_prev, rhs_cur);
    }
    return max_residual;
}

void save_trajectory(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("save_trajectory: cannot open " + path);
    nlohmann::json header = {
        {"format", "wavelab-trajectory"},
        {"version", 1},
        {"p", traj.config.p},
        {"g", traj.config.g.to_json()},
        {"dt", traj.config.dt},
        {"horizon", traj.config.horizon},
        {"dt_out", traj.config.dt_out},
        {"N", traj.config.grid->size()},
        {"R", traj.config.grid->radius()},
        {"mode", to_string(traj.config.mode)},
        {"epsilon", traj.config.epsilon},
        {"truncated", traj.truncated},
        {"fingerprint", traj.fingerprint},
        {"samples", traj.times.size()},
    };
    const std::string hs = header.dump();
    const std::uint64_t hlen = hs.size();
    out.write("WLTRAJ1\n", 8);
    out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    auto write_doubles = [&out](const double* d, size_t n) {
        out.write(reinterpret_cast<const char*>(d), static_cast<std::streamsize>(n * sizeof(double)));
    };
    write_doubles(traj.times.data(), traj.times.size());
    const size_t nm = static_cast<size_t>(traj.config.grid->size());
    std::vector<double> buf(2 * nm);
    for (const auto& st : traj.states) {
        for (const auto* field : {&st.u, &st.ut}) {
            const auto& c = field->coeffs();
            for (size_t n = 0; n < nm; ++n) {
                buf[2 * n] = c[n].real();
                buf[2 * n + 1] = c[n].imag();
            }
            write_doubles(buf.data(), buf.size());
        }
    }
    if (!out) throw Error("save_trajectory: write failed for " + path);
}

Trajectory load_trajectory(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("load_trajectory: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (std::memcmp(magic, "WLTRAJ1\n", 8) != 0)
        throw Error("load_trajectory: bad magic in " + path);
    std::uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    std::string hs(hlen, '\0');
    in.read(hs.data(), static_cast<std::streamsize>(hlen));
    const nlohmann::json header = nlohmann::json::parse(hs);
    if (header.at("version").get<int>() != 1)
        throw Error("load_trajectory: unsupported version");

    Trajectory traj;
    traj.config.p = header.at("p").get<double>();
    traj.config.g = gfun::GFunction::from_json(header.at("g"));
    traj.config.dt = header.at("dt").get<double>();
    traj.config.horizon = header.at("horizon").get<double>();
    traj.config.dt_out = header.at("dt_out").get<double>();
    traj.config.grid = RadialGrid::create(header.at("N").get<int>(), header.at("R").get<double>());
    traj.config.mode = nonlinearity_mode_from_string(header.at("mode").get<std::string>());
    traj.config.epsilon = header.at("epsilon").get<double>();
    traj.truncated = header.at("truncated").get<bool>();
    traj.fingerprint = header.at("fingerprint").get<std::string>();

    const size_t samples = header.at("samples").get<size_t>();
    traj.times.resize(samples);
    in.read(reinterpret_cast<char*>(traj.times.data()),
            static_cast<std::streamsize>(samples * sizeof(double)));
    const size_t nm = static_cast<size_t>(traj.config.grid->size());
    std::vector<double> buf(2 * nm);
    for (size_t k = 0; k < samples; ++k) {
        std::vector<std::vector<cplx>> coeffs(2, std::vector<cplx>(nm));
        for (auto& c : coeffs) {
            in.read(reinterpret_cast<char*>(buf.data()),
                    static_cast<std::streamsize>(buf.size() * sizeof(double)));
            for (size_t n = 0; n < nm; ++n) c[n] = cplx(buf[2 * n], buf[2 * n + 1]);
        }
        traj.states.emplace_back(RadialField::from_coeffs(traj.config.grid, std::move(coeffs[0])),
                                 RadialField::from_coeffs(traj.config.grid, std::move(coeffs[1])));
    }
    if (!in) throw Error("load_trajectory: truncated file " + path);
    return traj;
}

}  // namespace wavelab::propagator
