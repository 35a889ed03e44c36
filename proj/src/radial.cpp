#include "wavelab/radial.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <numbers>

namespace wavelab {

namespace {

// FFTW plan creation is not thread safe; execution on the plan's own
// buffers is serialised per thread by keeping the whole transform object
// thread local.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// One RODFT00 (DST-I) plan per mode count, with owned aligned buffers.
// RODFT00 computes Y_k = 2 sum_j X_j sin(pi j k/(N+1)); applying it twice
// multiplies by 2(N+1).
class SineTransform {
public:
    explicit SineTransform(int n) : n_(n) {
        in_ = fftw_alloc_real(static_cast<size_t>(n));
        out_ = fftw_alloc_real(static_cast<size_t>(n));
        std::lock_guard lock(planner_mutex());
        plan_ = fftw_plan_r2r_1d(n, in_, out_, FFTW_RODFT00, FFTW_ESTIMATE);
    }

    ~SineTransform() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan_);
        fftw_free(in_);
        fftw_free(out_);
    }

    SineTransform(const SineTransform&) = delete;
    SineTransform& operator=(const SineTransform&) = delete;

    void apply(const double* src, double* dst) {
        std::memcpy(in_, src, sizeof(double) * static_cast<size_t>(n_));
        fftw_execute(plan_);
        std::memcpy(dst, out_, sizeof(double) * static_cast<size_t>(n_));
    }

    static SineTransform& get(int n) {
        thread_local std::map<int, std::unique_ptr<SineTransform>> cache;
        auto& slot = cache[n];
        if (!slot) slot = std::make_unique<SineTransform>(n);
        return *slot;
    }

private:
    int n_;
    double* in_;
    double* out_;
    fftw_plan plan_;
};

void dst_complex(const std::vector<cplx>& in, std::vector<cplx>& out, int n, double scale) {
    auto& t = SineTransform::get(n);
    std::vector<double> part(static_cast<size_t>(n)), res(static_cast<size_t>(n));
    out.resize(static_cast<size_t>(n));
    for (int c = 0; c < 2; ++c) {
        for (int j = 0; j < n; ++j) part[j] = c == 0 ? in[j].real() : in[j].imag();
        t.apply(part.data(), res.data());
        for (int j = 0; j < n; ++j) {
            if (c == 0)
                out[j] = cplx(res[j] * scale, 0.0);
            else
                out[j] += cplx(0.0, res[j] * scale);
        }
    }
}

}  // namespace

RadialGrid::RadialGrid(int num_modes, double radius)
    : num_modes_(num_modes), radius_(radius) {
    nodes_.resize(static_cast<size_t>(num_modes));
    wavenumbers_.resize(static_cast<size_t>(num_modes));
    const double h = radius / (num_modes + 1);
    for (int j = 0; j < num_modes; ++j) {
        nodes_[j] = h * (j + 1);
        wavenumbers_[j] = std::numbers::pi * (j + 1) / radius;
    }
}

std::shared_ptr<const RadialGrid> RadialGrid::create(int num_modes, double radius) {
    if (!(radius > 0.0)) throw DomainError("RadialGrid: radius must be positive");
    if (num_modes < 8) throw DomainError("RadialGrid: need at least 8 modes");
    if ((num_modes & (num_modes - 1)) != 0)
        throw DomainError("RadialGrid: mode count must be a power of two");
    return std::shared_ptr<const RadialGrid>(new RadialGrid(num_modes, radius));
}

std::vector<cplx> sine_analyze(const std::vector<cplx>& values, const RadialGrid& grid) {
    const int n = grid.size();
    if (static_cast<int>(values.size()) != n)
        throw StructuralError("sine_analyze: sample count does not match grid");
    std::vector<cplx> w(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) w[j] = values[j] * grid.nodes()[j];
    std::vector<cplx> coeffs;
    dst_complex(w, coeffs, n, 1.0 / (n + 1));
    return coeffs;
}

std::vector<cplx> sine_synthesize(const std::vector<cplx>& coeffs, const RadialGrid& grid) {
    const int n = grid.size();
    if (static_cast<int>(coeffs.size()) != n)
        throw StructuralError("sine_synthesize: coefficient count does not match grid");
    std::vector<cplx> w;
    dst_complex(coeffs, w, n, 0.5);
    std::vector<cplx> values(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) values[j] = w[j] / grid.nodes()[j];
    return values;
}

RadialField RadialField::from_values(GridPtr grid, std::vector<cplx> values) {
    auto coeffs = sine_analyze(values, *grid);
    return RadialField(std::move(grid), std::move(values), std::move(coeffs));
}

RadialField RadialField::from_coeffs(GridPtr grid, std::vector<cplx> coeffs) {
    auto values = sine_synthesize(coeffs, *grid);
    return RadialField(std::move(grid), std::move(values), std::move(coeffs));
}

RadialField RadialField::zero(GridPtr grid) {
    std::vector<cplx> v(static_cast<size_t>(grid->size()), cplx(0.0, 0.0));
    return RadialField(std::move(grid), v, v);
}

double RadialField::max_abs() const {
    double m = 0.0;
    for (const auto& v : values_) m = std::max(m, std::abs(v));
    return m;
}

bool RadialField::finite() const {
    for (const auto& v : values_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

cplx RadialField::eval(double r) const {
    if (r < 0.0) throw DomainError("RadialField::eval: negative radius");
    if (r >= grid_->radius()) return cplx(0.0, 0.0);
    const auto& k = grid_->wavenumbers();
    cplx w(0.0, 0.0);
    if (r == 0.0) {
        // w(0) = 0 structurally; u(0) = w'(0).
        for (size_t n = 0; n < coeffs_.size(); ++n) w += coeffs_[n] * k[n];
        return w;
    }
    for (size_t n = 0; n < coeffs_.size(); ++n) w += coeffs_[n] * std::sin(k[n] * r);
    return w / r;
}

RadialField RadialField::scaled(cplx factor) const {
    std::vector<cplx> v(values_.size()), c(coeffs_.size());
    for (size_t j = 0; j < values_.size(); ++j) v[j] = values_[j] * factor;
    for (size_t j = 0; j < coeffs_.size(); ++j) c[j] = coeffs_[j] * factor;
    return RadialField(grid_, std::move(v), std::move(c));
}

WaveState::WaveState(RadialField u_, RadialField ut_)
    : u(std::move(u_)), ut(std::move(ut_)) {
    if (!u.grid().same_as(ut.grid()))
        throw StructuralError("WaveState: u and du/dt must share one grid");
}

WaveState WaveState::zero(GridPtr grid) {
    return WaveState(RadialField::zero(grid), RadialField::zero(grid));
}

}  // namespace wavelab
