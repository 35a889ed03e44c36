#include "wavelab/spectral.hpp"

#include <cmath>
#include <numbers>

#include "wavelab/gfun.hpp"

namespace wavelab::spectral {

RadialField fractional_derivative(const RadialField& f, double alpha) {
    if (!(alpha >= kMinOrder && alpha <= kMaxOrder))
        throw DomainError("fractional_derivative: order outside [-2, 4]");
    const auto& k = f.grid().wavenumbers();
    std::vector<cplx> coeffs(f.coeffs());
    for (size_t n = 0; n < coeffs.size(); ++n) coeffs[n] *= std::pow(k[n], alpha);
    return RadialField::from_coeffs(f.grid_ptr(), std::move(coeffs));
}

double sobolev_norm(const RadialField& f, double s) {
    if (!(s >= kMinOrder && s <= kMaxOrder))
        throw DomainError("sobolev_norm: order outside [-2, 4]");
    const auto& k = f.grid().wavenumbers();
    const auto& a = f.coeffs();
    double sum = 0.0;
    for (size_t n = 0; n < a.size(); ++n) sum += std::pow(k[n], 2.0 * s) * std::norm(a[n]);
    return std::sqrt(2.0 * std::numbers::pi * f.grid().radius() * sum);
}

double lebesgue_norm(const RadialField& f, double rho) {
    const auto& vals = f.values();
    if (std::isinf(rho)) {
        double m = 0.0;
        for (const auto& v : vals) m = std::max(m, std::abs(v));
        return m;
    }
    if (!(rho >= 1.0)) throw DomainError("lebesgue_norm: exponent must be >= 1");
    const auto& r = f.grid().nodes();
    const double R = f.grid().radius();
    const double h = f.grid().spacing();
    const size_t n = vals.size();
    // integrand |u|^rho r^2 on {0, r_1..r_N, R}; zero at the origin from the
    // r^2 factor.
    double sum = 0.0;
    double prev = 0.0;
    for (size_t j = 0; j < n; ++j) {
        const double cur = std::pow(std::abs(vals[j]), rho) * r[j] * r[j];
        sum += 0.5 * (prev + cur) * h;
        prev = cur;
    }
    const double edge = std::pow(std::abs(vals[n - 1]), rho) * R * R;
    sum += 0.5 * (prev + edge) * h;
    return std::pow(4.0 * std::numbers::pi * sum, 1.0 / rho);
}

std::pair<double, double> htilde_norms(const WaveState& state, double p) {
    const double sp = gfun::sp_exponent(p);
    const double a = sobolev_norm(state.u, 2.0) + sobolev_norm(state.u, sp);
    const double b = sobolev_norm(state.ut, 1.0) + sobolev_norm(state.ut, sp - 1.0);
    return {a, b};
}

double sobolev_embedding_probe(const RadialField& f, double p) {
    const double sp = gfun::sp_exponent(p);
    const double denom = sobolev_norm(f, 2.0) + sobolev_norm(f, sp);
    if (denom == 0.0)
        throw DomainError("sobolev_embedding_probe: ratio undefined for the zero field");
    return lebesgue_norm(f, std::numeric_limits<double>::infinity()) / denom;
}

}  // namespace wavelab::spectral
