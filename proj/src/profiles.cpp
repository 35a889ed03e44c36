#include "wavelab/profiles.hpp"

#include <cmath>
#include <numbers>

namespace wavelab::profiles {

WaveState gaussian_bump(GridPtr grid, double amplitude, double width, double center) {
    if (!(width > 0.0)) throw DomainError("gaussian_bump: width must be positive");
    if (center < 0.0) throw DomainError("gaussian_bump: center must be nonnegative");
    const auto& r = grid->nodes();
    std::vector<cplx> vals(r.size());
    for (size_t j = 0; j < r.size(); ++j) {
        const double dm = (r[j] - center) / width;
        const double dp = (r[j] + center) / width;
        vals[j] = amplitude * (std::exp(-dm * dm) + std::exp(-dp * dp));
    }
    return WaveState(RadialField::from_values(grid, std::move(vals)),
                     RadialField::zero(grid));
}

WaveState eigenmode(GridPtr grid, int n) {
    if (n < 1 || n > grid->size()) throw DomainError("eigenmode: mode out of range");
    std::vector<cplx> coeffs(static_cast<size_t>(grid->size()), cplx(0.0, 0.0));
    coeffs[n - 1] = cplx(1.0, 0.0);
    return WaveState(RadialField::from_coeffs(grid, std::move(coeffs)),
                     RadialField::zero(grid));
}

WaveState random_smooth(GridPtr grid, std::uint64_t seed, double scale, int max_mode,
                        double mode_decay) {
    GaussianSampler rng(seed);
    const int m = std::min(max_mode, grid->size());
    std::vector<cplx> a(static_cast<size_t>(grid->size()), cplx(0.0, 0.0));
    std::vector<cplx> b(static_cast<size_t>(grid->size()), cplx(0.0, 0.0));
    for (int n = 1; n <= m; ++n) {
        const double env = scale * std::exp(-static_cast<double>(n) / mode_decay);
        a[n - 1] = env * cplx(rng.next(), rng.next());
        b[n - 1] = env * cplx(rng.next(), rng.next());
    }
    return WaveState(RadialField::from_coeffs(grid, std::move(a)),
                     RadialField::from_coeffs(grid, std::move(b)));
}

double GaussianSampler::next_unit() {
    // top 53 bits, mapped to (0, 1]
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return 1.0 - u;
}

double GaussianSampler::next() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
}

}  // namespace wavelab::profiles
