#pragma once

#include <cstdint>
#include <random>

#include "wavelab/radial.hpp"

namespace wavelab::profiles {

// Gaussian profile symmetrised with its image at -center so the 3D radial
// function stays smooth at the origin (keeps sine coefficients spectrally
// decaying).  Time derivative starts at zero.
WaveState gaussian_bump(GridPtr grid, double amplitude, double width, double center);

// Exact Laplacian eigenfunction sin(k_n r)/r, mode n >= 1, at unit
// amplitude; time derivative zero.
WaveState eigenmode(GridPtr grid, int n);

// Band-limited random data: complex Gaussian coefficients with an
// exponential spectral envelope over a fixed mode range, so the same seed
// produces the same continuum field at every resolution that resolves it.
WaveState random_smooth(GridPtr grid, std::uint64_t seed, double scale,
                        int max_mode = 64, double mode_decay = 12.0);

// Deterministic Gaussian sampler: Box-Muller over mt19937_64.  The engine
// output is pinned by the standard; avoiding std::normal_distribution keeps
// the byte stream stable across library versions.
class GaussianSampler {
public:
    explicit GaussianSampler(std::uint64_t seed) : engine_(seed) {}
    double next();

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
    double next_unit();  // uniform in (0, 1]
};

}  // namespace wavelab::profiles
