#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "wavelab/errors.hpp"

namespace wavelab {

using cplx = std::complex<double>;

// Uniform collocation grid for radial fields on the ball of radius R,
// truncated with a homogeneous Dirichlet condition at r = R.  Interior
// nodes r_j = j R/(N+1), j = 1..N carry the samples; the sine basis
// sin(k_n r), k_n = n pi / R, diagonalises the radial Laplacian acting on
// w = r u.
class RadialGrid {
public:
    static std::shared_ptr<const RadialGrid> create(int num_modes, double radius);

    int size() const { return num_modes_; }
    double radius() const { return radius_; }
    double spacing() const { return radius_ / (num_modes_ + 1); }

    // r_j, j = 0..N-1 maps to the paper grid j = 1..N.
    const std::vector<double>& nodes() const { return nodes_; }
    // k_n, n = 0..N-1 maps to mode numbers n = 1..N.
    const std::vector<double>& wavenumbers() const { return wavenumbers_; }

    bool same_as(const RadialGrid& other) const {
        return num_modes_ == other.num_modes_ && radius_ == other.radius_;
    }

private:
    RadialGrid(int num_modes, double radius);

    int num_modes_;
    double radius_;
    std::vector<double> nodes_;
    std::vector<double> wavenumbers_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

// Forward DST-I of the node samples of w = r u, normalised so that
// synthesize(analyze(v)) == v.  Input length must match the grid.
std::vector<cplx> sine_analyze(const std::vector<cplx>& values, const RadialGrid& grid);

// Inverse transform: node samples of u from the sine coefficients of r u.
std::vector<cplx> sine_synthesize(const std::vector<cplx>& coeffs, const RadialGrid& grid);

// A complex radial scalar held in both representations: samples u(r_j) and
// sine coefficients a_n of w(r) = r u(r) = sum a_n sin(k_n r).  Immutable
// after construction.
class RadialField {
public:
    static RadialField from_values(GridPtr grid, std::vector<cplx> values);
    static RadialField from_coeffs(GridPtr grid, std::vector<cplx> coeffs);
    static RadialField zero(GridPtr grid);

    const RadialGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    const std::vector<cplx>& values() const { return values_; }
    const std::vector<cplx>& coeffs() const { return coeffs_; }

    double max_abs() const;
    bool finite() const;

    // Pointwise evaluation of the sine interpolant at arbitrary radius
    // (0 < r; returns 0 beyond the ball).
    cplx eval(double r) const;

    RadialField scaled(cplx factor) const;

private:
    RadialField(GridPtr grid, std::vector<cplx> values, std::vector<cplx> coeffs)
        : grid_(std::move(grid)), values_(std::move(values)), coeffs_(std::move(coeffs)) {}

    GridPtr grid_;
    std::vector<cplx> values_;
    std::vector<cplx> coeffs_;
};

// The instantaneous Cauchy pair (u, du/dt) on a shared grid.
struct WaveState {
    RadialField u;
    RadialField ut;

    WaveState(RadialField u_, RadialField ut_);

    const RadialGrid& grid() const { return u.grid(); }
    static WaveState zero(GridPtr grid);
};

}  // namespace wavelab
