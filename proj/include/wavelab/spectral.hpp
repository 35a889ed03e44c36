#pragma once

#include <utility>

#include "wavelab/radial.hpp"

namespace wavelab::spectral {

// Supported multiplier exponent range for D^alpha.
inline constexpr double kMinOrder = -2.0;
inline constexpr double kMaxOrder = 4.0;

// D^alpha as the diagonal multiplier k_n^alpha on the sine coefficients of
// r u; D^2 = -Laplacian on radial fields.
RadialField fractional_derivative(const RadialField& f, double alpha);

// Homogeneous Sobolev norm on the truncated ball:
// (2 pi R sum k_n^{2s} |a_n|^2)^{1/2}.
double sobolev_norm(const RadialField& f, double s);

// (4 pi int_0^R |u|^rho r^2 dr)^{1/rho} by composite trapezoid on the node
// grid augmented with r = 0 and r = R; the last panel extends the outermost
// sample so constants integrate to the closed form.  rho = inf gives the
// node maximum.
double lebesgue_norm(const RadialField& f, double rho);

// Intersection norms of the data spaces, realised as sums of seminorms:
// (||u||_{H^2} + ||u||_{H^{s_p}}, ||u_t||_{H^1} + ||u_t||_{H^{s_p-1}}).
std::pair<double, double> htilde_norms(const WaveState& state, double p);

// ||f||_inf divided by the H-tilde-2 norm of f; finite over smooth
// ensembles by the embedding of H-tilde-2 into L-infinity.
double sobolev_embedding_probe(const RadialField& f, double p);

}  // namespace wavelab::spectral
