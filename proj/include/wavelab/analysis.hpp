#pragma once

#include <vector>

#include "wavelab/gfun.hpp"
#include "wavelab/norms.hpp"
#include "wavelab/propagator.hpp"
#include "wavelab/radial.hpp"

namespace wavelab::analysis {

// (1/2)||du/dt||_{L^2}^2 + (1/2)||D u||_{L^2}^2 + 4 pi int F(|u|) r^2 dr
// with F(z) = int_0^z s^p g(s) ds.  Exactly conserved by the flow only at
// p = 5; computed for any p as a diagnostic.
double energy(const WaveState& state, double p, const gfun::GFunction& g);

// max_k |E(t_k) - E(t_0)| / max(E(t_0), 1e-30)
double energy_drift(const propagator::Trajectory& traj, double p, const gfun::GFunction& g);

// u_lambda(x) = lambda^{-2/(p-1)} u(x/lambda), du/dt picking up one extra
// 1/lambda; resampled through the sine interpolant.  The critical-norm is
// invariant for well-resolved data.
WaveState scaling_transform(const WaveState& state, double lambda, double p);

struct BlowupReport {
    std::vector<double> window_s;
    std::vector<double> window_q;
    double growth_exponent = 0.0;  // d log S / dt over the trailing windows
    enum class Verdict { quiescent, growing, blow_up_suspected } verdict;
    bool truncated = false;
};

// Trailing-window growth scan of the S-norm and the a-priori quantity; a
// truncated ledger always reports blow-up-suspected.
BlowupReport blowup_monitor(const norms::NormLedger& ledger, double window);

struct ScatterCandidate {
    WaveState state;                        // last inverse-flow pull-back
    std::vector<double> cauchy_differences; // data-norm gaps between pull-backs
    bool detected = false;                  // gaps decreasing over the last 3
};

// Applies the inverse free flow at each checkpoint and measures the Cauchy
// differences of the pulled-back states in the data norm.
ScatterCandidate scattering_extract(const propagator::Trajectory& traj,
                                    const std::vector<double>& checkpoints);

struct KenigMerleReport {
    double sup = 0.0;
    bool truncated = false;
};

// Measured sup over the window of the critical-regularity pair norm; a
// monitor, not a certificate.
KenigMerleReport kenig_merle_monitor(const norms::NormLedger& ledger,
                                     norms::TimeInterval window);

struct PerturbationReport {
    double x_norm_diff = 0.0;
    double sup_htilde2_diff = 0.0;
    double rescaling_residual = 0.0;
    bool u_truncated = false;
    bool v_truncated = false;
    int compared_samples = 0;
};

// Evolves the same data under g = g_i and under the constant i+1, measures
// the difference in the composite and sup-in-time norms, and verifies that
// (i+1)^{1/(p-1)} times the constant-g solution solves the unit-constant
// equation (via the integral-form residual).
PerturbationReport perturbation_compare(const WaveState& data, int rung,
                                        const gfun::GLadder& ladder, double p, double horizon,
                                        const propagator::SolverConfig& config);

}  // namespace wavelab::analysis
