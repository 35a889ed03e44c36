#pragma once

#include <string>
#include <vector>

#include "wavelab/gfun.hpp"
#include "wavelab/norms.hpp"
#include "wavelab/radial.hpp"

namespace wavelab::propagator {

// Sign of the power nonlinearity; `off` disables it (free flow through the
// same stepper, used for consistency checks and positive controls).
enum class NonlinearityMode { defocusing, focusing, off };

std::string to_string(NonlinearityMode mode);
NonlinearityMode nonlinearity_mode_from_string(const std::string& s);

// Field amplitude past which a run is flagged as numerically blown up.
inline constexpr double kBlowupAmplitude = 1e8;

struct SolverConfig {
    double p = 5.0;
    gfun::GFunction g = gfun::GFunction::constant(1.0);
    double dt = 1e-3;
    double horizon = 1.0;   // T
    double dt_out = 1e-2;   // ledger sampling step
    GridPtr grid;
    NonlinearityMode mode = NonlinearityMode::defocusing;
    double epsilon = 0.1;   // ledger epsilon

    // dt capped at 0.5 R/(N+1): the linear flow is exact, the guard only
    // bounds the splitting error; dt_out must be an integer multiple of dt.
    void validate() const;
    int steps_per_sample() const;
    std::string fingerprint() const;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<WaveState> states;
    SolverConfig config;
    bool truncated = false;
    std::string fingerprint;
};

// Exact free propagator: coefficient-wise rotation
// (a, b) -> (cos(kt) a + sin(kt)/k b, -k sin(kt) a + cos(kt) b).
WaveState linear_flow(const WaveState& state, double t);

// Strang step: half nonlinear kick on du/dt, exact linear flow, half kick.
// The kick is exact because u is frozen while only du/dt changes.  Raises
// BlowupSignal when the amplitude exceeds kBlowupAmplitude or goes
// non-finite.
WaveState step_strang(const WaveState& state, double dt, double p,
                      const gfun::GFunction& g, NonlinearityMode mode);

struct EvolveResult {
    Trajectory trajectory;
    norms::NormLedger ledger;
};

// Fixed-step integration to the horizon (or until blow-up is suspected, in
// which case the trajectory is truncated and flagged, ledger retained).
EvolveResult evolve(const WaveState& state0, const SolverConfig& config);

struct SmallnessResult {
    double t_l = 0.0;
    bool hit_ceiling = false;    // free norm never reached delta before T
    bool below_min_step = false; // already above delta after one dt
};

// Largest T_l (1% dyadic precision) with free-evolution S-norm <= delta.
SmallnessResult smallness_time(const WaveState& state0, double delta,
                               const SolverConfig& config);

enum class PicardSeed { free_evolution, zero };

struct PicardResult {
    Trajectory trajectory;
    std::vector<double> diff_norms;  // successive-difference norms
    std::vector<double> ratios;      // diff_norms[m] / diff_norms[m-1]
    bool converged = false;
    int iterations = 0;
};

// Fixed-point iteration on the integral form of the equation: free term
// plus the propagated nonlinearity integral, trapezoid in t' on the sample
// grid with the exact spectral propagator inside.  Differences are measured
// in sup-in-time H-tilde-2 plus the S-norm.  Three consecutive
// non-contracting sweeps raise NoContractionError.
PicardResult picard_solve(const WaveState& state0, double t_l, const SolverConfig& config,
                          int max_iter, double tol,
                          PicardSeed seed = PicardSeed::free_evolution);

// Max over sample times of the critical-norm defect between the stored
// states and the integral-equation right-hand side rebuilt from them.
double duhamel_residual(const Trajectory& traj, double p, const gfun::GFunction& g);

// Versioned binary checkpoint of (config, sample times, coefficient
// arrays); exact round trip.
void save_trajectory(const Trajectory& traj, const std::string& path);
Trajectory load_trajectory(const std::string& path);

}  // namespace wavelab::propagator
