#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wavelab/gfun.hpp"
#include "wavelab/radial.hpp"

namespace wavelab::norms {

struct TimeInterval {
    double a;
    double b;
};

// (q, r) time/space exponent pair at regularity m.
struct AdmissiblePair {
    double q;
    double r;
    double m;
};

// True iff q in (2, inf], r in [2, inf] and 1/q + 3/r = 3/2 - m (with
// 1/inf = 0), tolerance 1e-12.
bool admissible_check(double q, double r, double m);
inline bool admissible_check(const AdmissiblePair& pair) {
    return admissible_check(pair.q, pair.r, pair.m);
}

// Time series of instantaneous spatial norms sampled along a trajectory.
// Mixed L_t^q L_x^r norms over any subinterval are assembled from these by
// trapezoid quadrature in time.  Append-only while a run is in flight,
// immutable afterwards.
class NormLedger {
public:
    enum class Quantity { lebesgue_u, frac_lebesgue_u, sobolev_u, sobolev_ut };

    struct Channel {
        Quantity quantity;
        double alpha;  // derivative order; 0 for plain channels
        double expo;   // Lebesgue exponent r, or Sobolev order s
        std::string name;
        std::vector<double> values;
    };

    // Empty placeholder; create() builds the usable channel set.
    NormLedger() = default;

    // Active channel set for power p and the fixed small exponent epsilon:
    // |u| in L^r for r in {2(p-1), 4, 3+eps, 2, inf}; |D^a u| in L^4 for
    // a in {s_p - 1/2, 3/2} and |D^{s_p-1/2} u| in L^{3+eps}; the Sobolev
    // pairs (s_p, 2) of u and (s_p - 1, 1) of du/dt.
    static NormLedger create(double p, double epsilon);

    double p() const { return p_; }
    double epsilon() const { return epsilon_; }
    const std::vector<double>& times() const { return times_; }
    const std::vector<Channel>& channels() const { return channels_; }
    bool truncated() const { return truncated_; }
    void mark_truncated() { truncated_ = true; }
    size_t rows() const { return times_.size(); }

    // Computes and appends one row; returns false (and truncates) if any
    // entry comes out non-finite.
    bool append_row(double t, const WaveState& state);

    const Channel& lebesgue_channel(double r) const;
    const Channel& frac_channel(double alpha, double r) const;
    const Channel& sobolev_u_channel(double s) const;
    const Channel& sobolev_ut_channel(double s) const;

    // H-tilde-2 of u plus H-tilde-1 of du/dt at one sample.
    double htilde_row_sum(size_t row) const;
    // Critical-regularity pair norm at one sample.
    double critical_row_sum(size_t row) const;

private:
    double p_ = 0.0;
    double epsilon_ = 0.0;
    std::vector<double> times_;
    std::vector<Channel> channels_;
    bool truncated_ = false;
};

// Builds a ledger by sampling precomputed states.
NormLedger ledger_from_states(const std::vector<double>& times,
                              const std::vector<WaveState>& states, double p,
                              double epsilon);

// CSV export: one row per sample, one column per channel, canonical header
// names, 17 significant digits.
void write_ledger_csv(const NormLedger& ledger, const std::string& path);

// (int_I ||u(t)||_{L^r}^q dt)^{1/q}; q = inf takes the sample maximum.
double spacetime_norm(const NormLedger& ledger, double q, double r, TimeInterval window);

// Composite a-priori quantity: two fractional-derivative L_t^4 L_x^4 terms
// plus the sup-in-time data-space norms.
double q_quantity(const NormLedger& ledger, TimeInterval window, double p);

// Composite norm with the near-endpoint pair ((3+eps)/eps, 3+eps) as its
// first component.
double x_norm(const NormLedger& ledger, TimeInterval window, double p, double epsilon);

struct PartitionReport {
    std::vector<TimeInterval> subintervals;
    std::vector<double> s_norms;
    int rung_count = 0;
    std::optional<double> a_constant;
    std::optional<double> c_constant;
    std::optional<double> eta;
    std::optional<double> bound;
};

// Greedy left-to-right chop of the window into subintervals whose S-norm
// equals the threshold (last one smaller).
PartitionReport partition_by_threshold(const NormLedger& ledger, TimeInterval window,
                                       double threshold);

// Smallest N >= 1 with int_{2CA}^{(2C)^N A} dy/(y g^2) >= margin * s^{2(p-1)}.
// Raises NoRungCountError when the integral plateaus before the target.
int solve_rung_count(double a_constant, double c_constant, const gfun::GFunction& g,
                     double s_norm, double p, double margin);

struct AprioriReport {
    bool precondition_ok = false;
    double initial_norm = 0.0;
    double s_norm = 0.0;
    int rung_count = 0;
    double bound = 0.0;
    double sup_norm = 0.0;
    bool holds = false;
    double margin = 10.0;
    std::optional<PartitionReport> partition;
    std::string note;
};

// Measures sup-in-time data norm against the iterated bound (2C)^N A with
// N from solve_rung_count at margin 10.
AprioriReport apriori_bound_check(const NormLedger& ledger, TimeInterval window,
                                  double a_constant, double c_constant,
                                  const gfun::GFunction& g, double eta, double p);

struct StrichartzResult {
    double max_ratio = 0.0;
    std::vector<double> ratios;
};

// Empirical homogeneous Strichartz constant: free-evolution mixed norm over
// [0, T] divided by the data norm, maximised over the ensemble.
StrichartzResult strichartz_probe(const std::vector<WaveState>& ensemble,
                                  const AdmissiblePair& pair, double horizon,
                                  int n_samples = 513, int jobs = 1);

}  // namespace wavelab::norms
