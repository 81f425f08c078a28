#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "qtomo/random.hpp"
#include "qtomo/state.hpp"

namespace qtomo {

// Populations at or below this snap exactly to the corresponding pole; the
// coherence-rescaling ratio is 0/0 there and the physical limit is an
// absorbed eigenstate.
inline constexpr double kPoleTol = 1e-14;

// One weak-measurement record.
struct PointerSample {
    Branch branch;
    double reading; // meter value M
    double sigma;   // pointer spread used
};

// Discrete sequence rho(0..N) produced by successive weak measurements.
struct Trajectory {
    std::vector<DensityMatrix> states;

    std::size_t steps() const { return states.size() - 1; }
};

// Gaussian pointer density (1/sqrt(2 pi sigma^2)) exp(-(M -+ 1)^2 / 2 sigma^2),
// mean +1 for Plus and -1 for Minus.
double likelihood(double reading, Branch branch, double sigma);

// Posterior state after observing meter value `reading`: diagonals reweighted
// by the branch likelihoods, coherence rescaled by
// sqrt(p00' p11' / (p00 p11)). Trace-1 and Hermitian by construction; snaps
// to a pole when a population crosses kPoleTol.
DensityMatrix bayesian_update(const DensityMatrix& rho, double reading,
                              double sigma);

// One weak measurement along the z-axis of the supplied state (rotate first
// to measure other axes): coin-toss a branch with p = rho00, draw the meter
// value, apply the Bayesian update.
std::pair<PointerSample, DensityMatrix> weak_measure(const DensityMatrix& rho,
                                                     double epsilon,
                                                     RandomStream& rs);

// Same, parameterized by the pointer spread directly.
std::pair<PointerSample, DensityMatrix> weak_measure_sigma(
    const DensityMatrix& rho, double sigma, RandomStream& rs);

// Projective z measurement: +1 with probability rho00, -1 otherwise. The
// qubit is discarded, no posterior is returned.
int projective_measure(const DensityMatrix& rho, RandomStream& rs);

// N successive weak measurements from rho0; records all N+1 states.
Trajectory trajectory(const DensityMatrix& rho0, double sigma, std::size_t n_steps,
                      RandomStream& rs);

// Smallest t with rho00(t') >= threshold or rho00(t') <= 1 - threshold for
// every t' >= t; nullopt if the tail never settles. Requires
// 0.5 < threshold < 1.
std::optional<std::size_t> collapse_time(const Trajectory& tr, double threshold);

} // namespace qtomo
