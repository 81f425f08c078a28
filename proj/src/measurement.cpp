#include "qtomo/measurement.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qtomo {

namespace {

const DensityMatrix kPolePlus{cplx{1.0, 0.0}, cplx{}, cplx{}, cplx{}};
const DensityMatrix kPoleMinus{cplx{}, cplx{}, cplx{}, cplx{1.0, 0.0}};

} // namespace

double likelihood(double reading, Branch branch, double sigma) {
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("likelihood requires sigma > 0");
    }
    const double d = reading - branch_mean(branch);
    const double var = sigma * sigma;
    return std::exp(-d * d / (2.0 * var)) /
           std::sqrt(2.0 * std::numbers::pi * var);
}

DensityMatrix bayesian_update(const DensityMatrix& rho, double reading,
                              double sigma) {
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("bayesian_update requires sigma > 0");
    }
    const double p00 = rho.p00();
    const double p11 = rho.p11();
    if (p00 <= kPoleTol) return kPoleMinus;
    if (p11 <= kPoleTol) return kPolePlus;

    const double l0 = likelihood(reading, Branch::Plus, sigma);
    const double l1 = likelihood(reading, Branch::Minus, sigma);
    const double pm = p00 * l0 + p11 * l1;
    if (pm <= 0.0) {
        // Both likelihoods underflowed; only reachable for readings far
        // outside the pointer distribution. Take the strong-measurement
        // limit: collapse toward the nearer Gaussian.
        return std::abs(reading - 1.0) <= std::abs(reading + 1.0) ? kPolePlus
                                                                  : kPoleMinus;
    }
    const double q00 = p00 * l0 / pm;
    const double q11 = p11 * l1 / pm;
    if (q00 <= kPoleTol) return kPoleMinus;
    if (q11 <= kPoleTol) return kPolePlus;

    DensityMatrix out;
    out.r00 = cplx{q00, 0.0};
    out.r11 = cplx{q11, 0.0};
    out.r01 = rho.r01 * std::sqrt(q00 * q11 / (p00 * p11));
    out.r10 = std::conj(out.r01);
    return out;
}

std::pair<PointerSample, DensityMatrix> weak_measure_sigma(
    const DensityMatrix& rho, double sigma, RandomStream& rs) {
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("weak_measure requires sigma > 0");
    }
    require_valid(rho);
    const Branch branch = rs.cointoss(rho.p00());
    const double reading = rs.gaussian({branch_mean(branch), sigma});
    return {PointerSample{branch, reading, sigma},
            bayesian_update(rho, reading, sigma)};
}

std::pair<PointerSample, DensityMatrix> weak_measure(const DensityMatrix& rho,
                                                     double epsilon,
                                                     RandomStream& rs) {
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("weak_measure requires epsilon > 0");
    }
    return weak_measure_sigma(rho, 1.0 / std::sqrt(epsilon), rs);
}

int projective_measure(const DensityMatrix& rho, RandomStream& rs) {
    require_valid(rho);
    return rs.cointoss(rho.p00()) == Branch::Plus ? +1 : -1;
}

Trajectory trajectory(const DensityMatrix& rho0, double sigma,
                      std::size_t n_steps, RandomStream& rs) {
    if (n_steps < 1) {
        throw std::invalid_argument("trajectory requires at least one step");
    }
    require_valid(rho0);
    Trajectory tr;
    tr.states.reserve(n_steps + 1);
    tr.states.push_back(rho0);
    for (std::size_t t = 0; t < n_steps; ++t) {
        tr.states.push_back(weak_measure_sigma(tr.states.back(), sigma, rs).second);
    }
    return tr;
}

std::optional<std::size_t> collapse_time(const Trajectory& tr, double threshold) {
    if (!(threshold > 0.5 && threshold < 1.0)) {
        throw std::domain_error("collapse threshold must lie in (0.5, 1)");
    }
    const auto settled = [&](const DensityMatrix& rho) {
        const double p = rho.p00();
        return p >= threshold || p <= 1.0 - threshold;
    };
    if (tr.states.empty() || !settled(tr.states.back())) return std::nullopt;
    std::size_t t = tr.states.size() - 1;
    while (t > 0 && settled(tr.states[t - 1])) --t;
    return t;
}

} // namespace qtomo
