#pragma once

#include <cmath>

#include "qtomo/random.hpp"
#include "qtomo/state.hpp"

namespace qtomo::testing {

// The mixed test state with Bloch vector (-0.385, -0.042, 0.399).
inline DensityMatrix rho_A() {
    return {cplx{1.399 / 2.0, 0.0}, cplx{-0.385 / 2.0, 0.042 / 2.0},
            cplx{-0.385 / 2.0, -0.042 / 2.0}, cplx{0.601 / 2.0, 0.0}};
}

// The pure +x state; every matrix entry is 0.5.
inline DensityMatrix rho_B() {
    return {cplx{0.5, 0.0}, cplx{0.5, 0.0}, cplx{0.5, 0.0}, cplx{0.5, 0.0}};
}

// Uniform point in the closed unit ball: isotropic direction, radius u^(1/3).
inline BlochVector random_physical_bloch(RandomStream& rs) {
    double gx, gy, gz, n2;
    do {
        gx = rs.gaussian({0.0, 1.0});
        gy = rs.gaussian({0.0, 1.0});
        gz = rs.gaussian({0.0, 1.0});
        n2 = gx * gx + gy * gy + gz * gz;
    } while (n2 == 0.0);
    const double r = std::cbrt(rs.uniform()) / std::sqrt(n2);
    return {gx * r, gy * r, gz * r};
}

// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

} // namespace qtomo::testing
