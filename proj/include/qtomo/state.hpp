#pragma once

#include <complex>

namespace qtomo {

using cplx = std::complex<double>;

// Absolute tolerance for all closed-form state algebra checks.
inline constexpr double kStateTol = 1e-12;

// Point in (or on) the Bloch ball. Tomography estimators may produce vectors
// outside the unit sphere; producers of such vectors clear `physical`.
struct BlochVector {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    bool physical = true;

    double norm2() const { return x * x + y * y + z * z; }
};

// 2x2 density matrix. Invariants (unit trace, Hermiticity, positive
// semidefiniteness) are checked by validate()/require_valid(), not enforced
// on construction.
struct DensityMatrix {
    cplx r00{};
    cplx r01{};
    cplx r10{};
    cplx r11{};

    double p00() const { return r00.real(); }
    double p11() const { return r11.real(); }
};

enum class Axis { X, Y };

// Rotation generator spec; angles in degrees.
struct RotationSpec {
    Axis axis;
    double angle_deg;
};

struct StateDiagnostics {
    double trace_error;       // |tr(rho) - 1|
    double hermiticity_error; // max of |r10 - conj(r01)|, |Im r00|, |Im r11|
    double positivity_margin; // Re(r00)*Re(r11) - |r01|^2, negative => not PSD

    bool ok(double tol = kStateTol) const {
        return trace_error <= tol && hermiticity_error <= tol &&
               positivity_margin >= -tol;
    }
};

// Pure diagnostic, never throws.
StateDiagnostics validate(const DensityMatrix& rho);

// Throws std::invalid_argument if rho violates the invariants beyond kStateTol.
void require_valid(const DensityMatrix& rho);

// (x, y, z) = (r01 + r10, i(r01 - r10), r00 - r11); imaginary residue below
// kStateTol is dropped. Throws on invalid rho.
BlochVector bloch_from_density(const DensityMatrix& rho);

// rho = (I + x*sx + y*sy + z*sz) / 2. Throws std::domain_error if |v| exceeds
// the unit sphere beyond kStateTol.
DensityMatrix density_from_bloch(const BlochVector& v);

// U rho U^dagger with U = R_x(theta) or R_y(theta).
DensityMatrix rotate(const DensityMatrix& rho, const RotationSpec& r);

} // namespace qtomo
