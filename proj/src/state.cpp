#include "qtomo/state.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qtomo {

namespace {

// Row-major 2x2 complex matrix, only what the rotations need.
struct Mat2 {
    cplx a, b, c, d;
};

Mat2 mul(const Mat2& l, const Mat2& r) {
    return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d,
            l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
}

Mat2 dagger(const Mat2& m) {
    return {std::conj(m.a), std::conj(m.c), std::conj(m.b), std::conj(m.d)};
}

Mat2 rotation_matrix(const RotationSpec& r) {
    const double half = r.angle_deg * std::numbers::pi / 180.0 / 2.0;
    const double c = std::cos(half);
    const double s = std::sin(half);
    if (r.axis == Axis::X) {
        return {cplx{c, 0.0}, cplx{0.0, -s}, cplx{0.0, -s}, cplx{c, 0.0}};
    }
    return {cplx{c, 0.0}, cplx{-s, 0.0}, cplx{s, 0.0}, cplx{c, 0.0}};
}

} // namespace

StateDiagnostics validate(const DensityMatrix& rho) {
    StateDiagnostics d{};
    d.trace_error = std::abs(rho.r00 + rho.r11 - cplx{1.0, 0.0});
    d.hermiticity_error = std::max({std::abs(rho.r10 - std::conj(rho.r01)),
                                    std::abs(rho.r00.imag()),
                                    std::abs(rho.r11.imag())});
    d.positivity_margin = rho.r00.real() * rho.r11.real() - std::norm(rho.r01);
    return d;
}

void require_valid(const DensityMatrix& rho) {
    const StateDiagnostics d = validate(rho);
    if (!d.ok()) {
        std::ostringstream msg;
        msg << "invalid density matrix: trace_error=" << d.trace_error
            << " hermiticity_error=" << d.hermiticity_error
            << " positivity_margin=" << d.positivity_margin;
        throw std::invalid_argument(msg.str());
    }
}

BlochVector bloch_from_density(const DensityMatrix& rho) {
    require_valid(rho);
    const cplx i{0.0, 1.0};
    BlochVector v;
    v.x = (rho.r01 + rho.r10).real();
    v.y = (i * (rho.r01 - rho.r10)).real();
    v.z = (rho.r00 - rho.r11).real();
    return v;
}

DensityMatrix density_from_bloch(const BlochVector& v) {
    if (v.norm2() > 1.0 + kStateTol) {
        std::ostringstream msg;
        msg << "Bloch vector outside the unit sphere: |v|^2 = " << v.norm2();
        throw std::domain_error(msg.str());
    }
    DensityMatrix rho;
    rho.r00 = cplx{(1.0 + v.z) / 2.0, 0.0};
    rho.r01 = cplx{v.x / 2.0, -v.y / 2.0};
    rho.r10 = cplx{v.x / 2.0, v.y / 2.0};
    rho.r11 = cplx{(1.0 - v.z) / 2.0, 0.0};
    return rho;
}

DensityMatrix rotate(const DensityMatrix& rho, const RotationSpec& r) {
    require_valid(rho);
    const Mat2 u = rotation_matrix(r);
    const Mat2 m = mul(mul(u, Mat2{rho.r00, rho.r01, rho.r10, rho.r11}), dagger(u));
    return {m.a, m.b, m.c, m.d};
}

} // namespace qtomo
