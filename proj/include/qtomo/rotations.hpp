// rotations.hpp — ideal qubit rotations about equatorial axes and their
// analytic coefficient-space superoperators.

#pragma once

#include "qtomo/qcore.hpp"

#include <cmath>
#include <numbers>

namespace qtomo {

// Rotation of the Bloch vector through theta about the equatorial axis
// (cos phi, sin phi, 0).
struct RotationSpec {
    double theta = 0.0;
    double phi = 0.0;

    // Stable canonicalisation to theta, phi in [0, 2*pi).
    RotationSpec canonical() const {
        constexpr double tau = 2.0 * std::numbers::pi;
        auto wrap = [](double x) {
            double y = std::fmod(x, tau);
            if (y < 0.0) y += tau;
            return y;
        };
        return {wrap(theta), wrap(phi)};
    }
};

// D(phi, theta) = [[cos(t/2), -i e^{-i phi} sin(t/2)],
//                  [-i e^{i phi} sin(t/2), cos(t/2)]]
inline ComplexMatrix rotation_matrix(const RotationSpec& spec) {
    const double c = std::cos(spec.theta / 2.0);
    const double s = std::sin(spec.theta / 2.0);
    const Complex mi(0.0, -1.0);
    ComplexMatrix d(2, 2);
    d(0, 0) = c;
    d(0, 1) = mi * std::exp(Complex(0.0, -spec.phi)) * s;
    d(1, 0) = mi * std::exp(Complex(0.0, spec.phi)) * s;
    d(1, 1) = c;
    return d;
}

// Coefficient-space action of D: v_rotated = B v, with column j of B holding
// the expansion of D sigma_j D^dag on the Pauli basis. Row/column 0 is the
// identity (the rotation is trace preserving and unital); the 3x3 Bloch block
// is the orthogonal rotation matrix.
inline Superoperator analytic_superop(const RotationSpec& spec) {
    const double th = spec.theta, ph = spec.phi;
    const double c2 = std::cos(th / 2.0) * std::cos(th / 2.0);
    const double s2 = std::sin(th / 2.0) * std::sin(th / 2.0);
    const double st = std::sin(th);

    // b[j][k]: sigma_j -> sum_k b_jk sigma_k
    double b[4][4] = {};
    b[0][0] = 1.0;
    b[1][1] = c2 + s2 * std::cos(2.0 * ph);
    b[1][2] = s2 * std::sin(2.0 * ph);
    b[1][3] = -st * std::sin(ph);
    b[2][1] = s2 * std::sin(2.0 * ph);
    b[2][2] = c2 - s2 * std::cos(2.0 * ph);
    b[2][3] = st * std::cos(ph);
    b[3][1] = st * std::sin(ph);
    b[3][2] = -st * std::cos(ph);
    b[3][3] = std::cos(th);

    Superoperator B(4, 4);
    for (int k = 0; k < 4; ++k)
        for (int j = 0; j < 4; ++j) B(k, j) = b[j][k];
    return B;
}

inline CoefficientVector apply_superop(const Superoperator& B, const CoefficientVector& v) {
    if (B.rows() != B.cols() || B.cols() != v.size()) {
        throw std::invalid_argument("apply_superop: dimension mismatch");
    }
    return B * v;
}

}  // namespace qtomo
