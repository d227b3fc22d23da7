// qcore.hpp — dense complex linear algebra, Pauli algebra, density-matrix /
// coefficient-vector conversions and fidelity for one- and two-qubit states.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace qtomo {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

// Pure state amplitudes (length 2 or 4, unit 2-norm).
using PureState = Eigen::VectorXcd;

// Real Pauli-expansion coefficients: length 4 (c_0..c_3, c_0 = Tr rho) or
// length 16 (c_ij at index 4i+j, c_00 = Tr rho).
using CoefficientVector = Eigen::VectorXd;

// Real matrix B acting on coefficient vectors, v_rotated = B v.
// Row/column 0 is kept explicit even for trace-preserving maps so that the
// lossy case is the same data shape. 4x4 (one qubit) or 16x16 (two qubits).
using Superoperator = Eigen::MatrixXd;

inline constexpr double kHermitianInputTol = 1e-10;

inline bool is_hermitian(const ComplexMatrix& m, double tol = 1e-12) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

// sigma_0 (identity), sigma_1, sigma_2, sigma_3 in the {|0>, |1>} basis.
inline const ComplexMatrix& pauli(int j) {
    static const ComplexMatrix sig[4] = {
        (ComplexMatrix(2, 2) << 1, 0, 0, 1).finished(),
        (ComplexMatrix(2, 2) << 0, 1, 1, 0).finished(),
        (ComplexMatrix(2, 2) << 0, Complex(0, -1), Complex(0, 1), 0).finished(),
        (ComplexMatrix(2, 2) << 1, 0, 0, -1).finished(),
    };
    if (j < 0 || j > 3) {
        throw std::out_of_range("pauli: index must be in 0..3, got " + std::to_string(j));
    }
    return sig[j];
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// sigma_i (x) sigma_j, the two-qubit expansion basis.
inline ComplexMatrix pauli2(int i, int j) { return kron(pauli(i), pauli(j)); }

inline int qubit_count_of(const CoefficientVector& v) {
    if (v.size() == 4) return 1;
    if (v.size() == 16) return 2;
    throw std::invalid_argument("coefficient vector must have length 4 or 16, got " +
                                std::to_string(v.size()));
}

// rho = 1/2 sum_j c_j sigma_j  (one qubit)
// rho = 1/4 sum_ij c_ij sigma_i (x) sigma_j  (two qubits)
// The 1/2^n normalisation makes c_0 (c_00) equal to Tr(rho).
inline ComplexMatrix coeffs_to_density(const CoefficientVector& v) {
    const int nq = qubit_count_of(v);
    if (nq == 1) {
        ComplexMatrix rho = ComplexMatrix::Zero(2, 2);
        for (int j = 0; j < 4; ++j) rho += 0.5 * v(j) * pauli(j);
        return rho;
    }
    ComplexMatrix rho = ComplexMatrix::Zero(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) rho += 0.25 * v(4 * i + j) * pauli2(i, j);
    return rho;
}

// c_j = Tr(rho sigma_j); c_ij = Tr(rho sigma_i (x) sigma_j).
inline CoefficientVector density_to_coeffs(const ComplexMatrix& rho) {
    if (!(rho.rows() == rho.cols() && (rho.rows() == 2 || rho.rows() == 4))) {
        throw std::invalid_argument("density_to_coeffs: matrix must be 2x2 or 4x4");
    }
    if (!is_hermitian(rho, kHermitianInputTol)) {
        throw std::invalid_argument("density_to_coeffs: input is not hermitian within 1e-10");
    }
    if (rho.rows() == 2) {
        CoefficientVector c(4);
        for (int j = 0; j < 4; ++j) c(j) = (rho * pauli(j)).trace().real();
        return c;
    }
    CoefficientVector c(16);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) c(4 * i + j) = (rho * pauli2(i, j)).trace().real();
    return c;
}

// F = <psi| rho |psi>. rho need not be positive (reconstructed states may
// violate physicality), so F can fall slightly outside [0, 1].
inline double fidelity(const PureState& psi, const ComplexMatrix& rho) {
    if (psi.size() != rho.rows() || rho.rows() != rho.cols()) {
        throw std::invalid_argument("fidelity: dimension mismatch");
    }
    if (std::abs(psi.squaredNorm() - 1.0) > 1e-12) {
        throw std::invalid_argument("fidelity: state is not normalised");
    }
    if (!is_hermitian(rho, kHermitianInputTol)) {
        throw std::invalid_argument("fidelity: rho is not hermitian within 1e-10");
    }
    const Complex f = psi.dot(rho * psi);  // dot conjugates the left argument
    if (std::abs(f.imag()) > 1e-10) {
        throw std::runtime_error("fidelity: imaginary part exceeds 1e-10");
    }
    return f.real();
}

}  // namespace qtomo
