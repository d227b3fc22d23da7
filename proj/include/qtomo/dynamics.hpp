// dynamics.hpp — time-dependent Hamiltonian models (ideal rotation, detuned
// rotation, three-level lambda with loss), fixed-step RK4 integration of the
// Lindblad master equation, and Pauli-basis propagation for superoperator
// extraction.

#pragma once

#include "qtomo/qcore.hpp"
#include "qtomo/rotations.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace qtomo {

// C_m = sqrt(rate) |to><from|
struct CollapseOperator {
    double rate = 0.0;
    int from_level = 0;
    int to_level = 0;
};

// Fixed integration window. duration == 0 is the degenerate "no pulse" case
// (a theta = 0 rotation); otherwise 0 < dt <= duration and duration/dt is
// rounded to a whole number of steps.
struct PulseSpec {
    double duration = 0.0;
    double dt = 0.0;

    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt) || !(duration >= 0.0) || !std::isfinite(duration)) {
            throw std::invalid_argument("PulseSpec: need dt > 0 and duration >= 0");
        }
        if (duration > 0.0 && dt > duration * (1.0 + 1e-12)) {
            throw std::invalid_argument("PulseSpec: dt must not exceed duration");
        }
    }

    long steps() const {
        if (duration == 0.0) return 0;
        return std::max<long>(1, std::lround(duration / dt));
    }
};

enum class PulseEnvelope { Square, ChirpedSquare };

// Control model H(t; delta). The inhomogeneity parameter delta enters as an
// additive (delta/2) sigma_3 shift of the qubit splitting (DetunedRotation)
// or as a two-photon detuning on |1> (ThreeLevelLambda).
struct HamiltonianModel {
    enum class Kind { Ideal, DetunedRotation, ThreeLevelLambda };

    Kind kind = Kind::Ideal;
    int dimension = 2;
    RotationSpec spec;  // target rotation this pulse implements

    // Ideal / DetunedRotation
    double omega = 1.0;  // Rabi frequency

    // ThreeLevelLambda, basis {|0>, |1>, |e>}: omega0 couples |0>-|e>,
    // omega1 couples |1>-|e>, delta_excited is the one-photon detuning on
    // |e>, chirp sweeps it linearly across the pulse.
    double omega0 = 0.0;
    double omega1 = 0.0;
    double delta_excited = 0.0;
    double chirp_rate = 0.0;
    PulseEnvelope envelope = PulseEnvelope::Square;

    std::vector<CollapseOperator> collapses;

    static HamiltonianModel ideal(double omega, RotationSpec spec = {}) {
        HamiltonianModel m;
        m.kind = Kind::Ideal;
        m.dimension = 2;
        m.omega = omega;
        m.spec = spec;
        return m;
    }

    static HamiltonianModel detuned_rotation(double omega, RotationSpec spec = {}) {
        HamiltonianModel m = ideal(omega, spec);
        m.kind = Kind::DetunedRotation;
        return m;
    }

    // gamma > 0 adds spontaneous decay |e> -> |0>, which makes the map on the
    // qubit subspace non trace preserving (population left in |e> at the end
    // of the pulse is lost from the qubit's point of view).
    static HamiltonianModel three_level_lambda(double omega0, double omega1,
                                               double delta_excited, double gamma = 0.0,
                                               double chirp_rate = 0.0,
                                               PulseEnvelope envelope = PulseEnvelope::Square) {
        if (!(omega0 > 0.0) || !(omega1 > 0.0)) {
            throw std::invalid_argument("three_level_lambda: field amplitudes must be positive");
        }
        if (gamma < 0.0) throw std::invalid_argument("three_level_lambda: gamma must be >= 0");
        HamiltonianModel m;
        m.kind = Kind::ThreeLevelLambda;
        m.dimension = 3;
        m.omega0 = omega0;
        m.omega1 = omega1;
        m.delta_excited = delta_excited;
        m.chirp_rate = chirp_rate;
        m.envelope = envelope;
        if (gamma > 0.0) m.collapses.push_back({gamma, 2, 0});
        return m;
    }

    // Fastest frequency in the problem; sets the default step size.
    double frequency_scale() const {
        if (kind == Kind::ThreeLevelLambda) {
            return std::hypot(std::hypot(omega0, omega1), delta_excited);
        }
        return omega;
    }

    ComplexMatrix hamiltonian(double t, double delta, double pulse_duration) const {
        if (kind == Kind::ThreeLevelLambda) {
            double de = delta_excited;
            if (envelope == PulseEnvelope::ChirpedSquare) {
                de += chirp_rate * (t - 0.5 * pulse_duration);
            }
            // field phases chosen so that the delta = 0, gamma = 0 limit of a
            // full generalized-Rabi cycle implements D(phi, theta) exactly
            const Complex c1 = -0.5 * omega1 * std::exp(Complex(0.0, -spec.phi));
            ComplexMatrix h = ComplexMatrix::Zero(3, 3);
            h(2, 2) = de;
            h(1, 1) = delta;
            h(2, 0) = 0.5 * omega0;
            h(0, 2) = 0.5 * omega0;
            h(2, 1) = c1;
            h(1, 2) = std::conj(c1);
            return h;
        }
        ComplexMatrix h = 0.5 * omega *
                          (std::cos(spec.phi) * pauli(1) + std::sin(spec.phi) * pauli(2));
        if (kind == Kind::DetunedRotation) h += 0.5 * delta * pauli(3);
        return h;
    }

    bool time_dependent() const {
        return kind == Kind::ThreeLevelLambda && envelope == PulseEnvelope::ChirpedSquare &&
               chirp_rate != 0.0;
    }
};

// Rebind a model so its pulse implements the rotation `spec`.
//
// Ideal/DetunedRotation: the axis is set by spec.phi and the pulse area by
// duration = theta/omega.
//
// ThreeLevelLambda: a full generalized-Rabi cycle of the bright state
// |B> ~ omega0|0> + omega1 e^{i(phi-pi)}|1> returns all population to the
// qubit space and imprints the relative phase
//     alpha = pi (1 - Delta/Omega_tilde),   Omega_tilde = hypot(Omega_B, Delta),
// which acts on the qubit as D(phi, alpha). Holding Delta fixed, theta in
// (0, pi) is reached by scaling the field amplitudes; theta in (pi, 2 pi) by
// the mirror identity D(phi, theta) = D(phi + pi, 2 pi - theta). theta = pi
// would need infinite fields at nonzero Delta and is rejected.
inline HamiltonianModel bind_rotation(const HamiltonianModel& base, RotationSpec spec) {
    HamiltonianModel m = base;
    RotationSpec s = spec.canonical();
    if (m.kind != HamiltonianModel::Kind::ThreeLevelLambda) {
        m.spec = s;
        return m;
    }

    constexpr double pi = std::numbers::pi;
    if (s.theta == 0.0) {  // no pulse; fields are irrelevant
        m.spec = s;
        return m;
    }
    const double delta_e = m.delta_excited;
    if (delta_e == 0.0) {
        if (std::abs(s.theta - pi) > 1e-12) {
            throw std::invalid_argument(
                "bind_rotation: lambda pulse with zero one-photon detuning only implements "
                "theta = pi");
        }
        m.spec = s;
        return m;
    }
    // pick the branch whose alpha range contains theta
    if ((delta_e > 0.0) != (s.theta < pi)) {
        s = RotationSpec{2.0 * pi - s.theta, s.phi + pi}.canonical();
    }
    const double r = std::abs(pi - s.theta) / pi;
    if (r < 1e-9) {
        throw std::invalid_argument(
            "bind_rotation: theta = pi is not reachable with nonzero one-photon detuning");
    }
    const double omega_tilde = std::abs(delta_e) / r;
    const double omega_bright =
        std::sqrt(std::max(0.0, omega_tilde * omega_tilde - delta_e * delta_e));
    const double scale = omega_bright / std::hypot(m.omega0, m.omega1);
    m.omega0 *= scale;
    m.omega1 *= scale;
    m.spec = s;
    return m;
}

// Duration of the bound rotation plus the default step (steps_per_cycle
// divisions of one period of the fastest frequency).
inline PulseSpec default_pulse(const HamiltonianModel& model, int steps_per_cycle = 200) {
    if (steps_per_cycle < 1) throw std::invalid_argument("default_pulse: steps_per_cycle < 1");
    constexpr double tau = 2.0 * std::numbers::pi;
    double duration = 0.0;
    if (model.kind == HamiltonianModel::Kind::ThreeLevelLambda) {
        if (model.spec.theta != 0.0) {
            duration = tau / std::hypot(std::hypot(model.omega0, model.omega1),
                                        model.delta_excited);
        }
    } else {
        duration = model.spec.canonical().theta / model.omega;
    }
    const double dt = (tau / model.frequency_scale()) / steps_per_cycle;
    return {duration, duration > 0.0 ? std::min(dt, duration) : dt};
}

namespace detail {

inline void check_collapses(const std::vector<CollapseOperator>& collapses, int dim) {
    for (const auto& c : collapses) {
        if (c.rate < 0.0) throw std::invalid_argument("collapse rate must be >= 0");
        if (c.from_level < 0 || c.from_level >= dim || c.to_level < 0 || c.to_level >= dim) {
            throw std::invalid_argument("collapse level index out of range");
        }
    }
}

struct LindbladTerms {
    std::vector<ComplexMatrix> ops;  // C_m
    ComplexMatrix cdc;               // sum_m C_m^dag C_m

    LindbladTerms(const std::vector<CollapseOperator>& collapses, int dim)
        : cdc(ComplexMatrix::Zero(dim, dim)) {
        check_collapses(collapses, dim);
        for (const auto& c : collapses) {
            if (c.rate == 0.0) continue;
            ComplexMatrix op = ComplexMatrix::Zero(dim, dim);
            op(c.to_level, c.from_level) = std::sqrt(c.rate);
            cdc += op.adjoint() * op;
            ops.push_back(std::move(op));
        }
    }

    // rhodot = i[rho, H] - 1/2 {sum C^dag C, rho} + sum C rho C^dag
    ComplexMatrix rhs(const ComplexMatrix& rho, const ComplexMatrix& h) const {
        const Complex im(0.0, 1.0);
        ComplexMatrix out = im * (rho * h - h * rho);
        if (!ops.empty()) {
            out -= 0.5 * (cdc * rho + rho * cdc);
            for (const auto& c : ops) out += c * rho * c.adjoint();
        }
        return out;
    }
};

}  // namespace detail

inline ComplexMatrix lindblad_rhs(const ComplexMatrix& rho, const ComplexMatrix& h,
                                  const std::vector<CollapseOperator>& collapses) {
    if (rho.rows() != rho.cols() || h.rows() != h.cols() || rho.rows() != h.rows()) {
        throw std::invalid_argument("lindblad_rhs: dimension mismatch");
    }
    detail::LindbladTerms terms(collapses, static_cast<int>(rho.rows()));
    return terms.rhs(rho, h);
}

// Classical fixed-step RK4 integration of the master equation over the pulse
// window. Works for any hermitian initial matrix (the map is linear), not
// just density operators; the trace is conserved to roundoff.
inline ComplexMatrix propagate(const ComplexMatrix& rho0, const HamiltonianModel& model,
                               double delta, const PulseSpec& pulse) {
    if (rho0.rows() != rho0.cols() || rho0.rows() != model.dimension) {
        throw std::invalid_argument("propagate: state dimension does not match model");
    }
    if (!is_hermitian(rho0, kHermitianInputTol)) {
        throw std::invalid_argument("propagate: initial state is not hermitian within 1e-10");
    }
    pulse.validate();

    const long n = pulse.steps();
    if (n == 0) return rho0;
    const double h = pulse.duration / static_cast<double>(n);

    detail::LindbladTerms terms(model.collapses, model.dimension);
    const bool tdep = model.time_dependent();
    ComplexMatrix ham = tdep ? ComplexMatrix() : model.hamiltonian(0.0, delta, pulse.duration);
    auto rhs = [&](double t, const ComplexMatrix& rho) {
        if (tdep) ham = model.hamiltonian(t, delta, pulse.duration);
        return terms.rhs(rho, ham);
    };

    ComplexMatrix rho = rho0;
    for (long i = 0; i < n; ++i) {
        const double t = i * h;
        const ComplexMatrix k1 = rhs(t, rho);
        const ComplexMatrix k2 = rhs(t + 0.5 * h, rho + (0.5 * h) * k1);
        const ComplexMatrix k3 = rhs(t + 0.5 * h, rho + (0.5 * h) * k2);
        const ComplexMatrix k4 = rhs(t + h, rho + h * k3);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    if (!is_hermitian(rho, kHermitianInputTol)) {
        throw std::runtime_error("propagate: hermiticity drifted beyond 1e-10");
    }
    if (std::abs((rho.trace() - rho0.trace()).real()) > 1e-10) {
        throw std::runtime_error("propagate: trace drifted beyond 1e-10");
    }
    return rho;
}

// Convergence diagnostic for the fixed-step contract: max-abs change of the
// final state when the step is halved.
inline double step_halving_difference(const ComplexMatrix& rho0, const HamiltonianModel& model,
                                      double delta, const PulseSpec& pulse) {
    const ComplexMatrix coarse = propagate(rho0, model, delta, pulse);
    const ComplexMatrix fine = propagate(rho0, model, delta, {pulse.duration, 0.5 * pulse.dt});
    return (coarse - fine).cwiseAbs().maxCoeff();
}

// Embed a qubit operator in the full model space (extra levels unpopulated).
inline ComplexMatrix embed_qubit(const ComplexMatrix& rho2, int dim) {
    if (rho2.rows() != 2 || rho2.cols() != 2) {
        throw std::invalid_argument("embed_qubit: expected a 2x2 matrix");
    }
    ComplexMatrix full = ComplexMatrix::Zero(dim, dim);
    full.topLeftCorner(2, 2) = rho2;
    return full;
}

// Propagate each Pauli basis element and read off the coefficient-space
// superoperator, projected onto the qubit subspace. For lossy models row 0
// picks up the population left outside the qubit space, so B is not trace
// preserving and c_0 < 1 after the pulse.
inline Superoperator propagate_superop(const HamiltonianModel& model, double delta,
                                       const PulseSpec& pulse) {
    Superoperator b(4, 4);
    for (int j = 0; j < 4; ++j) {
        const ComplexMatrix evolved =
            propagate(embed_qubit(pauli(j), model.dimension), model, delta, pulse);
        const CoefficientVector col = density_to_coeffs(evolved.topLeftCorner(2, 2));
        b.col(j) = 0.5 * col;  // sigma_j^R = sum_k b_jk sigma_k, Tr(s_k s_l) = 2 d_kl
    }
    return b;
}

}  // namespace qtomo
