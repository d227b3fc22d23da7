// calibration.hpp — measurement design construction: per-delta superoperators,
// ensemble averages, two-qubit tensor products, population rows and Taylor
// expansions of B(delta).

#pragma once

#include "qtomo/dynamics.hpp"
#include "qtomo/ensemble.hpp"
#include "qtomo/qcore.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace qtomo {

// One choice of rotation angles (one or two qubits) with the bound control
// model and integration window per qubit. The two qubits of a pair rotate
// independently, so each carries its own pulse.
struct TomographySetting {
    std::vector<RotationSpec> specs;
    std::vector<HamiltonianModel> models;
    std::vector<PulseSpec> pulses;

    int qubits() const { return static_cast<int>(specs.size()); }

    TomographySetting qubit_subsetting(int i) const {
        if (i < 0 || i >= qubits()) throw std::out_of_range("qubit_subsetting: bad index");
        return {{specs[i]}, {models[i]}, {pulses[i]}};
    }
};

inline TomographySetting make_single_setting(RotationSpec spec, const HamiltonianModel& base,
                                             int steps_per_cycle = 200) {
    HamiltonianModel bound = bind_rotation(base, spec);
    PulseSpec pulse = default_pulse(bound, steps_per_cycle);
    return {{spec.canonical()}, {bound}, {pulse}};
}

// Distinct rotations per qubit are required for full two-qubit reconstruction;
// the degenerate equal-rotation case must be requested explicitly.
inline TomographySetting make_pair_setting(RotationSpec s1, RotationSpec s2,
                                           const HamiltonianModel& base1,
                                           const HamiltonianModel& base2,
                                           int steps_per_cycle = 200,
                                           bool allow_identical_specs = false) {
    const RotationSpec c1 = s1.canonical(), c2 = s2.canonical();
    if (!allow_identical_specs && std::abs(c1.theta - c2.theta) <= 1e-12 &&
        std::abs(c1.phi - c2.phi) <= 1e-12) {
        throw std::invalid_argument(
            "make_pair_setting: both qubits carry the same rotation; pass "
            "allow_identical_specs to build the degenerate case deliberately");
    }
    TomographySetting a = make_single_setting(s1, base1, steps_per_cycle);
    TomographySetting b = make_single_setting(s2, base2, steps_per_cycle);
    return {{a.specs[0], b.specs[0]}, {a.models[0], b.models[0]}, {a.pulses[0], b.pulses[0]}};
}

// sum_i p_i B(delta_i), accumulated in sample order for bit-stable results.
inline Superoperator ensemble_superop(const TomographySetting& setting, const SampleSet& samples) {
    if (setting.qubits() != 1) {
        throw std::invalid_argument("ensemble_superop: expected a single-qubit setting");
    }
    Superoperator acc = Superoperator::Zero(4, 4);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        acc += samples.weights[i] *
               propagate_superop(setting.models[0], samples.deltas[i], setting.pulses[0]);
    }
    return acc;
}

// Coefficient-space Kronecker product, index order (i, j) -> 4 i + j.
inline Superoperator two_qubit_superop(const Superoperator& b1, const Superoperator& b2) {
    if (b1.rows() != 4 || b1.cols() != 4 || b2.rows() != 4 || b2.cols() != 4) {
        throw std::invalid_argument("two_qubit_superop: expected 4x4 factors");
    }
    Superoperator out(16, 16);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) out.block(4 * i, 4 * j, 4, 4) = b1(i, j) * b2;
    return out;
}

// Rows mapping pre-rotation coefficients to measured populations.
//
// One qubit:  P_n  = 1/2 sum_j (b_j0 +- b_j3) c_j           (rows P_0, P_1)
// Two qubits: P_nm = 1/4 sum_ij c_ij sum_{k,k' in {0,3}} sgn(n,m,k,k') b_ik b_jk'
// where sgn is the (n, m) diagonal entry of sigma_k (x) sigma_k'. The 1/2
// (1/4) prefactors restore the normalisation of the expansion convention so
// that P_0 + P_1 = c_0 for trace-preserving maps.
inline RealMatrix population_rows(const Superoperator& b) {
    if (b.rows() != b.cols() || (b.rows() != 4 && b.rows() != 16)) {
        throw std::invalid_argument("population_rows: expected a 4x4 or 16x16 superoperator");
    }
    if (b.rows() == 4) {
        RealMatrix rows(2, 4);
        rows.row(0) = 0.5 * (b.row(0) + b.row(3));
        rows.row(1) = 0.5 * (b.row(0) - b.row(3));
        return rows;
    }
    RealMatrix rows = RealMatrix::Zero(4, 16);
    for (int n = 0; n < 2; ++n) {
        for (int m = 0; m < 2; ++m) {
            for (int k : {0, 3}) {
                for (int l : {0, 3}) {
                    const double sgn = ((k == 3 && n == 1) ? -1.0 : 1.0) *
                                       ((l == 3 && m == 1) ? -1.0 : 1.0);
                    rows.row(2 * n + m) += 0.25 * sgn * b.row(4 * k + l);
                }
            }
        }
    }
    return rows;
}

// Taylor coefficients of B(delta) about delta = 0: [B0, B1, B2] with
// B(delta) = B0 + delta B1 + delta^2 B2 + O(delta^3).
struct SuperopExpansion {
    std::vector<Superoperator> terms;

    int order() const { return static_cast<int>(terms.size()) - 1; }
    int dim() const { return terms.empty() ? 0 : static_cast<int>(terms[0].rows()); }
};

inline double default_fd_step(const HamiltonianModel& model) {
    return 1e-3 * model.frequency_scale();
}

// Central finite differences of propagate_superop in delta:
//   B1 = (B(h) - B(-h)) / (2 h)
//   B2 = (B(h) - 2 B(0) + B(-h)) / (2 h^2)   (Taylor coefficient, half the
//                                             second derivative)
inline SuperopExpansion expand_superop(const TomographySetting& setting, int order, double h) {
    if (setting.qubits() != 1) {
        throw std::invalid_argument("expand_superop: expected a single-qubit setting");
    }
    if (order < 0 || order > 2) throw std::invalid_argument("expand_superop: order must be 0..2");
    if (!(h > 0.0)) throw std::invalid_argument("expand_superop: step must be positive");

    const auto& model = setting.models[0];
    const auto& pulse = setting.pulses[0];
    SuperopExpansion ex;
    const Superoperator b0 = propagate_superop(model, 0.0, pulse);
    ex.terms.push_back(b0);
    if (order >= 1) {
        const Superoperator bp = propagate_superop(model, h, pulse);
        const Superoperator bm = propagate_superop(model, -h, pulse);
        ex.terms.push_back((bp - bm) / (2.0 * h));
        if (order == 2) ex.terms.push_back((bp - 2.0 * b0 + bm) / (2.0 * h * h));
    }
    return ex;
}

inline SuperopExpansion expand_superop(const TomographySetting& setting, int order) {
    return expand_superop(setting, order, default_fd_step(setting.models[0]));
}

// Weighted least-squares polynomial fit of B(delta) over a sample set, from
// superoperators already evaluated at the sample points. Returns Taylor
// coefficient estimates [B0 .. BK]; orders the samples cannot support (fewer
// points than coefficients) are returned as zero.
//
// Unlike the central differences of expand_superop, the fit is exact in the
// sample measure: sum_i p_i delta_i^b Bfit(delta_i) reproduces the
// moment-weighted averages sum_i p_i delta_i^b B(delta_i) for b <= order,
// which is exactly the combination the correlated solver consumes. Feeding
// the solver fitted terms therefore cancels the rotation-model truncation
// error that plain Taylor terms would leave behind.
inline SuperopExpansion fit_superop_expansion(const std::vector<Superoperator>& per_sample,
                                              const SampleSet& samples, int order) {
    if (per_sample.size() != samples.size() || per_sample.empty()) {
        throw std::invalid_argument("fit_superop_expansion: superoperators and samples must align");
    }
    if (order < 0 || order > 2) {
        throw std::invalid_argument("fit_superop_expansion: order must be 0..2");
    }
    const int dim = static_cast<int>(per_sample[0].rows());
    for (const auto& b : per_sample) {
        if (b.rows() != dim || b.cols() != dim) {
            throw std::invalid_argument("fit_superop_expansion: mixed dimensions");
        }
    }

    const int eff = std::min<int>(order, static_cast<int>(samples.size()) - 1);
    double scale = 0.0;
    for (double d : samples.deltas) scale = std::max(scale, std::abs(d));
    if (scale == 0.0) scale = 1.0;

    // normal equations of the weighted fit in the scaled variable u = delta/scale
    RealMatrix gram(eff + 1, eff + 1);
    for (int a = 0; a <= eff; ++a) {
        for (int b = 0; b <= eff; ++b) {
            double m = 0.0;
            for (std::size_t i = 0; i < samples.size(); ++i) {
                m += samples.weights[i] * std::pow(samples.deltas[i] / scale, a + b);
            }
            gram(a, b) = m;
        }
    }
    std::vector<Superoperator> rhs(eff + 1, Superoperator::Zero(dim, dim));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double u = samples.deltas[i] / scale;
        double up = 1.0;
        for (int a = 0; a <= eff; ++a) {
            rhs[a] += samples.weights[i] * up * per_sample[i];
            up *= u;
        }
    }

    const RealMatrix gram_inv = gram.inverse();
    SuperopExpansion ex;
    for (int a = 0; a <= order; ++a) {
        Superoperator term = Superoperator::Zero(dim, dim);
        if (a <= eff) {
            for (int b = 0; b <= eff; ++b) term += gram_inv(a, b) * rhs[b];
            term /= std::pow(scale, a);
        }
        ex.terms.push_back(std::move(term));
    }
    return ex;
}

}  // namespace qtomo
