// reconstruction.hpp — assembling linear tomography systems from settings and
// measured populations, exact / least-squares inversion, the correlated
// order-by-order solver, and an optional physicality projection.

#pragma once

#include "qtomo/calibration.hpp"
#include "qtomo/qcore.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qtomo {

// Populations for one tomography setting: (P_0, P_1) or (P_00..P_11).
// Entries are probabilities; their sum may fall below 1 when population is
// lost outside the qubit space.
struct MeasurementRecord {
    int setting_id = 0;
    std::vector<double> populations;

    MeasurementRecord(int id, std::vector<double> p) : setting_id(id), populations(std::move(p)) {
        if (populations.size() != 2 && populations.size() != 4) {
            throw std::invalid_argument("MeasurementRecord: expected 2 or 4 populations");
        }
        double sum = 0.0;
        for (double v : populations) {
            if (v < -1e-9 || v > 1.0 + 1e-9) {
                throw std::invalid_argument("MeasurementRecord: population outside [0, 1]");
            }
            sum += v;
        }
        if (sum > 1.0 + 1e-9) {
            throw std::invalid_argument("MeasurementRecord: populations sum to more than 1");
        }
    }
};

struct ReconstructionResult {
    CoefficientVector coeffs;
    double residual_norm = 0.0;
    int rank = 0;
    double condition_number = 0.0;
};

class RankDeficientError : public std::runtime_error {
public:
    RankDeficientError(int rank, int unknowns, double cond)
        : std::runtime_error("rank-deficient tomography system: rank " + std::to_string(rank) +
                             " of " + std::to_string(unknowns) +
                             " unknowns (condition number " + std::to_string(cond) +
                             "); the angle sets are insufficient or degenerate"),
          rank_(rank), unknowns_(unknowns), condition_number_(cond) {}

    int rank() const { return rank_; }
    int unknowns() const { return unknowns_; }
    double condition_number() const { return condition_number_; }

private:
    int rank_;
    int unknowns_;
    double condition_number_;
};

enum class SolveMode { Exact, LeastSquares };
enum class TraceConstraint { PinC0ToOne, Free };

inline constexpr double kRankRelTol = 1e-8;  // singular values below 1e-8 * ||A|| count as zero
inline constexpr double kConditionLimit = 1e8;

// Stacked population rows; row_map[r] = (setting index, outcome index).
struct AssembledSystem {
    RealMatrix design;
    std::vector<std::pair<int, int>> row_map;
};

inline AssembledSystem assemble_system(const std::vector<TomographySetting>& settings,
                                       const std::vector<Superoperator>& designs) {
    if (settings.size() != designs.size() || settings.empty()) {
        throw std::invalid_argument("assemble_system: settings and designs must align");
    }
    const int qubits = settings[0].qubits();
    const int dim = qubits == 1 ? 4 : 16;
    const int outcomes = qubits == 1 ? 2 : 4;
    AssembledSystem out;
    out.design.resize(static_cast<Eigen::Index>(settings.size()) * outcomes, dim);
    for (std::size_t s = 0; s < settings.size(); ++s) {
        if (settings[s].qubits() != qubits) {
            throw std::invalid_argument("assemble_system: mixed qubit counts");
        }
        if (designs[s].rows() != dim || designs[s].cols() != dim) {
            throw std::invalid_argument("assemble_system: design dimension mismatch");
        }
        out.design.middleRows(static_cast<Eigen::Index>(s) * outcomes, outcomes) =
            population_rows(designs[s]);
        for (int o = 0; o < outcomes; ++o) out.row_map.emplace_back(static_cast<int>(s), o);
    }
    return out;
}

// Numerical rank with singular values below tol * ||A||_2 counted as zero.
inline int numerical_rank(const RealMatrix& a, double tol = kRankRelTol) {
    Eigen::JacobiSVD<RealMatrix> svd(a);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > tol * sv(0)) ++rank;
    }
    return rank;
}

namespace detail {

struct SvdSolution {
    RealVector x;
    double residual = 0.0;
    int rank = 0;
    double cond = 0.0;
};

// Least-squares solve with the rank and conditioning policy shared by all
// reconstruction paths. Columns are equilibrated to unit norm first, so the
// condition gate detects degenerate measurement geometry rather than benign
// scale differences between unknowns (the correlated solver's higher-order
// blocks are naturally moment-scaled). With prune_zero_columns, unknowns
// whose columns vanish are fixed to zero instead of failing the solve; this
// is how an order drops out when its moment vanishes. Otherwise any
// undetermined unknown throws RankDeficientError.
inline SvdSolution svd_solve(const RealMatrix& a, const RealVector& rhs,
                             bool prune_zero_columns = false) {
    if (a.rows() != rhs.size()) throw std::invalid_argument("svd_solve: dimension mismatch");

    RealVector scale(a.cols());
    std::vector<Eigen::Index> kept;
    double max_norm = 0.0;
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
        scale(c) = a.col(c).norm();
        max_norm = std::max(max_norm, scale(c));
    }
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
        if (scale(c) > 1e-12 * max_norm) {
            kept.push_back(c);
        } else if (!prune_zero_columns) {
            throw RankDeficientError(0, static_cast<int>(a.cols()),
                                     std::numeric_limits<double>::infinity());
        }
    }
    if (a.rows() < static_cast<Eigen::Index>(kept.size())) {
        throw RankDeficientError(static_cast<int>(a.rows()), static_cast<int>(kept.size()), 0.0);
    }
    if (kept.empty()) {
        SvdSolution sol;
        sol.x = RealVector::Zero(a.cols());
        sol.residual = rhs.norm();
        sol.cond = 1.0;
        return sol;
    }

    RealMatrix eq(a.rows(), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t i = 0; i < kept.size(); ++i) eq.col(i) = a.col(kept[i]) / scale(kept[i]);

    Eigen::JacobiSVD<RealMatrix> svd(eq, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > kRankRelTol * smax) ++rank;
    }
    const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (rank < eq.cols() || cond > kConditionLimit) {
        throw RankDeficientError(rank, static_cast<int>(a.cols()), cond);
    }

    const RealVector y = svd.solve(rhs);
    SvdSolution sol;
    sol.x = RealVector::Zero(a.cols());
    for (std::size_t i = 0; i < kept.size(); ++i) sol.x(kept[i]) = y(i) / scale(kept[i]);
    sol.residual = (a * sol.x - rhs).norm();
    sol.rank = rank;
    sol.cond = cond;
    return sol;
}

}  // namespace detail

// Solve A c = p for the coefficient vector. PinC0ToOne eliminates c_0 = 1
// (trace-preserving reconstruction); Free keeps all unknowns (lossy case).
// Exact mode demands a full-rank consistent system, the infinite-statistics
// case where plain inversion applies; LeastSquares minimises ||A c - p||_2.
inline ReconstructionResult solve(const RealMatrix& a, const RealVector& p, SolveMode mode,
                                  TraceConstraint constraint) {
    if (a.rows() != p.size()) throw std::invalid_argument("solve: dimension mismatch");
    if (a.cols() != 4 && a.cols() != 16) {
        throw std::invalid_argument("solve: expected 4 or 16 unknowns");
    }

    RealMatrix af;
    RealVector pf;
    if (constraint == TraceConstraint::PinC0ToOne) {
        af = a.rightCols(a.cols() - 1);
        pf = p - a.col(0);
    } else {
        af = a;
        pf = p;
    }

    detail::SvdSolution sol = detail::svd_solve(af, pf);
    if (mode == SolveMode::Exact && sol.residual > 1e-8 * std::max(1.0, pf.norm())) {
        throw std::invalid_argument(
            "solve: exact mode requires a consistent system; residual " +
            std::to_string(sol.residual) + " (use least_squares for noisy data)");
    }

    ReconstructionResult result;
    if (constraint == TraceConstraint::PinC0ToOne) {
        result.coeffs.resize(a.cols());
        result.coeffs(0) = 1.0;
        result.coeffs.tail(a.cols() - 1) = sol.x;
    } else {
        result.coeffs = sol.x;
    }
    result.residual_norm = sol.residual;
    result.rank = sol.rank;
    result.condition_number = sol.cond;
    return result;
}

// Correlated order-by-order reconstruction: the prepared state depends on the
// same inhomogeneity delta as the tomographic rotations,
//   v(delta) = v0 + delta v1 + delta^2 v2,  B(delta) = B0 + delta B1 + delta^2 B2,
// and the measured ensemble averages obey
//   p_bar = rows( sum_b M_b v^(b) ),    M_b = sum_a moment(a+b) B^(a),
// linear in the stacked per-order unknowns. Returns [v0 ... vK].
//
// The sum over a runs as far as the supplied moment list allows: passing
// moments up to order K keeps only the a+b <= K terms; passing them up to 2K
// keeps every cross term of the expansion product. The cross terms matter
// for per-order accuracy: separating v0 from v2 is a delta^4-order effect,
// and dropping the moment(4) B2 contribution from M_2 aliases an
// O(moment4/moment2^2) multiple of v2 onto the answer.
//
// Unknowns whose columns vanish (an order suppressed by a vanishing moment,
// or a direction the rotations cannot sense) are reported as zero rather
// than failing the solve, and a higher-order block whose columns add no new
// rank — delta-independent rotations make the v2 block collinear with the v0
// block — is likewise zeroed instead of poisoning the solve. With
// trace-preserving rotations the c_0 components are not identifiable (row 0
// of B^(a>=1) vanishes), so the pinned constraint c_0 = (1, 0, ..., 0)
// across orders is the default; Free is available for lossy designs.
inline std::vector<CoefficientVector> reconstruct_correlated(
    const std::vector<MeasurementRecord>& records, const std::vector<SuperopExpansion>& expansions,
    const std::vector<double>& moments, int order,
    TraceConstraint constraint = TraceConstraint::PinC0ToOne) {
    if (records.size() != expansions.size() || records.empty()) {
        throw std::invalid_argument("reconstruct_correlated: records and expansions must align");
    }
    if (order < 0) throw std::invalid_argument("reconstruct_correlated: order must be >= 0");
    if (static_cast<int>(moments.size()) < order + 1) {
        throw std::invalid_argument("reconstruct_correlated: need moments up to the given order");
    }

    const int dim = expansions[0].dim();
    const int outcomes = dim == 4 ? 2 : 4;
    const int blocks = order + 1;
    const bool pin = constraint == TraceConstraint::PinC0ToOne;
    const int cols_per_block = pin ? dim - 1 : dim;

    RealMatrix a(static_cast<Eigen::Index>(records.size()) * outcomes, blocks * cols_per_block);
    RealVector rhs(a.rows());

    for (std::size_t r = 0; r < records.size(); ++r) {
        const auto& ex = expansions[r];
        if (ex.order() != order) {
            throw std::invalid_argument("reconstruct_correlated: expansion order mismatch");
        }
        if (ex.dim() != dim) {
            throw std::invalid_argument("reconstruct_correlated: expansion dimension mismatch");
        }
        if (static_cast<int>(records[r].populations.size()) != outcomes) {
            throw std::invalid_argument("reconstruct_correlated: record size mismatch");
        }

        const Eigen::Index row0 = static_cast<Eigen::Index>(r) * outcomes;
        for (int o = 0; o < outcomes; ++o) rhs(row0 + o) = records[r].populations[o];

        for (int b = 0; b < blocks; ++b) {
            Superoperator mb = Superoperator::Zero(dim, dim);
            for (int k = 0; k <= order && k + b < static_cast<int>(moments.size()); ++k) {
                mb += moments[k + b] * ex.terms[k];
            }
            const RealMatrix chunk = population_rows(mb);
            if (pin) {
                a.block(row0, b * cols_per_block, outcomes, cols_per_block) =
                    chunk.rightCols(dim - 1);
                if (b == 0) rhs.segment(row0, outcomes) -= chunk.col(0);
                // higher-order blocks have c_0 pinned to 0: nothing to move
            } else {
                a.block(row0, b * cols_per_block, outcomes, cols_per_block) = chunk;
            }
        }
    }

    // zero out any higher-order block that brings no new information
    {
        double max_norm = 0.0;
        for (Eigen::Index c = 0; c < a.cols(); ++c) max_norm = std::max(max_norm, a.col(c).norm());
        auto equilibrated_block = [&](int b) {
            RealMatrix cols(a.rows(), cols_per_block);
            Eigen::Index kept = 0;
            for (int c = 0; c < cols_per_block; ++c) {
                const auto col = a.col(b * cols_per_block + c);
                if (col.norm() > 1e-12 * max_norm) cols.col(kept++) = col / col.norm();
            }
            return RealMatrix(cols.leftCols(kept));
        };
        RealMatrix acc = equilibrated_block(0);
        int rank_acc = acc.cols() > 0 ? numerical_rank(acc) : 0;
        for (int b = 1; b < blocks; ++b) {
            const RealMatrix next = equilibrated_block(b);
            if (next.cols() == 0) continue;  // all-zero block, pruned column-wise below
            RealMatrix joined(a.rows(), acc.cols() + next.cols());
            joined << acc, next;
            const int rank_joined = numerical_rank(joined);
            if (rank_joined == rank_acc) {
                a.middleCols(b * cols_per_block, cols_per_block).setZero();
            } else {
                acc = std::move(joined);
                rank_acc = rank_joined;
            }
        }
    }

    detail::SvdSolution sol = detail::svd_solve(a, rhs, /*prune_zero_columns=*/true);

    std::vector<CoefficientVector> out;
    for (int b = 0; b < blocks; ++b) {
        CoefficientVector v(dim);
        if (pin) {
            v(0) = b == 0 ? 1.0 : 0.0;
            v.tail(dim - 1) = sol.x.segment(b * cols_per_block, cols_per_block);
        } else {
            v = sol.x.segment(b * cols_per_block, cols_per_block);
        }
        out.push_back(std::move(v));
    }
    return out;
}

// Clip negative eigenvalues of rho(v) to zero and rescale the trace back to
// the original c_0. Least-squares output on noisy data may be unphysical;
// this is opt-in post-processing, never applied to reported fidelities.
inline CoefficientVector psd_project(const CoefficientVector& v) {
    const ComplexMatrix rho = coeffs_to_density(v);
    const double c0 = v(0);
    if (c0 <= 0.0) return CoefficientVector::Zero(v.size());  // no PSD state has trace <= 0
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho);
    RealVector lam = es.eigenvalues().cwiseMax(0.0);
    const double total = lam.sum();
    if (total <= 0.0) {
        return CoefficientVector::Zero(v.size());
    }
    lam *= c0 / total;
    const ComplexMatrix projected =
        es.eigenvectors() * lam.asDiagonal().toDenseMatrix().cast<Complex>() *
        es.eigenvectors().adjoint();
    return density_to_coeffs(projected);
}

}  // namespace qtomo
