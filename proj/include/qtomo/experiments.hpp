// experiments.hpp — config-driven scenarios: single- and two-qubit
// fidelity-vs-width scans, the correlated preparation/reconstruction demo,
// finite-shot sampling and CSV emission.

#pragma once

#include "qtomo/calibration.hpp"
#include "qtomo/dynamics.hpp"
#include "qtomo/ensemble.hpp"
#include "qtomo/qcore.hpp"
#include "qtomo/reconstruction.hpp"
#include "qtomo/rotations.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace qtomo {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Scenario { SingleQubitScan, TwoQubitScan, CorrelatedDemo };

// All frequencies are in units of the Rabi frequency (omega = 1); the
// rare-earth regime of roughly MHz Rabi frequencies, 100 kHz excited-state
// shifts and 10 kHz hyperfine broadening maps to delta_excited ~ 0.1 and
// widths up to ~0.05.
struct ExperimentConfig {
    Scenario scenario = Scenario::SingleQubitScan;
    HamiltonianModel base_model = HamiltonianModel::detuned_rotation(1.0);
    Distribution::Kind dist_kind = Distribution::Kind::Lorentzian;
    std::vector<double> width_grid;
    std::vector<RotationSpec> single_angles;                 // single scan / demo tomography
    std::vector<std::array<RotationSpec, 2>> pair_angles;    // two-qubit scan
    RotationSpec prep_angles{std::numbers::pi / 2.0, 0.0};   // correlated demo gate
    int samples = 21;
    double truncation = 5.0;
    long shots = 0;  // 0 = exact statistics
    std::uint64_t seed = 1;
    int steps_per_cycle = 600;
};

struct ScanRow {
    double width = 0.0;
    double fidelity_averaged = 0.0;
    double fidelity_naive = 0.0;
    double residual_averaged = 0.0;
    double residual_naive = 0.0;
};

struct CorrelatedRow {
    double width = 0.0;
    double error_k0 = 0.0;  // max-abs error of the K=0 ensemble-average estimate
    double error_k2 = 0.0;  // same for K=2
    std::vector<CoefficientVector> orders;  // v0, v1, v2 from the K=2 solve
    CoefficientVector ensemble_average;     // brute-force averaged prepared state
    double moment2 = 0.0;
};

struct CorrelatedReport {
    std::vector<CorrelatedRow> rows;
    double slope_k2 = 0.0;  // fitted log-log slope of error_k2 vs width
};

// ---------------------------------------------------------------------------
// defaults

inline std::vector<RotationSpec> default_single_angles() {
    const double pi = std::numbers::pi;
    return {{pi / 2.0, 0.0}, {pi / 2.0, pi / 2.0}, {pi, 0.0}};
}

// Six ordered pairs of distinct rotations. The base specs are deliberately
// not axis-aligned: together with the loss channel they give the stacked
// two-qubit system full rank 16.
inline std::vector<std::array<RotationSpec, 2>> default_pair_angles() {
    const double pi = std::numbers::pi;
    const RotationSpec a{pi / 2.0, 0.0};
    const RotationSpec b{pi / 2.0, pi / 2.0};
    const RotationSpec c{2.0 * pi / 3.0, pi / 4.0};
    return {{{a, b}}, {{a, c}}, {{b, a}}, {{b, c}}, {{c, a}}, {{c, b}}};
}

inline std::vector<RotationSpec> default_demo_angles() {
    const double pi = std::numbers::pi;
    std::vector<RotationSpec> out;
    for (double th : {pi / 2.0, pi / 3.0, 2.0 * pi / 3.0, 5.0 * pi / 6.0}) {
        for (double ph : {0.0, pi / 2.0, pi / 4.0}) out.push_back({th, ph});
    }
    return out;
}

inline std::vector<double> default_scan_widths(double max_width = 0.05) {
    std::vector<double> g{0.0};
    for (int i = 6; i >= 0; --i) g.push_back(max_width / std::pow(2.0, i));
    return g;
}

inline std::vector<double> default_demo_widths() {
    return {2e-3, 3e-3, 5e-3, 7e-3, 1e-2, 1.4e-2, 2e-2, 2.8e-2};
}

inline ExperimentConfig default_config(Scenario scenario) {
    ExperimentConfig cfg;
    cfg.scenario = scenario;
    switch (scenario) {
        case Scenario::SingleQubitScan:
            cfg.base_model = HamiltonianModel::detuned_rotation(1.0);
            cfg.width_grid = default_scan_widths();
            cfg.single_angles = default_single_angles();
            break;
        case Scenario::TwoQubitScan:
            // lossy three-level model: local projective rotations alone cannot
            // reach rank 16 with six settings, the loss channel can. The grid
            // tops out at 0.0125 because the long lambda pulses are far more
            // width-sensitive than plain detuned rotations.
            cfg.base_model = HamiltonianModel::three_level_lambda(1.0 / std::numbers::sqrt2,
                                                                  1.0 / std::numbers::sqrt2,
                                                                  0.1, 0.05);
            cfg.width_grid = default_scan_widths(0.0125);
            cfg.pair_angles = default_pair_angles();
            break;
        case Scenario::CorrelatedDemo:
            cfg.base_model = HamiltonianModel::detuned_rotation(1.0);
            cfg.width_grid = default_demo_widths();
            cfg.single_angles = default_demo_angles();
            cfg.steps_per_cycle = 1200;
            break;
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// shot-noise simulation

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(seed ^ (a * 0x9e3779b97f4a7c15ULL)) ^ b);
}

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

// Multinomial sampling of one measurement record: n draws over the listed
// outcomes plus an implicit "lost" outcome carrying the missing probability.
// Returns empirical frequencies; deterministic for a given seed.
inline MeasurementRecord simulate_shots(const std::vector<double>& populations, long n,
                                        std::uint64_t seed, int setting_id = 0) {
    if (n < 1) throw std::invalid_argument("simulate_shots: need at least one shot");
    if (populations.size() != 2 && populations.size() != 4) {
        throw std::invalid_argument("simulate_shots: expected 2 or 4 outcome probabilities");
    }
    double sum = 0.0;
    std::vector<double> cdf;
    for (double p : populations) {
        if (p < -1e-9 || !std::isfinite(p)) {
            throw std::invalid_argument("simulate_shots: invalid probability");
        }
        sum += std::max(p, 0.0);
        cdf.push_back(sum);
    }
    if (sum > 1.0 + 1e-9) {
        throw std::invalid_argument("simulate_shots: probabilities sum to more than 1");
    }

    std::vector<long> counts(populations.size(), 0);
    std::mt19937_64 rng(seed);
    for (long i = 0; i < n; ++i) {
        const double u = detail::uniform01(rng);
        for (std::size_t k = 0; k < cdf.size(); ++k) {
            if (u < cdf[k]) {
                ++counts[k];
                break;
            }
        }
        // u >= sum: the shot is lost outside the qubit space
    }
    std::vector<double> freq;
    for (long c : counts) freq.push_back(static_cast<double>(c) / static_cast<double>(n));
    return MeasurementRecord(setting_id, freq);
}

// ---------------------------------------------------------------------------
// scenario runners

namespace detail {

inline Distribution dist_for_width(Distribution::Kind kind, double width) {
    if (width == 0.0 || kind == Distribution::Kind::DiracDelta) {
        return Distribution::dirac_delta();
    }
    if (kind == Distribution::Kind::Lorentzian) return Distribution::lorentzian(width);
    if (kind == Distribution::Kind::Gaussian) return Distribution::gaussian(width);
    throw ConfigError("scan scenarios need a width-parameterised distribution");
}

inline bool lossy_model(const HamiltonianModel& m) {
    return m.kind == HamiltonianModel::Kind::ThreeLevelLambda;
}

// One-time check of the fixed-step contract at the largest detuning the scan
// will visit; a too-coarse step is reported instead of silently degrading.
inline void check_step_contract(const TomographySetting& setting, double max_delta) {
    const ComplexMatrix rho0 =
        embed_qubit((ComplexMatrix(2, 2) << 1, 0, 0, 0).finished(), setting.models[0].dimension);
    const double diff =
        step_halving_difference(rho0, setting.models[0], max_delta, setting.pulses[0]);
    if (diff > 1e-9) {
        char msg[160];
        std::snprintf(msg, sizeof(msg),
                      "integrator step too coarse: halving dt changes the result by %.3g; "
                      "increase steps_per_cycle",
                      diff);
        throw std::runtime_error(msg);
    }
}

inline RealVector stack_records(const std::vector<MeasurementRecord>& records) {
    std::size_t total = 0;
    for (const auto& r : records) total += r.populations.size();
    RealVector p(static_cast<Eigen::Index>(total));
    Eigen::Index at = 0;
    for (const auto& r : records) {
        for (double v : r.populations) p(at++) = v;
    }
    return p;
}

inline std::vector<MeasurementRecord> make_records(const std::vector<std::vector<double>>& exact,
                                                   const ExperimentConfig& cfg,
                                                   std::size_t width_index) {
    std::vector<MeasurementRecord> records;
    for (std::size_t s = 0; s < exact.size(); ++s) {
        if (cfg.shots > 0) {
            records.push_back(simulate_shots(exact[s], cfg.shots,
                                             mix_seed(cfg.seed, width_index, s),
                                             static_cast<int>(s)));
        } else {
            records.emplace_back(static_cast<int>(s), exact[s]);
        }
    }
    return records;
}

inline double fidelity_of(const PureState& psi, const CoefficientVector& coeffs) {
    return fidelity(psi, coeffs_to_density(coeffs));
}

// settings often share a rotation spec between qubits/settings; build each
// distinct single-qubit design only once
struct SubsettingCache {
    std::vector<TomographySetting> unique;
    std::map<std::pair<double, double>, std::size_t> index;

    std::size_t lookup(const TomographySetting& sub) {
        const auto key = std::make_pair(sub.specs[0].theta, sub.specs[0].phi);
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        unique.push_back(sub);
        index.emplace(key, unique.size() - 1);
        return unique.size() - 1;
    }
};

}  // namespace detail

inline std::vector<ScanRow> run_single_qubit_scan(const ExperimentConfig& cfg) {
    if (cfg.scenario != Scenario::SingleQubitScan) {
        throw ConfigError("run_single_qubit_scan: wrong scenario");
    }
    if (cfg.single_angles.empty()) throw ConfigError("no angle sets configured");

    const PureState psi = (PureState(2) << 1.0 / std::numbers::sqrt2,
                           1.0 / std::numbers::sqrt2).finished();
    const CoefficientVector c_true = density_to_coeffs(psi * psi.adjoint());

    std::vector<TomographySetting> settings;
    std::vector<Superoperator> naive_designs;
    try {
        for (const auto& spec : cfg.single_angles) {
            settings.push_back(make_single_setting(spec, cfg.base_model, cfg.steps_per_cycle));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("angle set incompatible with the model: ") + e.what());
    }
    for (const auto& s : settings) {
        naive_designs.push_back(propagate_superop(s.models[0], 0.0, s.pulses[0]));
    }
    const AssembledSystem naive = assemble_system(settings, naive_designs);
    const TraceConstraint constraint = detail::lossy_model(cfg.base_model)
                                           ? TraceConstraint::Free
                                           : TraceConstraint::PinC0ToOne;

    const double max_width = *std::max_element(cfg.width_grid.begin(), cfg.width_grid.end());
    detail::check_step_contract(settings.front(), max_width * cfg.truncation);

    std::vector<ScanRow> rows;
    for (std::size_t wi = 0; wi < cfg.width_grid.size(); ++wi) {
        const double w = cfg.width_grid[wi];
        const SampleSet samples =
            sample(detail::dist_for_width(cfg.dist_kind, w), cfg.samples, cfg.truncation);

        std::vector<Superoperator> averaged;
        std::vector<std::vector<double>> exact;
        for (const auto& setting : settings) {
            averaged.push_back(ensemble_superop(setting, samples));
            const RealVector p = population_rows(averaged.back()) * c_true;
            exact.push_back({p(0), p(1)});
        }
        const auto records = detail::make_records(exact, cfg, wi);
        const RealVector p = detail::stack_records(records);

        const AssembledSystem avg = assemble_system(settings, averaged);
        const ReconstructionResult sol_avg =
            solve(avg.design, p, SolveMode::LeastSquares, constraint);
        const ReconstructionResult sol_naive =
            solve(naive.design, p, SolveMode::LeastSquares, constraint);

        rows.push_back({w, detail::fidelity_of(psi, sol_avg.coeffs),
                        detail::fidelity_of(psi, sol_naive.coeffs), sol_avg.residual_norm,
                        sol_naive.residual_norm});
    }
    return rows;
}

inline std::vector<ScanRow> run_two_qubit_scan(const ExperimentConfig& cfg) {
    if (cfg.scenario != Scenario::TwoQubitScan) {
        throw ConfigError("run_two_qubit_scan: wrong scenario");
    }
    if (cfg.pair_angles.size() < 4) {
        throw ConfigError("two-qubit reconstruction needs at least four angle sets");
    }

    PureState psi(4);
    psi << 0.5, 0.5, 0.5, -0.5;
    const CoefficientVector c_true = density_to_coeffs(psi * psi.adjoint());

    std::vector<TomographySetting> settings;
    detail::SubsettingCache cache;
    std::vector<std::array<std::size_t, 2>> sub_index;
    try {
        for (const auto& [s1, s2] : cfg.pair_angles) {
            settings.push_back(
                make_pair_setting(s1, s2, cfg.base_model, cfg.base_model, cfg.steps_per_cycle));
            sub_index.push_back({cache.lookup(settings.back().qubit_subsetting(0)),
                                 cache.lookup(settings.back().qubit_subsetting(1))});
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("angle set incompatible with the model: ") + e.what());
    }

    std::vector<Superoperator> naive_sub;
    for (const auto& sub : cache.unique) {
        naive_sub.push_back(propagate_superop(sub.models[0], 0.0, sub.pulses[0]));
    }
    std::vector<Superoperator> naive_designs;
    for (const auto& [i1, i2] : sub_index) {
        naive_designs.push_back(two_qubit_superop(naive_sub[i1], naive_sub[i2]));
    }
    const AssembledSystem naive = assemble_system(settings, naive_designs);
    const TraceConstraint constraint = detail::lossy_model(cfg.base_model)
                                           ? TraceConstraint::Free
                                           : TraceConstraint::PinC0ToOne;

    const double max_width = *std::max_element(cfg.width_grid.begin(), cfg.width_grid.end());
    detail::check_step_contract(cache.unique.front(), max_width * cfg.truncation);

    std::vector<ScanRow> rows;
    for (std::size_t wi = 0; wi < cfg.width_grid.size(); ++wi) {
        const double w = cfg.width_grid[wi];
        const SampleSet samples =
            sample(detail::dist_for_width(cfg.dist_kind, w), cfg.samples, cfg.truncation);

        // the two qubits are independent ensembles: average each factor first
        std::vector<Superoperator> averaged_sub;
        for (const auto& sub : cache.unique) averaged_sub.push_back(ensemble_superop(sub, samples));

        std::vector<Superoperator> averaged;
        std::vector<std::vector<double>> exact;
        for (const auto& [i1, i2] : sub_index) {
            averaged.push_back(two_qubit_superop(averaged_sub[i1], averaged_sub[i2]));
            const RealVector p = population_rows(averaged.back()) * c_true;
            exact.push_back({p(0), p(1), p(2), p(3)});
        }
        const auto records = detail::make_records(exact, cfg, wi);
        const RealVector p = detail::stack_records(records);

        const AssembledSystem avg = assemble_system(settings, averaged);
        const ReconstructionResult sol_avg =
            solve(avg.design, p, SolveMode::LeastSquares, constraint);
        const ReconstructionResult sol_naive =
            solve(naive.design, p, SolveMode::LeastSquares, constraint);

        rows.push_back({w, detail::fidelity_of(psi, sol_avg.coeffs),
                        detail::fidelity_of(psi, sol_naive.coeffs), sol_avg.residual_norm,
                        sol_naive.residual_norm});
    }
    return rows;
}

inline CorrelatedReport run_correlated_demo(const ExperimentConfig& cfg) {
    if (cfg.scenario != Scenario::CorrelatedDemo) {
        throw ConfigError("run_correlated_demo: wrong scenario");
    }
    if (cfg.single_angles.empty()) throw ConfigError("no angle sets configured");
    if (cfg.dist_kind == Distribution::Kind::Discrete) {
        throw ConfigError("the correlated demo needs a symmetric width-parameterised distribution");
    }

    HamiltonianModel prep;
    std::vector<TomographySetting> settings;
    try {
        prep = bind_rotation(cfg.base_model, cfg.prep_angles);
        for (const auto& spec : cfg.single_angles) {
            settings.push_back(make_single_setting(spec, cfg.base_model, cfg.steps_per_cycle));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("angle set incompatible with the model: ") + e.what());
    }
    const PulseSpec prep_pulse = default_pulse(prep, cfg.steps_per_cycle);

    // the K=0 reconstruction assumes delta-independent rotations: design B(0)
    std::vector<SuperopExpansion> zeroth;
    for (const auto& s : settings) {
        zeroth.push_back(SuperopExpansion{{propagate_superop(s.models[0], 0.0, s.pulses[0])}});
    }

    const double max_width = *std::max_element(cfg.width_grid.begin(), cfg.width_grid.end());
    detail::check_step_contract(settings.front(), max_width * cfg.truncation);

    const ComplexMatrix ket0 = (ComplexMatrix(2, 2) << 1, 0, 0, 0).finished();

    CorrelatedReport report;
    for (std::size_t wi = 0; wi < cfg.width_grid.size(); ++wi) {
        const double w = cfg.width_grid[wi];
        const SampleSet samples =
            sample(detail::dist_for_width(cfg.dist_kind, w), cfg.samples, cfg.truncation);

        // brute-force correlated forward simulation: each member is prepared
        // and rotated with its own delta
        std::vector<CoefficientVector> prepared;
        CoefficientVector v_bar = CoefficientVector::Zero(4);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const ComplexMatrix rho =
                propagate(embed_qubit(ket0, prep.dimension), prep, samples.deltas[i], prep_pulse);
            prepared.push_back(density_to_coeffs(rho.topLeftCorner(2, 2)));
            v_bar += samples.weights[i] * prepared.back();
        }

        std::vector<std::vector<double>> exact;
        std::vector<SuperopExpansion> expansions;
        for (const auto& setting : settings) {
            std::vector<Superoperator> per_sample;
            RealVector acc = RealVector::Zero(2);
            for (std::size_t i = 0; i < samples.size(); ++i) {
                per_sample.push_back(
                    propagate_superop(setting.models[0], samples.deltas[i], setting.pulses[0]));
                acc += samples.weights[i] * (population_rows(per_sample.back()) * prepared[i]);
            }
            exact.push_back({acc(0), acc(1)});
            expansions.push_back(fit_superop_expansion(per_sample, samples, 2));
        }
        const auto records = detail::make_records(exact, cfg, wi);

        // moments through order 4 keep all cross terms of the K=2 product
        std::vector<double> mom;
        for (int k = 0; k <= 4; ++k) mom.push_back(moment(samples, k));
        const auto k2 = reconstruct_correlated(records, expansions, mom, 2);
        const auto k0 = reconstruct_correlated(records, zeroth, {1.0}, 0);

        const CoefficientVector est_k2 = k2[0] + mom[1] * k2[1] + mom[2] * k2[2];
        CorrelatedRow row;
        row.width = w;
        row.error_k0 = (k0[0] - v_bar).cwiseAbs().maxCoeff();
        row.error_k2 = (est_k2 - v_bar).cwiseAbs().maxCoeff();
        row.orders = k2;
        row.ensemble_average = v_bar;
        row.moment2 = mom[2];
        report.rows.push_back(std::move(row));
    }

    // log-log slope of the K=2 error over the nonzero widths
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& row : report.rows) {
        if (row.width <= 0.0 || row.error_k2 <= 0.0) continue;
        const double x = std::log(row.width), y = std::log(row.error_k2);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    report.slope_k2 = n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : 0.0;
    return report;
}

// ---------------------------------------------------------------------------
// CSV emission (12 significant digits, LF line endings)

namespace detail {

inline std::string format_g12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

}  // namespace detail

inline std::string scan_csv(const std::vector<ScanRow>& rows) {
    std::string out = "width,fidelity_averaged,fidelity_naive,residual_averaged,residual_naive\n";
    for (const auto& r : rows) {
        out += detail::format_g12(r.width) + ',' + detail::format_g12(r.fidelity_averaged) + ',' +
               detail::format_g12(r.fidelity_naive) + ',' +
               detail::format_g12(r.residual_averaged) + ',' +
               detail::format_g12(r.residual_naive) + '\n';
    }
    return out;
}

inline std::string correlated_csv(const CorrelatedReport& report) {
    std::string out = "width,error_k0,error_k2\n";
    for (const auto& r : report.rows) {
        out += detail::format_g12(r.width) + ',' + detail::format_g12(r.error_k0) + ',' +
               detail::format_g12(r.error_k2) + '\n';
    }
    return out;
}

inline std::string run_scenario_csv(const ExperimentConfig& cfg) {
    switch (cfg.scenario) {
        case Scenario::SingleQubitScan: return scan_csv(run_single_qubit_scan(cfg));
        case Scenario::TwoQubitScan: return scan_csv(run_two_qubit_scan(cfg));
        case Scenario::CorrelatedDemo: return correlated_csv(run_correlated_demo(cfg));
    }
    throw std::logic_error("unknown scenario");
}

}  // namespace qtomo
