// acceptance_main.cpp — end-to-end acceptance suite. Runs every criterion at
// its stated tolerance and prints one pass/fail line per criterion; the exit
// code is the number of failed criteria.

#include "qtomo/qtomo.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace qtomo;

namespace {

constexpr double pi = std::numbers::pi;

struct Criterion {
    int id;
    std::string name;
    double time_limit_s;
    std::function<bool(std::string&)> run;
};

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3g", x);
    return buf;
}

RotationSpec random_spec(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 2 * pi);
    return {u(rng), u(rng)};
}

CoefficientVector random_bloch_state(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::Vector3d n(g(rng), g(rng), g(rng));
    n *= std::uniform_real_distribution<double>(0.0, 1.0)(rng) / n.norm();
    CoefficientVector v(4);
    v << 1.0, n(0), n(1), n(2);
    return v;
}

ComplexMatrix random_density(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    ComplexMatrix m(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m(i, j) = Complex(g(rng), g(rng));
    ComplexMatrix rho = m * m.adjoint();
    return rho / rho.trace();
}

// ---------------------------------------------------------------------------

// 1. numerically integrated ideal superoperators match the analytic ones
bool criterion1(std::string& detail) {
    std::mt19937_64 rng(1001);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const RotationSpec spec = random_spec(rng);
        const auto model = HamiltonianModel::ideal(1.0, spec);
        const Superoperator b = propagate_superop(model, 0.0, default_pulse(model, 1000));
        worst = std::max(worst, (b - analytic_superop(spec)).cwiseAbs().maxCoeff());
    }
    detail = "max entrywise deviation " + fmt(worst) + " (tolerance 1e-8)";
    return worst <= 1e-8;
}

// 2. rank structure of the assembled population rows
bool criterion2(std::string& detail) {
    const auto detuned = HamiltonianModel::detuned_rotation(1.0);

    const auto s1 = make_single_setting({pi / 2, 0.3}, detuned, 600);
    const AssembledSystem one = assemble_system(
        {s1}, {propagate_superop(s1.models[0], 0.0, s1.pulses[0])});
    const int rank_one = numerical_rank(RealMatrix(one.design.rightCols(3)));

    std::vector<TomographySetting> three;
    std::vector<Superoperator> three_designs;
    for (const RotationSpec spec :
         {RotationSpec{pi / 2, 0.0}, RotationSpec{pi / 2, pi / 2}, RotationSpec{pi, 0.0}}) {
        three.push_back(make_single_setting(spec, detuned, 600));
        three_designs.push_back(
            propagate_superop(three.back().models[0], 0.0, three.back().pulses[0]));
    }
    const int rank_three =
        numerical_rank(RealMatrix(assemble_system(three, three_designs).design.rightCols(3)));

    const auto lossy = HamiltonianModel::three_level_lambda(1 / std::numbers::sqrt2,
                                                            1 / std::numbers::sqrt2, 0.1, 0.05);
    std::vector<TomographySetting> two{make_single_setting({pi / 2, 0.0}, lossy, 600),
                                       make_single_setting({2 * pi / 3, pi / 3}, lossy, 600)};
    std::vector<Superoperator> two_designs;
    for (const auto& s : two) {
        two_designs.push_back(propagate_superop(s.models[0], 0.0, s.pulses[0]));
    }
    const int rank_lossy = numerical_rank(assemble_system(two, two_designs).design);

    detail = "one trace-preserving setting: Bloch-block rank " + std::to_string(rank_one) +
             " (dependent rows); three settings: rank " + std::to_string(rank_three) +
             "; two lossy settings (Gamma = 0.05): rank " + std::to_string(rank_lossy);
    return rank_one == 1 && rank_three == 3 && rank_lossy == 4;
}

// 3. noiseless forward-simulate / invert round trips
bool criterion3(std::string& detail) {
    std::mt19937_64 rng(1003);

    double worst_single = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Superoperator> designs;
        std::vector<TomographySetting> settings;
        const auto base = HamiltonianModel::ideal(1.0);
        while (true) {
            designs.clear();
            settings.clear();
            for (int k = 0; k < 3; ++k) {
                const RotationSpec spec = random_spec(rng);
                settings.push_back(make_single_setting(spec, base));
                designs.push_back(analytic_superop(spec));
            }
            const AssembledSystem a = assemble_system(settings, designs);
            Eigen::JacobiSVD<RealMatrix> svd(a.design.rightCols(3));
            if (svd.singularValues()(2) > 1e-3 * svd.singularValues()(0)) break;
        }
        const AssembledSystem a = assemble_system(settings, designs);
        const CoefficientVector truth = random_bloch_state(rng);
        const ReconstructionResult r =
            solve(a.design, a.design * truth, SolveMode::Exact, TraceConstraint::PinC0ToOne);
        worst_single = std::max(worst_single, (r.coeffs - truth).cwiseAbs().maxCoeff());
    }

    const auto lossy = HamiltonianModel::three_level_lambda(1 / std::numbers::sqrt2,
                                                            1 / std::numbers::sqrt2, 0.1, 0.05);
    std::vector<TomographySetting> settings;
    std::vector<Superoperator> designs;
    for (const auto& [p1, p2] : default_pair_angles()) {
        settings.push_back(make_pair_setting(p1, p2, lossy, lossy, 600));
        designs.push_back(two_qubit_superop(
            propagate_superop(settings.back().models[0], 0.0, settings.back().pulses[0]),
            propagate_superop(settings.back().models[1], 0.0, settings.back().pulses[1])));
    }
    const AssembledSystem a = assemble_system(settings, designs);
    double worst_two = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const CoefficientVector truth = density_to_coeffs(random_density(4, rng));
        const ReconstructionResult r =
            solve(a.design, a.design * truth, SolveMode::LeastSquares, TraceConstraint::Free);
        worst_two = std::max(worst_two, (r.coeffs - truth).cwiseAbs().maxCoeff());
    }

    detail = "single-qubit exact-solve max error " + fmt(worst_single) +
             " (tol 1e-8); two-qubit least-squares max error " + fmt(worst_two) + " (tol 1e-6)";
    return worst_single <= 1e-8 && worst_two <= 1e-6;
}

// 4. generalized Rabi transfer probability at delta/Omega = 0.1, Omega t = pi
bool criterion4(std::string& detail) {
    const auto model = HamiltonianModel::detuned_rotation(1.0, {pi, 0.0});
    ComplexMatrix ket0 = ComplexMatrix::Zero(2, 2);
    ket0(0, 0) = 1.0;
    const ComplexMatrix out = propagate(ket0, model, 0.1, default_pulse(model, 200));

    const double eff = std::hypot(1.0, 0.1);
    const double oracle = std::pow(std::sin(0.5 * eff * pi) / eff, 2);
    const double err = std::abs(out(1, 1).real() - oracle);
    detail = "simulated P1 = " + fmt(out(1, 1).real()) + ", closed-form oracle = " + fmt(oracle) +
             ", deviation " + fmt(err) + " (tol 1e-6)";
    return err <= 1e-6;
}

double g_single_gap = 0.0;  // recorded by criterion 5, reported by criterion 6

// 5. single-qubit |+> scan: averaged path exact, naive path strictly decreasing
bool criterion5(std::string& detail) {
    const auto rows = run_single_qubit_scan(default_config(Scenario::SingleQubitScan));
    bool ok = true;
    double min_avg = 1.0;
    const ScanRow* last = nullptr;
    double prev_naive = 2.0;
    bool decreasing = true;
    for (const auto& r : rows) {
        if (r.width == 0.0) continue;
        min_avg = std::min(min_avg, r.fidelity_averaged);
        if (r.fidelity_naive >= prev_naive) decreasing = false;
        prev_naive = r.fidelity_naive;
        last = &r;
    }
    ok = min_avg >= 0.999 && decreasing && last != nullptr &&
         last->fidelity_naive < last->fidelity_averaged - 1e-4;
    g_single_gap = last ? last->fidelity_averaged - last->fidelity_naive : 0.0;
    detail = "min averaged fidelity " + fmt(min_avg) + "; naive strictly decreasing: " +
             (decreasing ? "yes" : "no") + "; gap at max width " + fmt(g_single_gap);
    return ok;
}

// 6. two-qubit entangled-state scan with six settings
bool criterion6(std::string& detail) {
    const auto rows = run_two_qubit_scan(default_config(Scenario::TwoQubitScan));
    double min_avg = 1.0;
    double prev_naive = 2.0;
    bool decreasing = true;
    const ScanRow* last = nullptr;
    for (const auto& r : rows) {
        if (r.width == 0.0) continue;
        min_avg = std::min(min_avg, r.fidelity_averaged);
        if (r.fidelity_naive >= prev_naive) decreasing = false;
        prev_naive = r.fidelity_naive;
        last = &r;
    }
    const double gap = last ? last->fidelity_averaged - last->fidelity_naive : 0.0;
    detail = "min averaged fidelity " + fmt(min_avg) + "; naive strictly decreasing: " +
             (decreasing ? "yes" : "no") + "; two-qubit gap at max width " + fmt(gap) +
             " vs single-qubit gap " + fmt(g_single_gap) + " (recorded)";
    return min_avg >= 0.99 && decreasing && gap > 1e-6;
}

// 7. correlated preparation/reconstruction demo
bool criterion7(std::string& detail) {
    const ExperimentConfig cfg = default_config(Scenario::CorrelatedDemo);
    const CorrelatedReport report = run_correlated_demo(cfg);

    bool k2_below_k0 = true;
    for (const auto& row : report.rows) {
        if (row.width > 0.0 && row.error_k2 >= row.error_k0) k2_below_k0 = false;
    }

    // independent oracle: fine-grid finite differences of the prepared state
    const HamiltonianModel prep = bind_rotation(cfg.base_model, cfg.prep_angles);
    const PulseSpec prep_pulse = default_pulse(prep, 2000);
    ComplexMatrix ket0 = ComplexMatrix::Zero(2, 2);
    ket0(0, 0) = 1.0;
    auto prepared = [&](double delta) {
        return density_to_coeffs(propagate(ket0, prep, delta, prep_pulse));
    };
    const double h = 1e-3;
    const CoefficientVector v0 = prepared(0.0);
    const CoefficientVector vp = prepared(h), vm = prepared(-h);
    const CoefficientVector v2 = (vp - 2.0 * v0 + vm) / (2.0 * h * h);

    const CorrelatedRow& check = report.rows.front();
    const double err_v0 = (check.orders[0] - v0).cwiseAbs().maxCoeff();
    const double err_v2 = (check.orders[2] - v2).cwiseAbs().maxCoeff();

    detail = "at width " + fmt(check.width) + ": |v0 - oracle| " + fmt(err_v0) +
             ", |v2 - oracle| " + fmt(err_v2) + " (tol 1e-4); K2 < K0 at every width: " +
             (k2_below_k0 ? "yes" : "no") + "; K2 log-log slope " + fmt(report.slope_k2) +
             " (needs >= 3)";
    return err_v0 <= 1e-4 && err_v2 <= 1e-4 && k2_below_k0 && report.slope_k2 >= 3.0;
}

// 8. reconstruction error scales as one over the square root of the shot count
bool criterion8(std::string& detail) {
    std::vector<TomographySetting> settings;
    std::vector<Superoperator> designs;
    const auto base = HamiltonianModel::ideal(1.0);
    for (const auto& spec : default_single_angles()) {
        settings.push_back(make_single_setting(spec, base));
        designs.push_back(analytic_superop(spec));
    }
    const AssembledSystem a = assemble_system(settings, designs);
    PureState plus(2);
    plus << 1 / std::numbers::sqrt2, 1 / std::numbers::sqrt2;
    const CoefficientVector truth = density_to_coeffs(plus * plus.adjoint());
    const RealVector p_exact = a.design * truth;

    std::vector<double> log_n, log_err;
    for (const long n : {1000L, 10000L, 100000L, 1000000L}) {
        double mean_err = 0.0;
        const int repeats = 32;
        for (int r = 0; r < repeats; ++r) {
            RealVector p(p_exact.size());
            for (int s = 0; s < 3; ++s) {
                const MeasurementRecord rec = simulate_shots(
                    {p_exact(2 * s), p_exact(2 * s + 1)}, n,
                    detail::mix_seed(424242, static_cast<std::uint64_t>(n), 8 * r + s), s);
                p(2 * s) = rec.populations[0];
                p(2 * s + 1) = rec.populations[1];
            }
            const ReconstructionResult sol =
                solve(a.design, p, SolveMode::LeastSquares, TraceConstraint::PinC0ToOne);
            mean_err += (sol.coeffs - truth).norm();
        }
        mean_err /= repeats;
        log_n.push_back(std::log10(static_cast<double>(n)));
        log_err.push_back(std::log10(mean_err));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(log_n.size());
    for (int i = 0; i < n; ++i) {
        sx += log_n[i];
        sy += log_err[i];
        sxx += log_n[i] * log_n[i];
        sxy += log_n[i] * log_err[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    detail = "fitted log-log slope " + fmt(slope) + " (needs -0.5 +- 0.1)";
    return slope >= -0.6 && slope <= -0.4;
}

// 9. identical config and seed give byte-identical CSV output
bool criterion9(std::string& detail) {
    bool ok = true;
    std::ostringstream which;
    for (const Scenario scenario :
         {Scenario::SingleQubitScan, Scenario::TwoQubitScan, Scenario::CorrelatedDemo}) {
        ExperimentConfig cfg = default_config(scenario);
        // cut the grids down; determinism is about byte equality, not physics
        cfg.width_grid = {0.0, 0.005};
        if (scenario == Scenario::CorrelatedDemo) cfg.width_grid = {0.005, 0.01};
        cfg.samples = 7;
        
        cfg.seed = 20259;
        if (scenario == Scenario::SingleQubitScan) cfg.shots = 5000;
        const std::string first = run_scenario_csv(cfg);
        const std::string second = run_scenario_csv(cfg);
        if (first != second) {
            ok = false;
            which << " mismatch in scenario " << static_cast<int>(scenario);
        }
    }
    detail = "three scenarios, one with finite shots, re-run byte-compared" + which.str();
    return ok;
}

}  // namespace

int main() {
    std::vector<Criterion> criteria{
        {1, "analytic-superoperator oracle (200 random rotations, 1e-8)", 10.0, criterion1},
        {2, "rank structure of assembled systems", 60.0, criterion2},
        {3, "noiseless round trips (single exact, two-qubit least squares)", 30.0, criterion3},
        {4, "detuned-Rabi transfer oracle (closed form, 1e-6)", 10.0, criterion4},
        {5, "single-qubit width scan, averaged vs naive", 120.0, criterion5},
        {6, "two-qubit width scan, averaged vs naive", 600.0, criterion6},
        {7, "correlated order-by-order reconstruction", 300.0, criterion7},
        {8, "shot-noise scaling of the reconstruction error", 120.0, criterion8},
        {9, "byte-identical CSV for identical config and seed", 120.0, criterion9},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > c.time_limit_s) {
            ok = false;
            detail += " [exceeded " + fmt(c.time_limit_s) + " s limit]";
        }
        std::printf("[%s] criterion %d: %s (%.2f s) — %s\n", ok ? "PASS" : "FAIL", c.id,
                    c.name.c_str(), secs, detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
                criteria.size());
    return failures;
}
