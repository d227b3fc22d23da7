// ensemble.hpp — inhomogeneity distributions P(delta) and their weighted
// sample-set (quadrature) representation.

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qtomo {

struct Distribution {
    enum class Kind { Lorentzian, Gaussian, DiracDelta, Discrete };

    Kind kind = Kind::DiracDelta;
    double width = 0.0;  // Lorentzian HWHM gamma or Gaussian sigma
    std::vector<std::pair<double, double>> points;  // Discrete only: (delta, weight)

    static Distribution lorentzian(double hwhm) {
        if (!(hwhm > 0.0) || !std::isfinite(hwhm)) {
            throw std::invalid_argument("lorentzian: hwhm must be positive and finite");
        }
        return {Kind::Lorentzian, hwhm, {}};
    }
    static Distribution gaussian(double sigma) {
        if (!(sigma > 0.0) || !std::isfinite(sigma)) {
            throw std::invalid_argument("gaussian: sigma must be positive and finite");
        }
        return {Kind::Gaussian, sigma, {}};
    }
    static Distribution dirac_delta() { return {Kind::DiracDelta, 0.0, {}}; }
    static Distribution discrete(std::vector<std::pair<double, double>> pts) {
        if (pts.empty()) throw std::invalid_argument("discrete: needs at least one point");
        return {Kind::Discrete, 0.0, std::move(pts)};
    }

    // Unnormalised density, used for quadrature weights.
    double density(double delta) const {
        const double x = delta / width;
        switch (kind) {
            case Kind::Lorentzian: return 1.0 / (1.0 + x * x);
            case Kind::Gaussian: return std::exp(-0.5 * x * x);
            default:
                throw std::logic_error("density: only continuous distributions have one");
        }
    }
};

// Quadrature representation {(delta_i, p_i)} of P(delta): weights sum to 1,
// are nonnegative, and the delta_i are strictly increasing.
struct SampleSet {
    std::vector<double> deltas;
    std::vector<double> weights;

    SampleSet(std::vector<double> d, std::vector<double> w)
        : deltas(std::move(d)), weights(std::move(w)) {
        if (deltas.size() != weights.size() || deltas.empty()) {
            throw std::invalid_argument("SampleSet: mismatched or empty arrays");
        }
        double total = 0.0;
        for (std::size_t i = 0; i < deltas.size(); ++i) {
            if (weights[i] < 0.0) throw std::invalid_argument("SampleSet: negative weight");
            if (i > 0 && !(deltas[i] > deltas[i - 1])) {
                throw std::invalid_argument("SampleSet: deltas must be strictly increasing");
            }
            total += weights[i];
        }
        if (std::abs(total - 1.0) > 1e-12) {
            throw std::invalid_argument("SampleSet: weights must sum to 1, got " +
                                        std::to_string(total));
        }
    }

    std::size_t size() const { return deltas.size(); }
};

// Uniform grid of n points on [-trunc*w, +trunc*w] with weights proportional
// to P(delta_i), renormalised. Grid and weights are built mirror-symmetric so
// odd moments cancel exactly. DiracDelta collapses to the single point (0, 1).
inline SampleSet sample(const Distribution& dist, int n, double trunc) {
    if (n < 1) throw std::invalid_argument("sample: n must be >= 1");

    if (dist.kind == Distribution::Kind::DiracDelta) {
        return SampleSet({0.0}, {1.0});
    }
    if (dist.kind == Distribution::Kind::Discrete) {
        auto pts = dist.points;
        std::sort(pts.begin(), pts.end());
        double total = 0.0;
        for (auto& [d, w] : pts) total += w;
        if (!(total > 0.0)) throw std::invalid_argument("sample: discrete weights sum to 0");
        std::vector<double> d, w;
        for (auto& [delta, weight] : pts) {
            d.push_back(delta);
            w.push_back(weight / total);
        }
        return SampleSet(std::move(d), std::move(w));
    }

    if (!(trunc > 0.0)) {
        throw std::invalid_argument("sample: trunc must be positive for continuous distributions");
    }
    if (n == 1) return SampleSet({0.0}, {1.0});

    const double span = trunc * dist.width;
    const double h = 2.0 * span / (n - 1);
    std::vector<double> deltas(n), weights(n);
    // fill the positive half and mirror it, so symmetry is exact in floating point
    for (int i = n / 2; i < n; ++i) {
        const double d = (n % 2 == 1 && i == n / 2) ? 0.0 : -span + i * h;
        deltas[i] = d;
        deltas[n - 1 - i] = -d;
        weights[i] = weights[n - 1 - i] = dist.density(d);
    }
    double total = 0.0;
    for (double w : weights) total += w;
    for (double& w : weights) w /= total;
    return SampleSet(std::move(deltas), std::move(weights));
}

// k-th moment sum_i p_i delta_i^k.
inline double moment(const SampleSet& s, int k) {
    if (k < 0) throw std::invalid_argument("moment: order must be >= 0");
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        acc += s.weights[i] * std::pow(s.deltas[i], k);
    }
    return acc;
}

}  // namespace qtomo
