#pragma once

// Composite Gauss-Legendre quadrature with dyadic adaptive refinement.
//
// Works for scalar integrands and for vector-valued ones (StateVector),
// with the error estimated by Richardson comparison of successive
// refinement levels in the value type's norm:
//
//     ||Q_h - Q_{h/2}|| <= tol * (1 + ||Q_{h/2}||)  -> accept Q_{h/2}.
//
// Known integrand breakpoints are passed as forced panel boundaries; each
// resulting segment is refined dyadically and independently counted against
// the panel cap.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "ergomix/errors.hpp"
#include "ergomix/state.hpp"

namespace ergomix {

struct QuadOptions {
    int nodes_per_panel = 8;
    int initial_panels = 1;
    int max_panels = 1 << 14;  // per segment
    std::vector<double> forced_boundaries;
};

/// Gauss-Legendre nodes and weights on [-1, 1], computed once per order by
/// Newton iteration on the Legendre recurrence.
inline const std::pair<std::vector<double>, std::vector<double>>& gauss_rule(int n) {
    static std::mutex mu;
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    std::vector<double> x(n), w(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 64; ++iter) {
            double p_prev = 0.0, p = 1.0;
            for (int j = 1; j <= n; ++j) {
                const double tmp = p;
                p = ((2.0 * j - 1.0) * t * p - (j - 1.0) * p_prev) / j;
                p_prev = tmp;
            }
            dp = n * (t * p - p_prev) / (t * t - 1.0);
            const double dt = -p / dp;
            t += dt;
            if (std::abs(dt) < 1e-15) break;
        }
        x[static_cast<std::size_t>(n - 1 - i)] = t;
        x[static_cast<std::size_t>(i)] = -t;
        w[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(n - 1 - i)] =
            2.0 / ((1.0 - t * t) * dp * dp);
    }
    return cache.emplace(n, std::make_pair(std::move(x), std::move(w))).first->second;
}

template <class V>
struct QuadTraits;

template <>
struct QuadTraits<double> {
    static double weighted_sum(std::span<const double> w, std::span<const double> v) {
        double acc = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * v[i];
        return acc;
    }
    static double norm(double x) { return std::abs(x); }
    static double sub_norm(double a, double b) { return std::abs(a - b); }
};

template <>
struct QuadTraits<cplx> {
    static cplx weighted_sum(std::span<const double> w, std::span<const cplx> v) {
        cplx acc{};
        for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * v[i];
        return acc;
    }
    static double norm(cplx x) { return std::abs(x); }
    static double sub_norm(cplx a, cplx b) { return std::abs(a - b); }
};

template <>
struct QuadTraits<StateVector> {
    static StateVector weighted_sum(std::span<const double> w, std::span<const StateVector> v) {
        std::vector<cplx> cs(w.begin(), w.end());
        return linear_combine(cs, v);
    }
    static double norm(const StateVector& x) { return ergomix::norm(x); }
    static double sub_norm(const StateVector& a, const StateVector& b) { return distance(a, b); }
};

/// Adaptive composite quadrature of g over [a, b].
///
/// Returns Q with ||Q - integral|| <= tol * (1 + ||Q||) estimated by
/// comparing successive dyadic refinements; throws QuadratureError when the
/// panel cap is reached without convergence and NumericError on NaN.
template <class V>
V quad_integral(const std::function<V(double)>& g, double a, double b, double tol,
                QuadOptions opt = {}) {
    using T = QuadTraits<V>;
    if (!(a <= b)) throw ConfigError("quad_integral: requires a <= b");
    if (!(tol > 0.0)) throw ConfigError("quad_integral: requires tol > 0");

    const auto& [gx, gw] = gauss_rule(opt.nodes_per_panel);

    std::vector<double> cuts;
    cuts.push_back(a);
    for (double c : opt.forced_boundaries)
        if (c > a && c < b) cuts.push_back(c);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());

    auto evaluate_level = [&](int panels_per_segment) {
        std::vector<double> ws;
        std::vector<V> vs;
        for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
            const double lo = cuts[s], hi = cuts[s + 1];
            if (hi <= lo) continue;
            const double h = (hi - lo) / panels_per_segment;
            for (int p = 0; p < panels_per_segment; ++p) {
                const double mid = lo + (p + 0.5) * h;
                for (int k = 0; k < opt.nodes_per_panel; ++k) {
                    const std::size_t ki = static_cast<std::size_t>(k);
                    ws.push_back(0.5 * h * gw[ki]);
                    vs.push_back(g(mid + 0.5 * h * gx[ki]));
                }
            }
        }
        if (vs.empty()) {
            // Degenerate interval: 0 * g(a).
            V probe = g(a);
            const double zero = 0.0;
            return T::weighted_sum(std::span<const double>(&zero, 1),
                                   std::span<const V>(&probe, 1));
        }
        return T::weighted_sum(ws, vs);
    };

    V prev = evaluate_level(opt.initial_panels);
    double nprev = T::norm(prev);
    if (!std::isfinite(nprev)) throw NumericError("quad_integral: NaN in integrand");
    double nbefore = nprev;
    for (int panels = opt.initial_panels * 2; panels <= opt.max_panels; panels *= 2) {
        V cur = evaluate_level(panels);
        const double ncur = T::norm(cur);
        if (!std::isfinite(ncur)) throw NumericError("quad_integral: NaN in integrand");
        const double err = T::sub_norm(prev, cur);
        if (err <= tol * (1.0 + ncur)) return cur;
        prev = std::move(cur);
        nbefore = nprev;
        nprev = ncur;
    }
    throw QuadratureError("quad_integral: panel cap reached without convergence", nbefore, nprev);
}

}  // namespace ergomix
