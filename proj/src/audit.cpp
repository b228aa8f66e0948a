#include "ergomix/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ergomix {

ExperimentReport criterion_audit(const FHCSystem& system, std::span<const double> t_grid,
                                 std::span<const double> r_grid, int n_basics) {
    ExperimentReport rep;
    rep.experiment = "criterion_audit";
    rep.instance = system.id();

    double max_semigroup = 0.0;
    double max_inverse = 0.0;
    double max_cocycle = 0.0;

    for (int n = 1; n <= n_basics; ++n) {
        const StateVector x = system.basic(n);
        const double scale = 1.0 + norm(x);

        for (double t : t_grid) {
            for (double s : t_grid) {
                const StateVector lhs = system.apply_T(t + s, x);
                const StateVector rhs = system.apply_T(t, system.apply_T(s, x));
                max_semigroup = std::max(max_semigroup, distance(lhs, rhs) / scale);
            }
            max_inverse =
                std::max(max_inverse, distance(system.apply_T(t, system.apply_S(t, x)), x) / scale);
            for (double r : r_grid) {
                if (!(r > t)) continue;
                const StateVector lhs = system.apply_T(t, system.apply_S(r, x));
                const StateVector rhs = system.apply_S(r - t, x);
                max_cocycle = std::max(max_cocycle, distance(lhs, rhs) / scale);
            }
        }
    }

    // Strong-continuity probe on the first basics.
    bool continuity_ok = true;
    nlohmann::json cont = nlohmann::json::array();
    for (int n = 2; n <= std::min(n_basics, 5); ++n) {
        const StateVector x = system.basic(n);
        nlohmann::json seq = nlohmann::json::array();
        double prev = std::numeric_limits<double>::infinity();
        for (int k = 1; k <= 12; ++k) {
            const double h = std::pow(2.0, -k);
            const double d = distance(system.apply_T(h, x), x);
            if (d > prev + 1e-12) continuity_ok = false;
            prev = d;
            seq.push_back(d);
        }
        cont.push_back({{"basic", n}, {"residuals", std::move(seq)}});
    }

    const double tol = system.tol_inst();
    rep.estimates.push_back({"max_semigroup_residual", max_semigroup, max_semigroup, max_semigroup,
                             static_cast<std::size_t>(n_basics)});
    rep.estimates.push_back({"max_inverse_residual", max_inverse, max_inverse, max_inverse,
                             static_cast<std::size_t>(n_basics)});
    rep.estimates.push_back({"max_cocycle_residual", max_cocycle, max_cocycle, max_cocycle,
                             static_cast<std::size_t>(n_basics)});
    rep.verdicts.push_back({"semigroup_law", tol, max_semigroup <= tol});
    rep.verdicts.push_back({"right_inverse", tol, max_inverse <= tol});
    rep.verdicts.push_back({"cocycle", tol, max_cocycle <= tol});
    rep.verdicts.push_back({"strong_continuity_monotone", 0.0, continuity_ok});
    rep.extra["continuity"] = std::move(cont);
    rep.extra["tol_inst"] = tol;
    return rep;
}

}  // namespace ergomix
