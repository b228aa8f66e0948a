#pragma once

// Structural checks of a semigroup instance: the semigroup law, the
// right-inverse identities of the backward maps, and a strong-continuity
// probe along halving time steps.

#include <span>

#include "ergomix/report.hpp"
#include "ergomix/semigroup.hpp"

namespace ergomix {

/// Residuals are normalized by (1 + ||x||) and compared against the
/// instance's tol_inst.  The continuity probe records ||T_h x - x|| along
/// h = 2^-k, k = 1..12, for the first five basics and checks that the
/// sequence is nonincreasing (up to 1e-12 slack).
ExperimentReport criterion_audit(const FHCSystem& system, std::span<const double> t_grid,
                                 std::span<const double> r_grid, int n_basics);

}  // namespace ergomix
