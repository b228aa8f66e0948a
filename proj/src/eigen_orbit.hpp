#pragma once

// Internal: systems built from an eigenvector field along a real interval.

#include <memory>
#include <string>
#include <vector>

#include "ergomix/semigroup.hpp"
#include "ergomix/state.hpp"

namespace ergomix::detail {

/// Concrete coordinates of the field vector at real parameter t (the
/// eigenvalue there is i*t), plus how to wrap coordinates into the
/// instance's concrete representation.
class SpectralLine {
  public:
    virtual ~SpectralLine() = default;
    virtual const std::string& id() const = 0;
    virtual std::size_t dim() const = 0;
    virtual std::vector<cplx> coords(double t) const = 0;
    virtual StateVector wrap(std::vector<cplx> coords) const = 0;
    virtual NormId norm_id() const = 0;
};

std::shared_ptr<FHCSystem> make_eigen_orbit_system(
    std::string id, std::shared_ptr<const SpectralLine> line, double t_lo, double t_hi,
    std::vector<ProfileSpec> bumps, double quad_tol,
    std::shared_ptr<const SpectralBasis> spectral, nlohmann::json params_json,
    double tol_inst = 1e-6);

}  // namespace ergomix::detail
