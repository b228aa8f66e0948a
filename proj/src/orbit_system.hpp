#pragma once

// Shared machinery for instances whose states are orbit combinations.

#include <cmath>
#include <memory>
#include <utility>

#include "ergomix/errors.hpp"
#include "ergomix/semigroup.hpp"
#include "ergomix/state.hpp"

namespace ergomix::detail {

/// 0, 1, -1, 2, -2, ...
inline int spiral_int(int n) { return (n % 2 == 0) ? -(n / 2) : (n + 1) / 2; }

/// Cantor pairing inverse: i -> (a, b) walking diagonals.
inline std::pair<int, int> cantor_decode(int i) {
    const int d = static_cast<int>((std::sqrt(8.0 * i + 1.0) - 1.0) / 2.0);
    const int base = d * (d + 1) / 2;
    const int r = i - base;
    return {r, d - r};
}

/// Smooth bump with unit peak, 0 outside (-1,1).  The squared denominator
/// gives Gevrey-1/2 regularity, so profile integrals modulated at frequency
/// w decay like exp(-c w^(2/3)) rather than exp(-c sqrt(w)).
inline double bump(double u) {
    if (std::abs(u) >= 1.0) return 0.0;
    const double d = 1.0 - u * u;
    return std::exp(1.0 - 1.0 / (d * d));
}

class OrbitSystemBase : public FHCSystem {
  public:
    const std::string& id() const override { return id_; }
    NormId norm_id() const override { return orbit_basis_->norm_id(); }
    double tol_inst() const override { return tol_inst_; }
    const std::shared_ptr<const OrbitBasis>& orbit_basis() const override { return orbit_basis_; }
    std::shared_ptr<const SpectralBasis> spectral_basis() const override {
        return spectral_basis_;
    }
    nlohmann::json params_json() const override { return params_json_; }

    StateVector basic(int n) const override {
        if (n < 1) throw ConfigError("basic index must be >= 1");
        std::vector<OrbitAtom> atoms;
        if (n > 1) atoms.push_back({n, cplx{1.0, 0.0}, 0.0, 0.0});
        check_atoms(atoms);
        return StateVector::orbit_combo(std::move(atoms), orbit_basis_);
    }

    StateVector orbit_segment(int n, double t_lo, double t_hi) const override {
        if (n < 1) throw ConfigError("basic index must be >= 1");
        if (!(t_lo <= t_hi)) throw ConfigError("orbit_segment: requires t_lo <= t_hi");
        std::vector<OrbitAtom> atoms;
        if (n > 1) atoms.push_back({n, cplx{1.0, 0.0}, t_lo, t_hi});
        check_atoms(atoms);
        return StateVector::orbit_combo(std::move(atoms), orbit_basis_);
    }

    StateVector apply_T(double t, const StateVector& x) const override {
        if (t < 0.0) throw ConfigError("apply_T: requires t >= 0");
        return shifted(t, x);
    }

    StateVector apply_S(double t, const StateVector& x) const override {
        if (t < 0.0) throw ConfigError("apply_S: requires t >= 0");
        return shifted(-t, x);
    }

  protected:
    StateVector shifted(double t, const StateVector& x) const {
        switch (x.kind()) {
            case RepKind::OrbitCombo: {
                const auto& o = x.as_orbit();
                if (o.basis != orbit_basis_)
                    throw TypeError(id_ + ": state belongs to a different family");
                std::vector<OrbitAtom> atoms = o.atoms;
                for (auto& a : atoms) {
                    a.t_lo += t;
                    a.t_hi += t;
                }
                check_atoms(atoms);
                return StateVector::orbit_combo(std::move(atoms), orbit_basis_);
            }
            case RepKind::EigenCombo: {
                const auto& e = x.as_eigen();
                if (!spectral_basis_ || e.basis != spectral_basis_)
                    throw TypeError(id_ + ": eigen state belongs to a different dictionary");
                std::vector<EigenTerm> terms = e.terms;
                for (auto& term : terms)
                    term.coeff *= std::exp(t * spectral_basis_->eigenvalue(term.param));
                return StateVector::eigen_combo(std::move(terms), spectral_basis_, x.norm_id());
            }
            default:
                return shifted_concrete(t, x);
        }
    }

    /// Domain check for atoms after a shift; default accepts everything.
    virtual void check_atoms(std::span<const OrbitAtom> atoms) const { (void)atoms; }

    /// Direct action on concrete representations (grid shifts); instances
    /// without one reject.
    virtual StateVector shifted_concrete(double t, const StateVector& x) const {
        (void)t;
        (void)x;
        throw TypeError(id_ + ": semigroup acts on family states only");
    }

    std::string id_;
    double tol_inst_ = 0.0;
    std::shared_ptr<const OrbitBasis> orbit_basis_;
    std::shared_ptr<const SpectralBasis> spectral_basis_;
    nlohmann::json params_json_;
};

}  // namespace ergomix::detail
