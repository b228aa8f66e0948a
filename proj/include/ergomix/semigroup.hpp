#pragma once

// Concrete semigroup instances.
//
// Each instance exposes the forward action T_t, a dense enumerated family
// x_n with x_1 = 0, and backward maps S_t defined on the family's span.
// States in that span are OrbitCombo atoms, so T/S act by exact interval
// arithmetic on the atoms; rendering (through the instance's OrbitBasis)
// carries all quadrature.  Instances with a spectral dictionary additionally
// act diagonally on EigenCombo states.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ergomix/state.hpp"

#include <json.hpp>

namespace ergomix {

class FHCSystem {
  public:
    virtual ~FHCSystem() = default;

    virtual const std::string& id() const = 0;
    virtual NormId norm_id() const = 0;
    /// Residual budget for the criterion audit; 0 for representation-exact
    /// instances.
    virtual double tol_inst() const = 0;

    /// n-th element of the dense family; basic(1) is the zero vector.
    virtual StateVector basic(int n) const = 0;

    virtual StateVector apply_T(double t, const StateVector& x) const = 0;
    virtual StateVector apply_S(double t, const StateVector& x) const = 0;

    /// Integral of the orbit map of basic(n) over [t_lo, t_hi], where
    /// negative times integrate the backward orbit: the integrand is T_t x_n
    /// for t >= 0 and S_{-t} x_n for t < 0.
    virtual StateVector orbit_segment(int n, double t_lo, double t_hi) const = 0;

    virtual const std::shared_ptr<const OrbitBasis>& orbit_basis() const = 0;
    virtual std::shared_ptr<const SpectralBasis> spectral_basis() const { return nullptr; }

    virtual nlohmann::json params_json() const = 0;

    /// Optional a-priori bound on ||integral of T over [t, t+1] of basic n||.
    virtual std::optional<double> orbit_decay_hint(int n, double t) const {
        (void)n;
        (void)t;
        return std::nullopt;
    }
};

/// Eigenvector field t -> f(t) with generator residual under a finite
/// (stencil or truncated-matrix) action.
struct EigenField {
    double t_min = 0.0;
    double t_max = 0.0;
    std::function<StateVector(double)> eval;
    std::function<double(double)> generator_residual;  // relative
};

struct InstanceBundle {
    std::shared_ptr<FHCSystem> system;
    std::optional<EigenField> field;
};

// ---------------------------------------------------------------------------
// Instances

struct TranslationParams {
    double weight_rate = 1.0;  // norm weight exp(-rate * x)
    double grid_step = 0.025;
    double domain_cap = 64.0;
};

/// Forward translation semigroup on [0, domain_cap] with weighted-L1 norm;
/// the dense family is an enumerated set of triangular hats.
InstanceBundle translation_make(const TranslationParams& params);

struct RudnickiParams {
    double grid_step = 0.01;
    double domain_half_width = 80.0;
    double field_half_range = 2.0;  // declared eigenfield interval [-r, r]
};

/// Translation group on [-W, W] with norm sup |g(x)|/(1+|x|), plus the
/// trigonometric eigenvector field with generator d/dx.
InstanceBundle rudnicki_translation_make(const RudnickiParams& params);

struct BirthDeathParams {
    double a = 0.0;
    double b = 0.25;
    double d = 1.0;
    int trunc_dim = 200;
    double p_exp = 2.0;
    double field_half_range = 0.5;  // declared eigenfield interval [-r, r]
    double quad_tol = 1e-6;
};

/// Constant-coefficient tridiagonal flow on l^p; requires 0 < |b| < |d| and
/// |a| < |b+d|.  The dense family is built from bump-averaged eigen
/// integrals over the imaginary-axis eigenvector field.
InstanceBundle birth_death_make(const BirthDeathParams& params);

/// Bounded positive sequence: explicit prefix followed by a constant tail.
struct SeqSpec {
    std::vector<double> prefix;
    double tail = 1.0;

    double at(int n) const;  // n >= 1
    double sup() const;
    double liminf() const { return tail; }
};

struct DeathModelParams {
    SeqSpec alpha{{}, 0.5};
    SeqSpec beta{{}, 1.0};
    int trunc_dim = 200;
    double field_half_range = 0.5;
    double quad_tol = 1e-6;
};

/// Upper-bidiagonal death flow on l^1; requires sup alpha_n < liminf beta_n.
InstanceBundle death_model_make(const DeathModelParams& params);

struct BlackScholesParams {
    double sigma = 1.4142135623730951;  // sqrt(2)
    double r = 0.5;
    double s = 2.0;
    double tau = 0.0;
    double y_min = -10.0;  // log-abscissa grid
    double y_max = 10.0;
    double y_step = 0.01;
    double field_half_range = 2.0;
    double quad_tol = 1e-6;
};

/// Flow generated by (D_nu)^2 + gamma D_nu - r on monomial states, with the
/// Y^{s,tau} sup norm on a log-spaced grid; requires s > 1, tau >= 0 and
/// s * nu > 1 with nu = sigma / sqrt(2).
InstanceBundle black_scholes_make(const BlackScholesParams& params);

// ---------------------------------------------------------------------------
// Eigenfield-to-system construction

struct ProfileSpec {
    double center = 0.0;
    double half_width = 0.0;
    int modulation = 0;
};

/// System whose dense family consists of bump-averaged field integrals
/// x_k = integral of phi_k(t) f(t) dt over supp phi_k; T_s modulates the
/// profile by exp(i s t) and S_s by exp(-i s t).  An empty bump list selects
/// the versioned default family on the field's interval.  Bump supports must
/// lie strictly inside the interval.
std::shared_ptr<FHCSystem> eigenfield_to_fhc(std::string id, const EigenField& field,
                                             std::vector<ProfileSpec> bumps, double quad_tol,
                                             nlohmann::json params_json = nlohmann::json::object());

/// Versioned default profile family for an interval (v1 enumeration).
ProfileSpec default_profile(int basic_index, double t_lo, double t_hi);

}  // namespace ergomix
