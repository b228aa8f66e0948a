#pragma once

// Finite representations of Banach-space elements and their norms.
//
// A StateVector is one of:
//   * GridFunction — complex samples on a strictly increasing abscissa grid,
//     linearly interpolated between nodes;
//   * CoeffSeq     — a finite complex coefficient sequence;
//   * EigenCombo   — a formal combination of dictionary eigenvectors,
//     materialized on demand through a SpectralBasis;
//   * OrbitCombo   — a formal combination of orbit segments of a dense
//     family, rendered on demand through an OrbitBasis.  An atom with
//     t_lo == t_hi is a point evaluation of the orbit map at that time; an
//     atom with t_lo < t_hi is the time integral of the orbit map over
//     [t_lo, t_hi].
//
// The combination forms exist so that semigroup actions are exact index
// arithmetic on the atoms: only rendering (norm evaluation, observables)
// touches floating-point quadrature.

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ergomix/errors.hpp"

#include <json.hpp>

namespace ergomix {

using cplx = std::complex<double>;

enum class NormFamily { WeightedSup, Lp, WeightedLp, YstSup };
enum class WeightKind { None, ExpDecay, InvOnePlusAbs };

/// Identifies which norm a state is measured in, with its parameters.
struct NormId {
    NormFamily family = NormFamily::Lp;
    double p = 1.0;                         // Lp / WeightedLp exponent
    WeightKind weight = WeightKind::None;   // weight for WeightedSup / WeightedLp
    double rate = 0.0;                      // ExpDecay: w(x) = exp(-rate*x)
    double s = 0.0;                         // YstSup parameters
    double tau = 0.0;

    static NormId lp(double p);
    static NormId weighted_lp(double p, double decay_rate);
    static NormId weighted_sup();  // w(x) = 1/(1+|x|)
    static NormId yst_sup(double s, double tau);

    friend bool operator==(const NormId&, const NormId&) = default;
};

/// Weight value at abscissa x for sup/integral norms.
double norm_weight(const NormId& n, double x);

struct GridFunction {
    std::shared_ptr<const std::vector<double>> grid;  // strictly increasing, finite
    std::vector<cplx> values;                         // one per abscissa
};

struct CoeffSeq {
    std::vector<cplx> coeffs;
};

struct EigenTerm {
    cplx param;
    cplx coeff;
};

class StateVector;

/// Dictionary of concrete eigenvectors indexed by a complex parameter.
class SpectralBasis {
  public:
    virtual ~SpectralBasis() = default;
    virtual const std::string& id() const = 0;
    /// Concrete representation of the dictionary vector for this parameter.
    virtual StateVector materialize(cplx param) const = 0;
    /// apply_T(t) multiplies a term's coefficient by exp(t * eigenvalue(param)).
    virtual cplx eigenvalue(cplx param) const = 0;
};

struct EigenCombo {
    std::vector<EigenTerm> terms;  // distinct params
    std::shared_ptr<const SpectralBasis> basis;
};

struct OrbitAtom {
    std::int32_t basic = 0;  // index into the owning family, 1-based
    cplx amp;
    double t_lo = 0.0;
    double t_hi = 0.0;  // == t_lo for a point atom
};

/// Renders orbit-segment combinations of a dense family onto a concrete rep.
class OrbitBasis {
  public:
    virtual ~OrbitBasis() = default;
    virtual const std::string& id() const = 0;
    virtual NormId norm_id() const = 0;
    virtual StateVector render(std::span<const OrbitAtom> atoms) const = 0;
};

struct OrbitCombo {
    std::vector<OrbitAtom> atoms;  // distinct (basic, t_lo, t_hi)
    std::shared_ptr<const OrbitBasis> basis;
};

enum class RepKind { GridFunction, CoeffSeq, EigenCombo, OrbitCombo };

class StateVector {
  public:
    StateVector() = default;

    static StateVector grid_function(std::shared_ptr<const std::vector<double>> grid,
                                     std::vector<cplx> values, NormId norm);
    static StateVector coeff_seq(std::vector<cplx> coeffs, NormId norm);
    static StateVector eigen_combo(std::vector<EigenTerm> terms,
                                   std::shared_ptr<const SpectralBasis> basis, NormId norm);
    static StateVector orbit_combo(std::vector<OrbitAtom> atoms,
                                   std::shared_ptr<const OrbitBasis> basis);

    RepKind kind() const;
    const NormId& norm_id() const { return norm_; }

    const GridFunction& as_grid() const;
    const CoeffSeq& as_coeffs() const;
    const EigenCombo& as_eigen() const;
    const OrbitCombo& as_orbit() const;

    /// True when the representation is structurally the zero vector
    /// (all values/coefficients/amplitudes exactly zero, or empty).
    bool is_structural_zero() const;

  private:
    std::variant<GridFunction, CoeffSeq, EigenCombo, OrbitCombo> rep_;
    NormId norm_;
};

/// Norm of a state under its attached norm_id.  Combination representations
/// are materialized/rendered through their basis first.
double norm(const StateVector& x);

/// Pointwise/termwise linear combination.  All inputs must share the
/// representation kind, norm_id, and (for combos) the same basis; equal
/// eigen-parameters / identical atoms merge, exact-zero results are dropped.
StateVector linear_combine(std::span<const cplx> coeffs, std::span<const StateVector> xs);

/// Convenience: a*x + b*y.
StateVector axpy(cplx a, const StateVector& x, cplx b, const StateVector& y);

/// Distance ||x - y||.
double distance(const StateVector& x, const StateVector& y);

/// Concrete representation of any state (identity on GridFunction/CoeffSeq).
StateVector materialize(const StateVector& x);

/// Linear interpolation of a grid function at x (0 outside the grid).
cplx grid_value(const GridFunction& g, double x);

nlohmann::json norm_to_json(const NormId& n);
NormId norm_from_json(const nlohmann::json& j);

/// Serializes per the versioned schema {kind, norm_id, data}.
nlohmann::json to_json(const StateVector& x);

/// Lookup used when deserializing combination states.
struct BasisRegistry {
    std::vector<std::shared_ptr<const SpectralBasis>> spectral;
    std::vector<std::shared_ptr<const OrbitBasis>> orbit;
};

StateVector state_from_json(const nlohmann::json& j, const BasisRegistry& reg = {});

}  // namespace ergomix
