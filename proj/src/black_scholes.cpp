#include <algorithm>
#include <cmath>
#include <memory>

#include "eigen_orbit.hpp"
#include "ergomix/errors.hpp"
#include "ergomix/semigroup.hpp"

namespace ergomix {
namespace {

// Flow generated by B = (D_nu)^2 + gamma D_nu - r with D_nu = nu x d/dx.
// On the monomial h_mu(x) = x^mu the generator acts as multiplication by
// g(nu mu) with g(z) = z^2 + gamma z - r, so the symbol g drives everything:
// the action, the spectral solve g(nu mu) = i xi, and the residual check.
struct Symbol {
    double nu = 1.0;
    double gamma = 0.0;
    double r = 0.0;
    double strip_hi = 0.0;  // roots are admissible when 0 < Re z < strip_hi

    cplx g(cplx z) const { return z * z + gamma * z - r; }

    bool in_strip(cplx z) const { return z.real() > 0.0 && z.real() < strip_hi; }

    /// Solves g(z) = i xi picking the admissible root (larger real part on ties).
    std::optional<cplx> strip_root(double xi) const {
        const cplx disc = std::sqrt(cplx{gamma * gamma + 4.0 * r, 4.0 * xi});
        const cplx z_plus = (-gamma + disc) / 2.0;
        const cplx z_minus = (-gamma - disc) / 2.0;
        if (in_strip(z_plus)) return z_plus;
        if (in_strip(z_minus)) return z_minus;
        return std::nullopt;
    }

    /// Largest w with the strip solvable for all |xi| <= w (symmetric in xi).
    double attainable_half_window() const {
        if (!strip_root(0.0)) return 0.0;
        double lo = 0.0, hi = 1.0;
        while (hi < 1e9 && strip_root(hi)) {
            lo = hi;
            hi *= 2.0;
        }
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            (strip_root(mid) ? lo : hi) = mid;
        }
        return lo;
    }
};

class MonomialBasis final : public SpectralBasis {
  public:
    MonomialBasis(Symbol sym, std::shared_ptr<const std::vector<double>> y_grid,
                  std::shared_ptr<const std::vector<double>> x_grid, NormId norm)
        : sym_(sym), y_(std::move(y_grid)), x_(std::move(x_grid)), norm_(norm),
          id_("black_scholes-monomials-v1") {}

    const std::string& id() const override { return id_; }

    /// param is the monomial exponent mu; values are exp(mu * log x).
    StateVector materialize(cplx param) const override {
        std::vector<cplx> vals(y_->size());
        for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = std::exp(param * (*y_)[i]);
        return StateVector::grid_function(x_, std::move(vals), norm_);
    }

    cplx eigenvalue(cplx param) const override { return sym_.g(sym_.nu * param); }

  private:
    Symbol sym_;
    std::shared_ptr<const std::vector<double>> y_;
    std::shared_ptr<const std::vector<double>> x_;
    NormId norm_;
    std::string id_;
};

class MonomialLine final : public detail::SpectralLine {
  public:
    MonomialLine(Symbol sym, std::shared_ptr<const std::vector<double>> y_grid,
                 std::shared_ptr<const std::vector<double>> x_grid, NormId norm)
        : sym_(sym), y_(std::move(y_grid)), x_(std::move(x_grid)), norm_(norm),
          id_("black_scholes-line-v1") {}

    const std::string& id() const override { return id_; }
    std::size_t dim() const override { return y_->size(); }

    std::vector<cplx> coords(double xi) const override {
        const auto z = sym_.strip_root(xi);
        if (!z) {
            const double w = sym_.attainable_half_window();
            throw SpectralRangeError("black_scholes: no admissible root in the strip; "
                                     "attainable parameter window is symmetric",
                                     -w, w);
        }
        const cplx mu = *z / sym_.nu;
        std::vector<cplx> vals(y_->size());
        for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = std::exp(mu * (*y_)[i]);
        return vals;
    }

    StateVector wrap(std::vector<cplx> coords) const override {
        return StateVector::grid_function(x_, std::move(coords), norm_);
    }

    NormId norm_id() const override { return norm_; }

  private:
    Symbol sym_;
    std::shared_ptr<const std::vector<double>> y_;
    std::shared_ptr<const std::vector<double>> x_;
    NormId norm_;
    std::string id_;
};

}  // namespace

InstanceBundle black_scholes_make(const BlackScholesParams& p) {
    const double nu = p.sigma / std::sqrt(2.0);
    if (!(p.sigma > 0.0 && p.r > 0.0)) throw ParameterError("black_scholes: requires sigma, r > 0");
    if (!(p.s > 1.0)) throw ParameterError("black_scholes: requires s > 1");
    if (!(p.tau >= 0.0)) throw ParameterError("black_scholes: requires tau >= 0");
    if (!(p.s * nu > 1.0)) throw ParameterError("black_scholes: requires s*nu > 1");
    if (!(p.y_step > 0.0 && p.y_max > p.y_min))
        throw ParameterError("black_scholes: invalid log-grid spec");

    Symbol sym;
    sym.nu = nu;
    sym.gamma = p.r / nu - nu;
    sym.r = p.r;
    sym.strip_hi = p.s * nu;

    const auto n = static_cast<std::size_t>(std::llround((p.y_max - p.y_min) / p.y_step)) + 1;
    auto y = std::make_shared<std::vector<double>>(n);
    auto x = std::make_shared<std::vector<double>>(n);
    for (std::size_t i = 0; i < n; ++i) {
        (*y)[i] = p.y_min + static_cast<double>(i) * p.y_step;
        (*x)[i] = std::exp((*y)[i]);
    }
    const NormId nid = NormId::yst_sup(p.s, p.tau);

    const double window = sym.attainable_half_window();
    if (!(p.field_half_range < window))
        throw SpectralRangeError("black_scholes: field interval exceeds the attainable window",
                                 -window, window);

    auto basis = std::make_shared<MonomialBasis>(sym, y, x, nid);
    auto line = std::make_shared<MonomialLine>(sym, y, x, nid);

    nlohmann::json params = {{"sigma", p.sigma}, {"r", p.r},
                             {"s", p.s},         {"tau", p.tau},
                             {"y_min", p.y_min}, {"y_max", p.y_max},
                             {"y_step", p.y_step},
                             {"field_half_range", p.field_half_range},
                             {"quad_tol", p.quad_tol},
                             {"nu", nu},
                             {"gamma", sym.gamma},
                             {"attainable_half_window", window}};

    InstanceBundle out;
    out.system = detail::make_eigen_orbit_system("black_scholes", line, -p.field_half_range,
                                                 p.field_half_range, {}, p.quad_tol, basis,
                                                 std::move(params), /*tol_inst=*/0.0);

    const double h = p.y_step;
    auto eval = [sym, basis, nid](double xi) {
        const auto z = sym.strip_root(xi);
        if (!z) {
            const double w = sym.attainable_half_window();
            throw SpectralRangeError("black_scholes: field parameter outside attainable window",
                                     -w, w);
        }
        return StateVector::eigen_combo({{*z / sym.nu, cplx{1.0, 0.0}}}, basis, nid);
    };
    auto residual = [sym, line, h, x, nid](double xi) {
        const std::vector<cplx> v = line->coords(xi);
        // Fourth-order stencils for d/dy and d^2/dy^2 on the uniform log grid.
        std::vector<cplx> r(v.size(), cplx{});
        const cplx lambda{0.0, xi};
        for (std::size_t i = 2; i + 2 < v.size(); ++i) {
            const cplx d1 = (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * h);
            const cplx d2 = (-v[i - 2] + 16.0 * v[i - 1] - 30.0 * v[i] + 16.0 * v[i + 1] -
                             v[i + 2]) /
                            (12.0 * h * h);
            const cplx av = sym.nu * sym.nu * d2 + sym.gamma * sym.nu * d1 - sym.r * v[i];
            r[i] = av - lambda * v[i];
        }
        const StateVector rf = StateVector::grid_function(x, std::move(r), nid);
        const StateVector f = StateVector::grid_function(x, std::vector<cplx>(v), nid);
        return norm(rf) / norm(f);
    };
    out.field = EigenField{-p.field_half_range, p.field_half_range, eval, residual};
    return out;
}

}  // namespace ergomix
