#include <algorithm>
#include <cmath>
#include <memory>

#include "ergomix/semigroup.hpp"
#include "orbit_system.hpp"

namespace ergomix {
namespace {

struct Hat {
    double center = 0.0;
    double half_width = 0.0;
};

double hat_value(const Hat& h, double u) {
    const double r = 1.0 - std::abs(u - h.center) / h.half_width;
    return r > 0.0 ? r : 0.0;
}

// Cumulative integral of the unit triangular hat up to u.
double hat_cumulative(const Hat& h, double u) {
    const double r = (u - (h.center - h.half_width)) / h.half_width;
    if (r <= 0.0) return 0.0;
    if (r >= 2.0) return h.half_width;
    if (r <= 1.0) return h.half_width * 0.5 * r * r;
    return h.half_width * (1.0 - 0.5 * (2.0 - r) * (2.0 - r));
}

// Versioned hat enumeration (v1).  Index k >= 2 decodes through the Cantor
// diagonal to (position, width-level); widths halve per level and are
// clamped to the grid resolution.
Hat hat_for(int k, bool two_sided, double grid_step) {
    const auto [a, b] = detail::cantor_decode(k - 2);
    Hat h;
    if (two_sided)
        h.center = 0.75 * detail::spiral_int(a);
    else
        h.center = 1.25 + 0.75 * a;
    h.half_width = std::max(0.75 * std::pow(2.0, -b), 4.0 * grid_step);
    return h;
}

class HatOrbitBasis final : public OrbitBasis {
  public:
    HatOrbitBasis(std::string id, double x_lo, double x_hi, double step, NormId norm,
                  bool absorb_left)
        : id_(std::move(id)), x_lo_(x_lo), x_hi_(x_hi), step_(step), norm_(norm),
          absorb_left_(absorb_left) {
        const auto n = static_cast<std::size_t>(std::llround((x_hi - x_lo) / step)) + 1;
        auto g = std::make_shared<std::vector<double>>(n);
        for (std::size_t i = 0; i < n; ++i) (*g)[i] = x_lo + static_cast<double>(i) * step;
        grid_ = std::move(g);
    }

    const std::string& id() const override { return id_; }
    NormId norm_id() const override { return norm_; }

    Hat hat(int k) const { return hat_for(k, !absorb_left_, step_); }

    void check_atoms(std::span<const OrbitAtom> atoms) const {
        for (const auto& a : atoms) {
            const Hat h = hat(a.basic);
            const double right = h.center + h.half_width - a.t_lo;
            if (right > x_hi_ + 1e-9)
                throw DomainOverflowError(id_ + ": orbit shifted past the domain cap");
            if (!absorb_left_) {
                const double left = h.center - h.half_width - a.t_hi;
                if (left < x_lo_ - 1e-9)
                    throw DomainOverflowError(id_ + ": orbit shifted past the domain edge");
            }
        }
    }

    StateVector render(std::span<const OrbitAtom> atoms) const override {
        check_atoms(atoms);
        std::vector<cplx> vals(grid_->size(), cplx{});
        for (const auto& a : atoms) {
            const Hat h = hat(a.basic);
            const double lo_x = h.center - h.half_width - a.t_hi;
            const double hi_x = h.center + h.half_width - a.t_lo;
            const auto i0 = static_cast<std::ptrdiff_t>(std::ceil((lo_x - x_lo_) / step_));
            const auto i1 = static_cast<std::ptrdiff_t>(std::floor((hi_x - x_lo_) / step_));
            const auto lo = std::max<std::ptrdiff_t>(i0, 0);
            const auto hi = std::min<std::ptrdiff_t>(i1, static_cast<std::ptrdiff_t>(vals.size()) - 1);
            const bool point = a.t_lo == a.t_hi;
            for (std::ptrdiff_t i = lo; i <= hi; ++i) {
                const double x = (*grid_)[static_cast<std::size_t>(i)];
                const double v = point
                                     ? hat_value(h, x + a.t_lo)
                                     : hat_cumulative(h, x + a.t_hi) - hat_cumulative(h, x + a.t_lo);
                vals[static_cast<std::size_t>(i)] += a.amp * v;
            }
        }
        return StateVector::grid_function(grid_, std::move(vals), norm_);
    }

    const std::shared_ptr<const std::vector<double>>& grid() const { return grid_; }
    double x_lo() const { return x_lo_; }
    double x_hi() const { return x_hi_; }
    double step() const { return step_; }
    bool absorb_left() const { return absorb_left_; }

  private:
    std::string id_;
    double x_lo_, x_hi_, step_;
    NormId norm_;
    bool absorb_left_;
    std::shared_ptr<const std::vector<double>> grid_;
};

class TranslationSystem final : public detail::OrbitSystemBase {
  public:
    TranslationSystem(std::string id, std::shared_ptr<const HatOrbitBasis> hats, double weight_rate,
                      nlohmann::json params) {
        id_ = std::move(id);
        tol_inst_ = 0.0;
        orbit_basis_ = hats;
        hats_ = std::move(hats);
        weight_rate_ = weight_rate;
        params_json_ = std::move(params);
    }

    std::optional<double> orbit_decay_hint(int n, double t) const override {
        if (n <= 1) return 0.0;
        const Hat h = hats_->hat(n);
        if (t >= h.center + h.half_width) return 0.0;
        if (!hats_->absorb_left()) return std::nullopt;
        return h.half_width * std::exp(-weight_rate_ * std::max(0.0, h.center - h.half_width - t));
    }

  protected:
    void check_atoms(std::span<const OrbitAtom> atoms) const override {
        hats_->check_atoms(atoms);
    }

    // Concrete grid functions translate by index shifts when t is a grid
    // multiple and by linear resampling otherwise, reading 0 outside the
    // window.  On the one-sided instance mass may leave through the
    // absorbing left edge but not past the cap; the two-sided instance
    // treats grid functions as window restrictions (family states carry the
    // strict domain checks).
    StateVector shifted_concrete(double t, const StateVector& x) const override {
        if (x.kind() != RepKind::GridFunction)
            throw TypeError(id_ + ": unsupported representation for the semigroup action");
        const auto& g = x.as_grid();
        if (g.grid != hats_->grid() && *g.grid != *hats_->grid())
            throw TypeError(id_ + ": grid function lives on a foreign grid");
        const auto& xs = *g.grid;
        const double step = hats_->step();

        auto lost_mass = [&](double lo, double hi) {
            for (std::size_t i = 0; i < xs.size(); ++i)
                if (xs[i] >= lo && xs[i] <= hi && std::abs(g.values[i]) > 0.0) return true;
            return false;
        };
        if (hats_->absorb_left() && t < 0.0 && lost_mass(hats_->x_hi() + t, hats_->x_hi()))
            throw DomainOverflowError(id_ + ": orbit shifted past the domain cap");

        std::vector<cplx> out(xs.size(), cplx{});
        const double ratio = t / step;
        const auto k = std::llround(ratio);
        if (std::abs(ratio - static_cast<double>(k)) < 1e-9) {
            for (std::size_t i = 0; i < xs.size(); ++i) {
                const auto j = static_cast<std::ptrdiff_t>(i) + k;
                if (j >= 0 && j < static_cast<std::ptrdiff_t>(xs.size()))
                    out[i] = g.values[static_cast<std::size_t>(j)];
            }
        } else {
            for (std::size_t i = 0; i < xs.size(); ++i) out[i] = grid_value(g, xs[i] + t);
        }
        return StateVector::grid_function(g.grid, std::move(out), x.norm_id());
    }

  private:
    std::shared_ptr<const HatOrbitBasis> hats_;
    double weight_rate_ = 1.0;
};

}  // namespace

InstanceBundle translation_make(const TranslationParams& p) {
    if (!(p.weight_rate > 0.0))
        throw ParameterError("translation: weight rate must satisfy w > 0");
    if (!(p.grid_step > 0.0 && p.domain_cap > 16.0))
        throw ParameterError("translation: invalid grid spec");
    nlohmann::json params = {{"weight_rate", p.weight_rate},
                             {"grid_step", p.grid_step},
                             {"domain_cap", p.domain_cap}};
    auto hats = std::make_shared<HatOrbitBasis>(
        "translation-hats-v1", 0.0, p.domain_cap, p.grid_step,
        NormId::weighted_lp(1.0, p.weight_rate), /*absorb_left=*/true);
    InstanceBundle b;
    b.system = std::make_shared<TranslationSystem>("translation", std::move(hats), p.weight_rate,
                                                   std::move(params));
    return b;
}

InstanceBundle rudnicki_translation_make(const RudnickiParams& p) {
    if (!(p.domain_half_width >= 20.0))
        throw ParameterError("rudnicki_translation: domain_half_width >= 20 required");
    if (!(p.grid_step > 0.0)) throw ParameterError("rudnicki_translation: invalid grid step");
    nlohmann::json params = {{"grid_step", p.grid_step},
                             {"domain_half_width", p.domain_half_width},
                             {"field_half_range", p.field_half_range}};
    auto hats = std::make_shared<HatOrbitBasis>(
        "rudnicki-hats-v1", -p.domain_half_width, p.domain_half_width, p.grid_step,
        NormId::weighted_sup(), /*absorb_left=*/false);
    auto grid = hats->grid();
    auto sys = std::make_shared<TranslationSystem>("rudnicki_translation", hats, 0.0,
                                                   std::move(params));

    // Trigonometric eigenvector field f(t)(x) = exp(i t x); the generator
    // d/dx acts through a fourth-order central stencil.
    const double h = p.grid_step;
    const NormId nid = NormId::weighted_sup();
    auto field_eval = [grid, nid](double t) {
        std::vector<cplx> vals(grid->size());
        for (std::size_t i = 0; i < vals.size(); ++i)
            vals[i] = std::exp(cplx{0.0, t * (*grid)[i]});
        return StateVector::grid_function(grid, std::move(vals), nid);
    };
    auto residual = [grid, nid, h, field_eval](double t) {
        const StateVector f = field_eval(t);
        const auto& v = f.as_grid().values;
        std::vector<cplx> r(v.size(), cplx{});
        for (std::size_t i = 2; i + 2 < v.size(); ++i) {
            const cplx d1 =
                (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * h);
            r[i] = d1 - cplx{0.0, t} * v[i];
        }
        const StateVector rf = StateVector::grid_function(grid, std::move(r), nid);
        return norm(rf) / norm(f);
    };
    InstanceBundle b;
    b.system = std::move(sys);
    b.field = EigenField{-p.field_half_range, p.field_half_range, field_eval, residual};
    return b;
}

}  // namespace ergomix
