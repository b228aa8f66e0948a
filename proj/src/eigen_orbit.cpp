#include "eigen_orbit.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <shared_mutex>
#include <unordered_map>

#include "ergomix/errors.hpp"
#include "ergomix/quadrature.hpp"
#include "orbit_system.hpp"

namespace ergomix {
namespace {

using detail::SpectralLine;

// Modulation kernel of an atom at field parameter t:
//   point atom (m):       exp(i m t)
//   interval atom [a,b]:  integral of exp(i u t) du over [a, b]
//                         = (b-a) exp(i (a+b) t / 2) sinc((b-a) t / 2).
cplx atom_kernel(const OrbitAtom& a, double t) {
    if (a.t_lo == a.t_hi) return std::exp(cplx{0.0, a.t_lo * t});
    const double half = 0.5 * (a.t_hi - a.t_lo);
    const double z = half * t;
    double sinc;
    if (std::abs(z) < 1e-4) {
        const double z2 = z * z;
        sinc = 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
    } else {
        sinc = std::sin(z) / z;
    }
    return 2.0 * half * sinc * std::exp(cplx{0.0, 0.5 * (a.t_lo + a.t_hi) * t});
}

class EigenOrbitBasis final : public OrbitBasis {
  public:
    EigenOrbitBasis(std::string id, std::shared_ptr<const SpectralLine> line, double t_lo,
                    double t_hi, std::vector<ProfileSpec> bumps, double rtol)
        : id_(std::move(id)), line_(std::move(line)), t_lo_(t_lo), t_hi_(t_hi),
          bumps_(std::move(bumps)), rtol_(rtol) {
        // Keep the coordinate cache around 64 MiB.
        cache_cap_ = std::max<std::size_t>(512, (64u << 20) / (16 * line_->dim() + 64));
    }

    const std::string& id() const override { return id_; }
    NormId norm_id() const override { return line_->norm_id(); }

    ProfileSpec profile(int k) const {
        if (k < 2) throw ConfigError(id_ + ": profile index must be >= 2");
        const int i = k - 2;
        if (i < static_cast<int>(bumps_.size())) return bumps_[static_cast<std::size_t>(i)];
        if (!bumps_.empty()) throw ConfigError(id_ + ": basic index beyond the explicit family");
        return default_profile(k, t_lo_, t_hi_);
    }

    StateVector render(std::span<const OrbitAtom> atoms) const override {
        std::vector<cplx> acc(line_->dim(), cplx{});
        std::vector<OrbitAtom> sorted(atoms.begin(), atoms.end());
        std::sort(sorted.begin(), sorted.end(),
                  [](const OrbitAtom& a, const OrbitAtom& b) { return a.basic < b.basic; });
        std::size_t i = 0;
        while (i < sorted.size()) {
            std::size_t j = i;
            while (j < sorted.size() && sorted[j].basic == sorted[i].basic) ++j;
            render_group(std::span<const OrbitAtom>(sorted.data() + i, j - i), acc);
            i = j;
        }
        return line_->wrap(std::move(acc));
    }

  private:
    // Adaptive composite Gauss quadrature of the group's profile integral,
    // accumulated into acc.  The initial panel count resolves the fastest
    // modulation present; refinement doubles panels until the rendered
    // vector passes a Richardson check in the instance norm.
    void render_group(std::span<const OrbitAtom> group, std::vector<cplx>& acc) const {
        const ProfileSpec prof = profile(group.front().basic);
        double freq = std::numbers::pi * std::abs(prof.modulation) / prof.half_width;
        for (const auto& a : group)
            freq = std::max(freq, std::numbers::pi * std::abs(prof.modulation) / prof.half_width +
                                      std::max(std::abs(a.t_lo), std::abs(a.t_hi)));

        const double width = 2.0 * prof.half_width;
        int panels = std::clamp(static_cast<int>(std::ceil(width * freq / 6.0)) + 2, 2, 1 << 12);

        std::vector<cplx> prev = group_sum(group, prof, panels);
        for (; panels <= (1 << 15); panels *= 2) {
            std::vector<cplx> cur = group_sum(group, prof, panels * 2);
            const double err = wrapped_distance(prev, cur);
            const double scale = wrapped_norm(cur);
            if (!std::isfinite(err) || !std::isfinite(scale))
                throw NumericError(id_ + ": NaN while rendering a profile integral");
            if (err <= rtol_ * (1.0 + scale)) {
                for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += cur[i];
                return;
            }
            prev = std::move(cur);
        }
        throw QuadratureError(id_ + ": profile render did not converge", wrapped_norm(prev),
                              wrapped_norm(prev));
    }

    std::vector<cplx> group_sum(std::span<const OrbitAtom> group, const ProfileSpec& prof,
                                int panels) const {
        const auto& [gx, gw] = gauss_rule(8);
        std::vector<cplx> acc(line_->dim(), cplx{});
        const double lo = prof.center - prof.half_width;
        const double h = 2.0 * prof.half_width / panels;
        for (int p = 0; p < panels; ++p) {
            const double mid = lo + (p + 0.5) * h;
            for (std::size_t q = 0; q < gx.size(); ++q) {
                const double t = mid + 0.5 * h * gx[q];
                const double u = (t - prof.center) / prof.half_width;
                const double env = detail::bump(u);
                if (env == 0.0) continue;
                const cplx phi =
                    env * std::exp(cplx{0.0, std::numbers::pi * prof.modulation * u});
                cplx w{};
                for (const auto& a : group) w += a.amp * atom_kernel(a, t);
                add_coords(t, 0.5 * h * gw[q] * phi * w, acc);
            }
        }
        return acc;
    }

    double wrapped_norm(const std::vector<cplx>& v) const {
        return norm(line_->wrap(std::vector<cplx>(v)));
    }

    double wrapped_distance(const std::vector<cplx>& a, const std::vector<cplx>& b) const {
        std::vector<cplx> d(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
        return norm(line_->wrap(std::move(d)));
    }

    void add_coords(double t, cplx coef, std::vector<cplx>& acc) const {
        std::uint64_t key;
        static_assert(sizeof(key) == sizeof(t));
        std::memcpy(&key, &t, sizeof(key));
        {
            std::shared_lock lock(mu_);
            auto it = cache_.find(key);
            if (it != cache_.end()) {
                const auto& v = *it->second;
                for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += coef * v[i];
                return;
            }
        }
        auto fresh = std::make_unique<std::vector<cplx>>(line_->coords(t));
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += coef * (*fresh)[i];
        std::unique_lock lock(mu_);
        if (cache_.size() < cache_cap_) cache_.emplace(key, std::move(fresh));
    }

    std::string id_;
    std::shared_ptr<const SpectralLine> line_;
    double t_lo_, t_hi_;
    std::vector<ProfileSpec> bumps_;
    double rtol_;
    std::size_t cache_cap_;
    mutable std::shared_mutex mu_;
    mutable std::unordered_map<std::uint64_t, std::unique_ptr<std::vector<cplx>>> cache_;
};

class EigenOrbitSystem final : public detail::OrbitSystemBase {
  public:
    EigenOrbitSystem(std::string id, std::shared_ptr<const OrbitBasis> basis,
                     std::shared_ptr<const SpectralBasis> spectral, nlohmann::json params,
                     double tol_inst) {
        id_ = std::move(id);
        tol_inst_ = tol_inst;
        orbit_basis_ = std::move(basis);
        spectral_basis_ = std::move(spectral);
        params_json_ = std::move(params);
    }
};

/// Adapts an EigenField (StateVector-valued) to the coordinate-line view.
class FieldLine final : public SpectralLine {
  public:
    FieldLine(std::string id, const EigenField& field) : id_(std::move(id)), field_(field) {
        const StateVector probe = materialize(field_.eval(0.5 * (field.t_min + field.t_max)));
        norm_ = probe.norm_id();
        if (probe.kind() == RepKind::GridFunction) {
            grid_ = probe.as_grid().grid;
            dim_ = grid_->size();
        } else {
            dim_ = probe.as_coeffs().coeffs.size();
        }
    }

    const std::string& id() const override { return id_; }
    std::size_t dim() const override { return dim_; }

    std::vector<cplx> coords(double t) const override {
        const StateVector v = materialize(field_.eval(t));
        return v.kind() == RepKind::GridFunction ? v.as_grid().values : v.as_coeffs().coeffs;
    }

    StateVector wrap(std::vector<cplx> coords) const override {
        if (grid_) return StateVector::grid_function(grid_, std::move(coords), norm_);
        return StateVector::coeff_seq(std::move(coords), norm_);
    }

    NormId norm_id() const override { return norm_; }

  private:
    std::string id_;
    EigenField field_;
    std::shared_ptr<const std::vector<double>> grid_;
    std::size_t dim_ = 0;
    NormId norm_;
};

}  // namespace

ProfileSpec default_profile(int basic_index, double t_lo, double t_hi) {
    if (basic_index < 2) throw ConfigError("default_profile: index must be >= 2");
    const auto [a, b] = detail::cantor_decode(basic_index - 2);
    const auto [b1, b2] = detail::cantor_decode(b);
    const double span = t_hi - t_lo;
    const double mid = 0.5 * (t_lo + t_hi);
    const int off = detail::spiral_int(b1);
    const double frac =
        off == 0 ? 0.0
                 : std::copysign(0.35 * std::abs(off) / (std::abs(off) + 1.0), off);
    ProfileSpec p;
    p.center = mid + frac * span;
    const double room = 0.5 * span - std::abs(p.center - mid);
    p.half_width = std::min(0.42 * span * std::pow(2.0, -b2), 0.9 * room);
    p.modulation = detail::spiral_int(a);
    return p;
}

namespace detail {

std::shared_ptr<FHCSystem> make_eigen_orbit_system(
    std::string id, std::shared_ptr<const SpectralLine> line, double t_lo, double t_hi,
    std::vector<ProfileSpec> bumps, double quad_tol,
    std::shared_ptr<const SpectralBasis> spectral, nlohmann::json params_json, double tol_inst) {
    if (!(t_lo < t_hi)) throw ParameterError(id + ": empty field interval");
    for (const auto& bsp : bumps)
        if (!(bsp.half_width > 0.0) || bsp.center - bsp.half_width <= t_lo ||
            bsp.center + bsp.half_width >= t_hi)
            throw ParameterError(id + ": bump support must lie strictly inside the interval");
    auto basis = std::make_shared<EigenOrbitBasis>(id + "-orbit-v1", std::move(line), t_lo, t_hi,
                                                   std::move(bumps), quad_tol / 10.0);
    return std::make_shared<EigenOrbitSystem>(std::move(id), std::move(basis), std::move(spectral),
                                              std::move(params_json), tol_inst);
}

}  // namespace detail

std::shared_ptr<FHCSystem> eigenfield_to_fhc(std::string id, const EigenField& field,
                                             std::vector<ProfileSpec> bumps, double quad_tol,
                                             nlohmann::json params_json) {
    if (!(quad_tol > 0.0)) throw ParameterError("eigenfield_to_fhc: quad_tol must be positive");
    if (field.generator_residual) {
        for (int i = 0; i <= 4; ++i) {
            const double t = field.t_min + (field.t_max - field.t_min) * i / 4.0;
            if (!(field.generator_residual(t) <= 1e-4))
                throw ParameterError(id + ": field residual above tolerance on the interval");
        }
    }
    auto line = std::make_shared<FieldLine>(id + "-field", field);
    return detail::make_eigen_orbit_system(std::move(id), std::move(line), field.t_min,
                                           field.t_max, std::move(bumps), quad_tol, nullptr,
                                           std::move(params_json));
}

}  // namespace ergomix
