#include <algorithm>
#include <cmath>
#include <memory>

#include "eigen_orbit.hpp"
#include "ergomix/errors.hpp"
#include "ergomix/semigroup.hpp"

namespace ergomix {
namespace {

// ---------------------------------------------------------------------------
// Constant-coefficient tridiagonal flow (birth and death).

std::vector<cplx> birth_death_vector(double a, double b, double d, int dim, cplx lambda) {
    std::vector<cplx> f(static_cast<std::size_t>(dim));
    f[0] = 1.0;
    f[1] = (lambda - a) / d;
    for (int n = 1; n + 1 < dim; ++n)
        f[static_cast<std::size_t>(n + 1)] =
            ((lambda - a) * f[static_cast<std::size_t>(n)] -
             b * f[static_cast<std::size_t>(n - 1)]) /
            d;
    return f;
}

// Tridiagonal action on rows 1..dim-1 (row dim would read beyond the truncation).
std::vector<cplx> birth_death_apply(double a, double b, double d, std::span<const cplx> f) {
    std::vector<cplx> out(f.size(), cplx{});
    out[0] = a * f[0] + d * f[1];
    for (std::size_t n = 1; n + 1 < f.size(); ++n)
        out[n] = b * f[n - 1] + a * f[n] + d * f[n + 1];
    return out;
}

double lp_norm(std::span<const cplx> v, double p) {
    double acc = 0.0;
    for (const cplx& c : v) acc += p == 1.0 ? std::abs(c) : std::pow(std::abs(c), p);
    return p == 1.0 ? acc : std::pow(acc, 1.0 / p);
}

class BirthDeathBasis final : public SpectralBasis {
  public:
    BirthDeathBasis(double a, double b, double d, int dim, NormId norm)
        : a_(a), b_(b), d_(d), dim_(dim), norm_(norm), id_("birth_death-eigen-v1") {}

    const std::string& id() const override { return id_; }
    StateVector materialize(cplx param) const override {
        return StateVector::coeff_seq(birth_death_vector(a_, b_, d_, dim_, param), norm_);
    }
    cplx eigenvalue(cplx param) const override { return param; }

  private:
    double a_, b_, d_;
    int dim_;
    NormId norm_;
    std::string id_;
};

class BirthDeathLine final : public detail::SpectralLine {
  public:
    BirthDeathLine(double a, double b, double d, int dim, NormId norm)
        : a_(a), b_(b), d_(d), dim_(dim), norm_(norm), id_("birth_death-line-v1") {}

    const std::string& id() const override { return id_; }
    std::size_t dim() const override { return static_cast<std::size_t>(dim_); }
    std::vector<cplx> coords(double t) const override {
        return birth_death_vector(a_, b_, d_, dim_, cplx{0.0, t});
    }
    StateVector wrap(std::vector<cplx> coords) const override {
        return StateVector::coeff_seq(std::move(coords), norm_);
    }
    NormId norm_id() const override { return norm_; }

  private:
    double a_, b_, d_;
    int dim_;
    NormId norm_;
    std::string id_;
};

// ---------------------------------------------------------------------------
// Variable-coefficient death flow.

std::vector<cplx> death_vector(const SeqSpec& alpha, const SeqSpec& beta, int dim, cplx lambda) {
    std::vector<cplx> f(static_cast<std::size_t>(dim));
    f[0] = 1.0;
    for (int n = 1; n < dim; ++n)
        f[static_cast<std::size_t>(n)] =
            (lambda + alpha.at(n)) * f[static_cast<std::size_t>(n - 1)] / beta.at(n);
    return f;
}

std::vector<cplx> death_apply(const SeqSpec& alpha, const SeqSpec& beta,
                              std::span<const cplx> f) {
    std::vector<cplx> out(f.size(), cplx{});
    for (std::size_t n = 0; n + 1 < f.size(); ++n)
        out[n] = -alpha.at(static_cast<int>(n) + 1) * f[n] +
                 beta.at(static_cast<int>(n) + 1) * f[n + 1];
    return out;
}

class DeathBasis final : public SpectralBasis {
  public:
    DeathBasis(SeqSpec alpha, SeqSpec beta, int dim, NormId norm)
        : alpha_(std::move(alpha)), beta_(std::move(beta)), dim_(dim), norm_(norm),
          id_("death_model-eigen-v1") {}

    const std::string& id() const override { return id_; }
    StateVector materialize(cplx param) const override {
        return StateVector::coeff_seq(death_vector(alpha_, beta_, dim_, param), norm_);
    }
    cplx eigenvalue(cplx param) const override { return param; }

  private:
    SeqSpec alpha_, beta_;
    int dim_;
    NormId norm_;
    std::string id_;
};

class DeathLine final : public detail::SpectralLine {
  public:
    DeathLine(SeqSpec alpha, SeqSpec beta, int dim, NormId norm)
        : alpha_(std::move(alpha)), beta_(std::move(beta)), dim_(dim), norm_(norm),
          id_("death_model-line-v1") {}

    const std::string& id() const override { return id_; }
    std::size_t dim() const override { return static_cast<std::size_t>(dim_); }
    std::vector<cplx> coords(double t) const override {
        return death_vector(alpha_, beta_, dim_, cplx{0.0, t});
    }
    StateVector wrap(std::vector<cplx> coords) const override {
        return StateVector::coeff_seq(std::move(coords), norm_);
    }
    NormId norm_id() const override { return norm_; }

  private:
    SeqSpec alpha_, beta_;
    int dim_;
    NormId norm_;
    std::string id_;
};

// Relative tail mass of the truncated eigenvector over a field-interval grid.
void check_eigen_tails(const std::function<std::vector<cplx>(double)>& coords, double half_range,
                       double p, const std::string& id) {
    for (int i = 0; i <= 16; ++i) {
        const double t = -half_range + 2.0 * half_range * i / 16.0;
        const std::vector<cplx> f = coords(t);
        const std::size_t tail_start = f.size() - std::min<std::size_t>(10, f.size() / 4);
        const double tail = lp_norm(std::span(f).subspan(tail_start), p);
        const double total = lp_norm(f, p);
        if (!(tail <= 1e-12 * total))
            throw TruncationError(id +
                                  ": eigenvector tail above threshold at the configured "
                                  "truncation; enlarge trunc_dim or shrink the field interval");
    }
}

}  // namespace

double SeqSpec::at(int n) const {
    if (n < 1) throw ConfigError("sequence index must be >= 1");
    const auto i = static_cast<std::size_t>(n - 1);
    return i < prefix.size() ? prefix[i] : tail;
}

double SeqSpec::sup() const {
    double m = tail;
    for (double v : prefix) m = std::max(m, v);
    return m;
}

InstanceBundle birth_death_make(const BirthDeathParams& p) {
    if (!(0.0 < std::abs(p.b) && std::abs(p.b) < std::abs(p.d)))
        throw ParameterError("birth_death: requires 0<|b|<|d|");
    if (!(std::abs(p.a) < std::abs(p.b + p.d)))
        throw ParameterError("birth_death: requires |a|<|b+d|");
    if (p.trunc_dim < 16) throw ParameterError("birth_death: trunc_dim too small");
    if (!(p.p_exp >= 1.0)) throw ParameterError("birth_death: requires 1 <= p");

    const NormId norm = NormId::lp(p.p_exp);
    auto line = std::make_shared<BirthDeathLine>(p.a, p.b, p.d, p.trunc_dim, norm);
    check_eigen_tails([&](double t) { return line->coords(t); }, p.field_half_range, p.p_exp,
                      "birth_death");
    auto basis = std::make_shared<BirthDeathBasis>(p.a, p.b, p.d, p.trunc_dim, norm);

    nlohmann::json params = {{"a", p.a},
                             {"b", p.b},
                             {"d", p.d},
                             {"trunc_dim", p.trunc_dim},
                             {"p_exp", p.p_exp},
                             {"field_half_range", p.field_half_range},
                             {"quad_tol", p.quad_tol}};
    InstanceBundle out;
    out.system = detail::make_eigen_orbit_system("birth_death", line, -p.field_half_range,
                                                 p.field_half_range, {}, p.quad_tol, basis,
                                                 std::move(params));

    const double pe = p.p_exp;
    const double a = p.a, b = p.b, d = p.d;
    const int dim = p.trunc_dim;
    auto eval = [basis, norm](double t) {
        return StateVector::eigen_combo({{cplx{0.0, t}, cplx{1.0, 0.0}}}, basis, norm);
    };
    auto residual = [a, b, d, dim, pe](double t) {
        const cplx lambda{0.0, t};
        const std::vector<cplx> f = birth_death_vector(a, b, d, dim, lambda);
        std::vector<cplx> r = birth_death_apply(a, b, d, f);
        for (std::size_t n = 0; n + 1 < f.size(); ++n) r[n] -= lambda * f[n];
        r.back() = cplx{};  // last row reads past the truncation; measured on the interior
        return lp_norm(r, pe) / lp_norm(f, pe);
    };
    out.field = EigenField{-p.field_half_range, p.field_half_range, eval, residual};
    return out;
}

InstanceBundle death_model_make(const DeathModelParams& p) {
    for (double v : p.alpha.prefix)
        if (!(v > 0.0)) throw ParameterError("death_model: alpha must be positive");
    for (double v : p.beta.prefix)
        if (!(v > 0.0)) throw ParameterError("death_model: beta must be positive");
    if (!(p.alpha.tail > 0.0 && p.beta.tail > 0.0))
        throw ParameterError("death_model: sequences must be positive");
    if (!(p.alpha.sup() < p.beta.liminf()))
        throw ParameterError("death_model: requires sup alpha_n < liminf beta_n");
    if (p.trunc_dim < 16) throw ParameterError("death_model: trunc_dim too small");

    const NormId norm = NormId::lp(1.0);
    auto line = std::make_shared<DeathLine>(p.alpha, p.beta, p.trunc_dim, norm);
    check_eigen_tails([&](double t) { return line->coords(t); }, p.field_half_range, 1.0,
                      "death_model");
    auto basis = std::make_shared<DeathBasis>(p.alpha, p.beta, p.trunc_dim, norm);

    nlohmann::json params = {{"alpha_prefix", p.alpha.prefix}, {"alpha_tail", p.alpha.tail},
                             {"beta_prefix", p.beta.prefix},   {"beta_tail", p.beta.tail},
                             {"trunc_dim", p.trunc_dim},       {"field_half_range", p.field_half_range},
                             {"quad_tol", p.quad_tol}};
    InstanceBundle out;
    out.system = detail::make_eigen_orbit_system("death_model", line, -p.field_half_range,
                                                 p.field_half_range, {}, p.quad_tol, basis,
                                                 std::move(params));

    const SeqSpec alpha = p.alpha, beta = p.beta;
    const int dim = p.trunc_dim;
    auto eval = [basis, norm](double t) {
        return StateVector::eigen_combo({{cplx{0.0, t}, cplx{1.0, 0.0}}}, basis, norm);
    };
    auto residual = [alpha, beta, dim](double t) {
        const cplx lambda{0.0, t};
        const std::vector<cplx> f = death_vector(alpha, beta, dim, lambda);
        std::vector<cplx> r = death_apply(alpha, beta, f);
        for (std::size_t n = 0; n + 1 < f.size(); ++n) r[n] -= lambda * f[n];
        r.back() = cplx{};
        return lp_norm(r, 1.0) / lp_norm(f, 1.0);
    };
    out.field = EigenField{-p.field_half_range, p.field_half_range, eval, residual};
    return out;
}

}  // namespace ergomix
