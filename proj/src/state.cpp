#include "ergomix/state.hpp"

#include <algorithm>
#include <cmath>

namespace ergomix {

NormId NormId::lp(double p) {
    NormId n;
    n.family = NormFamily::Lp;
    n.p = p;
    return n;
}

NormId NormId::weighted_lp(double p, double decay_rate) {
    NormId n;
    n.family = NormFamily::WeightedLp;
    n.p = p;
    n.weight = WeightKind::ExpDecay;
    n.rate = decay_rate;
    return n;
}

NormId NormId::weighted_sup() {
    NormId n;
    n.family = NormFamily::WeightedSup;
    n.weight = WeightKind::InvOnePlusAbs;
    return n;
}

NormId NormId::yst_sup(double s, double tau) {
    NormId n;
    n.family = NormFamily::YstSup;
    n.s = s;
    n.tau = tau;
    return n;
}

double norm_weight(const NormId& n, double x) {
    switch (n.family) {
        case NormFamily::YstSup:
            // 1 / ((1+x^s)(1+x^-tau)); for tau == 0 the second factor is 2.
            return 1.0 / ((1.0 + std::pow(x, n.s)) * (1.0 + std::pow(x, -n.tau)));
        case NormFamily::WeightedSup:
        case NormFamily::WeightedLp:
            switch (n.weight) {
                case WeightKind::ExpDecay:
                    return std::exp(-n.rate * x);
                case WeightKind::InvOnePlusAbs:
                    return 1.0 / (1.0 + std::abs(x));
                case WeightKind::None:
                    return 1.0;
            }
            return 1.0;
        case NormFamily::Lp:
            return 1.0;
    }
    return 1.0;
}

namespace {

void validate_grid(const GridFunction& g) {
    if (!g.grid) throw ConfigError("grid function without abscissas");
    if (g.grid->size() != g.values.size())
        throw ConfigError("grid/value length mismatch");
    const auto& xs = *g.grid;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i])) throw NumericError("non-finite grid abscissa");
        if (i > 0 && !(xs[i] > xs[i - 1]))
            throw ConfigError("grid abscissas must be strictly increasing");
    }
    for (const cplx& v : g.values)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw NumericError("non-finite grid value");
}

void validate_eigen(const EigenCombo& e) {
    for (std::size_t i = 0; i < e.terms.size(); ++i)
        for (std::size_t j = i + 1; j < e.terms.size(); ++j)
            if (e.terms[i].param == e.terms[j].param)
                throw ConfigError("eigen combo with repeated eigen-parameter");
}

}  // namespace

StateVector StateVector::grid_function(std::shared_ptr<const std::vector<double>> grid,
                                       std::vector<cplx> values, NormId norm) {
    StateVector x;
    GridFunction g{std::move(grid), std::move(values)};
    validate_grid(g);
    x.rep_ = std::move(g);
    x.norm_ = norm;
    return x;
}

StateVector StateVector::coeff_seq(std::vector<cplx> coeffs, NormId norm) {
    StateVector x;
    x.rep_ = CoeffSeq{std::move(coeffs)};
    x.norm_ = norm;
    return x;
}

StateVector StateVector::eigen_combo(std::vector<EigenTerm> terms,
                                     std::shared_ptr<const SpectralBasis> basis, NormId norm) {
    StateVector x;
    EigenCombo e{std::move(terms), std::move(basis)};
    validate_eigen(e);
    x.rep_ = std::move(e);
    x.norm_ = norm;
    return x;
}

StateVector StateVector::orbit_combo(std::vector<OrbitAtom> atoms,
                                     std::shared_ptr<const OrbitBasis> basis) {
    StateVector x;
    if (!basis) throw ConfigError("orbit combo without basis");
    x.norm_ = basis->norm_id();
    x.rep_ = OrbitCombo{std::move(atoms), std::move(basis)};
    return x;
}

RepKind StateVector::kind() const {
    return static_cast<RepKind>(rep_.index() == 0   ? RepKind::GridFunction
                                : rep_.index() == 1 ? RepKind::CoeffSeq
                                : rep_.index() == 2 ? RepKind::EigenCombo
                                                    : RepKind::OrbitCombo);
}

const GridFunction& StateVector::as_grid() const {
    if (kind() != RepKind::GridFunction) throw TypeError("state is not a grid function");
    return std::get<GridFunction>(rep_);
}
const CoeffSeq& StateVector::as_coeffs() const {
    if (kind() != RepKind::CoeffSeq) throw TypeError("state is not a coefficient sequence");
    return std::get<CoeffSeq>(rep_);
}
const EigenCombo& StateVector::as_eigen() const {
    if (kind() != RepKind::EigenCombo) throw TypeError("state is not an eigen combo");
    return std::get<EigenCombo>(rep_);
}
const OrbitCombo& StateVector::as_orbit() const {
    if (kind() != RepKind::OrbitCombo) throw TypeError("state is not an orbit combo");
    return std::get<OrbitCombo>(rep_);
}

bool StateVector::is_structural_zero() const {
    switch (kind()) {
        case RepKind::GridFunction:
            return std::all_of(as_grid().values.begin(), as_grid().values.end(),
                               [](cplx v) { return v == cplx{}; });
        case RepKind::CoeffSeq:
            return std::all_of(as_coeffs().coeffs.begin(), as_coeffs().coeffs.end(),
                               [](cplx v) { return v == cplx{}; });
        case RepKind::EigenCombo:
            return std::all_of(as_eigen().terms.begin(), as_eigen().terms.end(),
                               [](const EigenTerm& t) { return t.coeff == cplx{}; });
        case RepKind::OrbitCombo:
            return std::all_of(as_orbit().atoms.begin(), as_orbit().atoms.end(),
                               [](const OrbitAtom& a) { return a.amp == cplx{}; });
    }
    return false;
}

namespace {

double lp_of(std::span<const cplx> v, double p) {
    if (p < 1.0) throw ConfigError("lp norm requires p >= 1");
    double acc = 0.0;
    if (p == 1.0) {
        for (const cplx& c : v) acc += std::abs(c);
        return acc;
    }
    if (p == 2.0) {
        for (const cplx& c : v) acc += std::norm(c);
        return std::sqrt(acc);
    }
    for (const cplx& c : v) acc += std::pow(std::abs(c), p);
    return std::pow(acc, 1.0 / p);
}

// Sup-type norms sample nodes plus cell midpoints (values linearly
// interpolated, weights evaluated exactly at the midpoint).
double sup_norm_grid(const GridFunction& g, const NormId& n) {
    const auto& xs = *g.grid;
    double best = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        best = std::max(best, std::abs(g.values[i]) * norm_weight(n, xs[i]));
        if (i + 1 < xs.size()) {
            const double xm = 0.5 * (xs[i] + xs[i + 1]);
            const cplx vm = 0.5 * (g.values[i] + g.values[i + 1]);
            best = std::max(best, std::abs(vm) * norm_weight(n, xm));
        }
    }
    return best;
}

// Weighted L^p via per-cell Simpson on |interpolant|^p * w.
double weighted_lp_grid(const GridFunction& g, const NormId& n) {
    const auto& xs = *g.grid;
    double acc = 0.0;
    auto f = [&](double x, cplx v) {
        const double a = std::abs(v);
        return (n.p == 1.0 ? a : std::pow(a, n.p)) * norm_weight(n, x);
    };
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double h = xs[i + 1] - xs[i];
        const double xm = 0.5 * (xs[i] + xs[i + 1]);
        const cplx vm = 0.5 * (g.values[i] + g.values[i + 1]);
        acc += h / 6.0 * (f(xs[i], g.values[i]) + 4.0 * f(xm, vm) + f(xs[i + 1], g.values[i + 1]));
    }
    return n.p == 1.0 ? acc : std::pow(acc, 1.0 / n.p);
}

double norm_concrete(const StateVector& x) {
    switch (x.kind()) {
        case RepKind::CoeffSeq:
            if (x.norm_id().family != NormFamily::Lp)
                throw ConfigError("coefficient sequences carry an lp norm only");
            return lp_of(x.as_coeffs().coeffs, x.norm_id().p);
        case RepKind::GridFunction: {
            const auto& g = x.as_grid();
            switch (x.norm_id().family) {
                case NormFamily::WeightedSup:
                case NormFamily::YstSup:
                    return sup_norm_grid(g, x.norm_id());
                case NormFamily::WeightedLp:
                    return weighted_lp_grid(g, x.norm_id());
                case NormFamily::Lp:
                    throw ConfigError("lp norm is incompatible with grid functions");
            }
            break;
        }
        default:
            break;
    }
    throw ConfigError("norm: unsupported representation");
}

}  // namespace

StateVector materialize(const StateVector& x) {
    switch (x.kind()) {
        case RepKind::GridFunction:
        case RepKind::CoeffSeq:
            return x;
        case RepKind::OrbitCombo:
            return x.as_orbit().basis->render(x.as_orbit().atoms);
        case RepKind::EigenCombo: {
            const auto& e = x.as_eigen();
            if (!e.basis) throw ConfigError("eigen combo without basis");
            if (e.terms.empty()) {
                // Zero vector in the basis's concrete space.
                StateVector probe = e.basis->materialize(cplx{});
                return axpy(cplx{}, probe, cplx{}, probe);
            }
            std::vector<StateVector> parts;
            std::vector<cplx> cs;
            parts.reserve(e.terms.size());
            for (const auto& t : e.terms) {
                parts.push_back(e.basis->materialize(t.param));
                cs.push_back(t.coeff);
            }
            return linear_combine(cs, parts);
        }
    }
    throw TypeError("materialize: unknown representation");
}

double norm(const StateVector& x) {
    switch (x.kind()) {
        case RepKind::GridFunction:
        case RepKind::CoeffSeq:
            return norm_concrete(x);
        case RepKind::OrbitCombo: {
            const auto& o = x.as_orbit();
            if (!o.basis) throw ConfigError("orbit combo without basis");
            if (x.is_structural_zero()) return 0.0;
            return norm_concrete(o.basis->render(o.atoms));
        }
        case RepKind::EigenCombo: {
            if (x.is_structural_zero()) return 0.0;
            return norm_concrete(materialize(x));
        }
    }
    throw TypeError("norm: unknown representation");
}

namespace {

StateVector combine_grid(std::span<const cplx> coeffs, std::span<const StateVector> xs) {
    const auto& g0 = xs[0].as_grid();
    for (const auto& x : xs) {
        const auto& g = x.as_grid();
        if (g.grid != g0.grid && *g.grid != *g0.grid)
            throw TypeError("linear_combine: grid functions on different grids");
    }
    std::vector<cplx> out(g0.values.size(), cplx{});
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const auto& v = xs[k].as_grid().values;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += coeffs[k] * v[i];
    }
    return StateVector::grid_function(g0.grid, std::move(out), xs[0].norm_id());
}

StateVector combine_coeffs(std::span<const cplx> coeffs, std::span<const StateVector> xs) {
    const std::size_t n = xs[0].as_coeffs().coeffs.size();
    for (const auto& x : xs)
        if (x.as_coeffs().coeffs.size() != n)
            throw TypeError("linear_combine: coefficient sequences of different length");
    std::vector<cplx> out(n, cplx{});
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const auto& v = xs[k].as_coeffs().coeffs;
        for (std::size_t i = 0; i < n; ++i) out[i] += coeffs[k] * v[i];
    }
    return StateVector::coeff_seq(std::move(out), xs[0].norm_id());
}

StateVector combine_eigen(std::span<const cplx> coeffs, std::span<const StateVector> xs) {
    const auto& basis = xs[0].as_eigen().basis;
    for (const auto& x : xs)
        if (x.as_eigen().basis != basis)
            throw TypeError("linear_combine: eigen combos over different bases");
    std::vector<EigenTerm> merged;
    for (std::size_t k = 0; k < xs.size(); ++k)
        for (const auto& t : xs[k].as_eigen().terms)
            merged.push_back({t.param, coeffs[k] * t.coeff});
    std::sort(merged.begin(), merged.end(), [](const EigenTerm& a, const EigenTerm& b) {
        if (a.param.real() != b.param.real()) return a.param.real() < b.param.real();
        return a.param.imag() < b.param.imag();
    });
    std::vector<EigenTerm> out;
    for (const auto& t : merged) {
        if (!out.empty() && out.back().param == t.param)
            out.back().coeff += t.coeff;
        else
            out.push_back(t);
    }
    std::erase_if(out, [](const EigenTerm& t) { return t.coeff == cplx{}; });
    return StateVector::eigen_combo(std::move(out), basis, xs[0].norm_id());
}

StateVector combine_orbit(std::span<const cplx> coeffs, std::span<const StateVector> xs) {
    const auto& basis = xs[0].as_orbit().basis;
    for (const auto& x : xs)
        if (x.as_orbit().basis != basis)
            throw TypeError("linear_combine: orbit combos over different bases");
    std::vector<OrbitAtom> merged;
    for (std::size_t k = 0; k < xs.size(); ++k)
        for (const auto& a : xs[k].as_orbit().atoms)
            merged.push_back({a.basic, coeffs[k] * a.amp, a.t_lo, a.t_hi});
    std::sort(merged.begin(), merged.end(), [](const OrbitAtom& a, const OrbitAtom& b) {
        if (a.basic != b.basic) return a.basic < b.basic;
        if (a.t_lo != b.t_lo) return a.t_lo < b.t_lo;
        return a.t_hi < b.t_hi;
    });
    std::vector<OrbitAtom> out;
    for (const auto& a : merged) {
        if (!out.empty() && out.back().basic == a.basic && out.back().t_lo == a.t_lo &&
            out.back().t_hi == a.t_hi)
            out.back().amp += a.amp;
        else
            out.push_back(a);
    }
    std::erase_if(out, [](const OrbitAtom& a) { return a.amp == cplx{}; });
    return StateVector::orbit_combo(std::move(out), basis);
}

}  // namespace

StateVector linear_combine(std::span<const cplx> coeffs, std::span<const StateVector> xs) {
    if (coeffs.size() != xs.size())
        throw TypeError("linear_combine: coefficient/vector count mismatch");
    if (xs.empty()) throw TypeError("linear_combine: empty input");
    const RepKind k = xs[0].kind();
    for (const auto& x : xs) {
        if (x.kind() != k) throw TypeError("linear_combine: mixed representation kinds");
        if (!(x.norm_id() == xs[0].norm_id()))
            throw TypeError("linear_combine: mixed norm ids");
    }
    switch (k) {
        case RepKind::GridFunction:
            return combine_grid(coeffs, xs);
        case RepKind::CoeffSeq:
            return combine_coeffs(coeffs, xs);
        case RepKind::EigenCombo:
            return combine_eigen(coeffs, xs);
        case RepKind::OrbitCombo:
            return combine_orbit(coeffs, xs);
    }
    throw TypeError("linear_combine: unknown representation");
}

StateVector axpy(cplx a, const StateVector& x, cplx b, const StateVector& y) {
    const cplx cs[2] = {a, b};
    const StateVector vs[2] = {x, y};
    return linear_combine(cs, vs);
}

double distance(const StateVector& x, const StateVector& y) {
    return norm(axpy(1.0, x, -1.0, y));
}

cplx grid_value(const GridFunction& g, double x) {
    const auto& xs = *g.grid;
    if (xs.empty() || x < xs.front() || x > xs.back()) return cplx{};
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    if (it == xs.begin()) return g.values.front();
    if (it == xs.end()) return g.values.back();
    const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return (1.0 - t) * g.values[i] + t * g.values[i + 1];
}

namespace {

const char* family_name(NormFamily f) {
    switch (f) {
        case NormFamily::WeightedSup: return "weighted_sup";
        case NormFamily::Lp: return "lp";
        case NormFamily::WeightedLp: return "weighted_lp";
        case NormFamily::YstSup: return "yst_sup";
    }
    return "?";
}

const char* weight_name(WeightKind w) {
    switch (w) {
        case WeightKind::None: return "none";
        case WeightKind::ExpDecay: return "exp_decay";
        case WeightKind::InvOnePlusAbs: return "inv_one_plus_abs";
    }
    return "?";
}

}  // namespace

nlohmann::json norm_to_json(const NormId& n) {
    return {{"family", family_name(n.family)}, {"p", n.p},     {"weight", weight_name(n.weight)},
            {"rate", n.rate},                  {"s", n.s},     {"tau", n.tau}};
}

NormId norm_from_json(const nlohmann::json& j) {
    NormId n;
    const std::string f = j.at("family").get<std::string>();
    if (f == "weighted_sup")
        n.family = NormFamily::WeightedSup;
    else if (f == "lp")
        n.family = NormFamily::Lp;
    else if (f == "weighted_lp")
        n.family = NormFamily::WeightedLp;
    else if (f == "yst_sup")
        n.family = NormFamily::YstSup;
    else
        throw ConfigError("unknown norm family: " + f);
    n.p = j.value("p", 1.0);
    const std::string w = j.value("weight", "none");
    if (w == "none")
        n.weight = WeightKind::None;
    else if (w == "exp_decay")
        n.weight = WeightKind::ExpDecay;
    else if (w == "inv_one_plus_abs")
        n.weight = WeightKind::InvOnePlusAbs;
    else
        throw ConfigError("unknown weight kind: " + w);
    n.rate = j.value("rate", 0.0);
    n.s = j.value("s", 0.0);
    n.tau = j.value("tau", 0.0);
    return n;
}

nlohmann::json to_json(const StateVector& x) {
    nlohmann::json j;
    j["norm_id"] = norm_to_json(x.norm_id());
    switch (x.kind()) {
        case RepKind::GridFunction: {
            const auto& g = x.as_grid();
            j["kind"] = "grid_function";
            nlohmann::json vals = nlohmann::json::array();
            for (const cplx& v : g.values) vals.push_back({v.real(), v.imag()});
            j["data"] = {{"grid", *g.grid}, {"values", std::move(vals)}};
            break;
        }
        case RepKind::CoeffSeq: {
            j["kind"] = "coeff_seq";
            nlohmann::json vals = nlohmann::json::array();
            for (const cplx& v : x.as_coeffs().coeffs) vals.push_back({v.real(), v.imag()});
            j["data"] = {{"coeffs", std::move(vals)}};
            break;
        }
        case RepKind::EigenCombo: {
            const auto& e = x.as_eigen();
            j["kind"] = "eigen_combo";
            nlohmann::json terms = nlohmann::json::array();
            for (const auto& t : e.terms)
                terms.push_back({t.param.real(), t.param.imag(), t.coeff.real(), t.coeff.imag()});
            j["data"] = {{"basis", e.basis ? e.basis->id() : ""}, {"terms", std::move(terms)}};
            break;
        }
        case RepKind::OrbitCombo: {
            const auto& o = x.as_orbit();
            j["kind"] = "orbit_combo";
            nlohmann::json atoms = nlohmann::json::array();
            for (const auto& a : o.atoms)
                atoms.push_back({a.basic, a.t_lo, a.t_hi, a.amp.real(), a.amp.imag()});
            j["data"] = {{"basis", o.basis ? o.basis->id() : ""}, {"atoms", std::move(atoms)}};
            break;
        }
    }
    return j;
}

StateVector state_from_json(const nlohmann::json& j, const BasisRegistry& reg) {
    const std::string kind = j.at("kind").get<std::string>();
    const NormId n = norm_from_json(j.at("norm_id"));
    const auto& data = j.at("data");
    auto read_cplx = [](const nlohmann::json& v) { return cplx{v.at(0).get<double>(), v.at(1).get<double>()}; };
    if (kind == "grid_function") {
        auto grid = std::make_shared<std::vector<double>>(data.at("grid").get<std::vector<double>>());
        std::vector<cplx> vals;
        for (const auto& v : data.at("values")) vals.push_back(read_cplx(v));
        return StateVector::grid_function(std::move(grid), std::move(vals), n);
    }
    if (kind == "coeff_seq") {
        std::vector<cplx> vals;
        for (const auto& v : data.at("coeffs")) vals.push_back(read_cplx(v));
        return StateVector::coeff_seq(std::move(vals), n);
    }
    if (kind == "eigen_combo") {
        const std::string bid = data.at("basis").get<std::string>();
        for (const auto& b : reg.spectral)
            if (b->id() == bid) {
                std::vector<EigenTerm> terms;
                for (const auto& t : data.at("terms"))
                    terms.push_back({cplx{t.at(0).get<double>(), t.at(1).get<double>()},
                                     cplx{t.at(2).get<double>(), t.at(3).get<double>()}});
                return StateVector::eigen_combo(std::move(terms), b, n);
            }
        throw ConfigError("unknown spectral basis: " + bid);
    }
    if (kind == "orbit_combo") {
        const std::string bid = data.at("basis").get<std::string>();
        for (const auto& b : reg.orbit)
            if (b->id() == bid) {
                std::vector<OrbitAtom> atoms;
                for (const auto& a : data.at("atoms"))
                    atoms.push_back({a.at(0).get<std::int32_t>(),
                                     cplx{a.at(3).get<double>(), a.at(4).get<double>()},
                                     a.at(1).get<double>(), a.at(2).get<double>()});
                return StateVector::orbit_combo(std::move(atoms), b);
            }
        throw ConfigError("unknown orbit basis: " + bid);
    }
    throw ConfigError("unknown state kind: " + kind);
}

}  // namespace ergomix
