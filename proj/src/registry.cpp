#include "ergomix/instances.hpp"

#include <algorithm>

#include "ergomix/errors.hpp"

namespace ergomix {
namespace {

void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> known,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::none_of(known.begin(), known.end(),
                         [&](const char* k) { return it.key() == k; }))
            throw ConfigError(where + ": unknown key '" + it.key() + "'");
    }
}

double num(const nlohmann::json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number()) throw ConfigError(std::string("parameter '") + key + "' must be a number");
    return obj.at(key).get<double>();
}

int integer(const nlohmann::json& obj, const char* key, int fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number_integer())
        throw ConfigError(std::string("parameter '") + key + "' must be an integer");
    return obj.at(key).get<int>();
}

SeqSpec seq_spec(const nlohmann::json& obj, const char* key, SeqSpec fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& j = obj.at(key);
    reject_unknown_keys(j, {"prefix", "tail"}, std::string("sequence '") + key + "'");
    SeqSpec s;
    s.prefix = j.value("prefix", std::vector<double>{});
    s.tail = j.at("tail").get<double>();
    return s;
}

InstanceBundle make_translation(const nlohmann::json& j) {
    reject_unknown_keys(j, {"weight_rate", "grid_step", "domain_cap"}, "translation params");
    TranslationParams p;
    p.weight_rate = num(j, "weight_rate", p.weight_rate);
    p.grid_step = num(j, "grid_step", p.grid_step);
    p.domain_cap = num(j, "domain_cap", p.domain_cap);
    return translation_make(p);
}

InstanceBundle make_rudnicki(const nlohmann::json& j) {
    reject_unknown_keys(j, {"grid_step", "domain_half_width", "field_half_range"},
                        "rudnicki_translation params");
    RudnickiParams p;
    p.grid_step = num(j, "grid_step", p.grid_step);
    p.domain_half_width = num(j, "domain_half_width", p.domain_half_width);
    p.field_half_range = num(j, "field_half_range", p.field_half_range);
    return rudnicki_translation_make(p);
}

InstanceBundle make_birth_death(const nlohmann::json& j) {
    reject_unknown_keys(j, {"a", "b", "d", "trunc_dim", "p_exp", "field_half_range", "quad_tol"},
                        "birth_death params");
    BirthDeathParams p;
    p.a = num(j, "a", p.a);
    p.b = num(j, "b", p.b);
    p.d = num(j, "d", p.d);
    p.trunc_dim = integer(j, "trunc_dim", p.trunc_dim);
    p.p_exp = num(j, "p_exp", p.p_exp);
    p.field_half_range = num(j, "field_half_range", p.field_half_range);
    p.quad_tol = num(j, "quad_tol", p.quad_tol);
    return birth_death_make(p);
}

InstanceBundle make_death_model(const nlohmann::json& j) {
    reject_unknown_keys(j, {"alpha", "beta", "trunc_dim", "field_half_range", "quad_tol"},
                        "death_model params");
    DeathModelParams p;
    p.alpha = seq_spec(j, "alpha", p.alpha);
    p.beta = seq_spec(j, "beta", p.beta);
    p.trunc_dim = integer(j, "trunc_dim", p.trunc_dim);
    p.field_half_range = num(j, "field_half_range", p.field_half_range);
    p.quad_tol = num(j, "quad_tol", p.quad_tol);
    return death_model_make(p);
}

InstanceBundle make_black_scholes(const nlohmann::json& j) {
    reject_unknown_keys(j,
                        {"sigma", "r", "s", "tau", "y_min", "y_max", "y_step", "field_half_range",
                         "quad_tol"},
                        "black_scholes params");
    BlackScholesParams p;
    p.sigma = num(j, "sigma", p.sigma);
    p.r = num(j, "r", p.r);
    p.s = num(j, "s", p.s);
    p.tau = num(j, "tau", p.tau);
    p.y_min = num(j, "y_min", p.y_min);
    p.y_max = num(j, "y_max", p.y_max);
    p.y_step = num(j, "y_step", p.y_step);
    p.field_half_range = num(j, "field_half_range", p.field_half_range);
    p.quad_tol = num(j, "quad_tol", p.quad_tol);
    return black_scholes_make(p);
}

}  // namespace

const std::vector<InstanceInfo>& instance_registry() {
    static const std::vector<InstanceInfo> registry = {
        {"translation",
         "forward translation semigroup on a weighted-L1 half line",
         "w > 0",
         {{"weight_rate", "number, > 0 (default 1.0)"},
          {"grid_step", "number (default 0.025)"},
          {"domain_cap", "number (default 64)"}},
         make_translation},
        {"rudnicki_translation",
         "translation group with norm sup |g(x)|/(1+|x|) and eigenfield exp(itx)",
         "domain_half_width >= 20",
         {{"grid_step", "number (default 0.01)"},
          {"domain_half_width", "number, >= 20 (default 80)"},
          {"field_half_range", "number (default 2)"}},
         make_rudnicki},
        {"birth_death",
         "constant-coefficient tridiagonal flow on l^p",
         "0<|b|<|d| and |a|<|b+d|",
         {{"a", "number (default 0)"},
          {"b", "number (default 0.25)"},
          {"d", "number (default 1)"},
          {"trunc_dim", "integer (default 200)"},
          {"p_exp", "number, >= 1 (default 2)"},
          {"field_half_range", "number (default 0.5)"},
          {"quad_tol", "number (default 1e-6)"}},
         make_birth_death},
        {"death_model",
         "variable-coefficient death flow on l^1",
         "sup alpha_n < liminf beta_n",
         {{"alpha", "{prefix: [numbers], tail: number} (default tail 0.5)"},
          {"beta", "{prefix: [numbers], tail: number} (default tail 1.0)"},
          {"trunc_dim", "integer (default 200)"},
          {"field_half_range", "number (default 0.5)"},
          {"quad_tol", "number (default 1e-6)"}},
         make_death_model},
        {"black_scholes",
         "option-pricing flow on monomial states with the Y^{s,tau} sup norm",
         "s > 1, tau >= 0, s*nu > 1 (nu = sigma/sqrt(2))",
         {{"sigma", "number, > 0 (default sqrt(2))"},
          {"r", "number, > 0 (default 0.5)"},
          {"s", "number, > 1 (default 2)"},
          {"tau", "number, >= 0 (default 0)"},
          {"y_min", "number (default -10)"},
          {"y_max", "number (default 10)"},
          {"y_step", "number (default 0.01)"},
          {"field_half_range", "number (default 2)"},
          {"quad_tol", "number (default 1e-6)"}},
         make_black_scholes},
    };
    return registry;
}

InstanceBundle make_instance(const std::string& name, const nlohmann::json& params) {
    for (const auto& info : instance_registry())
        if (info.name == name) return info.make(params.is_null() ? nlohmann::json::object() : params);
    throw ConfigError("unknown instance '" + name + "'");
}

}  // namespace ergomix
