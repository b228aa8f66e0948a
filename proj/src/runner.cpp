#include "ergomix/runner.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "ergomix/audit.hpp"
#include "ergomix/ergostats.hpp"
#include "ergomix/errors.hpp"
#include "ergomix/instances.hpp"
#include "ergomix/rng.hpp"

namespace ergomix {
namespace {

namespace fs = std::filesystem;

void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> known,
                    const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
    }
}

nlohmann::json resolve_measure(const nlohmann::json& m) {
    reject_unknown(m, {"p", "thresholds"}, "/measure");
    nlohmann::json out;
    nlohmann::json p = m.value("p", nlohmann::json{{"kind", "geometric"}});
    reject_unknown(p, {"kind", "ratio", "support_cap", "weights", "height"}, "/measure/p");
    const std::string kind = p.value("kind", "geometric");
    if (kind == "geometric") {
        out["p"] = {{"kind", "geometric"},
                    {"ratio", p.value("ratio", 0.5)},
                    {"support_cap", p.value("support_cap", 64)}};
    } else if (kind == "explicit") {
        out["p"] = {{"kind", "explicit"}, {"weights", p.at("weights")}};
    } else if (kind == "degenerate") {
        out["p"] = {{"kind", "degenerate"}, {"height", p.at("height")}};
    } else {
        throw ConfigError("/measure/p/kind: unknown kind '" + kind + "'");
    }
    nlohmann::json th = m.value("thresholds", nlohmann::json{{"kind", "quadratic"}, {"scale", 2}});
    if (th.is_string()) {
        if (th.get<std::string>() != "calibrate")
            throw ConfigError("/measure/thresholds: expected schedule object or \"calibrate\"");
        out["thresholds"] = "calibrate";
    } else {
        reject_unknown(th, {"kind", "scale"}, "/measure/thresholds");
        if (th.value("kind", "quadratic") != "quadratic")
            throw ConfigError("/measure/thresholds/kind: only 'quadratic' schedules are supported");
        out["thresholds"] = {{"kind", "quadratic"}, {"scale", th.value("scale", 2)}};
    }
    return out;
}

MeasureParams build_measure(const nlohmann::json& resolved) {
    const auto& p = resolved.at("p");
    std::int64_t scale = 2;
    if (resolved.at("thresholds").is_object())
        scale = resolved.at("thresholds").at("scale").get<std::int64_t>();
    const std::string kind = p.at("kind").get<std::string>();
    if (kind == "geometric")
        return geometric_measure_params(p.at("ratio").get<double>(), p.at("support_cap").get<int>(),
                                        scale);
    if (kind == "explicit")
        return explicit_measure_params(p.at("weights").get<std::vector<double>>(), scale);
    return degenerate_measure_params(p.at("height").get<std::uint32_t>(), scale);
}

constexpr const char* kExperimentTypes[] = {"criterion_audit", "invariance", "mixing",
                                            "support",         "density",    "ou_check"};

nlohmann::json resolve_experiment(const nlohmann::json& e, std::size_t index) {
    const std::string where = "/experiments/" + std::to_string(index);
    if (!e.is_object() || !e.contains("type"))
        throw ConfigError(where + ": expected an object with a 'type'");
    const std::string type = e.at("type").get<std::string>();
    bool known = false;
    for (const char* t : kExperimentTypes) known = known || type == t;
    if (!known) throw ConfigError(where + "/type: unknown experiment '" + type + "'");

    nlohmann::json out = {{"type", type}};
    if (type == "criterion_audit") {
        reject_unknown(e, {"type", "t_grid", "r_grid", "n_basics"}, where);
        out["t_grid"] = e.value("t_grid", std::vector<double>{0.3, 0.7, 1.1, 2.5});
        out["r_grid"] = e.value("r_grid", std::vector<double>{0.3, 0.7, 1.1, 2.5});
        out["n_basics"] = e.value("n_basics", 8);
    } else if (type == "invariance") {
        reject_unknown(e, {"type", "t_list", "n_observables", "n_samples", "alpha"}, where);
        out["t_list"] = e.value("t_list", std::vector<double>{0.7, 1.3, 2.5});
        out["n_observables"] = e.value("n_observables", 5);
        out["n_samples"] = e.value("n_samples", 5000);
        out["alpha"] = e.value("alpha", 0.01);
    } else if (type == "mixing") {
        reject_unknown(e, {"type", "t_grid", "observable_index", "n_samples", "n_bootstrap"},
                       where);
        out["t_grid"] = e.value(
            "t_grid", std::vector<double>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15});
        out["observable_index"] = e.value("observable_index", 0);
        out["n_samples"] = e.value("n_samples", 5000);
        out["n_bootstrap"] = e.value("n_bootstrap", 400);
    } else if (type == "support") {
        reject_unknown(e, {"type", "k_targets", "radius", "n_samples", "mode", "eps"}, where);
        out["k_targets"] = e.value("k_targets", std::vector<int>{1, 2, 3, 5, 8});
        out["radius"] = e.value("radius", 0.0);
        out["n_samples"] = e.value("n_samples", 400);
        const std::string mode = e.value("mode", "h_conditioned");
        if (mode != "h_conditioned" && mode != "unconditional")
            throw ConfigError(where + "/mode: expected 'h_conditioned' or 'unconditional'");
        out["mode"] = mode;
        out["eps"] = e.value("eps", 0.125);
    } else if (type == "density") {
        reject_unknown(e, {"type", "horizon", "dt", "radius"}, where);
        out["horizon"] = e.value("horizon", 500.0);
        out["dt"] = e.value("dt", 0.05);
        out["radius"] = e.value("radius", 0.0);
    } else if (type == "ou_check") {
        reject_unknown(e, {"type", "h_grid", "n_paths"}, where);
        out["h_grid"] = e.value("h_grid", std::vector<double>{0.0, 0.5, 1.0, 2.0});
        out["n_paths"] = e.value("n_paths", 10000);
    }
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

std::string csv_of_curve(const nlohmann::json& curve) {
    std::string csv = "t,estimate,lo,hi\n";
    for (const auto& row : curve)
        csv += nlohmann::json(row.at("t")).dump() + "," + nlohmann::json(row.at("estimate")).dump() +
               "," + nlohmann::json(row.at("lo")).dump() + "," + nlohmann::json(row.at("hi")).dump() +
               "\n";
    return csv;
}

}  // namespace

std::string params_hash(const nlohmann::json& j) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(j.dump())));
    return std::string(buf);
}

nlohmann::json resolve_config(const nlohmann::json& config, const RunOverrides& overrides) {
    reject_unknown(config,
                   {"instance", "measure", "truncation", "experiments", "seed", "workers",
                    "output_dir"},
                   "/");
    nlohmann::json out;

    const auto& inst = config.contains("instance") ? config.at("instance")
                                                   : nlohmann::json{{"name", "translation"}};
    reject_unknown(inst, {"name", "params"}, "/instance");
    if (!inst.contains("name")) throw ConfigError("/instance: missing 'name'");
    out["instance"] = {{"name", inst.at("name").get<std::string>()},
                       {"params", inst.value("params", nlohmann::json::object())}};

    out["measure"] = resolve_measure(config.value("measure", nlohmann::json::object()));

    nlohmann::json tr = config.value("truncation", nlohmann::json::object());
    reject_unknown(tr, {"J", "target_tol", "tail_schedule_base"}, "/truncation");
    out["truncation"] = {{"J", tr.value("J", 40)},
                         {"target_tol", tr.value("target_tol", 1e-3)},
                         {"tail_schedule_base", tr.value("tail_schedule_base", 2.0)}};

    if (!config.contains("experiments") || !config.at("experiments").is_array() ||
        config.at("experiments").empty())
        throw ConfigError("/experiments: expected a non-empty array");
    nlohmann::json exps = nlohmann::json::array();
    for (std::size_t i = 0; i < config.at("experiments").size(); ++i)
        exps.push_back(resolve_experiment(config.at("experiments")[i], i));
    out["experiments"] = std::move(exps);

    out["seed"] = overrides.seed ? *overrides.seed : config.value("seed", 1ull);
    out["workers"] = overrides.workers ? *overrides.workers : config.value("workers", 1);
    if (out["workers"].get<int>() < 1) throw ConfigError("/workers: must be a positive integer");

    std::string outdir = config.value("output_dir", "out");
    if (const char* env = std::getenv("ERGOMIX_OUTPUT_DIR")) outdir = env;
    if (overrides.output_dir) outdir = *overrides.output_dir;
    out["output_dir"] = outdir;
    return out;
}

RunOutcome run_config(const nlohmann::json& raw, const RunOverrides& overrides) {
    RunOutcome outcome;
    nlohmann::json resolved;
    try {
        // Re-running an emitted report replays its embedded config.
        const nlohmann::json& base =
            raw.is_object() && raw.contains("config") && raw.contains("verdicts") ? raw.at("config")
                                                                                  : raw;
        resolved = resolve_config(base, overrides);
    } catch (const std::exception& e) {
        outcome.exit_code = 1;
        outcome.error = e.what();
        return outcome;
    }

    try {
        const std::string instance_name = resolved.at("instance").at("name").get<std::string>();
        InstanceBundle bundle =
            make_instance(instance_name, resolved.at("instance").at("params"));
        MeasureParams params = build_measure(resolved.at("measure"));

        RunContext ctx;
        ctx.seed = resolved.at("seed").get<std::uint64_t>();
        ctx.workers = resolved.at("workers").get<int>();

        const fs::path outdir(resolved.at("output_dir").get<std::string>());
        fs::create_directories(outdir);

        // Truncation plan, cached by (instance id, resolved hash).
        const bool calibrate_schedule = resolved.at("measure").at("thresholds").is_string();
        const int forced_J = resolved.at("truncation").at("J").get<int>();
        const double target_tol = resolved.at("truncation").at("target_tol").get<double>();
        nlohmann::json plan_key = {{"instance", bundle.system->params_json()},
                                   {"measure", resolved.at("measure")},
                                   {"truncation", resolved.at("truncation")},
                                   {"seed", ctx.seed}};
        const std::string key_hash = params_hash(plan_key);
        const fs::path cache_file =
            outdir / "plan-cache" / (instance_name + "-" + key_hash + ".json");

        TruncationPlan plan;
        bool have_plan = false;
        if (!overrides.no_cache && fs::exists(cache_file)) {
            try {
                std::ifstream in(cache_file);
                nlohmann::json pj;
                in >> pj;
                plan = TruncationPlan::from_json(pj.at("plan"));
                // calibration may have rescaled the threshold schedule
                params = with_threshold_scale(params, pj.at("threshold_scale").get<std::int64_t>());
                have_plan = true;
            } catch (const std::exception&) {
                have_plan = false;  // unreadable or stale cache entry; recalibrate
            }
        }
        if (!have_plan) {
            Rng cal_rng(ctx.seed, fnv1a("calibrate"), 0);
            auto [cal_params, cal_plan] = calibrate_truncation(
                *bundle.system, params, target_tol, cal_rng,
                calibrate_schedule ? std::nullopt : std::optional<int>(forced_J),
                resolved.at("truncation").at("tail_schedule_base").get<double>());
            params = std::move(cal_params);
            plan = std::move(cal_plan);
            if (!overrides.no_cache) {
                fs::create_directories(cache_file.parent_path());
                const nlohmann::json pj = {{"plan", plan.to_json()},
                                           {"threshold_scale", params.threshold_scale}};
                write_text(cache_file, pj.dump(2));
            }
        }

        // The experiment identity excludes the execution-environment knobs,
        // so reports are identical for any worker count or output location.
        nlohmann::json identity = resolved;
        identity.erase("workers");
        identity.erase("output_dir");
        const std::string hash = params_hash(identity);
        bool any_fail = false;
        for (const auto& e : resolved.at("experiments")) {
            const std::string type = e.at("type").get<std::string>();
            const auto t0 = std::chrono::steady_clock::now();
            ExperimentReport rep;
            std::vector<std::vector<double>> ou_paths;
            if (type == "criterion_audit") {
                rep = criterion_audit(*bundle.system, e.at("t_grid").get<std::vector<double>>(),
                                      e.at("r_grid").get<std::vector<double>>(),
                                      e.at("n_basics").get<int>());
            } else if (type == "invariance") {
                InvarianceConfig cfg;
                cfg.t_list = e.at("t_list").get<std::vector<double>>();
                cfg.n_observables = e.at("n_observables").get<int>();
                cfg.n_samples = e.at("n_samples").get<std::size_t>();
                cfg.alpha = e.at("alpha").get<double>();
                rep = estimate_invariance(*bundle.system, params, plan, cfg, ctx);
            } else if (type == "mixing") {
                MixingConfig cfg;
                cfg.t_grid = e.at("t_grid").get<std::vector<double>>();
                cfg.observable_index = e.at("observable_index").get<int>();
                cfg.n_samples = e.at("n_samples").get<std::size_t>();
                cfg.n_bootstrap = e.at("n_bootstrap").get<int>();
                rep = estimate_mixing(*bundle.system, params, plan, cfg, ctx);
            } else if (type == "support") {
                SupportConfig cfg;
                cfg.k_targets = e.at("k_targets").get<std::vector<int>>();
                cfg.radius = e.at("radius").get<double>();
                cfg.n_samples = e.at("n_samples").get<std::size_t>();
                cfg.mode = e.at("mode").get<std::string>() == "unconditional"
                               ? SupportMode::Unconditional
                               : SupportMode::HConditioned;
                cfg.eps = e.at("eps").get<double>();
                rep = estimate_support(*bundle.system, params, plan, cfg, ctx);
            } else if (type == "density") {
                DensityConfig cfg;
                cfg.horizon = e.at("horizon").get<double>();
                cfg.dt = e.at("dt").get<double>();
                cfg.radius = e.at("radius").get<double>();
                rep = orbit_lower_density(*bundle.system, params, plan, cfg, ctx);
            } else if (type == "ou_check") {
                OuConfig cfg;
                cfg.h_grid = e.at("h_grid").get<std::vector<double>>();
                cfg.n_paths = e.at("n_paths").get<std::size_t>();
                rep = ou_check(cfg, ctx, &ou_paths);
            }
            rep.instance = rep.instance.empty() ? instance_name : rep.instance;
            rep.seed = ctx.seed;
            rep.workers = ctx.workers;
            rep.params_hash = hash;
            rep.resolved_config = identity;
            rep.extra["truncation_plan"] = plan.to_json();
            rep.extra["measure_params"] = params.to_json();
            rep.wall_clock_ms = std::chrono::duration<double, std::milli>(
                                    std::chrono::steady_clock::now() - t0)
                                    .count();

            const std::string stem =
                type + "-" + rep.instance + "-" + std::to_string(ctx.seed);
            const fs::path json_path = outdir / (stem + ".json");
            write_text(json_path, rep.to_json().dump(2) + "\n");
            outcome.written_files.push_back(json_path.string());
            if (rep.extra.contains("curve")) {
                const fs::path csv_path = outdir / (stem + ".csv");
                write_text(csv_path, csv_of_curve(rep.extra.at("curve")));
                outcome.written_files.push_back(csv_path.string());
            }
            if (type == "ou_check" && !ou_paths.empty()) {
                std::string csv = "t,path_id,value\n";
                const auto& grid = e.at("h_grid").get<std::vector<double>>();
                for (std::size_t p = 0; p < ou_paths.size(); ++p)
                    for (std::size_t i = 0; i < grid.size(); ++i)
                        csv += nlohmann::json(grid[i]).dump() + "," + std::to_string(p) + "," +
                               nlohmann::json(ou_paths[p][i]).dump() + "\n";
                const fs::path csv_path = outdir / (stem + "-paths.csv");
                write_text(csv_path, csv);
                outcome.written_files.push_back(csv_path.string());
            }

            if (rep.invalid) {
                outcome.reports.push_back(std::move(rep));
                outcome.exit_code = 1;
                outcome.error = "experiment '" + type + "' aborted";
                return outcome;
            }
            any_fail = any_fail || !rep.all_passed();
            outcome.reports.push_back(std::move(rep));
        }
        outcome.exit_code = any_fail ? 2 : 0;
    } catch (const std::exception& e) {
        outcome.exit_code = 1;
        outcome.error = e.what();
    }
    return outcome;
}

}  // namespace ergomix
