#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ergomix/ergostats.hpp"
#include "ergomix/instances.hpp"
#include "ergomix/runner.hpp"

namespace {

int cmd_run(const std::string& config_path, const ergomix::RunOverrides& ov) {
    nlohmann::json config;
    {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "error: cannot read config '" << config_path << "'\n";
            return 1;
        }
        try {
            in >> config;
        } catch (const std::exception& e) {
            std::cerr << "error: config is not valid JSON: " << e.what() << "\n";
            return 1;
        }
    }
    const ergomix::RunOutcome outcome = ergomix::run_config(config, ov);
    if (!outcome.error.empty()) std::cerr << "error: " << outcome.error << "\n";
    for (const auto& rep : outcome.reports) {
        std::cout << rep.experiment << " [" << rep.instance << "]: "
                  << (rep.invalid ? "INVALID" : rep.all_passed() ? "PASS" : "FAIL") << "\n";
        for (const auto& v : rep.verdicts)
            if (!v.passed) std::cout << "  failed: " << v.criterion << "\n";
    }
    for (const auto& f : outcome.written_files) std::cout << "wrote " << f << "\n";
    return outcome.exit_code;
}

int cmd_list_instances(bool as_json) {
    const auto& registry = ergomix::instance_registry();
    if (as_json) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& info : registry)
            out.push_back({{"name", info.name},
                           {"description", info.description},
                           {"condition", info.condition},
                           {"params", info.param_schema}});
        std::cout << out.dump(2) << "\n";
        return 0;
    }
    for (const auto& info : registry) {
        std::cout << info.name << "\n  " << info.description << "\n  condition: "
                  << info.condition << "\n  params:\n";
        for (auto it = info.param_schema.begin(); it != info.param_schema.end(); ++it)
            std::cout << "    " << it.key() << ": " << it.value().get<std::string>() << "\n";
    }
    return 0;
}

int cmd_ou_check(std::size_t n_paths, double tmax, std::uint64_t seed,
                 const std::string& output_dir) {
    ergomix::OuConfig cfg;
    cfg.n_paths = n_paths;
    cfg.h_grid.clear();
    for (double h = 0.0; h <= tmax + 1e-12; h += 0.5) cfg.h_grid.push_back(h);
    ergomix::RunContext ctx;
    ctx.seed = seed;

    std::vector<std::vector<double>> paths;
    const ergomix::ExperimentReport rep = ergomix::ou_check(cfg, ctx, &paths);

    namespace fs = std::filesystem;
    fs::create_directories(output_dir);
    const std::string stem = "ou_check-ou-" + std::to_string(seed);
    {
        std::ofstream out(fs::path(output_dir) / (stem + ".json"));
        out << rep.to_json().dump(2) << "\n";
    }
    {
        std::ofstream out(fs::path(output_dir) / (stem + "-paths.csv"));
        out << "t,path_id,value\n";
        for (std::size_t p = 0; p < paths.size(); ++p)
            for (std::size_t i = 0; i < cfg.h_grid.size(); ++i)
                out << cfg.h_grid[i] << "," << p << "," << paths[p][i] << "\n";
    }
    for (const auto& e : rep.estimates)
        std::cout << e.name << " = " << e.value << "  [" << e.ci_lo << ", " << e.ci_hi << "]\n";
    const bool pass = rep.all_passed();
    std::cout << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ergomix: invariant-measure experiments for semigroup flows"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "execute experiments from a JSON config");
    std::string config_path;
    std::uint64_t seed = 0;
    int workers = 0;
    std::string output_dir;
    bool no_cache = false;
    run->add_option("config", config_path, "path to the run config (or an emitted report)")
        ->required();
    run->add_option("--seed", seed, "override the master seed");
    run->add_option("--workers", workers, "override the worker count");
    run->add_option("--output", output_dir, "override the output directory");
    run->add_flag("--no-cache", no_cache, "bypass the truncation-plan cache");

    auto* list = app.add_subcommand("list-instances", "print the instance registry");
    bool as_json = false;
    list->add_flag("--json", as_json, "emit the registry as JSON");

    auto* ou = app.add_subcommand("ou-check", "correlation check of the AR(1) path sampler");
    std::size_t paths = 10000;
    double tmax = 2.0;
    std::uint64_t ou_seed = 1;
    std::string ou_out = "out";
    ou->add_option("--paths", paths, "number of sampled paths");
    ou->add_option("--tmax", tmax, "largest lag on the half-step grid");
    ou->add_option("--seed", ou_seed, "master seed");
    ou->add_option("--output", ou_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        ergomix::RunOverrides ov;
        if (run->count("--seed")) ov.seed = seed;
        if (run->count("--workers")) ov.workers = workers;
        if (run->count("--output")) ov.output_dir = output_dir;
        ov.no_cache = no_cache;
        return cmd_run(config_path, ov);
    }
    if (list->parsed()) return cmd_list_instances(as_json);
    if (ou->parsed()) return cmd_ou_check(paths, tmax, ou_seed, ou_out);
    return 0;
}
