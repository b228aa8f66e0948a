#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ergomix/errors.hpp"
#include "ergomix/instances.hpp"
#include "ergomix/runner.hpp"

using namespace ergomix;

namespace {

nlohmann::json minimal_config() {
    return {{"instance", {{"name", "translation"}}},
            {"truncation", {{"J", 12}, {"target_tol", 1e-3}}},
            {"experiments", {{{"type", "criterion_audit"}}}},
            {"seed", 7},
            {"output_dir", "/tmp/ergomix-test-out"}};
}

}  // namespace

TEST_CASE("registry lists the shipped instances in stable order") {
    const auto& reg = instance_registry();
    REQUIRE(reg.size() == 5);
    CHECK(reg[0].name == "translation");
    CHECK(reg[1].name == "rudnicki_translation");
    CHECK(reg[2].name == "birth_death");
    CHECK(reg[3].name == "death_model");
    CHECK(reg[4].name == "black_scholes");
    for (const auto& info : reg) CHECK(!info.condition.empty());
}

TEST_CASE("unknown keys are rejected with a pointer to the offender") {
    nlohmann::json cfg = minimal_config();
    cfg["surprise"] = 1;
    try {
        (void)resolve_config(cfg, {});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("surprise") != std::string::npos);
    }

    nlohmann::json cfg2 = minimal_config();
    cfg2["experiments"][0]["typo_knob"] = 3;
    try {
        (void)resolve_config(cfg2, {});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("typo_knob") != std::string::npos);
        CHECK(std::string(e.what()).find("/experiments/0") != std::string::npos);
    }
}

TEST_CASE("instance parameter violations cite the condition") {
    nlohmann::json cfg = minimal_config();
    cfg["instance"] = {{"name", "birth_death"},
                       {"params", {{"a", 1.0}, {"b", 1.0}, {"d", 1.0}}}};
    const RunOutcome out = run_config(cfg, {});
    CHECK(out.exit_code == 1);
    CHECK(out.error.find("0<|b|<|d|") != std::string::npos);
}

TEST_CASE("audit run on the translation instance passes and writes a report") {
    namespace fs = std::filesystem;
    const fs::path dir = "/tmp/ergomix-test-out";
    fs::remove_all(dir);
    const RunOutcome out = run_config(minimal_config(), {});
    CHECK(out.exit_code == 0);
    REQUIRE(out.reports.size() == 1);
    CHECK(out.reports[0].all_passed());
    REQUIRE(!out.written_files.empty());
    CHECK(fs::exists(out.written_files.front()));
}

TEST_CASE("reports embed the resolved config and re-running reproduces them") {
    nlohmann::json cfg = minimal_config();
    cfg["experiments"] = {{{"type", "support"}, {"n_samples", 50}, {"k_targets", {1, 2}}}};
    RunOverrides ov;
    ov.output_dir = "/tmp/ergomix-test-out2";
    std::filesystem::remove_all(*ov.output_dir);
    const RunOutcome first = run_config(cfg, ov);
    REQUIRE(first.exit_code == 0);
    const nlohmann::json report = first.reports[0].to_json();

    // feed the emitted report back in as the config
    const RunOutcome second = run_config(report, ov);
    REQUIRE(second.exit_code == 0);
    CHECK(first.reports[0].to_json_deterministic().dump() ==
          second.reports[0].to_json_deterministic().dump());
}

TEST_CASE("worker-count override keeps reports byte-identical") {
    nlohmann::json cfg = minimal_config();
    cfg["experiments"] = {{{"type", "invariance"}, {"n_samples", 1000}, {"t_list", {0.7}}}};
    cfg["output_dir"] = "/tmp/ergomix-test-out3";
    std::filesystem::remove_all(cfg["output_dir"].get<std::string>());
    RunOverrides w1, w8;
    w1.workers = 1;
    w8.workers = 8;
    auto r1 = run_config(cfg, w1);
    auto r8 = run_config(cfg, w8);
    REQUIRE(r1.exit_code == 0);
    REQUIRE(r8.exit_code == 0);
    CHECK(r1.reports[0].to_json_deterministic().dump() ==
          r8.reports[0].to_json_deterministic().dump());
}

TEST_CASE("the truncation-plan cache is reused and bypassable") {
    namespace fs = std::filesystem;
    nlohmann::json cfg = minimal_config();
    cfg["output_dir"] = "/tmp/ergomix-test-cache";
    fs::remove_all(cfg["output_dir"].get<std::string>());

    const RunOutcome first = run_config(cfg, {});
    REQUIRE(first.exit_code == 0);
    const fs::path cache_dir = fs::path(cfg["output_dir"].get<std::string>()) / "plan-cache";
    REQUIRE(fs::exists(cache_dir));
    std::size_t cache_files = 0;
    for (auto it = fs::directory_iterator(cache_dir); it != fs::directory_iterator(); ++it)
        ++cache_files;
    CHECK(cache_files == 1);

    // cached rerun produces the identical plan inside the report
    const RunOutcome second = run_config(cfg, {});
    REQUIRE(second.exit_code == 0);
    CHECK(first.reports[0].extra.at("truncation_plan").dump() ==
          second.reports[0].extra.at("truncation_plan").dump());

    // bypass leaves the cache untouched and still reproduces the plan
    RunOverrides nc;
    nc.no_cache = true;
    const RunOutcome third = run_config(cfg, nc);
    REQUIRE(third.exit_code == 0);
    CHECK(first.reports[0].extra.at("truncation_plan").dump() ==
          third.reports[0].extra.at("truncation_plan").dump());
}

TEST_CASE("an unreadable plan-cache entry falls back to recalibration") {
    namespace fs = std::filesystem;
    nlohmann::json cfg = minimal_config();
    cfg["output_dir"] = "/tmp/ergomix-test-stale-cache";
    fs::remove_all(cfg["output_dir"].get<std::string>());

    const RunOutcome first = run_config(cfg, {});
    REQUIRE(first.exit_code == 0);
    const fs::path cache_dir = fs::path(cfg["output_dir"].get<std::string>()) / "plan-cache";
    for (auto it = fs::directory_iterator(cache_dir); it != fs::directory_iterator(); ++it) {
        std::ofstream out(it->path());
        out << "{not json";
    }
    const RunOutcome second = run_config(cfg, {});
    CHECK(second.exit_code == 0);
    CHECK(first.reports[0].extra.at("truncation_plan").dump() ==
          second.reports[0].extra.at("truncation_plan").dump());
}

TEST_CASE("invalid experiment type is rejected") {
    nlohmann::json cfg = minimal_config();
    cfg["experiments"] = {{{"type", "telepathy"}}};
    CHECK_THROWS_AS((void)resolve_config(cfg, {}), ConfigError);
}
