#include <doctest.h>

#include <fstream>

#include "rnls/harness.hpp"
#include "rnls/toml_lite.hpp"

using namespace rnls;

TEST_CASE("toml subset: sections, scalars, arrays, comments, overrides") {
    std::string text = R"(
# experiment configuration
[experiment]
kind = "classify"
omegas = [1.0]
amplitudes = [0.8, 1.0, 1.2]  # ladder
seed = 42
[grid]
n = 512
rmax = 20.5
[evolution]
dt = 0.002
)";
    auto table = toml_lite::parse_string(text);
    CHECK(std::get<std::string>(table.at("experiment.kind")) == "classify");
    CHECK(std::get<std::vector<double>>(table.at("experiment.amplitudes")).size() == 3);
    CHECK(std::get<double>(table.at("grid.n")) == 512.0);
    CHECK(std::get<double>(table.at("evolution.dt")) == doctest::Approx(0.002));
    CHECK_THROWS_AS(toml_lite::parse_string("key ="), ConfigError);
    CHECK_THROWS_AS(toml_lite::parse_string("novalue"), ConfigError);

    auto path = std::filesystem::temp_directory_path() / "rnls_test_cfg.toml";
    {
        std::ofstream out(path);
        out << text;
    }
    ExperimentConfig cfg = ExperimentConfig::from_toml_file(path);
    CHECK(cfg.kind == ExperimentKind::classify);
    CHECK(cfg.grid_n == 512);
    CHECK(cfg.r_max == doctest::Approx(20.5));
    CHECK(cfg.dt == doctest::Approx(0.002));
    CHECK(cfg.seed == 42);
    std::filesystem::remove(path);
}

TEST_CASE("experiment config validation") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::sweep;
    cfg.amplitudes.clear(); // empty a-list is a configuration error for sweeps
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.amplitudes = {0.5, -1.0};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.amplitudes = {0.5};
    cfg.omegas.clear();
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("gn sweep experiment: deterministic reports and bundle layout") {
    namespace fs = std::filesystem;
    fs::path cache = fs::temp_directory_path() / "rnls_harness_cache";
    fs::path out1 = fs::temp_directory_path() / "rnls_out1";
    fs::path out2 = fs::temp_directory_path() / "rnls_out2";
    fs::remove_all(out1);
    fs::remove_all(out2);

    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::gn_sweep;
    cfg.grid_n = 4096;
    cfg.r_max = 30.0;
    cfg.random_pairs = 40;
    cfg.seed = 7;
    cfg.cache_dir = cache.string();

    ReportBundle b1 = run_experiment(cfg);
    CHECK(b1.all_passed);
    validate_report_schema(b1.report);
    ReportBundle b2 = run_experiment(cfg);
    CHECK(b1.report.dump() == b2.report.dump()); // determinism: bitwise-equal reports

    auto paths1 = emit_report(b1, out1);
    CHECK(fs::exists(out1 / "report.json"));
    CHECK(fs::exists(out1 / "provenance.json"));
    CHECK(fs::exists(out1 / "data" / "gn_sweep.csv"));
    CHECK(fs::exists(out1 / "plots" / "gn_sweep.svg"));
    // every plot's data is also present as CSV
    for (auto& [name, svg] : b1.svgs) CHECK(b1.csvs.count(name) == 1);

    fs::remove_all(out1);
    fs::remove_all(out2);
}

TEST_CASE("classify experiment bundle has no plots directory") {
    namespace fs = std::filesystem;
    fs::path cache = fs::temp_directory_path() / "rnls_harness_cache";
    fs::path out = fs::temp_directory_path() / "rnls_out_classify";
    fs::remove_all(out);

    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::classify;
    cfg.grid_n = 4096;
    cfg.r_max = 30.0;
    cfg.amplitudes = {0.8, 1.0, 1.2};
    cfg.cache_dir = cache.string();

    ReportBundle b = run_experiment(cfg);
    CHECK(b.all_passed);
    CHECK(b.svgs.empty());
    emit_report(b, out);
    CHECK(fs::exists(out / "report.json"));
    CHECK_FALSE(fs::exists(out / "plots"));
    const auto& verdicts = b.report.at("verdicts");
    REQUIRE(verdicts.size() == 3);
    CHECK(verdicts[0].at("prediction") == "scatter");
    CHECK(verdicts[1].at("prediction") == "above_threshold_unknown");
    CHECK(verdicts[2].at("prediction") == "blow_up_or_grow_up");
    fs::remove_all(out);
}

TEST_CASE("sweep experiment: monotone threshold crossing at a = 1") {
    namespace fs = std::filesystem;
    fs::path cache = fs::temp_directory_path() / "rnls_harness_cache";
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::sweep;
    cfg.grid_n = 4096;
    cfg.r_max = 30.0;
    cfg.amplitudes = {0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3};
    cfg.cache_dir = cache.string();

    ReportBundle b = run_experiment(cfg);
    CHECK(b.all_passed);
    CHECK(b.svgs.count("threshold_plane") == 1);
    const auto& verdicts = b.report.at("verdicts");
    double prev_mk = 0;
    for (size_t i = 0; i < verdicts.size(); ++i) {
        double a = cfg.amplitudes[i];
        double mk = verdicts[i].at("mk_product").get<double>();
        CHECK(mk > prev_mk); // monotone in a
        prev_mk = mk;
        std::string pred = verdicts[i].at("prediction").get<std::string>();
        if (a < 1.0) CHECK(pred == "scatter");
        if (a == 1.0) CHECK(pred == "above_threshold_unknown");
        if (a > 1.0) CHECK(pred == "blow_up_or_grow_up");
    }
}
