#include "facesig/errors.hpp"
#include "facesig/pipeline.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace facesig;
namespace fs = std::filesystem;

namespace {

const char* kSmallConfig = R"(
schema_version = 1
seed = 42

[synth]
enabled = true
subjects_low = 2
subjects_medium = 2
subjects_high = 2
minutes_low = 4.0
minutes_medium = 4.0
minutes_high = 4.0
fps = 10.0
dropout_rate = 0.0

[classify]
model = "svm-linear"
sampling = "over"
trials = 3
run_controls = false
)";

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_SUITE("pipeline") {

TEST_CASE("unknown config keys are rejected") {
    auto cfg = Config::parse_string("schema_version = 1\nmystery = 3\n[synth]\nenabled = true\n");
    CHECK_THROWS_AS(PipelineConfig::from_config(cfg, "."), ConfigError);
}

TEST_CASE("unsupported schema versions are rejected") {
    auto cfg = Config::parse_string("schema_version = 2\n[synth]\nenabled = true\n");
    CHECK_THROWS_AS(PipelineConfig::from_config(cfg, "."), ConfigError);
}

TEST_CASE("a config needs either a manifest or the synthetic generator") {
    auto cfg = Config::parse_string("schema_version = 1\n");
    CHECK_THROWS_AS(PipelineConfig::from_config(cfg, "."), ConfigError);
}

TEST_CASE("config values land in the resolved settings") {
    auto cfg = Config::parse_string(kSmallConfig);
    auto pc = PipelineConfig::from_config(cfg, ".");
    CHECK(pc.seed == 42);
    CHECK(pc.use_synth);
    CHECK(pc.synth_spec.n_subjects_per_level == std::array<int, 3>{2, 2, 2});
    CHECK(pc.synth_spec.seed == 42);
    CHECK(pc.model == ModelKind::SvmLinear);
    CHECK(pc.sampling == SamplingMode::Oversample);
    CHECK(pc.trials == 3);
    CHECK_FALSE(pc.run_controls);
    CHECK(pc.slice.window_s == 120.0); // defaults survive
}

TEST_CASE("weak preset selects the near-overlapping profiles") {
    auto cfg = Config::parse_string(
        "schema_version = 1\n[synth]\nenabled = true\npreset = \"weak\"\n");
    auto pc = PipelineConfig::from_config(cfg, ".");
    CHECK(pc.synth_spec.noise_sigma == CohortSpec::weak_spec().noise_sigma);
}

TEST_CASE("full run produces every report and is cache-stable") {
    auto cfg = Config::parse_string(kSmallConfig);
    auto pc = PipelineConfig::from_config(cfg, ".");

    TempDir run_a("facesig_test_run_a");
    auto summary = run_pipeline(pc, run_a.path.string());

    CHECK(summary.n_recordings == 6);
    CHECK(summary.n_segments == 18); // 3 windows per 4-minute recording
    CHECK(summary.n_features == 210);
    CHECK(summary.skipped_stages.empty());
    CHECK(summary.n_selected <= 21);
    CHECK(summary.all_features_accuracy >= 0.0);

    for (const char* rel : {"features/features.csv", "stats/report.csv", "stats/summary.json",
                            "selection/report.json", "selection/report.csv",
                            "selection/directions.csv", "models/all_features.json",
                            "models/results.csv", "summary/summary.json"})
        CHECK(fs::exists(run_a.path / rel));
    CHECK(fs::exists(run_a.path / "signals" / "L1.csv"));

    const std::string summary_a = slurp(run_a.path / "summary" / "summary.json");
    CHECK(summary_a.find("config_hash") != std::string::npos);
    CHECK(summary_a.find("\"seed\": 42") != std::string::npos);

    // a rerun into the same directory reuses the cached stages and
    // reproduces the summary byte for byte
    auto again = run_pipeline(pc, run_a.path.string());
    CHECK(again.skipped_stages ==
          std::vector<std::string>{"features", "stats", "selection"});
    CHECK(again.n_segments == summary.n_segments);
    CHECK(slurp(run_a.path / "summary" / "summary.json") == summary_a);

    // a fresh directory reproduces every artifact byte for byte
    TempDir run_b("facesig_test_run_b");
    run_pipeline(pc, run_b.path.string());
    for (const char* rel : {"features/features.csv", "stats/report.csv",
                            "selection/report.json", "models/all_features.json",
                            "models/results.csv", "summary/summary.json"})
        CHECK(slurp(run_a.path / rel) == slurp(run_b.path / rel));

    // a different seed changes the cache key, so nothing is skipped
    pc.seed = 43;
    pc.synth_spec.seed = 43;
    auto other = run_pipeline(pc, run_a.path.string());
    CHECK(other.skipped_stages.empty());
}

} // TEST_SUITE
