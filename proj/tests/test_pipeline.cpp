#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "vsad/io.hpp"
#include "vsad/pipeline.hpp"

using namespace vsad;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("vsad_pipe_test_" + std::to_string(::getpid()) +
                                            "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

// A deliberately tiny synthetic run so pipeline tests stay fast.
PipelineConfig tiny_config(const fs::path& out_dir) {
    PipelineConfig config;
    config.seed = 11;
    config.output_dir = out_dir.string();
    config.input.synth.categories = 3;
    config.input.synth.objects = 12;
    config.input.synth.dim = 6;
    config.input.synth.train_images_per_category = 6;
    config.input.synth.test_images_per_category = 4;
    config.input.synth.patches_per_image = 20;
    config.input.synth.preferred = 2;
    config.input.synth.preferred_pool = 4;
    config.encoder.method = "vsad";
    config.selection.enabled = true;
    config.selection.k = 4;
    return config;
}

}  // namespace

TEST_CASE("pipeline configs round-trip through their json form") {
    for (const PipelineConfig& config : {default_config(), paper_defaults_config()}) {
        const std::string text = config_to_json(config);
        const PipelineConfig parsed = parse_config(text);
        CHECK(config_to_json(parsed) == text);
    }

    // Absent fields keep their defaults.
    const PipelineConfig sparse = parse_config(R"({"seed": 99})");
    const PipelineConfig defaults = default_config();
    CHECK(sparse.seed == 99);
    CHECK(sparse.encoder.method == defaults.encoder.method);
    CHECK(sparse.input.synth.objects == defaults.input.synth.objects);
    CHECK(sparse.classifier.c == defaults.classifier.c);

    CHECK_THROWS_WITH_AS(parse_config("{nope"), doctest::Contains("ParseError"), Error);
}

TEST_CASE("config files save and load") {
    TempDir tmp;
    PipelineConfig config = default_config();
    config.seed = 1234;
    config.encoder.method = "fv";
    const fs::path file = tmp.path / "config.json";
    save_config(config, file.string());
    const PipelineConfig back = load_config(file.string());
    CHECK(config_to_json(back) == config_to_json(config));
    CHECK_THROWS_AS(load_config((tmp.path / "absent.json").string()), Error);
}

TEST_CASE("pipeline runs end to end and reruns from cache byte-identically") {
    TempDir tmp;
    const PipelineConfig config = tiny_config(tmp.path / "run");

    const RunResult first = run_pipeline(config);
    CHECK(first.eval.overall_accuracy >= 0.0);
    CHECK(first.eval.overall_accuracy <= 1.0);
    CHECK(fs::exists(first.report_path));
    CHECK(fs::exists(fs::path(config.output_dir) / "timings.json"));
    CHECK(io::read_file(first.report_path) == first.report_body);

    // The report parses and its metrics agree with the returned evaluation.
    const nlohmann::json report = nlohmann::json::parse(first.report_body);
    CHECK(report.at("metrics").at("overall_accuracy").get<double>() ==
          first.eval.overall_accuracy);
    CHECK(report.contains("config_hash"));
    CHECK(report.contains("stage_keys"));

    // Rerunning the identical config reuses every cached stage and must
    // reproduce the report byte for byte.
    const std::string before = io::read_file(first.report_path);
    const RunResult second = run_pipeline(config);
    CHECK(second.report_body == first.report_body);
    CHECK(io::read_file(second.report_path) == before);
}

TEST_CASE("identical configs in fresh directories reproduce the metrics") {
    TempDir tmp;
    const RunResult a = run_pipeline(tiny_config(tmp.path / "a"));
    const RunResult b = run_pipeline(tiny_config(tmp.path / "b"));
    CHECK(a.eval.overall_accuracy == b.eval.overall_accuracy);
    CHECK(a.eval.confusion == b.eval.confusion);

    // Only the output directory differs between the two report bodies.
    const nlohmann::json ra = nlohmann::json::parse(a.report_body);
    const nlohmann::json rb = nlohmann::json::parse(b.report_body);
    CHECK(ra.at("metrics") == rb.at("metrics"));
    CHECK(ra.at("stage_keys") == rb.at("stage_keys"));
}

TEST_CASE("pipeline errors carry the failing stage") {
    TempDir tmp;
    SUBCASE("missing input bundle fails in the data stage") {
        PipelineConfig config = tiny_config(tmp.path / "run");
        config.input.kind = "bundle";
        config.input.train_bundle = (tmp.path / "absent.bin").string();
        config.input.train_manifest = (tmp.path / "absent.tsv").string();
        config.input.test_bundle = config.input.train_bundle;
        config.input.test_manifest = config.input.train_manifest;
        CHECK_THROWS_WITH_AS(run_pipeline(config), doctest::Contains("[data]"), Error);
    }
    SUBCASE("oversized selection fails in the selection stage") {
        PipelineConfig config = tiny_config(tmp.path / "run");
        config.selection.k = 7;  // 2K = 14 > V = 12
        CHECK_THROWS_WITH_AS(run_pipeline(config), doctest::Contains("[selection]"), Error);
    }
    SUBCASE("unknown encoder method is rejected") {
        PipelineConfig config = tiny_config(tmp.path / "run");
        config.encoder.method = "banana";
        CHECK_THROWS_AS(run_pipeline(config), Error);
    }
}

TEST_CASE("encoder comparison returns sorted rows and a fixed-width table") {
    TempDir tmp;
    PipelineConfig config = tiny_config(tmp.path / "cmp");
    config.selection.enabled = false;
    const std::vector<CompareRow> rows = compare_encoders(config, {"avgpool", "vsad"});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].accuracy >= rows[1].accuracy);

    const std::string table = compare_table(rows);
    CHECK(table.rfind("method\taccuracy\truntime_s\n", 0) == 0);
    CHECK(std::count(table.begin(), table.end(), '\n') == 3);
    CHECK(table.find("vsad\t") != std::string::npos);
    CHECK(table.find("avgpool\t") != std::string::npos);

    CHECK_THROWS_AS(compare_encoders(config, {}), Error);
}
