#ifndef VSAD_PIPELINE_HPP
#define VSAD_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "vsad/benchmark.hpp"
#include "vsad/core.hpp"
#include "vsad/svm.hpp"

namespace vsad {

// Synthetic input description; "paired" draws from the antipodal-pair
// construction, "blocks" from the plain preferred-object construction.
struct SynthParams {
    std::string structure = "paired";
    int categories = 10;
    int objects = 50;
    int dim = 16;
    int train_images_per_category = 40;
    int test_images_per_category = 20;
    int patches_per_image = 100;
    int preferred = 2;       // pairs for "paired", objects for "blocks"
    int preferred_pool = 10;  // leading pairs eligible for preference; 0 = all
    double preferred_mass = 0.5;
    double mean_scale = 1.0;
    double temperature = 2.0;
    double stddev = kBenchmarkStddev;
};

struct InputConfig {
    std::string kind = "synth";  // "synth" | "bundle"
    SynthParams synth;
    std::string train_bundle;
    std::string train_manifest;
    std::string test_bundle;
    std::string test_manifest;
};

// Dense grid parameters consumed by the sample-grid tool; informational for
// synthetic runs (the planted model emits descriptors directly).
struct SamplingConfig {
    int image_side = 256;
    std::vector<int> scales = {64, 80, 96, 112, 128, 144, 160, 176, 192};
    int grid = 10;
    bool flips = true;
};

struct EncoderConfig {
    std::string method = "vsad";  // vsad | fv | vlad | avgpool
    int k = 50;                   // mixture/codebook size for fv and vlad
    int pca_dim = 0;              // 0 disables descriptor PCA
    bool whiten = false;
    bool normalize = true;
    double variance_floor = 1e-8;        // semantic codebook
    double activation_threshold = 1e-8;  // semantic codebook
};

struct SelectionConfig {
    bool enabled = false;
    int k = 12;
    bool random = false;  // seeded uniform baseline instead of the response rule
};

struct ClassifierConfig {
    double c = 1.0;
    double tol = 1e-6;
    int max_epochs = 1000;
};

struct PipelineConfig {
    std::uint64_t seed = 7;
    std::string output_dir = "run-out";
    InputConfig input;
    SamplingConfig sampling;
    EncoderConfig encoder;
    SelectionConfig selection;
    ClassifierConfig classifier;
};

// Synthetic-scale defaults (the standard benchmark with vsad + selection).
PipelineConfig default_config();
// The paper's operating points scaled to the synthetic benchmark: 9 scales,
// 10x10 grid with flips, one-vs-all C=1, codeword selection on (selected
// fraction matching 256 of 1000), codebook size 50 for fv/vlad.
PipelineConfig paper_defaults_config();

PipelineConfig parse_config(const std::string& json_text);
PipelineConfig load_config(const std::string& path);
// Canonical serialization: sorted keys, stable number formatting; the exact
// bytes hashed into the run report.
std::string config_to_json(const PipelineConfig& config);
void save_config(const PipelineConfig& config, const std::string& path);

struct RunResult {
    EvalReport eval;
    std::string report_path;
    std::string report_body;  // deterministic: no timings or timestamps
    double runtime_seconds = 0.0;
};

// Full experiment: data -> (pca) -> codebook/fit -> (selection) -> encode ->
// train -> evaluate, with per-stage artifact caching in output_dir/cache and
// a deterministic report.json (timings go to timings.json). Module errors
// are re-thrown with the failing stage prepended.
RunResult run_pipeline(const PipelineConfig& config);

struct CompareRow {
    std::string method;
    double accuracy = 0.0;
    double runtime_seconds = 0.0;
};

// Runs each method over the same inputs (shared cache) and returns rows
// sorted by accuracy descending, method name ascending on ties.
std::vector<CompareRow> compare_encoders(const PipelineConfig& config,
                                         const std::vector<std::string>& methods);
// TSV: method, accuracy (6 decimals), runtime seconds.
std::string compare_table(const std::vector<CompareRow>& rows);

}  // namespace vsad

#endif
