#include "vsad/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string_view>
#include <utility>

#include <json.hpp>

#include "json_util.hpp"
#include "vsad/baselines.hpp"
#include "vsad/codebook.hpp"
#include "vsad/encode.hpp"
#include "vsad/io.hpp"
#include "vsad/selection.hpp"
#include "vsad/svm.hpp"

namespace vsad {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (const unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex16(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

json synth_to_json(const SynthParams& s) {
    return json{{"structure", s.structure},
                {"categories", s.categories},
                {"objects", s.objects},
                {"dim", s.dim},
                {"train_images_per_category", s.train_images_per_category},
                {"test_images_per_category", s.test_images_per_category},
                {"patches_per_image", s.patches_per_image},
                {"preferred", s.preferred},
                {"preferred_pool", s.preferred_pool},
                {"preferred_mass", s.preferred_mass},
                {"mean_scale", s.mean_scale},
                {"temperature", s.temperature},
                {"stddev", s.stddev}};
}

json input_to_json(const InputConfig& in) {
    json j{{"kind", in.kind}};
    if (in.kind == "synth") {
        j["synth"] = synth_to_json(in.synth);
    } else {
        j["train_bundle"] = in.train_bundle;
        j["train_manifest"] = in.train_manifest;
        j["test_bundle"] = in.test_bundle;
        j["test_manifest"] = in.test_manifest;
    }
    return j;
}

json sampling_to_json(const SamplingConfig& s) {
    return json{{"image_side", s.image_side}, {"scales", s.scales}, {"grid", s.grid},
                {"flips", s.flips}};
}

json encoder_to_json(const EncoderConfig& e) {
    return json{{"method", e.method},
                {"k", e.k},
                {"pca_dim", e.pca_dim},
                {"whiten", e.whiten},
                {"normalize", e.normalize},
                {"variance_floor", e.variance_floor},
                {"activation_threshold", e.activation_threshold}};
}

json selection_to_json(const SelectionConfig& s) {
    return json{{"enabled", s.enabled}, {"k", s.k}, {"random", s.random}};
}

json classifier_to_json(const ClassifierConfig& c) {
    return json{{"c", c.c}, {"tol", c.tol}, {"max_epochs", c.max_epochs}};
}

json config_to_json_object(const PipelineConfig& config) {
    return json{{"seed", config.seed},
                {"output_dir", config.output_dir},
                {"input", input_to_json(config.input)},
                {"sampling", sampling_to_json(config.sampling)},
                {"encoder", encoder_to_json(config.encoder)},
                {"selection", selection_to_json(config.selection)},
                {"classifier", classifier_to_json(config.classifier)}};
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

SynthParams synth_from_json(const json& j) {
    SynthParams s;
    s.structure = get_or<std::string>(j, "structure", s.structure);
    s.categories = get_or(j, "categories", s.categories);
    s.objects = get_or(j, "objects", s.objects);
    s.dim = get_or(j, "dim", s.dim);
    s.train_images_per_category = get_or(j, "train_images_per_category", s.train_images_per_category);
    s.test_images_per_category = get_or(j, "test_images_per_category", s.test_images_per_category);
    s.patches_per_image = get_or(j, "patches_per_image", s.patches_per_image);
    s.preferred = get_or(j, "preferred", s.preferred);
    s.preferred_pool = get_or(j, "preferred_pool", s.preferred_pool);
    s.preferred_mass = get_or(j, "preferred_mass", s.preferred_mass);
    s.mean_scale = get_or(j, "mean_scale", s.mean_scale);
    s.temperature = get_or(j, "temperature", s.temperature);
    s.stddev = get_or(j, "stddev", s.stddev);
    return s;
}

// Elapsed seconds plus stage-tagged error context around a stage body.
template <typename F>
auto timed_stage(const char* name, std::vector<std::pair<std::string, double>>& timings, F&& body) {
    const auto start = std::chrono::steady_clock::now();
    auto finish = [&] {
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
        timings.emplace_back(name, dt.count());
    };
    try {
        auto result = body();
        finish();
        return result;
    } catch (const Error& e) {
        throw Error(e.code(), std::string("[") + name + "] " + e.what());
    }
}

struct DataSplits {
    Bundle train;
    Bundle test;
};

Bundle load_bundle_files(const std::string& bundle_path, const std::string& manifest_path) {
    auto [desc, prob] = io::read_bundle(bundle_path);
    Bundle b{std::move(desc), std::move(prob), io::read_manifest(manifest_path)};
    validate_bundle(b.desc, b.prob, b.manifest);
    return b;
}

DataSplits load_data(const PipelineConfig& config) {
    const InputConfig& in = config.input;
    if (in.kind == "bundle") {
        return {load_bundle_files(in.train_bundle, in.train_manifest),
                load_bundle_files(in.test_bundle, in.test_manifest)};
    }
    if (in.kind != "synth")
        throw Error(ErrorCode::InvalidConfig, "input kind must be 'synth' or 'bundle'");

    const SynthParams& s = in.synth;
    PlantedModel model;
    if (s.structure == "paired") {
        BenchmarkSpec spec;
        spec.n_categories = s.categories;
        spec.n_objects = s.objects;
        spec.dim = s.dim;
        spec.train_per_category = s.train_images_per_category;
        spec.test_per_category = s.test_images_per_category;
        spec.patches_per_image = s.patches_per_image;
        spec.preferred_pairs = s.preferred;
        spec.preferred_pool = s.preferred_pool;
        spec.preferred_mass = s.preferred_mass;
        spec.mean_scale = s.mean_scale;
        spec.temperature = s.temperature;
        spec.stddev = s.stddev;
        BenchmarkData data = make_benchmark_data(spec, config.seed);
        return {std::move(data.train), std::move(data.test)};
    }
    if (s.structure != "blocks")
        throw Error(ErrorCode::InvalidConfig, "synth structure must be 'paired' or 'blocks'");
    model = make_planted_model(s.categories, s.objects, s.dim, s.stddev, s.temperature,
                               config.seed, s.preferred, s.preferred_mass, s.mean_scale);
    const int per_category = s.train_images_per_category + s.test_images_per_category;
    auto [desc, prob, manifest] = generate(model, per_category, s.patches_per_image);
    Bundle all{std::move(desc), std::move(prob), std::move(manifest)};
    std::vector<std::size_t> train_idx, test_idx;
    for (int c = 0; c < s.categories; ++c)
        for (int i = 0; i < per_category; ++i)
            (i < s.train_images_per_category ? train_idx : test_idx)
                .push_back(static_cast<std::size_t>(c) * per_category + i);
    return {take_images(all, train_idx), take_images(all, test_idx)};
}

// Features travel through the float32 interchange format; quantizing the
// in-memory path identically keeps fresh and cache-loaded runs bit-equal.
Matrix quantize_f32(Matrix m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            m(i, j) = static_cast<double>(static_cast<float>(m(i, j)));
    return m;
}

PatchManifest image_level_manifest(const PatchManifest& patches) {
    PatchManifest out;
    out.image_ids = patches.image_ids;
    out.labels = patches.labels;
    for (std::size_t i = 0; i < patches.n_images(); ++i) out.patch_ranges.push_back({i, i + 1});
    return out;
}

struct FeatureSet {
    Matrix rows;  // one image per row, f32-quantized
    PatchManifest manifest;
};

FeatureSet load_feature_file(const fs::path& bin_path, const fs::path& manifest_path) {
    auto [desc, prob] = io::read_bundle(bin_path);
    if (prob.n_classes() != 0)
        throw Error(ErrorCode::InconsistentDim, "feature file must carry K=0 probability block");
    FeatureSet fsed{std::move(desc.data), io::read_manifest(manifest_path)};
    return fsed;
}

void write_feature_file(const FeatureSet& features, const fs::path& bin_path,
                        const fs::path& manifest_path) {
    io::write_bundle(DescriptorMatrix{features.rows},
                     ProbabilityMatrix{Matrix(features.rows.rows(), 0)}, bin_path);
    io::write_manifest(features.manifest, manifest_path);
}

FeatureSet encode_split(const Bundle& split, const EncoderConfig& enc,
                        const SemanticCodebook* codebook, const std::vector<int>* selected,
                        const DiagonalGmm* gmm, const KMeansCodebook* kmeans) {
    std::vector<std::pair<std::string, EncodedVector>> encoded;
    if (enc.method == "vsad") {
        VsadConfig cfg;
        cfg.codebook = codebook;
        if (selected != nullptr) cfg.selected = *selected;
        cfg.normalize = enc.normalize;
        encoded = encode_batch(split.desc, split.prob, split.manifest, cfg);
    } else {
        encoded.reserve(split.manifest.n_images());
        for (std::size_t i = 0; i < split.manifest.n_images(); ++i) {
            const PatchRange& r = split.manifest.patch_ranges[i];
            if (r.empty())
                throw Error(ErrorCode::EmptyImage,
                            "image '" + split.manifest.image_ids[i] + "' has no patches");
            const DescriptorMatrix img{split.desc.data.middleRows(
                static_cast<Eigen::Index>(r.start), static_cast<Eigen::Index>(r.size()))};
            EncodedVector v;
            if (enc.method == "fv")
                v = fv_encode(img, *gmm, enc.normalize);
            else if (enc.method == "vlad")
                v = vlad_encode(img, *kmeans, enc.normalize);
            else if (enc.method == "avgpool")
                v = avgpool_encode(img, enc.normalize);
            else
                throw Error(ErrorCode::InvalidConfig, "unknown encoder method '" + enc.method + "'");
            encoded.emplace_back(split.manifest.image_ids[i], std::move(v));
        }
    }
    std::vector<EncodedVector> vectors;
    vectors.reserve(encoded.size());
    for (auto& [id, v] : encoded) vectors.push_back(std::move(v));
    return {quantize_f32(stack_features(vectors)), image_level_manifest(split.manifest)};
}

std::vector<int> manifest_labels(const PatchManifest& manifest) {
    if (!manifest.all_labeled())
        throw Error(ErrorCode::MissingLabels, "every image needs a label here");
    return manifest.labels;
}

}  // namespace

PipelineConfig default_config() { return PipelineConfig{}; }

PipelineConfig paper_defaults_config() {
    PipelineConfig config;
    config.encoder.method = "vsad";
    config.encoder.k = 50;
    config.selection.enabled = true;
    config.selection.k = 12;  // the paper's 256-of-1000 fraction at V=50
    config.classifier.c = 1.0;
    return config;
}

PipelineConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
    }
    PipelineConfig config;
    try {
        config.seed = get_or<std::uint64_t>(j, "seed", config.seed);
        config.output_dir = get_or<std::string>(j, "output_dir", config.output_dir);
        if (j.contains("input")) {
            const json& in = j.at("input");
            config.input.kind = get_or<std::string>(in, "kind", config.input.kind);
            if (in.contains("synth")) config.input.synth = synth_from_json(in.at("synth"));
            config.input.train_bundle = get_or<std::string>(in, "train_bundle", "");
            config.input.train_manifest = get_or<std::string>(in, "train_manifest", "");
            config.input.test_bundle = get_or<std::string>(in, "test_bundle", "");
            config.input.test_manifest = get_or<std::string>(in, "test_manifest", "");
        }
        if (j.contains("sampling")) {
            const json& s = j.at("sampling");
            config.sampling.image_side = get_or(s, "image_side", config.sampling.image_side);
            config.sampling.scales = get_or(s, "scales", config.sampling.scales);
            config.sampling.grid = get_or(s, "grid", config.sampling.grid);
            config.sampling.flips = get_or(s, "flips", config.sampling.flips);
        }
        if (j.contains("encoder")) {
            const json& e = j.at("encoder");
            config.encoder.method = get_or<std::string>(e, "method", config.encoder.method);
            config.encoder.k = get_or(e, "k", config.encoder.k);
            config.encoder.pca_dim = get_or(e, "pca_dim", config.encoder.pca_dim);
            config.encoder.whiten = get_or(e, "whiten", config.encoder.whiten);
            config.encoder.normalize = get_or(e, "normalize", config.encoder.normalize);
            config.encoder.variance_floor = get_or(e, "variance_floor", config.encoder.variance_floor);
            config.encoder.activation_threshold =
                get_or(e, "activation_threshold", config.encoder.activation_threshold);
        }
        if (j.contains("selection")) {
            const json& s = j.at("selection");
            config.selection.enabled = get_or(s, "enabled", config.selection.enabled);
            config.selection.k = get_or(s, "k", config.selection.k);
            config.selection.random = get_or(s, "random", config.selection.random);
        }
        if (j.contains("classifier")) {
            const json& c = j.at("classifier");
            config.classifier.c = get_or(c, "c", config.classifier.c);
            config.classifier.tol = get_or(c, "tol", config.classifier.tol);
            config.classifier.max_epochs = get_or(c, "max_epochs", config.classifier.max_epochs);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
    }
    static const std::vector<std::string> methods{"vsad", "fv", "vlad", "avgpool"};
    if (std::find(methods.begin(), methods.end(), config.encoder.method) == methods.end())
        throw Error(ErrorCode::InvalidConfig,
                    "config: unknown encoder method '" + config.encoder.method + "'");
    return config;
}

PipelineConfig load_config(const std::string& path) { return parse_config(io::read_file(path)); }

std::string config_to_json(const PipelineConfig& config) {
    return config_to_json_object(config).dump(2) + "\n";
}

void save_config(const PipelineConfig& config, const std::string& path) {
    io::atomic_write(path, config_to_json(config));
}

RunResult run_pipeline(const PipelineConfig& config) {
    const auto run_start = std::chrono::steady_clock::now();
    std::vector<std::pair<std::string, double>> timings;

    const fs::path out_dir(config.output_dir);
    const fs::path cache_dir = out_dir / "cache";
    std::filesystem::create_directories(cache_dir);
    save_config(config, (out_dir / "config.json").string());

    const std::string config_text = config_to_json(config);
    const std::uint64_t config_hash = fnv1a64(config_text);

    // --- data ---------------------------------------------------------
    std::uint64_t data_key = fnv1a64(input_to_json(config.input).dump());
    data_key = fnv1a64(std::to_string(config.seed), data_key);
    DataSplits data = timed_stage("data", timings, [&] {
        if (config.input.kind == "bundle") {
            for (const std::string& p :
                 {config.input.train_bundle, config.input.train_manifest,
                  config.input.test_bundle, config.input.test_manifest})
                data_key = fnv1a64(io::read_file(p), data_key);
        }
        return load_data(config);
    });

    json artifacts;
    json stage_keys;
    stage_keys["data"] = hex16(data_key);

    // --- optional descriptor pca ---------------------------------------
    std::uint64_t desc_key = data_key;
    if (config.encoder.pca_dim > 0) {
        const std::uint64_t pca_key =
            fnv1a64("pca|" + std::to_string(config.encoder.pca_dim) + "|" +
                        (config.encoder.whiten ? "w" : "-"),
                    data_key);
        const fs::path pca_path = cache_dir / ("pca-" + hex16(pca_key) + ".json");
        PcaModel pca = timed_stage("pca", timings, [&] {
            if (fs::exists(pca_path)) return read_pca(pca_path.string());
            PcaModel fitted = pca_fit(data.train.desc, config.encoder.pca_dim, config.encoder.whiten);
            write_pca(pca_path.string(), fitted);
            return fitted;
        });
        data.train.desc = pca_transform(pca, data.train.desc);
        data.test.desc = pca_transform(pca, data.test.desc);
        desc_key = pca_key;
        stage_keys["pca"] = hex16(pca_key);
        artifacts["pca"] = fs::relative(pca_path, out_dir).string();
    }

    // --- fit + optional selection ---------------------------------------
    const EncoderConfig& enc = config.encoder;
    SemanticCodebook codebook;
    std::vector<int> selected;
    bool use_selected = false;
    DiagonalGmm gmm;
    KMeansCodebook kmeans;

    if (enc.method == "vsad") {
        const std::uint64_t cb_key =
            fnv1a64("codebook|" + std::to_string(enc.variance_floor) + "|" +
                        std::to_string(enc.activation_threshold),
                    desc_key);
        const fs::path cb_path = cache_dir / ("codebook-" + hex16(cb_key) + ".json");
        codebook = timed_stage("codebook", timings, [&] {
            if (fs::exists(cb_path)) return io::read_codebook(cb_path);
            CodebookOptions opts;
            opts.variance_floor = enc.variance_floor;
            opts.activation_threshold = enc.activation_threshold;
            SemanticCodebook built = build_codebook(data.train.desc, data.train.prob, opts);
            io::write_codebook(built, cb_path);
            return built;
        });
        stage_keys["codebook"] = hex16(cb_key);
        artifacts["codebook"] = fs::relative(cb_path, out_dir).string();

        if (config.selection.enabled) {
            const std::uint64_t sel_key =
                fnv1a64("selection|" + selection_to_json(config.selection).dump() + "|" +
                            std::to_string(config.seed),
                        data_key);
            const fs::path sel_path = cache_dir / ("selected-" + hex16(sel_key) + ".txt");
            selected = timed_stage("selection", timings, [&] {
                if (fs::exists(sel_path)) return read_selection(sel_path.string());
                std::vector<int> picked;
                if (config.selection.random) {
                    picked = random_selection(data.train.prob.n_classes(), config.selection.k,
                                              fnv1a64("random-selection", config.seed));
                } else {
                    const ResponseTable table =
                        aggregate_responses(data.train.prob, data.train.manifest);
                    picked = select_codewords(table, config.selection.k).selected;
                }
                write_selection(sel_path.string(), picked);
                return picked;
            });
            use_selected = true;
            stage_keys["selection"] = hex16(sel_key);
            artifacts["selected"] = fs::relative(sel_path, out_dir).string();
        }
    } else if (enc.method == "fv") {
        const std::uint64_t gmm_key = fnv1a64("gmm|" + std::to_string(enc.k) + "|" +
                                                  std::to_string(config.seed),
                                              desc_key);
        const fs::path gmm_path = cache_dir / ("gmm-" + hex16(gmm_key) + ".json");
        gmm = timed_stage("gmm", timings, [&] {
            if (fs::exists(gmm_path)) return read_gmm(gmm_path.string());
            GmmOptions opts;
            opts.seed = fnv1a64("gmm", config.seed);
            DiagonalGmm fitted = gmm_fit(data.train.desc, enc.k, opts);
            write_gmm(gmm_path.string(), fitted);
            return fitted;
        });
        stage_keys["gmm"] = hex16(gmm_key);
        artifacts["gmm"] = fs::relative(gmm_path, out_dir).string();
    } else if (enc.method == "vlad") {
        const std::uint64_t km_key = fnv1a64("kmeans|" + std::to_string(enc.k) + "|" +
                                                 std::to_string(config.seed),
                                             desc_key);
        const fs::path km_path = cache_dir / ("kmeans-" + hex16(km_key) + ".json");
        kmeans = timed_stage("kmeans", timings, [&] {
            if (fs::exists(km_path)) return read_kmeans(km_path.string());
            KMeansOptions opts;
            opts.seed = fnv1a64("kmeans", config.seed);
            KMeansCodebook fitted = kmeans_fit(data.train.desc, enc.k, opts);
            write_kmeans(km_path.string(), fitted);
            return fitted;
        });
        stage_keys["kmeans"] = hex16(km_key);
        artifacts["kmeans"] = fs::relative(km_path, out_dir).string();
    }

    // --- encode ----------------------------------------------------------
    std::uint64_t features_key = fnv1a64("features|" + encoder_to_json(enc).dump(), desc_key);
    if (use_selected && stage_keys.contains("selection"))
        features_key = fnv1a64(stage_keys["selection"].get<std::string>(), features_key);
    const fs::path feat_train_bin = cache_dir / ("features-train-" + hex16(features_key) + ".bin");
    const fs::path feat_train_tsv = cache_dir / ("features-train-" + hex16(features_key) + ".manifest");
    const fs::path feat_test_bin = cache_dir / ("features-test-" + hex16(features_key) + ".bin");
    const fs::path feat_test_tsv = cache_dir / ("features-test-" + hex16(features_key) + ".manifest");

    auto encode_cached = [&](const Bundle& split, const fs::path& bin, const fs::path& tsv) {
        if (fs::exists(bin) && fs::exists(tsv)) return load_feature_file(bin, tsv);
        FeatureSet features = encode_split(split, enc, &codebook, use_selected ? &selected : nullptr,
                                           &gmm, &kmeans);
        write_feature_file(features, bin, tsv);
        return features;
    };
    FeatureSet train_features =
        timed_stage("encode-train", timings, [&] { return encode_cached(data.train, feat_train_bin, feat_train_tsv); });
    FeatureSet test_features =
        timed_stage("encode-test", timings, [&] { return encode_cached(data.test, feat_test_bin, feat_test_tsv); });
    stage_keys["features"] = hex16(features_key);
    artifacts["features_train"] = fs::relative(feat_train_bin, out_dir).string();
    artifacts["features_test"] = fs::relative(feat_test_bin, out_dir).string();

    // --- train -----------------------------------------------------------
    const std::uint64_t model_key =
        fnv1a64("model|" + classifier_to_json(config.classifier).dump() + "|" +
                    std::to_string(config.seed),
                features_key);
    const fs::path model_path = cache_dir / ("model-" + hex16(model_key) + ".json");
    LinearOvaModel model = timed_stage("train", timings, [&] {
        if (fs::exists(model_path)) return read_svm(model_path.string());
        SvmOptions opts;
        opts.c = config.classifier.c;
        opts.tol = config.classifier.tol;
        opts.max_epochs = config.classifier.max_epochs;
        opts.seed = fnv1a64("svm", config.seed);
        LinearOvaModel trained =
            svm_train(train_features.rows, manifest_labels(train_features.manifest), opts);
        write_svm(model_path.string(), trained);
        return trained;
    });
    stage_keys["model"] = hex16(model_key);
    artifacts["model"] = fs::relative(model_path, out_dir).string();

    // --- evaluate ----------------------------------------------------------
    EvalReport eval = timed_stage("eval", timings, [&] {
        return evaluate(model, test_features.rows, manifest_labels(test_features.manifest));
    });

    json confusion = json::array();
    for (Eigen::Index i = 0; i < eval.confusion.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < eval.confusion.cols(); ++j) row.push_back(eval.confusion(i, j));
        confusion.push_back(std::move(row));
    }
    json report{{"config", config_to_json_object(config)},
                {"config_hash", hex16(config_hash)},
                {"stage_keys", stage_keys},
                {"artifacts", artifacts},
                {"metrics",
                 json{{"overall_accuracy", eval.overall_accuracy},
                      {"mean_class_accuracy", eval.mean_class_accuracy},
                      {"per_class_accuracy",
                       std::vector<double>(eval.per_class_accuracy.begin(),
                                           eval.per_class_accuracy.end())},
                      {"confusion", confusion}}}};
    RunResult result;
    result.eval = std::move(eval);
    result.report_body = report.dump(2) + "\n";
    result.report_path = (out_dir / "report.json").string();
    io::atomic_write(result.report_path, result.report_body);

    const std::chrono::duration<double> total = std::chrono::steady_clock::now() - run_start;
    result.runtime_seconds = total.count();
    json timing_json;
    for (const auto& [name, seconds] : timings) timing_json["stages"][name] = seconds;
    timing_json["total_seconds"] = result.runtime_seconds;
    io::atomic_write((out_dir / "timings.json").string(), timing_json.dump(2) + "\n");
    return result;
}

std::vector<CompareRow> compare_encoders(const PipelineConfig& config,
                                         const std::vector<std::string>& methods) {
    if (methods.empty()) throw Error(ErrorCode::InvalidConfig, "compare: no methods listed");
    std::vector<CompareRow> rows;
    for (const std::string& method : methods) {
        PipelineConfig run_config = config;
        run_config.encoder.method = method;
        run_config.output_dir =
            (fs::path(config.output_dir) / ("method-" + method)).string();
        const RunResult result = run_pipeline(run_config);
        rows.push_back({method, result.eval.overall_accuracy, result.runtime_seconds});
    }
    std::sort(rows.begin(), rows.end(), [](const CompareRow& a, const CompareRow& b) {
        if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
        return a.method < b.method;
    });
    return rows;
}

std::string compare_table(const std::vector<CompareRow>& rows) {
    std::string out = "method\taccuracy\truntime_s\n";
    for (const CompareRow& row : rows) {
        char line[128];
        std::snprintf(line, sizeof(line), "%s\t%.6f\t%.3f\n", row.method.c_str(), row.accuracy,
                      row.runtime_seconds);
        out += line;
    }
    return out;
}

}  // namespace vsad
