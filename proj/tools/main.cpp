// Command-line front end for the semantic aggregation pipeline.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vsad/baselines.hpp"
#include "vsad/benchmark.hpp"
#include "vsad/codebook.hpp"
#include "vsad/encode.hpp"
#include "vsad/io.hpp"
#include "vsad/pipeline.hpp"
#include "vsad/sampler.hpp"
#include "vsad/selection.hpp"
#include "vsad/svm.hpp"
#include "vsad/synth.hpp"

namespace {

using namespace vsad;

Bundle load_bundle(const std::string& bundle_path, const std::string& manifest_path) {
    auto [desc, prob] = io::read_bundle(bundle_path);
    Bundle b{std::move(desc), std::move(prob), io::read_manifest(manifest_path)};
    validate_bundle(b.desc, b.prob, b.manifest);
    return b;
}

void apply_pca(Bundle& bundle, const std::string& pca_path) {
    if (pca_path.empty()) return;
    const PcaModel pca = read_pca(pca_path);
    bundle.desc = pca_transform(pca, bundle.desc);
}

// Feature files are descriptor-only bundles with one row per image.
std::pair<Matrix, PatchManifest> load_features(const std::string& features_path,
                                               const std::string& manifest_path) {
    auto [desc, prob] = io::read_bundle(features_path);
    if (prob.n_classes() != 0)
        throw Error(ErrorCode::InconsistentDim,
                    features_path + " is not a feature file (expected K=0)");
    PatchManifest manifest = io::read_manifest(manifest_path);
    manifest.check();
    if (manifest.coverage() != static_cast<std::size_t>(desc.n_patches()))
        throw Error(ErrorCode::MismatchedRows, "feature rows do not match manifest coverage");
    return {std::move(desc.data), std::move(manifest)};
}

std::vector<int> required_labels(const PatchManifest& manifest) {
    if (!manifest.all_labeled())
        throw Error(ErrorCode::MissingLabels, "manifest must label every image");
    return manifest.labels;
}

PatchManifest image_level_manifest(const PatchManifest& patches) {
    PatchManifest out;
    out.image_ids = patches.image_ids;
    out.labels = patches.labels;
    for (std::size_t i = 0; i < patches.n_images(); ++i) out.patch_ranges.push_back({i, i + 1});
    return out;
}

void print_eval(const EvalReport& report) {
    std::cout << "overall_accuracy\t" << report.overall_accuracy << "\n"
              << "mean_class_accuracy\t" << report.mean_class_accuracy << "\n";
    for (Eigen::Index c = 0; c < report.per_class_accuracy.size(); ++c)
        std::cout << "class_" << c << "_accuracy\t" << report.per_class_accuracy[c] << "\n";
}

struct SynthArgs {
    int categories = 10;
    int objects = 50;
    int dim = 16;
    int images_per_category = 60;
    int patches_per_image = 100;
    double temperature = 2.0;
    double stddev = kBenchmarkStddev;
    std::uint64_t seed = 7;
    std::string structure = "paired";
    int preferred = 2;
    int preferred_pool = -1;  // auto: min(10, object pairs)
    double preferred_mass = 0.5;
    double mean_scale = 1.0;
    std::string out_bundle;
    std::string out_manifest;
};

void run_synth(const SynthArgs& args) {
    PlantedModel model;
    if (args.structure == "paired") {
        const int pool =
            args.preferred_pool >= 0 ? args.preferred_pool : std::min(10, args.objects / 2);
        model = make_paired_model(args.categories, args.objects, args.dim, args.stddev,
                                  args.temperature, args.seed, args.preferred,
                                  args.preferred_mass, args.mean_scale, pool);
    }
    else if (args.structure == "blocks")
        model = make_planted_model(args.categories, args.objects, args.dim, args.stddev,
                                   args.temperature, args.seed, args.preferred,
                                   args.preferred_mass, args.mean_scale);
    else
        throw Error(ErrorCode::InvalidConfig, "synth: structure must be 'paired' or 'blocks'");

    auto [desc, prob, manifest] = generate(model, args.images_per_category, args.patches_per_image);
    io::write_bundle(desc, prob, args.out_bundle);
    io::write_manifest(manifest, args.out_manifest);
    std::cout << "images\t" << manifest.n_images() << "\npatches\t" << desc.n_patches()
              << "\nmean_posterior_entropy_bits\t" << mean_row_entropy_bits(prob) << "\n";
}

void add_synth(CLI::App& app) {
    auto args = std::make_shared<SynthArgs>();
    CLI::App* cmd = app.add_subcommand("synth", "generate a planted synthetic bundle");
    cmd->add_option("--categories", args->categories);
    cmd->add_option("--objects", args->objects);
    cmd->add_option("--dim", args->dim);
    cmd->add_option("--images-per-category", args->images_per_category);
    cmd->add_option("--patches-per-image", args->patches_per_image);
    cmd->add_option("--temperature", args->temperature);
    cmd->add_option("--stddev", args->stddev);
    cmd->add_option("--seed", args->seed);
    cmd->add_option("--structure", args->structure, "paired | blocks");
    cmd->add_option("--preferred", args->preferred, "preferred pairs (paired) or objects (blocks)");
    cmd->add_option("--preferred-pool", args->preferred_pool,
                    "leading pairs eligible for preference; 0 = all, default min(10, pairs) "
                    "(paired only)");
    cmd->add_option("--preferred-mass", args->preferred_mass);
    cmd->add_option("--mean-scale", args->mean_scale);
    cmd->add_option("--out-bundle", args->out_bundle)->required();
    cmd->add_option("--out-manifest", args->out_manifest)->required();
    cmd->callback([args] { run_synth(*args); });
}

struct SampleGridArgs {
    int image_side = 256;
    std::vector<int> scales = {64, 80, 96, 112, 128, 144, 160, 176, 192};
    int grid = 10;
    bool flips = true;
    std::string out;
};

void run_sample_grid(const SampleGridArgs& args) {
    const std::vector<PatchRect> rects =
        sample_grid(args.image_side, args.scales, args.grid, args.flips);
    std::ostringstream lines;
    for (const PatchRect& r : rects)
        lines << r.scale_index << ' ' << r.x << ' ' << r.y << ' ' << r.side << ' '
              << (r.flipped ? 1 : 0) << '\n';
    if (args.out.empty())
        std::cout << lines.str();
    else
        io::atomic_write(args.out, std::move(lines).str());
}

void add_sample_grid(CLI::App& app) {
    auto args = std::make_shared<SampleGridArgs>();
    CLI::App* cmd = app.add_subcommand("sample-grid", "emit the dense multi-scale patch grid");
    cmd->add_option("--image-side", args->image_side);
    cmd->add_option("--scales", args->scales)->delimiter(',');
    cmd->add_option("--grid", args->grid);
    cmd->add_flag("--flips,!--no-flips", args->flips, "mirror each rectangle");
    cmd->add_option("--out", args->out, "write rectangles to a file instead of stdout");
    cmd->callback([args] { run_sample_grid(*args); });
}

struct BuildCodebookArgs {
    std::string bundle, manifest, pca, out;
    double variance_floor = 1e-8;
    double activation_threshold = 1e-8;
};

void add_build_codebook(CLI::App& app) {
    auto args = std::make_shared<BuildCodebookArgs>();
    CLI::App* cmd = app.add_subcommand("build-codebook", "probability-weighted codeword statistics");
    cmd->add_option("--bundle", args->bundle)->required();
    cmd->add_option("--manifest", args->manifest)->required();
    cmd->add_option("--pca", args->pca, "apply a pca model to descriptors first");
    cmd->add_option("--variance-floor", args->variance_floor);
    cmd->add_option("--activation-threshold", args->activation_threshold);
    cmd->add_option("--out", args->out)->required();
    cmd->callback([args] {
        Bundle b = load_bundle(args->bundle, args->manifest);
        apply_pca(b, args->pca);
        CodebookOptions opts;
        opts.variance_floor = args->variance_floor;
        opts.activation_threshold = args->activation_threshold;
        const SemanticCodebook cb = build_codebook(b.desc, b.prob, opts);
        io::write_codebook(cb, args->out);
        int active = 0;
        for (bool a : cb.active) active += a ? 1 : 0;
        std::cout << "codewords\t" << cb.k << "\nactive\t" << active << "\ndim\t" << cb.d << "\n";
    });
}

struct SelectArgs {
    std::string bundle, manifest, out;
    int k = 256;
    bool random = false;
    std::uint64_t seed = 0;
};

void add_select(CLI::App& app) {
    auto args = std::make_shared<SelectArgs>();
    CLI::App* cmd = app.add_subcommand("select", "choose discriminative codewords");
    cmd->add_option("--bundle", args->bundle)->required();
    cmd->add_option("--manifest", args->manifest)->required();
    cmd->add_option("--k", args->k)->required();
    cmd->add_flag("--random", args->random, "seeded uniform baseline");
    cmd->add_option("--seed", args->seed);
    cmd->add_option("--out", args->out)->required();
    cmd->callback([args] {
        const Bundle b = load_bundle(args->bundle, args->manifest);
        std::vector<int> selected;
        if (args->random) {
            selected = random_selection(b.prob.n_classes(), args->k, args->seed);
            std::cout << "selected\t" << selected.size() << "\n";
        } else {
            const ResponseTable table = aggregate_responses(b.prob, b.manifest);
            const SelectionResult result = select_codewords(table, args->k);
            selected = result.selected;
            std::cout << "selected\t" << selected.size() << "\nt_final\t" << result.t_final << "\n";
        }
        write_selection(args->out, selected);
    });
}

struct FitArgs {
    std::string bundle, manifest, pca, out;
    int k = 50;
    std::uint64_t seed = 0;
    int restarts = 3;
    int max_iter = 100;
    double tol = 1e-6;
    double variance_floor = 0.0;
    int out_dim = 0;
    bool whiten = false;
};

void add_kmeans_fit(CLI::App& app) {
    auto args = std::make_shared<FitArgs>();
    CLI::App* cmd = app.add_subcommand("kmeans-fit", "k-means codebook over descriptors");
    cmd->add_option("--bundle", args->bundle)->required();
    cmd->add_option("--pca", args->pca);
    cmd->add_option("--k", args->k)->required();
    cmd->add_option("--seed", args->seed);
    cmd->add_option("--restarts", args->restarts);
    cmd->add_option("--max-iter", args->max_iter);
    cmd->add_option("--out", args->out)->required();
    cmd->callback([args] {
        auto [desc, prob] = io::read_bundle(args->bundle);
        Bundle b{std::move(desc), std::move(prob), {}};
        if (!args->pca.empty()) apply_pca(b, args->pca);
        KMeansOptions opts;
        opts.seed = args->seed;
        opts.restarts = args->restarts;
        opts.max_iter = args->max_iter;
        const KMeansCodebook model = kmeans_fit(b.desc, args->k, opts);
        write_kmeans(args->out, model);
        std::cout << "inertia\t" << model.inertia << "\niterations\t" << model.inertia_trace.size()
                  << "\n";
    });
}

void add_gmm_fit(CLI::App& app) {
    auto args = std::make_shared<FitArgs>();
    CLI::App* cmd = app.add_subcommand("gmm-fit", "diagonal-covariance mixture over descriptors");
    cmd->add_option("--bundle", args->bundle)->required();
    cmd->add_option("--pca", args->pca);
    cmd->add_option("--k", args->k)->required();
    cmd->add_option("--seed", args->seed);
    cmd->add_option("--max-iter", args->max_iter);
    cmd->add_option("--tol", args->tol);
    cmd->add_option("--variance-floor", args->variance_floor, "absolute; <= 0 selects automatic");
    cmd->add_option("--out", args->out)->required();
    cmd->callback([args] {
        auto [desc, prob] = io::read_bundle(args->bundle);
        Bundle b{std::move(desc), std::move(prob), {}};
        if (!args->pca.empty()) apply_pca(b, args->pca);
        GmmOptions opts;
        opts.seed = args->seed;
        opts.max_iter = args->max_iter;
        opts.tol = args->tol;
        opts.variance_floor = args->variance_floor;
        const DiagonalGmm model = gmm_fit(b.desc, args->k, opts);
        write_gmm(args->out, model);
        std::cout << "log_likelihood\t" << model.log_likelihood << "\niterations\t"
                  << model.ll_trace.size() << "\n";
    });
}

void add_pca_fit(CLI::App& app) {
    auto args = std::make_shared<FitArgs>();
    CLI::App* cmd = app.add_subcommand("pca-fit", "principal directions of the descriptors");
    cmd->add_option("--bundle", args->bundle)->required();
    cmd->add_option("--out-dim", args->out_dim)->required();
    cmd->add_flag("--whiten", args->whiten);
    cmd->add_option("--out", args->out)->required();
    cmd->callback([args] {
        auto [desc, prob] = io::read_bundle(args->bundle);
        const PcaModel model = pca_fit(desc, args->out_dim, args->whiten);
        write_pca(args->out, model);
        if (model.rank_deficient)
            std::cerr << "warning: requested dimensions exceed the numerical rank; "
                         "extra components are an arbitrary orthonormal completion\n";
        std::cout << "out_dim\t" << model.out_dim << "\nexplained_variance_top\t"
                  << model.explained_variance[0] << "\n";
    });
}

struct EncodeArgs {
    std::string bundle, manifest, method = "vsad";
    std::string codebook, selected, gmm, kmeans, pca;
    bool normalize = true;
    std::string out_features, out_manifest;
};

void run_encode(const EncodeArgs& args) {
    Bundle b = load_bundle(args.bundle, args.manifest);
    apply_pca(b, args.pca);

    std::vector<EncodedVector> vectors;
    vectors.reserve(b.manifest.n_images());
    if (args.method == "vsad") {
        if (args.codebook.empty())
            throw Error(ErrorCode::InvalidConfig, "encode: --codebook is required for vsad");
        const SemanticCodebook cb = io::read_codebook(args.codebook);
        VsadConfig cfg;
        cfg.codebook = &cb;
        cfg.normalize = args.normalize;
        if (!args.selected.empty()) cfg.selected = read_selection(args.selected);
        for (auto& [id, v] : encode_batch(b.desc, b.prob, b.manifest, cfg))
            vectors.push_back(std::move(v));
    } else {
        std::optional<DiagonalGmm> gmm;
        std::optional<KMeansCodebook> kmeans;
        if (args.method == "fv") {
            if (args.gmm.empty())
                throw Error(ErrorCode::InvalidConfig, "encode: --gmm is required for fv");
            gmm = read_gmm(args.gmm);
        } else if (args.method == "vlad") {
            if (args.kmeans.empty())
                throw Error(ErrorCode::InvalidConfig, "encode: --kmeans is required for vlad");
            kmeans = read_kmeans(args.kmeans);
        } else if (args.method != "avgpool") {
            throw Error(ErrorCode::InvalidConfig, "encode: unknown method '" + args.method + "'");
        }
        for (std::size_t i = 0; i < b.manifest.n_images(); ++i) {
            const PatchRange& r = b.manifest.patch_ranges[i];
            if (r.empty())
                throw Error(ErrorCode::EmptyImage,
                            "encode: image '" + b.manifest.image_ids[i] + "' has no patches");
            const DescriptorMatrix img{b.desc.data.middleRows(
                static_cast<Eigen::Index>(r.start), static_cast<Eigen::Index>(r.size()))};
            if (args.method == "fv")
                vectors.push_back(fv_encode(img, *gmm, args.normalize));
            else if (args.method == "vlad")
                vectors.push_back(vlad_encode(img, *kmeans, args.normalize));
            else
                vectors.push_back(avgpool_encode(img, args.normalize));
        }
    }

    const Matrix rows = stack_features(vectors);
    io::write_bundle(DescriptorMatrix{rows}, ProbabilityMatrix{Matrix(rows.rows(), 0)},
                     args.out_features);
    io::write_manifest(image_level_manifest(b.manifest), args.out_manifest);
    std::cout << "images\t" << rows.rows() << "\nfeature_dim\t" << rows.cols() << "\n";
}

void add_encode(CLI::App& app) {
    auto args = std::make_shared<EncodeArgs>();
    CLI::App* cmd = app.add_subcommand("encode", "aggregate patches into image vectors");
    cmd->add_option("--bundle", args->bundle)->required();
    cmd->add_option("--manifest", args->manifest)->required();
    cmd->add_option("--method", args->method, "vsad | fv | vlad | avgpool");
    cmd->add_option("--codebook", args->codebook);
    cmd->add_option("--selected", args->selected, "codeword subset file for vsad");
    cmd->add_option("--gmm", args->gmm);
    cmd->add_option("--kmeans", args->kmeans);
    cmd->add_option("--pca", args->pca);
    cmd->add_flag("--normalize,!--no-normalize", args->normalize);
    cmd->add_option("--out-features", args->out_features)->required();
    cmd->add_option("--out-manifest", args->out_manifest)->required();
    cmd->callback([args] { run_encode(*args); });
}

struct TrainArgs {
    std::string features, manifest, out;
    double c = 1.0;
    double tol = 1e-6;
    int max_epochs = 1000;
    std::uint64_t seed = 0;
};

void add_train(CLI::App& app) {
    auto args = std::make_shared<TrainArgs>();
    CLI::App* cmd = app.add_subcommand("train", "one-vs-all linear svm on image features");
    cmd->add_option("--features", args->features)->required();
    cmd->add_option("--manifest", args->manifest)->required();
    cmd->add_option("--c", args->c);
    cmd->add_option("--tol", args->tol);
    cmd->add_option("--max-epochs", args->max_epochs);
    cmd->add_option("--seed", args->seed);
    cmd->add_option("--out", args->out)->required();
    cmd->callback([args] {
        auto [rows, manifest] = load_features(args->features, args->manifest);
        SvmOptions opts;
        opts.c = args->c;
        opts.tol = args->tol;
        opts.max_epochs = args->max_epochs;
        opts.seed = args->seed;
        const LinearOvaModel model = svm_train(rows, required_labels(manifest), opts);
        write_svm(args->out, model);
        const EvalReport on_train = evaluate(model, rows, required_labels(manifest));
        std::cout << "classes\t" << model.n_classes << "\ntrain_accuracy\t"
                  << on_train.overall_accuracy << "\n";
    });
}

struct PredictArgs {
    std::string features, manifest, model, out;
    bool scores = false;
};

void add_predict(CLI::App& app) {
    auto args = std::make_shared<PredictArgs>();
    CLI::App* cmd = app.add_subcommand("predict", "label images by maximum svm score");
    cmd->add_option("--features", args->features)->required();
    cmd->add_option("--manifest", args->manifest)->required();
    cmd->add_option("--model", args->model)->required();
    cmd->add_flag("--scores", args->scores, "append per-class scores");
    cmd->add_option("--out", args->out, "write TSV instead of stdout");
    cmd->callback([args] {
        auto [rows, manifest] = load_features(args->features, args->manifest);
        const LinearOvaModel model = read_svm(args->model);
        std::ostringstream out;
        for (Eigen::Index i = 0; i < rows.rows(); ++i) {
            const auto [label, score] = predict(model, rows.row(i).transpose());
            out << manifest.image_ids[static_cast<std::size_t>(i)] << '\t' << label;
            if (args->scores)
                for (Eigen::Index c = 0; c < score.size(); ++c) out << '\t' << score[c];
            out << '\n';
        }
        if (args->out.empty())
            std::cout << out.str();
        else
            io::atomic_write(args->out, std::move(out).str());
    });
}

struct EvalArgs {
    std::string features, manifest, model;
    std::vector<std::string> splits;  // features.bin:manifest.tsv
};

void add_eval(CLI::App& app) {
    auto args = std::make_shared<EvalArgs>();
    CLI::App* cmd = app.add_subcommand("eval", "accuracy metrics on labeled features");
    cmd->add_option("--features", args->features);
    cmd->add_option("--manifest", args->manifest);
    cmd->add_option("--model", args->model)->required();
    cmd->add_option("--splits", args->splits,
                    "features.bin:manifest.tsv pairs; reports the split average")
        ->delimiter(',');
    cmd->callback([args] {
        const LinearOvaModel model = read_svm(args->model);
        std::vector<std::pair<std::string, std::string>> jobs;
        if (!args->features.empty() && !args->manifest.empty())
            jobs.emplace_back(args->features, args->manifest);
        for (const std::string& split : args->splits) {
            const auto colon = split.find(':');
            if (colon == std::string::npos)
                throw Error(ErrorCode::InvalidConfig,
                            "eval: --splits entries look like features.bin:manifest.tsv");
            jobs.emplace_back(split.substr(0, colon), split.substr(colon + 1));
        }
        if (jobs.empty())
            throw Error(ErrorCode::InvalidConfig, "eval: need --features/--manifest or --splits");

        double sum = 0.0;
        for (std::size_t s = 0; s < jobs.size(); ++s) {
            auto [rows, manifest] = load_features(jobs[s].first, jobs[s].second);
            const EvalReport report = evaluate(model, rows, required_labels(manifest));
            sum += report.overall_accuracy;
            if (jobs.size() == 1) {
                print_eval(report);
            } else {
                std::cout << "split_" << s << "_accuracy\t" << report.overall_accuracy << "\n";
            }
        }
        if (jobs.size() > 1)
            std::cout << "mean_accuracy\t" << sum / static_cast<double>(jobs.size()) << "\n";
    });
}

struct RunArgs {
    std::string config;
    std::string out_dir;
    bool paper_defaults = false;
    bool print_config = false;
};

void add_run(CLI::App& app) {
    auto args = std::make_shared<RunArgs>();
    CLI::App* cmd = app.add_subcommand("run", "full pipeline from a config file");
    cmd->add_option("--config", args->config);
    cmd->add_flag("--paper-defaults", args->paper_defaults, "use the built-in operating points");
    cmd->add_option("--out-dir", args->out_dir, "override output_dir");
    cmd->add_flag("--print-config", args->print_config, "emit the effective config and exit");
    cmd->callback([args] {
        PipelineConfig config;
        if (args->paper_defaults)
            config = paper_defaults_config();
        else if (!args->config.empty())
            config = load_config(args->config);
        else
            throw Error(ErrorCode::InvalidConfig, "run: need --config or --paper-defaults");
        if (!args->out_dir.empty()) config.output_dir = args->out_dir;
        if (args->print_config) {
            std::cout << config_to_json(config);
            return;
        }
        const RunResult result = run_pipeline(config);
        print_eval(result.eval);
        std::cout << "report\t" << result.report_path << "\n";
    });
}

void add_compare(CLI::App& app) {
    auto args = std::make_shared<RunArgs>();
    auto methods = std::make_shared<std::vector<std::string>>(
        std::vector<std::string>{"vsad", "fv", "vlad", "avgpool"});
    auto out = std::make_shared<std::string>();
    CLI::App* cmd = app.add_subcommand("compare", "run several encoders over shared inputs");
    cmd->add_option("--config", args->config);
    cmd->add_flag("--paper-defaults", args->paper_defaults);
    cmd->add_option("--out-dir", args->out_dir, "override output_dir");
    cmd->add_option("--methods", *methods)->delimiter(',');
    cmd->add_option("--out", *out, "also write the table to a file");
    cmd->callback([args, methods, out] {
        PipelineConfig config;
        if (args->paper_defaults)
            config = paper_defaults_config();
        else if (!args->config.empty())
            config = load_config(args->config);
        else
            throw Error(ErrorCode::InvalidConfig, "compare: need --config or --paper-defaults");
        if (!args->out_dir.empty()) config.output_dir = args->out_dir;
        const std::string table = compare_table(compare_encoders(config, *methods));
        std::cout << table;
        if (!out->empty()) io::atomic_write(*out, table);
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vector of semantically aggregated descriptors: pipeline tools"};
    app.require_subcommand(1);
    add_synth(app);
    add_sample_grid(app);
    add_build_codebook(app);
    add_select(app);
    add_kmeans_fit(app);
    add_gmm_fit(app);
    add_pca_fit(app);
    add_encode(app);
    add_train(app);
    add_predict(app);
    add_eval(app);
    add_run(app);
    add_compare(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
