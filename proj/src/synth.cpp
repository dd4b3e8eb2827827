#include "vsad/synth.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace vsad {

Vector PlantedModel::global_mixture() const {
    return category_mixtures.colwise().mean();
}

void PlantedModel::check() const {
    if (n_categories < 1 || n_objects < 1 || descriptor_dim < 1)
        throw Error(ErrorCode::InvalidModel, "model counts must be >= 1");
    if (object_means.rows() != n_objects || object_means.cols() != descriptor_dim)
        throw Error(ErrorCode::InvalidModel, "object_means shape mismatch");
    if (category_mixtures.rows() != n_categories || category_mixtures.cols() != n_objects)
        throw Error(ErrorCode::InvalidModel, "category_mixtures shape mismatch");
    if (!(object_stddev > 0.0) || !(temperature > 0.0))
        throw Error(ErrorCode::InvalidModel, "stddev and temperature must be positive");
    if (!object_means.allFinite() || !category_mixtures.allFinite())
        throw Error(ErrorCode::InvalidModel, "model has NaN/Inf");
    if ((category_mixtures.array() < 0.0).any())
        throw Error(ErrorCode::InvalidModel, "negative mixture weight");
    for (Eigen::Index c = 0; c < category_mixtures.rows(); ++c)
        if (std::abs(category_mixtures.row(c).sum() - 1.0) > 1e-9)
            throw Error(ErrorCode::InvalidModel,
                        "mixture row " + std::to_string(c) + " does not sum to 1");
}

PlantedModel make_planted_model(int n_categories, int n_objects, int descriptor_dim,
                                double object_stddev, double temperature, std::uint64_t seed,
                                int preferred_per_cat, double preferred_mass, double mean_scale) {
    if (preferred_per_cat < 1 || preferred_per_cat > n_objects)
        throw Error(ErrorCode::InvalidModel, "preferred_per_cat out of range");
    if (preferred_mass <= 0.0 || preferred_mass > 1.0)
        throw Error(ErrorCode::InvalidModel, "preferred_mass must be in (0, 1]");

    PlantedModel m;
    m.n_categories = n_categories;
    m.n_objects = n_objects;
    m.descriptor_dim = descriptor_dim;
    m.object_stddev = object_stddev;
    m.temperature = temperature;
    m.seed = seed;

    // Means use a dedicated stream so patch draws never perturb them.
    Rng means_rng = Rng(seed).stream(0x6D65616E73ULL);  // "means"
    m.object_means.resize(n_objects, descriptor_dim);
    for (Eigen::Index v = 0; v < n_objects; ++v)
        for (Eigen::Index j = 0; j < descriptor_dim; ++j)
            m.object_means(v, j) = mean_scale * means_rng.next_normal();

    m.category_mixtures.setZero(n_categories, n_objects);
    const double rest = n_objects > preferred_per_cat
                            ? (1.0 - preferred_mass) / (n_objects - preferred_per_cat)
                            : 0.0;
    for (int c = 0; c < n_categories; ++c) {
        m.category_mixtures.row(c).setConstant(rest);
        for (int j = 0; j < preferred_per_cat; ++j) {
            int v = (c * preferred_per_cat + j) % n_objects;
            m.category_mixtures(c, v) = preferred_mass / preferred_per_cat;
        }
        m.category_mixtures.row(c) /= m.category_mixtures.row(c).sum();
    }
    m.check();
    return m;
}

PlantedModel make_paired_model(int n_categories, int n_objects, int descriptor_dim,
                               double object_stddev, double temperature, std::uint64_t seed,
                               int preferred_pairs, double preferred_mass, double mean_scale,
                               int preferred_pool) {
    if (n_objects < 2 || n_objects % 2 != 0)
        throw Error(ErrorCode::InvalidModel, "paired model needs an even object count");
    const int n_pairs = n_objects / 2;
    if (preferred_pairs < 1 || preferred_pairs > n_pairs)
        throw Error(ErrorCode::InvalidModel, "preferred_pairs out of range");
    if (preferred_mass <= 0.0 || preferred_mass > 1.0)
        throw Error(ErrorCode::InvalidModel, "preferred_mass must be in (0, 1]");
    if (preferred_pool < 0 || preferred_pool > n_pairs)
        throw Error(ErrorCode::InvalidModel, "preferred_pool out of range");
    if (preferred_pool > 0 && preferred_pairs > preferred_pool)
        throw Error(ErrorCode::InvalidModel, "preferred_pairs exceeds preferred_pool");
    if (preferred_pairs == n_pairs) preferred_mass = 1.0;

    PlantedModel m;
    m.n_categories = n_categories;
    m.n_objects = n_objects;
    m.descriptor_dim = descriptor_dim;
    m.object_stddev = object_stddev;
    m.temperature = temperature;
    m.seed = seed;

    Rng pair_rng = Rng(seed).stream(0x7061697273ULL);  // "pairs"
    m.object_means.resize(n_objects, descriptor_dim);
    for (int p = 0; p < n_pairs; ++p) {
        Vector g(descriptor_dim);
        for (Eigen::Index j = 0; j < descriptor_dim; ++j) g[j] = pair_rng.next_normal();
        const double norm = g.norm();
        if (norm < 1e-12) g[0] = 1.0;
        g *= mean_scale / std::max(norm, 1e-12);
        m.object_means.row(2 * p) = g.transpose();
        m.object_means.row(2 * p + 1) = -g.transpose();
    }

    m.category_mixtures.setZero(n_categories, n_objects);
    const double rest_pair_mass = n_pairs > preferred_pairs
                                      ? (1.0 - preferred_mass) / (n_pairs - preferred_pairs)
                                      : 0.0;
    for (int c = 0; c < n_categories; ++c) {
        m.category_mixtures.row(c).setConstant(rest_pair_mass / 2.0);
        for (int j = 0; j < preferred_pairs; ++j) {
            // With a pool, preferences stay inside the first `preferred_pool`
            // pairs (overlapping windows); otherwise they stride across all
            // pairs so each category gets a disjoint-as-possible slice.
            const int p = preferred_pool > 0 ? (c + j) % preferred_pool
                                             : (c * preferred_pairs + j) % n_pairs;
            const double w = preferred_mass / preferred_pairs / 2.0;
            m.category_mixtures(c, 2 * p) = w;
            m.category_mixtures(c, 2 * p + 1) = w;
        }
        m.category_mixtures.row(c) /= m.category_mixtures.row(c).sum();
    }
    for (int a = 0; a < n_categories; ++a)
        for (int b = a + 1; b < n_categories; ++b)
            if (m.category_mixtures.row(a) == m.category_mixtures.row(b))
                throw Error(ErrorCode::InvalidModel,
                            "categories " + std::to_string(a) + " and " + std::to_string(b) +
                                " have identical mixtures; adjust preferred_pairs");
    m.check();
    return m;
}

namespace {

Vector log_global_prior(const PlantedModel& model) {
    Vector global = model.global_mixture();
    Vector out(global.size());
    for (Eigen::Index v = 0; v < global.size(); ++v)
        out[v] = global[v] > 0.0 ? std::log(global[v])
                                 : -std::numeric_limits<double>::infinity();
    return out;
}

Vector posterior_from_logprior(const PlantedModel& model, const Vector& log_prior,
                               const Vector& f) {
    const double inv_two_var = 1.0 / (2.0 * model.object_stddev * model.object_stddev);
    Vector logit(model.n_objects);
    for (Eigen::Index v = 0; v < model.n_objects; ++v)
        logit[v] = (log_prior[v] -
                    (f - model.object_means.row(v).transpose()).squaredNorm() * inv_two_var) /
                   model.temperature;
    const double top = logit.maxCoeff();
    Vector p = (logit.array() - top).exp();
    p /= p.sum();
    return p;
}

}  // namespace

Vector posterior(const PlantedModel& model, const Vector& f) {
    model.check();
    if (f.size() != model.descriptor_dim)
        throw Error(ErrorCode::DimMismatch, "descriptor dimension mismatch");
    return posterior_from_logprior(model, log_global_prior(model), f);
}

std::tuple<DescriptorMatrix, ProbabilityMatrix, PatchManifest> generate(
    const PlantedModel& model, int images_per_category, int patches_per_image) {
    model.check();
    if (images_per_category < 1 || patches_per_image < 1)
        throw Error(ErrorCode::InvalidModel, "counts must be >= 1");

    const Eigen::Index n_images =
        static_cast<Eigen::Index>(model.n_categories) * images_per_category;
    const Eigen::Index n = n_images * patches_per_image;
    DescriptorMatrix desc{Matrix(n, model.descriptor_dim)};
    ProbabilityMatrix prob{Matrix(n, model.n_objects)};
    PatchManifest manifest;
    manifest.image_ids.reserve(static_cast<std::size_t>(n_images));
    manifest.patch_ranges.reserve(static_cast<std::size_t>(n_images));
    manifest.labels.reserve(static_cast<std::size_t>(n_images));

    const Rng root(model.seed);
    const Vector log_prior = log_global_prior(model);
    Eigen::Index row = 0;
    for (int c = 0; c < model.n_categories; ++c) {
        const auto mixture_row = model.category_mixtures.row(c);
        std::vector<double> weights(mixture_row.begin(), mixture_row.end());
        for (int i = 0; i < images_per_category; ++i) {
            char id[64];
            std::snprintf(id, sizeof(id), "c%03d_i%05d", c, i);
            manifest.image_ids.emplace_back(id);
            manifest.patch_ranges.push_back({static_cast<std::size_t>(row),
                                             static_cast<std::size_t>(row + patches_per_image)});
            manifest.labels.push_back(c);
            for (int t = 0; t < patches_per_image; ++t, ++row) {
                Rng patch_rng = root.stream(static_cast<std::uint64_t>(c),
                                            static_cast<std::uint64_t>(i),
                                            static_cast<std::uint64_t>(t));
                const std::size_t v = patch_rng.categorical(weights);
                Vector f(model.descriptor_dim);
                for (Eigen::Index j = 0; j < model.descriptor_dim; ++j)
                    f[j] = model.object_means(static_cast<Eigen::Index>(v), j) +
                           model.object_stddev * patch_rng.next_normal();
                desc.data.row(row) = f.transpose();
                prob.data.row(row) = posterior_from_logprior(model, log_prior, f).transpose();
            }
        }
    }
    manifest.check();
    return {std::move(desc), std::move(prob), std::move(manifest)};
}

double mean_row_entropy_bits(const ProbabilityMatrix& prob) {
    if (prob.n_patches() == 0) return 0.0;
    double total = 0.0;
    for (Eigen::Index i = 0; i < prob.data.rows(); ++i) {
        double h = 0.0;
        for (Eigen::Index j = 0; j < prob.data.cols(); ++j) {
            double p = prob.data(i, j);
            if (p > 0.0) h -= p * std::log2(p);
        }
        total += h;
    }
    return total / static_cast<double>(prob.n_patches());
}

}  // namespace vsad
