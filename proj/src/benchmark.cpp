#include "vsad/benchmark.hpp"

namespace vsad {

PlantedModel benchmark_model(const BenchmarkSpec& spec, std::uint64_t seed) {
    return make_paired_model(spec.n_categories, spec.n_objects, spec.dim, spec.stddev,
                             spec.temperature, seed, spec.preferred_pairs, spec.preferred_mass,
                             spec.mean_scale, spec.preferred_pool);
}

Bundle take_images(const Bundle& all, const std::vector<std::size_t>& image_indices) {
    all.check();
    Eigen::Index rows = 0;
    for (std::size_t i : image_indices) {
        if (i >= all.manifest.n_images())
            throw Error(ErrorCode::InvariantViolation, "image index out of range");
        rows += static_cast<Eigen::Index>(all.manifest.patch_ranges[i].size());
    }

    Bundle out;
    out.desc.data.resize(rows, all.desc.dim());
    out.prob.data.resize(rows, all.prob.n_classes());
    Eigen::Index at = 0;
    for (std::size_t i : image_indices) {
        const PatchRange& r = all.manifest.patch_ranges[i];
        const auto count = static_cast<Eigen::Index>(r.size());
        const auto start = static_cast<Eigen::Index>(r.start);
        out.desc.data.middleRows(at, count) = all.desc.data.middleRows(start, count);
        out.prob.data.middleRows(at, count) = all.prob.data.middleRows(start, count);
        out.manifest.image_ids.push_back(all.manifest.image_ids[i]);
        out.manifest.patch_ranges.push_back(
            {static_cast<std::size_t>(at), static_cast<std::size_t>(at + count)});
        out.manifest.labels.push_back(all.manifest.labels[i]);
        at += count;
    }
    out.check();
    return out;
}

BenchmarkData make_benchmark_data(const BenchmarkSpec& spec, std::uint64_t seed) {
    const PlantedModel model = benchmark_model(spec, seed);
    const int per_category = spec.train_per_category + spec.test_per_category;
    auto [desc, prob, manifest] = generate(model, per_category, spec.patches_per_image);
    Bundle all{std::move(desc), std::move(prob), std::move(manifest)};

    std::vector<std::size_t> train_idx, test_idx;
    for (int c = 0; c < spec.n_categories; ++c)
        for (int i = 0; i < per_category; ++i) {
            const auto global = static_cast<std::size_t>(c) * per_category + i;
            (i < spec.train_per_category ? train_idx : test_idx).push_back(global);
        }
    return {take_images(all, train_idx), take_images(all, test_idx)};
}

}  // namespace vsad
