#ifndef VSAD_BENCHMARK_HPP
#define VSAD_BENCHMARK_HPP

#include <cstdint>
#include <vector>

#include "vsad/core.hpp"
#include "vsad/synth.hpp"

namespace vsad {

// Patch noise level of the standard benchmark, chosen so the generated
// per-patch posteriors average about two bits of entropy over the 50 objects
// at temperature 2 (measured once over the five benchmark seeds, then fixed).
inline constexpr double kBenchmarkStddev = 0.27;

// The standard seeded synthetic benchmark: 10 categories over 25 antipodal
// object pairs in 16 dimensions, 40 train / 20 test images per category,
// 100 patches per image. Preferences live in the first 10 pairs (overlapping
// windows of 2), so pairs 10..24 are background shared equally by every
// category and most codewords carry no category signal on their own.
struct BenchmarkSpec {
    int n_categories = 10;
    int n_objects = 50;
    int dim = 16;
    int train_per_category = 40;
    int test_per_category = 20;
    int patches_per_image = 100;
    int preferred_pairs = 2;
    int preferred_pool = 10;
    double preferred_mass = 0.5;
    double mean_scale = 1.0;
    double temperature = 2.0;
    double stddev = kBenchmarkStddev;
};

PlantedModel benchmark_model(const BenchmarkSpec& spec, std::uint64_t seed);

struct BenchmarkData {
    Bundle train;
    Bundle test;
};

// Generates (train + test) images per category in one pass and splits by
// within-category image index, so the test images are the same regardless of
// how many train images precede them.
BenchmarkData make_benchmark_data(const BenchmarkSpec& spec, std::uint64_t seed);

// New bundle holding the given images (by index) in the given order.
Bundle take_images(const Bundle& all, const std::vector<std::size_t>& image_indices);

}  // namespace vsad

#endif
