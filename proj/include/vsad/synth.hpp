#ifndef VSAD_SYNTH_HPP
#define VSAD_SYNTH_HPP

#include <cstdint>
#include <tuple>

#include "vsad/core.hpp"
#include "vsad/rng.hpp"

namespace vsad {

// Planted generative model standing in for the patch descriptor/probability
// networks: V isotropic Gaussian object blobs in descriptor space, and per
// scene category a mixture over objects. Patches sample an object from the
// category mixture and a descriptor from that object's blob; the probability
// row is the analytic object posterior under the global (category-uniform)
// mixture, smoothed by the temperature.
struct PlantedModel {
    int n_categories = 0;
    int n_objects = 0;
    int descriptor_dim = 0;
    Matrix object_means;       // V x D
    double object_stddev = 1;  // isotropic
    Matrix category_mixtures;  // C x V, rows sum to 1
    double temperature = 1;
    std::uint64_t seed = 0;

    // Average of the category mixtures; the aggregation side has no access
    // to the scene label, so the posterior prior is category-uniform.
    Vector global_mixture() const;

    void check() const;  // throws InvalidModel
};

// Deterministic model construction from a seed. Object means have iid
// standard normal entries (times mean_scale). Category c concentrates
// preferred_mass uniformly on the preferred_per_cat objects
// {(c*preferred_per_cat + j) mod V}, the remainder uniformly on the rest.
PlantedModel make_planted_model(int n_categories, int n_objects, int descriptor_dim,
                                double object_stddev, double temperature, std::uint64_t seed,
                                int preferred_per_cat, double preferred_mass = 0.9,
                                double mean_scale = 1.0);

// Pair-structured variant: objects come in antipodal pairs (+g_p, -g_p) with
// equal within-pair mixture mass, so every category's expected descriptor is
// the zero vector and first-order pooling carries no category signal; the
// signal lives entirely in which pairs a category visits. With
// preferred_pool == 0, category c puts preferred_mass on the preferred_pairs
// pairs starting at pair (c*preferred_pairs) mod (V/2). With
// preferred_pool > 0, preferences are the overlapping windows
// {(c+j) mod preferred_pool} inside the first preferred_pool pairs, leaving
// the remaining pairs as background that every category visits at the same
// rate. Pair directions are unit vectors times mean_scale. Throws
// InvalidModel if two categories end up with identical mixtures.
PlantedModel make_paired_model(int n_categories, int n_objects, int descriptor_dim,
                               double object_stddev, double temperature, std::uint64_t seed,
                               int preferred_pairs, double preferred_mass = 0.8,
                               double mean_scale = 1.0, int preferred_pool = 0);

// Posterior over objects for one descriptor:
//   softmax_v( [log mix_global(v) - ||f - m_v||^2 / (2 sigma^2)] / temperature )
Vector posterior(const PlantedModel& model, const Vector& f);

// Draws images_per_category images per category, patches_per_image patches
// each. Each patch uses the stream keyed by (category, image, patch), so
// values are independent of generation order. Within a patch stream the
// draw order is: one categorical draw for the object, then descriptor_dim
// normals.
std::tuple<DescriptorMatrix, ProbabilityMatrix, PatchManifest> generate(
    const PlantedModel& model, int images_per_category, int patches_per_image);

// Mean Shannon entropy of the probability rows, in bits.
double mean_row_entropy_bits(const ProbabilityMatrix& prob);

}  // namespace vsad

#endif
