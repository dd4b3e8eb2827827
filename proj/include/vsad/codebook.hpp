#ifndef VSAD_CODEBOOK_HPP
#define VSAD_CODEBOOK_HPP

#include <string>
#include <vector>

#include "vsad/core.hpp"

namespace vsad {

// Per-codeword prior, probability-weighted mean and per-dimension deviation
// built from a descriptor/probability population. One codeword per semantic
// class; codewords whose activation mass stays below the threshold are kept
// (index stability for selection) but marked inactive and encode to zero.
struct SemanticCodebook {
    Eigen::Index k = 0;
    Eigen::Index d = 0;
    Vector pi;      // priors, sum to 1 over all codewords
    Matrix mu;      // K x D semantic means
    Matrix sigma;   // K x D per-dimension deviations, floored
    Vector mass;    // activation mass N_k per codeword
    std::vector<bool> active;
    double total_mass = 0.0;
    double variance_floor = 0.0;
    std::string provenance;
    std::vector<int> selected_ids;  // original class indices, set for subset codebooks

    // Checks the structural invariants: shape agreement, pi simplex within
    // 1e-9, sigma >= sqrt(variance_floor), mass consistent with total_mass.
    void check() const;
};

struct CodebookOptions {
    double variance_floor = 1e-8;
    // Fraction of the total population mass below which a codeword is
    // considered never activated.
    double activation_threshold = 1e-8;
};

// Probability-weighted moments over the population:
//   mass_k = sum_i p_i^k,   pi_k = mass_k / N,
//   mu_k   = (1/mass_k) sum_i p_i^k f_i,
//   sigma_k^2 = max over the floor of (1/mass_k) sum_i p_i^k (f_i - mu_k)^2
// per dimension. Accumulation is sequential in 64-bit arithmetic.
SemanticCodebook build_codebook(const DescriptorMatrix& desc, const ProbabilityMatrix& prob,
                                const CodebookOptions& opts = {});

// Restricts a codebook to the given (sorted ascending) original codeword
// indices. mass/mu/sigma are per-codeword statistics and carry over
// unchanged; pi is renormalized over the subset when renormalize_pi is set,
// otherwise the full-codebook priors are reused. Selected indices must be
// active. The result records the original indices in selected_ids.
SemanticCodebook restrict_codebook(const SemanticCodebook& codebook,
                                   const std::vector<int>& selected, bool renormalize_pi = true);

}  // namespace vsad

#endif
