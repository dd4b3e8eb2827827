#ifndef VSAD_ENCODE_HPP
#define VSAD_ENCODE_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vsad/codebook.hpp"
#include "vsad/core.hpp"

namespace vsad {

struct VsadConfig {
    const SemanticCodebook* codebook = nullptr;
    // Original codeword indices to encode against, ascending. When set,
    // codebook statistics are restricted to the subset and the priors are
    // renormalized over it (unless subset_full_pi reuses the full priors).
    std::optional<std::vector<int>> selected;
    bool normalize = true;
    bool subset_full_pi = false;
};

// Content-derived patch ordering (lexicographic over descriptor row, then
// weight row). Accumulating in this order makes every aggregation output
// independent of the input patch order, bit for bit.
std::vector<Eigen::Index> canonical_patch_order(const Matrix& desc, const Matrix& weights);

// The shared first/second order aggregation kernel:
//   S_k = (1/sqrt(pi_k)) sum_t w_t^k (f_t - mu_k) / sigma_k
//   G_k = (1/sqrt(pi_k)) sum_t w_t^k [ (f_t - mu_k)^2 / sigma_k^2 - 1 ]
// with blocks interleaved S_1|G_1|...|S_K|G_K, not normalized. Weights are
// semantic probabilities for VSAD and GMM responsibilities for the Fisher
// vector; inactive codewords contribute zero blocks.
EncodedVector aggregate_soft_blocks(const Matrix& desc, const Matrix& weights, const Vector& pi,
                                    const Matrix& mu, const Matrix& sigma,
                                    const std::vector<bool>& active, Layout layout = Layout::Vsad);

// Encodes one image's patches against the semantic codebook.
EncodedVector encode_vsad(const DescriptorMatrix& desc, const ProbabilityMatrix& prob,
                          const VsadConfig& cfg);

// Per-image encoding over a whole bundle; output order follows the manifest
// and each vector equals the single-image encode_vsad result.
std::vector<std::pair<std::string, EncodedVector>> encode_batch(const DescriptorMatrix& desc,
                                                                const ProbabilityMatrix& prob,
                                                                const PatchManifest& manifest,
                                                                const VsadConfig& cfg);

}  // namespace vsad

#endif
