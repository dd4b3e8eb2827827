#ifndef VSAD_CORE_HPP
#define VSAD_CORE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vsad/error.hpp"

namespace vsad {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// N x D patch descriptors, one row per patch.
struct DescriptorMatrix {
    Matrix data;

    DescriptorMatrix() = default;
    explicit DescriptorMatrix(Matrix m) : data(std::move(m)) {}

    Eigen::Index n_patches() const { return data.rows(); }
    Eigen::Index dim() const { return data.cols(); }
};

// N x K per-patch semantic probabilities; rows are distributions.
struct ProbabilityMatrix {
    Matrix data;

    ProbabilityMatrix() = default;
    explicit ProbabilityMatrix(Matrix m) : data(std::move(m)) {}

    Eigen::Index n_patches() const { return data.rows(); }
    Eigen::Index n_classes() const { return data.cols(); }
};

// Half-open row interval into the patch axis.
struct PatchRange {
    std::size_t start = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - start; }
    bool empty() const { return start == end; }
};

constexpr int kNoLabel = -1;

// Per-image bookkeeping: which patch rows belong to which image, plus an
// optional category label (required at train time, optional at encode time).
struct PatchManifest {
    std::vector<std::string> image_ids;
    std::vector<PatchRange> patch_ranges;
    std::vector<int> labels;  // kNoLabel where absent

    std::size_t n_images() const { return image_ids.size(); }
    std::size_t coverage() const {
        return patch_ranges.empty() ? 0 : patch_ranges.back().end;
    }
    bool all_labeled() const;
    int n_categories() const;  // max label + 1, or 0 if none labeled

    // Ranges must be sorted, disjoint, and jointly cover [0, n) starting at 0;
    // labels must be kNoLabel or non-negative. Throws InvariantViolation.
    void check() const;
};

enum class Layout { Vsad, Fv, Vlad, AvgPool };

const char* layout_name(Layout layout);
Layout layout_from_name(const std::string& name);

// An image-level representation: the 2KD interleaved [S_1,G_1,...,S_K,G_K]
// concatenation for vsad/fv, KD residual blocks for vlad, or a single
// D-dim block for avgpool.
struct EncodedVector {
    Vector data;
    Layout layout = Layout::Vsad;
    Eigen::Index k = 0;
    Eigen::Index d = 0;
    bool normalized = false;

    Eigen::Index expected_length() const {
        switch (layout) {
            case Layout::Vsad:
            case Layout::Fv: return 2 * k * d;
            case Layout::Vlad: return k * d;
            case Layout::AvgPool: return d;
        }
        return 0;
    }
    void check() const;
};

// One dataset split: descriptors, probabilities and the per-image manifest.
struct Bundle {
    DescriptorMatrix desc;
    ProbabilityMatrix prob;
    PatchManifest manifest;

    void check() const;  // row counts agree, manifest valid
};

struct ValidationReport {
    bool ok = false;
    std::size_t n_rows = 0;
    std::size_t n_renormalized = 0;
    double max_row_sum_drift = 0.0;  // max |sum - 1| before renormalization
    std::vector<std::size_t> renormalized_rows;
};

// Ingest-time consistency check. Verifies row-count agreement between the
// three parts, finiteness everywhere, and probability row sums. Rows whose
// sum lies in [0.5, 2.0] but drifts from 1 by more than 1e-9 are divided by
// their sum in place and flagged; entries in [-1e-9, 0) are clamped to 0.
// Throws MismatchedRows, NonFinite, or DegenerateRow (row sum outside
// [0.5, 2.0] or an entry below -1e-9). A zero-column probability block
// (descriptor-only bundle) skips the probability checks.
ValidationReport validate_bundle(const DescriptorMatrix& desc, ProbabilityMatrix& prob,
                                 const PatchManifest& manifest);

// Elementwise sign(x)*sqrt(|x|).
Vector signed_sqrt(const Vector& v);

// Signed square root followed by global L2 normalization, applied once over
// the whole concatenation. The zero vector passes through unchanged.
EncodedVector normalize(const EncodedVector& v);

// Interleaves per-codeword first/second order blocks as S_1|G_1|...|S_K|G_K.
EncodedVector concat_blocks(const std::vector<std::pair<Vector, Vector>>& blocks,
                            Layout layout = Layout::Vsad);

// Inverse of concat_blocks for vsad/fv layouts.
std::vector<std::pair<Vector, Vector>> extract_blocks(const EncodedVector& v);

}  // namespace vsad

#endif
