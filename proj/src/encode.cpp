#include "vsad/encode.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vsad {

namespace {

// Lexicographic row comparison: -1, 0, or 1.
int compare_rows(const Matrix& m, Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (m(a, c) < m(b, c)) return -1;
        if (m(a, c) > m(b, c)) return 1;
    }
    return 0;
}

struct PreparedEncoder {
    SemanticCodebook effective;
    std::vector<int> columns;  // probability columns to keep, ascending
};

PreparedEncoder prepare_encoder(const VsadConfig& cfg) {
    if (cfg.codebook == nullptr) {
        throw Error(ErrorCode::InvalidConfig, "encode: no codebook configured");
    }
    cfg.codebook->check();
    PreparedEncoder prep;
    if (cfg.selected.has_value()) {
        prep.effective = restrict_codebook(*cfg.codebook, *cfg.selected, !cfg.subset_full_pi);
        prep.columns = *cfg.selected;
    } else {
        prep.effective = *cfg.codebook;
        prep.columns.resize(static_cast<std::size_t>(cfg.codebook->k));
        std::iota(prep.columns.begin(), prep.columns.end(), 0);
    }
    return prep;
}

Matrix select_columns(const Matrix& m, const std::vector<int>& columns) {
    Matrix out(m.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        out.col(static_cast<Eigen::Index>(j)) = m.col(columns[j]);
    }
    return out;
}

EncodedVector encode_prepared(const Matrix& desc, const Matrix& prob, const PreparedEncoder& prep,
                              bool apply_normalize) {
    const SemanticCodebook& cb = prep.effective;
    if (desc.cols() != cb.d) {
        throw Error(ErrorCode::InconsistentDim,
                    "encode: descriptor dim " + std::to_string(desc.cols()) +
                        " does not match codebook dim " + std::to_string(cb.d));
    }
    const Matrix weights = select_columns(prob, prep.columns);
    EncodedVector enc =
        aggregate_soft_blocks(desc, weights, cb.pi, cb.mu, cb.sigma, cb.active, Layout::Vsad);
    return apply_normalize ? normalize(enc) : enc;
}

}  // namespace

std::vector<Eigen::Index> canonical_patch_order(const Matrix& desc, const Matrix& weights) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(desc.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        const int by_desc = compare_rows(desc, a, b);
        if (by_desc != 0) return by_desc < 0;
        return compare_rows(weights, a, b) < 0;
    });
    return order;
}

EncodedVector aggregate_soft_blocks(const Matrix& desc, const Matrix& weights, const Vector& pi,
                                    const Matrix& mu, const Matrix& sigma,
                                    const std::vector<bool>& active, Layout layout) {
    const Eigen::Index t_count = desc.rows();
    const Eigen::Index d = desc.cols();
    const Eigen::Index k = weights.cols();
    if (layout != Layout::Vsad && layout != Layout::Fv) {
        throw Error(ErrorCode::InvalidConfig, "aggregate: layout must carry S and G blocks");
    }
    if (weights.rows() != t_count) {
        throw Error(ErrorCode::MismatchedRows,
                    "aggregate: " + std::to_string(t_count) + " descriptor rows but " +
                        std::to_string(weights.rows()) + " weight rows");
    }
    if (mu.rows() != k || mu.cols() != d || sigma.rows() != k || sigma.cols() != d ||
        pi.size() != k || static_cast<Eigen::Index>(active.size()) != k) {
        throw Error(ErrorCode::DimMismatch, "aggregate: codeword statistics do not match K x D");
    }
    if (t_count == 0) {
        throw Error(ErrorCode::EmptyImage, "aggregate: no patches");
    }

    // Column-contiguous views of the per-codeword statistics.
    const Matrix desc_t = desc.transpose();
    const Matrix mu_t = mu.transpose();
    const Matrix inv_sigma_t = sigma.transpose().cwiseInverse();

    Matrix s_blocks = Matrix::Zero(d, k);
    Matrix g_blocks = Matrix::Zero(d, k);
    const std::vector<Eigen::Index> order = canonical_patch_order(desc, weights);
    Eigen::ArrayXd u(d);
    for (const Eigen::Index t : order) {
        const auto f = desc_t.col(t).array();
        for (Eigen::Index j = 0; j < k; ++j) {
            if (!active[static_cast<std::size_t>(j)]) continue;
            const double w = weights(t, j);
            if (w == 0.0) continue;
            u = (f - mu_t.col(j).array()) * inv_sigma_t.col(j).array();
            s_blocks.col(j).array() += w * u;
            g_blocks.col(j).array() += w * (u * u - 1.0);
        }
    }

    std::vector<std::pair<Vector, Vector>> blocks(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j) {
        auto& [s, g] = blocks[static_cast<std::size_t>(j)];
        if (active[static_cast<std::size_t>(j)]) {
            if (!(pi(j) > 0.0)) {
                throw Error(ErrorCode::InvalidModel, "aggregate: active codeword with zero prior");
            }
            const double scale = 1.0 / std::sqrt(pi(j));
            s = scale * s_blocks.col(j);
            g = scale * g_blocks.col(j);
        } else {
            s = Vector::Zero(d);
            g = Vector::Zero(d);
        }
    }
    return concat_blocks(blocks, layout);
}

EncodedVector encode_vsad(const DescriptorMatrix& desc, const ProbabilityMatrix& prob,
                          const VsadConfig& cfg) {
    const PreparedEncoder prep = prepare_encoder(cfg);
    if (desc.n_patches() != prob.n_patches()) {
        throw Error(ErrorCode::MismatchedRows, "encode: descriptor/probability row counts differ");
    }
    if (prob.n_classes() != cfg.codebook->k) {
        throw Error(ErrorCode::InconsistentDim,
                    "encode: probability columns do not match codebook size");
    }
    if (desc.n_patches() == 0) {
        throw Error(ErrorCode::EmptyImage, "encode: image has no patches");
    }
    return encode_prepared(desc.data, prob.data, prep, cfg.normalize);
}

std::vector<std::pair<std::string, EncodedVector>> encode_batch(const DescriptorMatrix& desc,
                                                                const ProbabilityMatrix& prob,
                                                                const PatchManifest& manifest,
                                                                const VsadConfig& cfg) {
    const PreparedEncoder prep = prepare_encoder(cfg);
    manifest.check();
    if (desc.n_patches() != prob.n_patches() ||
        static_cast<std::size_t>(desc.n_patches()) != manifest.coverage()) {
        throw Error(ErrorCode::MismatchedRows, "encode: bundle parts disagree on patch count");
    }
    if (prob.n_classes() != cfg.codebook->k) {
        throw Error(ErrorCode::InconsistentDim,
                    "encode: probability columns do not match codebook size");
    }
    std::vector<std::pair<std::string, EncodedVector>> out;
    out.reserve(manifest.n_images());
    for (std::size_t i = 0; i < manifest.n_images(); ++i) {
        const PatchRange& range = manifest.patch_ranges[i];
        if (range.empty()) {
            throw Error(ErrorCode::EmptyImage,
                        "encode: image '" + manifest.image_ids[i] + "' has no patches");
        }
        const auto rows = static_cast<Eigen::Index>(range.size());
        const auto start = static_cast<Eigen::Index>(range.start);
        const Matrix img_desc = desc.data.middleRows(start, rows);
        const Matrix img_prob = prob.data.middleRows(start, rows);
        out.emplace_back(manifest.image_ids[i],
                         encode_prepared(img_desc, img_prob, prep, cfg.normalize));
    }
    return out;
}

}  // namespace vsad
