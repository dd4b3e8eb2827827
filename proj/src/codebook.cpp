#include "vsad/codebook.hpp"

#include <algorithm>
#include <cmath>

namespace vsad {

void SemanticCodebook::check() const {
    if (pi.size() != k || mass.size() != k || mu.rows() != k || sigma.rows() != k ||
        static_cast<Eigen::Index>(active.size()) != k)
        throw Error(ErrorCode::InvariantViolation, "codebook field sizes disagree");
    if (mu.cols() != d || sigma.cols() != d)
        throw Error(ErrorCode::InvariantViolation, "codebook dimension fields disagree");
    if (!pi.allFinite() || !mu.allFinite() || !sigma.allFinite() || !mass.allFinite())
        throw Error(ErrorCode::NonFinite, "codebook has NaN/Inf");
    if (std::abs(pi.sum() - 1.0) > 1e-9)
        throw Error(ErrorCode::InvariantViolation, "codebook priors do not sum to 1");
    const double sigma_floor = std::sqrt(variance_floor);
    if ((sigma.array() < sigma_floor * (1.0 - 1e-12)).any())
        throw Error(ErrorCode::InvariantViolation, "codebook sigma below variance floor");
    double mass_sum = mass.sum();
    if (total_mass > 0.0 && std::abs(mass_sum - total_mass) > 1e-6 * total_mass)
        throw Error(ErrorCode::InvariantViolation, "codebook mass does not sum to total_mass");
}

SemanticCodebook build_codebook(const DescriptorMatrix& desc, const ProbabilityMatrix& prob,
                                const CodebookOptions& opts) {
    const Eigen::Index n = desc.n_patches();
    if (n == 0) throw Error(ErrorCode::EmptyPopulation, "cannot build codebook from 0 patches");
    if (prob.n_patches() != n)
        throw Error(ErrorCode::MismatchedRows, "descriptor/probability row counts disagree");

    SemanticCodebook cb;
    cb.k = prob.n_classes();
    cb.d = desc.dim();
    cb.variance_floor = opts.variance_floor;
    cb.total_mass = static_cast<double>(n);

    cb.mass = prob.data.colwise().sum();
    cb.pi = cb.mass / static_cast<double>(n);

    const double activation_mass = opts.activation_threshold * static_cast<double>(n);
    cb.active.resize(static_cast<std::size_t>(cb.k));
    for (Eigen::Index k = 0; k < cb.k; ++k)
        cb.active[static_cast<std::size_t>(k)] = cb.mass[k] >= activation_mass;

    // First moment: mu = diag(1/mass) * P^T F over active codewords.
    Matrix weighted_sum = prob.data.transpose() * desc.data;  // K x D
    cb.mu.setZero(cb.k, cb.d);
    for (Eigen::Index k = 0; k < cb.k; ++k)
        if (cb.active[static_cast<std::size_t>(k)]) cb.mu.row(k) = weighted_sum.row(k) / cb.mass[k];

    // Second moment per dimension: E_k[f^2] - mu_k^2 is avoided in favor of the
    // centered sum, which keeps the self-encoding residual at rounding level.
    cb.sigma.setZero(cb.k, cb.d);
    const double sigma_floor = std::sqrt(opts.variance_floor);
    Matrix centered_sq = Matrix::Zero(cb.k, cb.d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < cb.k; ++k) {
            const double p = prob.data(i, k);
            if (p == 0.0 || !cb.active[static_cast<std::size_t>(k)]) continue;
            centered_sq.row(k) += p * (desc.data.row(i) - cb.mu.row(k)).array().square().matrix();
        }
    }
    for (Eigen::Index k = 0; k < cb.k; ++k) {
        if (!cb.active[static_cast<std::size_t>(k)]) {
            cb.sigma.row(k).setConstant(sigma_floor);
            continue;
        }
        for (Eigen::Index j = 0; j < cb.d; ++j) {
            double var = std::max(centered_sq(k, j) / cb.mass[k], opts.variance_floor);
            cb.sigma(k, j) = std::sqrt(var);
        }
    }
    return cb;
}

SemanticCodebook restrict_codebook(const SemanticCodebook& codebook,
                                   const std::vector<int>& selected, bool renormalize_pi) {
    if (selected.empty())
        throw Error(ErrorCode::KTooLarge, "empty codeword selection");
    if (!std::is_sorted(selected.begin(), selected.end()) ||
        std::adjacent_find(selected.begin(), selected.end()) != selected.end())
        throw Error(ErrorCode::InvariantViolation, "selected indices must be sorted and unique");

    SemanticCodebook sub;
    sub.k = static_cast<Eigen::Index>(selected.size());
    sub.d = codebook.d;
    sub.variance_floor = codebook.variance_floor;
    sub.provenance = codebook.provenance;
    sub.pi.resize(sub.k);
    sub.mass.resize(sub.k);
    sub.mu.resize(sub.k, sub.d);
    sub.sigma.resize(sub.k, sub.d);
    sub.active.resize(static_cast<std::size_t>(sub.k), true);
    sub.selected_ids = selected;

    for (Eigen::Index i = 0; i < sub.k; ++i) {
        int idx = selected[static_cast<std::size_t>(i)];
        if (idx < 0 || idx >= codebook.k)
            throw Error(ErrorCode::DimMismatch, "selected index out of range");
        if (!codebook.active[static_cast<std::size_t>(idx)])
            throw Error(ErrorCode::InactiveSelected,
                        "codeword " + std::to_string(idx) + " is inactive");
        sub.mass[i] = codebook.mass[idx];
        sub.pi[i] = codebook.pi[idx];
        sub.mu.row(i) = codebook.mu.row(idx);
        sub.sigma.row(i) = codebook.sigma.row(idx);
    }
    if (renormalize_pi) {
        sub.pi /= sub.pi.sum();
        sub.total_mass = sub.mass.sum();
    } else {
        // Full-codebook priors retained; total mass keeps the original scale.
        sub.total_mass = 0.0;  // unknown under full-pi reuse, skip the mass check
    }
    return sub;
}

}  // namespace vsad
