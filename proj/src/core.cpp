#include "vsad/core.hpp"

#include <algorithm>
#include <cmath>

namespace vsad {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::MismatchedRows: return "MismatchedRows";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::DegenerateRow: return "DegenerateRow";
        case ErrorCode::InconsistentDim: return "InconsistentDim";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
        case ErrorCode::TruncatedFile: return "TruncatedFile";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::InvariantViolation: return "InvariantViolation";
        case ErrorCode::ScaleTooLarge: return "ScaleTooLarge";
        case ErrorCode::EmptyScales: return "EmptyScales";
        case ErrorCode::InvalidModel: return "InvalidModel";
        case ErrorCode::EmptyPopulation: return "EmptyPopulation";
        case ErrorCode::DimMismatch: return "DimMismatch";
        case ErrorCode::InactiveSelected: return "InactiveSelected";
        case ErrorCode::EmptyImage: return "EmptyImage";
        case ErrorCode::TooFewPoints: return "TooFewPoints";
        case ErrorCode::MissingLabels: return "MissingLabels";
        case ErrorCode::KTooLarge: return "KTooLarge";
        case ErrorCode::SingleClass: return "SingleClass";
        case ErrorCode::EmptyFeatures: return "EmptyFeatures";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "UnknownError";
}

const char* layout_name(Layout layout) {
    switch (layout) {
        case Layout::Vsad: return "vsad";
        case Layout::Fv: return "fv";
        case Layout::Vlad: return "vlad";
        case Layout::AvgPool: return "avgpool";
    }
    return "unknown";
}

Layout layout_from_name(const std::string& name) {
    if (name == "vsad") return Layout::Vsad;
    if (name == "fv") return Layout::Fv;
    if (name == "vlad") return Layout::Vlad;
    if (name == "avgpool") return Layout::AvgPool;
    throw Error(ErrorCode::ParseError, "unknown encoding layout '" + name + "'");
}

bool PatchManifest::all_labeled() const {
    return std::all_of(labels.begin(), labels.end(), [](int l) { return l >= 0; });
}

int PatchManifest::n_categories() const {
    int max_label = -1;
    for (int l : labels) max_label = std::max(max_label, l);
    return max_label + 1;
}

void PatchManifest::check() const {
    if (image_ids.size() != patch_ranges.size() || image_ids.size() != labels.size())
        throw Error(ErrorCode::InvariantViolation, "manifest field lengths disagree");
    std::size_t expected_start = 0;
    for (std::size_t i = 0; i < patch_ranges.size(); ++i) {
        const PatchRange& r = patch_ranges[i];
        if (r.end < r.start)
            throw Error(ErrorCode::InvariantViolation,
                        "manifest range end < start for image " + image_ids[i]);
        if (r.start != expected_start)
            throw Error(ErrorCode::InvariantViolation,
                        "manifest ranges must be sorted, disjoint and contiguous from 0");
        expected_start = r.end;
        if (labels[i] < kNoLabel)
            throw Error(ErrorCode::InvariantViolation, "negative label in manifest");
    }
}

void EncodedVector::check() const {
    if (data.size() != expected_length())
        throw Error(ErrorCode::InvariantViolation, "encoded vector length does not match layout");
    if (!data.allFinite()) throw Error(ErrorCode::NonFinite, "encoded vector has NaN/Inf");
    if (normalized) {
        double n = data.norm();
        if (n != 0.0 && std::abs(n - 1.0) > 1e-9)
            throw Error(ErrorCode::InvariantViolation, "normalized vector has non-unit norm");
    }
}

void Bundle::check() const {
    manifest.check();
    if (desc.n_patches() != prob.n_patches() ||
        manifest.coverage() != static_cast<std::size_t>(desc.n_patches()))
        throw Error(ErrorCode::MismatchedRows,
                    "bundle descriptor rows, probability rows and manifest coverage disagree");
}

ValidationReport validate_bundle(const DescriptorMatrix& desc, ProbabilityMatrix& prob,
                                 const PatchManifest& manifest) {
    manifest.check();
    const std::size_t n = static_cast<std::size_t>(desc.n_patches());
    if (static_cast<std::size_t>(prob.n_patches()) != n || manifest.coverage() != n)
        throw Error(ErrorCode::MismatchedRows,
                    "descriptor rows, probability rows and manifest coverage disagree");
    if (!desc.data.allFinite()) throw Error(ErrorCode::NonFinite, "descriptor matrix has NaN/Inf");
    if (!prob.data.allFinite()) throw Error(ErrorCode::NonFinite, "probability matrix has NaN/Inf");

    ValidationReport report;
    report.n_rows = n;
    if (prob.n_classes() == 0) {  // descriptor-only bundle (e.g. image features)
        report.ok = true;
        return report;
    }
    for (Eigen::Index i = 0; i < prob.data.rows(); ++i) {
        for (Eigen::Index j = 0; j < prob.data.cols(); ++j) {
            double v = prob.data(i, j);
            if (v < -1e-9)
                throw Error(ErrorCode::DegenerateRow,
                            "negative probability at row " + std::to_string(i));
            if (v < 0.0) prob.data(i, j) = 0.0;
        }
        double sum = prob.data.row(i).sum();
        if (sum < 0.5 || sum > 2.0)
            throw Error(ErrorCode::DegenerateRow,
                        "probability row " + std::to_string(i) + " sums to " + std::to_string(sum));
        double drift = std::abs(sum - 1.0);
        report.max_row_sum_drift = std::max(report.max_row_sum_drift, drift);
        if (drift > 1e-9) {
            prob.data.row(i) /= sum;
            report.renormalized_rows.push_back(static_cast<std::size_t>(i));
        }
    }
    report.n_renormalized = report.renormalized_rows.size();
    report.ok = true;
    return report;
}

Vector signed_sqrt(const Vector& v) {
    Vector out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out[i] = std::copysign(std::sqrt(std::abs(v[i])), v[i]);
    return out;
}

EncodedVector normalize(const EncodedVector& v) {
    if (!v.data.allFinite()) throw Error(ErrorCode::NonFinite, "cannot normalize NaN/Inf vector");
    EncodedVector out = v;
    out.data = signed_sqrt(v.data);
    double n = out.data.norm();
    if (n > 0.0) out.data /= n;
    out.normalized = true;
    return out;
}

EncodedVector concat_blocks(const std::vector<std::pair<Vector, Vector>>& blocks, Layout layout) {
    if (blocks.empty()) throw Error(ErrorCode::InconsistentDim, "no blocks to concatenate");
    const Eigen::Index d = blocks.front().first.size();
    EncodedVector out;
    out.layout = layout;
    out.k = static_cast<Eigen::Index>(blocks.size());
    out.d = d;
    out.data.resize(2 * out.k * d);
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        const auto& [s, g] = blocks[k];
        if (s.size() != d || g.size() != d)
            throw Error(ErrorCode::InconsistentDim, "block dimensions disagree");
        out.data.segment(static_cast<Eigen::Index>(2 * k) * d, d) = s;
        out.data.segment(static_cast<Eigen::Index>(2 * k + 1) * d, d) = g;
    }
    return out;
}

std::vector<std::pair<Vector, Vector>> extract_blocks(const EncodedVector& v) {
    if (v.layout != Layout::Vsad && v.layout != Layout::Fv)
        throw Error(ErrorCode::InconsistentDim, "extract_blocks requires a 2KD layout");
    v.check();
    std::vector<std::pair<Vector, Vector>> blocks;
    blocks.reserve(static_cast<std::size_t>(v.k));
    for (Eigen::Index k = 0; k < v.k; ++k)
        blocks.emplace_back(v.data.segment(2 * k * v.d, v.d), v.data.segment((2 * k + 1) * v.d, v.d));
    return blocks;
}

}  // namespace vsad
