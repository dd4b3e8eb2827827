#include "vsad/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "json_util.hpp"
#include "vsad/encode.hpp"
#include "vsad/io.hpp"
#include "vsad/rng.hpp"

namespace vsad {

namespace {

constexpr double kTiny = 1e-12;

// Nearest center by squared distance, ties to the lowest index.
Eigen::Index nearest_center(const Matrix& centers, const Eigen::RowVectorXd& point,
                            double* best_d2_out = nullptr) {
    Eigen::Index best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
        const double d2 = (point - centers.row(c)).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best = c;
        }
    }
    if (best_d2_out != nullptr) *best_d2_out = best_d2;
    return best;
}

Matrix kmeanspp_init(const Matrix& pts, Eigen::Index k, Rng& rng) {
    const Eigen::Index n = pts.rows();
    Matrix centers(k, pts.cols());
    centers.row(0) = pts.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
    Vector d2 = (pts.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (Eigen::Index j = 1; j < k; ++j) {
        const double total = d2.sum();
        Eigen::Index pick;
        if (total > 0.0) {
            const double u = rng.next_double() * total;
            double acc = 0.0;
            pick = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc > u) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
        }
        centers.row(j) = pts.row(pick);
        d2 = d2.cwiseMin((pts.rowwise() - centers.row(j)).rowwise().squaredNorm());
    }
    return centers;
}

struct LloydResult {
    Matrix centers;
    double inertia = 0.0;
    std::vector<double> trace;
};

LloydResult lloyd_run(const Matrix& pts, Eigen::Index k, int max_iter, Rng rng) {
    const Eigen::Index n = pts.rows();
    LloydResult run;
    run.centers = kmeanspp_init(pts, k, rng);
    std::vector<Eigen::Index> assign(static_cast<std::size_t>(n), -1);
    Vector min_d2(n);

    for (int iter = 0;; ++iter) {
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index c = nearest_center(run.centers, pts.row(i), &min_d2[i]);
            if (c != assign[static_cast<std::size_t>(i)]) {
                assign[static_cast<std::size_t>(i)] = c;
                changed = true;
            }
        }
        run.inertia = min_d2.sum();
        run.trace.push_back(run.inertia);
        if (!changed || iter + 1 >= max_iter) break;

        Matrix sums = Matrix::Zero(k, pts.cols());
        std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(assign[static_cast<std::size_t>(i)]) += pts.row(i);
            ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
        }
        for (Eigen::Index c = 0; c < k; ++c)
            if (counts[static_cast<std::size_t>(c)] > 0)
                run.centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);

        // Re-seed empty clusters to the farthest points, one point each.
        std::vector<bool> used(static_cast<std::size_t>(n), false);
        for (Eigen::Index c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            Eigen::Index far = 0;
            double far_d2 = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (used[static_cast<std::size_t>(i)]) continue;
                if (min_d2[i] > far_d2) {
                    far_d2 = min_d2[i];
                    far = i;
                }
            }
            used[static_cast<std::size_t>(far)] = true;
            run.centers.row(c) = pts.row(far);
        }
    }
    return run;
}

// Per-point component log-densities plus log-weights; zero-weight components
// stay at -inf and drop out of every sum.
Matrix gmm_log_joint(const DiagonalGmm& gmm, const Matrix& pts) {
    const Eigen::Index n = pts.rows();
    Matrix log_joint(n, gmm.k);
    constexpr double kLog2Pi = 1.8378770664093454836;
    for (Eigen::Index c = 0; c < gmm.k; ++c) {
        if (!(gmm.weights[c] > 0.0)) {
            log_joint.col(c).setConstant(-std::numeric_limits<double>::infinity());
            continue;
        }
        double log_norm = std::log(gmm.weights[c]);
        for (Eigen::Index j = 0; j < gmm.d; ++j)
            log_norm -= 0.5 * (kLog2Pi + std::log(gmm.variances(c, j)));
        const auto inv_var = gmm.variances.row(c).cwiseInverse();
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto diff = pts.row(i) - gmm.means.row(c);
            log_joint(i, c) = log_norm - 0.5 * diff.cwiseAbs2().dot(inv_var);
        }
    }
    return log_joint;
}

double log_sum_exp_row(const Matrix& m, Eigen::Index row) {
    const double peak = m.row(row).maxCoeff();
    if (!std::isfinite(peak)) return peak;
    double sum = 0.0;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const double v = m(row, c);
        if (std::isfinite(v)) sum += std::exp(v - peak);
    }
    return peak + std::log(sum);
}

}  // namespace

void KMeansCodebook::check() const {
    if (k < 1 || d < 1 || centers.rows() != k || centers.cols() != d)
        throw Error(ErrorCode::InvalidModel, "kmeans codebook shape is inconsistent");
    if (!centers.allFinite()) throw Error(ErrorCode::NonFinite, "kmeans centers have NaN/Inf");
    if (!(inertia >= 0.0) || !std::isfinite(inertia))
        throw Error(ErrorCode::InvalidModel, "kmeans inertia must be finite and non-negative");
}

KMeansCodebook kmeans_fit(const DescriptorMatrix& desc, Eigen::Index k, const KMeansOptions& opts) {
    const Eigen::Index n = desc.n_patches();
    if (k < 1) throw Error(ErrorCode::InvalidConfig, "kmeans: K must be at least 1");
    if (n < k)
        throw Error(ErrorCode::TooFewPoints, "kmeans: " + std::to_string(n) + " points for K=" +
                                                 std::to_string(k));
    if (opts.max_iter < 1 || opts.restarts < 1)
        throw Error(ErrorCode::InvalidConfig, "kmeans: max_iter and restarts must be positive");
    if (!desc.data.allFinite()) throw Error(ErrorCode::NonFinite, "kmeans: input has NaN/Inf");

    const Rng root(opts.seed);
    LloydResult best;
    bool have_best = false;
    for (int r = 0; r < opts.restarts; ++r) {
        LloydResult run = lloyd_run(desc.data, k, opts.max_iter,
                                    root.stream(static_cast<std::uint64_t>(r)));
        if (!have_best || run.inertia < best.inertia) {
            best = std::move(run);
            have_best = true;
        }
    }

    KMeansCodebook model;
    model.k = k;
    model.d = desc.dim();
    model.centers = std::move(best.centers);
    model.inertia = best.inertia;
    model.inertia_trace = std::move(best.trace);
    model.check();
    return model;
}

EncodedVector vlad_encode(const DescriptorMatrix& desc, const KMeansCodebook& codebook,
                          bool normalize_out) {
    codebook.check();
    if (desc.dim() != codebook.d)
        throw Error(ErrorCode::DimMismatch, "vlad: descriptor dim does not match codebook");
    if (desc.n_patches() == 0) throw Error(ErrorCode::EmptyImage, "vlad: image has no patches");

    Matrix residuals = Matrix::Zero(codebook.k, codebook.d);
    const Matrix no_weights(desc.n_patches(), 0);
    for (const Eigen::Index i : canonical_patch_order(desc.data, no_weights)) {
        const Eigen::Index c = nearest_center(codebook.centers, desc.data.row(i));
        residuals.row(c) += desc.data.row(i) - codebook.centers.row(c);
    }

    EncodedVector out;
    out.layout = Layout::Vlad;
    out.k = codebook.k;
    out.d = codebook.d;
    out.data.resize(codebook.k * codebook.d);
    for (Eigen::Index c = 0; c < codebook.k; ++c)
        out.data.segment(c * codebook.d, codebook.d) = residuals.row(c).transpose();
    return normalize_out ? normalize(out) : out;
}

void DiagonalGmm::check() const {
    if (k < 1 || d < 1 || weights.size() != k || means.rows() != k || means.cols() != d ||
        variances.rows() != k || variances.cols() != d)
        throw Error(ErrorCode::InvalidModel, "gmm shape is inconsistent");
    if (!means.allFinite() || !variances.allFinite() || !weights.allFinite())
        throw Error(ErrorCode::NonFinite, "gmm parameters have NaN/Inf");
    if (weights.minCoeff() < 0.0 || std::abs(weights.sum() - 1.0) > 1e-9)
        throw Error(ErrorCode::InvalidModel, "gmm weights are not a simplex");
    if (variance_floor > 0.0 && variances.minCoeff() < variance_floor * (1.0 - 1e-12))
        throw Error(ErrorCode::InvalidModel, "gmm variance below the floor");
}

DiagonalGmm gmm_fit(const DescriptorMatrix& desc, Eigen::Index k, const GmmOptions& opts) {
    const Eigen::Index n = desc.n_patches();
    const Eigen::Index d = desc.dim();
    if (k < 1) throw Error(ErrorCode::InvalidConfig, "gmm: K must be at least 1");
    if (n < k)
        throw Error(ErrorCode::TooFewPoints,
                    "gmm: " + std::to_string(n) + " points for K=" + std::to_string(k));
    if (opts.max_iter < 1) throw Error(ErrorCode::InvalidConfig, "gmm: max_iter must be positive");

    const Eigen::RowVectorXd global_mean = desc.data.colwise().mean();
    const Eigen::RowVectorXd global_var =
        (desc.data.rowwise() - global_mean).cwiseAbs2().colwise().mean();
    double floor = opts.variance_floor;
    if (floor <= 0.0) floor = 1e-6 * global_var.mean();
    floor = std::max(floor, kTiny);

    KMeansOptions km = opts.kmeans;
    km.seed = opts.seed;
    const KMeansCodebook init = kmeans_fit(desc, k, km);

    DiagonalGmm gmm;
    gmm.k = k;
    gmm.d = d;
    gmm.variance_floor = floor;
    gmm.means = init.centers;
    gmm.weights = Vector::Zero(k);
    gmm.variances = Matrix::Zero(k, d);
    {
        std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
        std::vector<Eigen::Index> assign(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            assign[static_cast<std::size_t>(i)] = nearest_center(init.centers, desc.data.row(i));
            ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index c = assign[static_cast<std::size_t>(i)];
            gmm.variances.row(c) += (desc.data.row(i) - gmm.means.row(c)).cwiseAbs2();
        }
        for (Eigen::Index c = 0; c < k; ++c) {
            const auto count = counts[static_cast<std::size_t>(c)];
            gmm.weights[c] = static_cast<double>(count) / static_cast<double>(n);
            if (count > 0)
                gmm.variances.row(c) /= static_cast<double>(count);
            else
                gmm.variances.row(c) = global_var;
            gmm.variances.row(c) = gmm.variances.row(c).cwiseMax(floor);
        }
    }

    Matrix resp(n, k);
    for (int iter = 0; iter < opts.max_iter; ++iter) {
        const Matrix log_joint = gmm_log_joint(gmm, desc.data);
        double ll = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double norm = log_sum_exp_row(log_joint, i);
            ll += norm;
            for (Eigen::Index c = 0; c < k; ++c) {
                const double v = log_joint(i, c);
                resp(i, c) = std::isfinite(v) ? std::exp(v - norm) : 0.0;
            }
        }
        gmm.ll_trace.push_back(ll);
        const std::size_t steps = gmm.ll_trace.size();
        if (steps > 1) {
            const double prev = gmm.ll_trace[steps - 2];
            if (std::abs(ll - prev) <= opts.tol * std::max(1.0, std::abs(prev))) break;
        }
        if (iter + 1 >= opts.max_iter) break;

        const Vector mass = resp.colwise().sum();
        for (Eigen::Index c = 0; c < k; ++c) {
            gmm.weights[c] = mass[c] / static_cast<double>(n);
            if (!(mass[c] > 0.0)) continue;  // dead component keeps its parameters
            gmm.means.row(c) = (resp.col(c).transpose() * desc.data) / mass[c];
            Eigen::RowVectorXd var = Eigen::RowVectorXd::Zero(d);
            for (Eigen::Index i = 0; i < n; ++i)
                var += resp(i, c) * (desc.data.row(i) - gmm.means.row(c)).cwiseAbs2();
            gmm.variances.row(c) = (var / mass[c]).cwiseMax(floor);
        }
    }
    gmm.log_likelihood = gmm.ll_trace.back();
    gmm.check();
    return gmm;
}

Matrix gmm_responsibilities(const DiagonalGmm& gmm, const Matrix& desc) {
    if (desc.cols() != gmm.d)
        throw Error(ErrorCode::DimMismatch, "gmm: descriptor dim does not match model");
    const Matrix log_joint = gmm_log_joint(gmm, desc);
    Matrix resp(desc.rows(), gmm.k);
    for (Eigen::Index i = 0; i < desc.rows(); ++i) {
        const double norm = log_sum_exp_row(log_joint, i);
        for (Eigen::Index c = 0; c < gmm.k; ++c) {
            const double v = log_joint(i, c);
            resp(i, c) = std::isfinite(v) ? std::exp(v - norm) : 0.0;
        }
    }
    return resp;
}

EncodedVector fv_encode(const DescriptorMatrix& desc, const DiagonalGmm& gmm, bool normalize_out) {
    gmm.check();
    if (desc.dim() != gmm.d)
        throw Error(ErrorCode::DimMismatch, "fv: descriptor dim does not match model");
    if (desc.n_patches() == 0) throw Error(ErrorCode::EmptyImage, "fv: image has no patches");
    const Matrix resp = gmm_responsibilities(gmm, desc.data);
    std::vector<bool> active(static_cast<std::size_t>(gmm.k));
    for (Eigen::Index c = 0; c < gmm.k; ++c) active[static_cast<std::size_t>(c)] = gmm.weights[c] > 0.0;
    const EncodedVector enc = aggregate_soft_blocks(desc.data, resp, gmm.weights, gmm.means,
                                                    gmm.variances.cwiseSqrt(), active, Layout::Fv);
    return normalize_out ? normalize(enc) : enc;
}

EncodedVector avgpool_encode(const DescriptorMatrix& desc, bool normalize_out) {
    if (desc.n_patches() == 0) throw Error(ErrorCode::EmptyImage, "avgpool: image has no patches");
    EncodedVector out;
    out.layout = Layout::AvgPool;
    out.k = 0;
    out.d = desc.dim();
    out.data = desc.data.colwise().mean().transpose();
    return normalize_out ? normalize(out) : out;
}

void PcaModel::check() const {
    if (in_dim < 1 || out_dim < 1 || out_dim > in_dim || mean.size() != in_dim ||
        components.rows() != out_dim || components.cols() != in_dim ||
        explained_variance.size() != out_dim)
        throw Error(ErrorCode::InvalidModel, "pca model shape is inconsistent");
    if (!components.allFinite() || !mean.allFinite() || !explained_variance.allFinite())
        throw Error(ErrorCode::NonFinite, "pca model has NaN/Inf");
    const Matrix gram = components * components.transpose();
    if ((gram - Matrix::Identity(out_dim, out_dim)).cwiseAbs().maxCoeff() > 1e-6)
        throw Error(ErrorCode::InvalidModel, "pca components are not orthonormal");
    for (Eigen::Index i = 1; i < out_dim; ++i)
        if (explained_variance[i] > explained_variance[i - 1] + kTiny)
            throw Error(ErrorCode::InvalidModel, "pca explained variance must be non-increasing");
}

PcaModel pca_fit(const DescriptorMatrix& desc, Eigen::Index out_dim, bool whiten) {
    const Eigen::Index n = desc.n_patches();
    const Eigen::Index d = desc.dim();
    if (out_dim < 1 || out_dim > std::min(n, d))
        throw Error(ErrorCode::InvalidConfig, "pca: out_dim must satisfy 1 <= out_dim <= min(N, D)");
    if (!desc.data.allFinite()) throw Error(ErrorCode::NonFinite, "pca: input has NaN/Inf");

    PcaModel model;
    model.in_dim = d;
    model.out_dim = out_dim;
    model.whiten = whiten;
    model.mean = desc.data.colwise().mean().transpose();
    const Matrix centered = desc.data.rowwise() - model.mean.transpose();

    Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    const double rank_cut =
        sv.size() > 0 ? sv[0] * static_cast<double>(std::max(n, d)) *
                            std::numeric_limits<double>::epsilon()
                      : 0.0;
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv[rank] > rank_cut) ++rank;
    model.rank_deficient = out_dim > rank;

    // SVD's V columns beyond the numerical rank are already an orthonormal
    // completion of the row space; their variances are reported as zero.
    model.components = svd.matrixV().leftCols(out_dim).transpose();
    model.explained_variance = Vector::Zero(out_dim);
    const double denom = static_cast<double>(std::max<Eigen::Index>(n - 1, 1));
    for (Eigen::Index i = 0; i < out_dim && i < rank; ++i)
        model.explained_variance[i] = sv[i] * sv[i] / denom;

    // Deterministic sign convention: the largest-magnitude entry of each
    // component is positive.
    for (Eigen::Index i = 0; i < out_dim; ++i) {
        Eigen::Index peak = 0;
        model.components.row(i).cwiseAbs().maxCoeff(&peak);
        if (model.components(i, peak) < 0.0) model.components.row(i) *= -1.0;
    }
    model.check();
    return model;
}

DescriptorMatrix pca_transform(const PcaModel& model, const DescriptorMatrix& desc) {
    model.check();
    if (desc.dim() != model.in_dim)
        throw Error(ErrorCode::DimMismatch, "pca: descriptor dim does not match model");
    Matrix projected = (desc.data.rowwise() - model.mean.transpose()) * model.components.transpose();
    if (model.whiten)
        for (Eigen::Index j = 0; j < model.out_dim; ++j)
            projected.col(j) /= std::sqrt(std::max(model.explained_variance[j], kTiny));
    return DescriptorMatrix{std::move(projected)};
}

void write_kmeans(const std::string& path, const KMeansCodebook& model) {
    model.check();
    nlohmann::json j;
    j["kind"] = "kmeans-codebook";
    j["k"] = model.k;
    j["d"] = model.d;
    j["centers"] = detail::matrix_to_json(model.centers);
    j["inertia"] = model.inertia;
    j["inertia_trace"] = model.inertia_trace;
    io::atomic_write(path, j.dump(2) + "\n");
}

KMeansCodebook read_kmeans(const std::string& path) {
    KMeansCodebook model;
    try {
        const nlohmann::json j = nlohmann::json::parse(io::read_file(path));
        if (j.at("kind").get<std::string>() != "kmeans-codebook")
            throw Error(ErrorCode::ParseError, path + " is not a kmeans codebook file");
        model.k = j.at("k").get<Eigen::Index>();
        model.d = j.at("d").get<Eigen::Index>();
        model.centers = detail::matrix_from_json(j.at("centers"), model.k, model.d);
        model.inertia = j.at("inertia").get<double>();
        model.inertia_trace = j.at("inertia_trace").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
    model.check();
    return model;
}

void write_gmm(const std::string& path, const DiagonalGmm& model) {
    model.check();
    nlohmann::json j;
    j["kind"] = "diagonal-gmm";
    j["k"] = model.k;
    j["d"] = model.d;
    j["weights"] = std::vector<double>(model.weights.begin(), model.weights.end());
    j["means"] = detail::matrix_to_json(model.means);
    j["variances"] = detail::matrix_to_json(model.variances);
    j["log_likelihood"] = model.log_likelihood;
    j["variance_floor"] = model.variance_floor;
    j["ll_trace"] = model.ll_trace;
    io::atomic_write(path, j.dump(2) + "\n");
}

DiagonalGmm read_gmm(const std::string& path) {
    DiagonalGmm model;
    try {
        const nlohmann::json j = nlohmann::json::parse(io::read_file(path));
        if (j.at("kind").get<std::string>() != "diagonal-gmm")
            throw Error(ErrorCode::ParseError, path + " is not a gmm file");
        model.k = j.at("k").get<Eigen::Index>();
        model.d = j.at("d").get<Eigen::Index>();
        model.weights = detail::vector_from_json(j.at("weights"), model.k);
        model.means = detail::matrix_from_json(j.at("means"), model.k, model.d);
        model.variances = detail::matrix_from_json(j.at("variances"), model.k, model.d);
        model.log_likelihood = j.at("log_likelihood").get<double>();
        model.variance_floor = j.at("variance_floor").get<double>();
        model.ll_trace = j.at("ll_trace").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
    model.check();
    return model;
}

void write_pca(const std::string& path, const PcaModel& model) {
    model.check();
    nlohmann::json j;
    j["kind"] = "pca-model";
    j["in_dim"] = model.in_dim;
    j["out_dim"] = model.out_dim;
    j["mean"] = std::vector<double>(model.mean.begin(), model.mean.end());
    j["components"] = detail::matrix_to_json(model.components);
    j["explained_variance"] =
        std::vector<double>(model.explained_variance.begin(), model.explained_variance.end());
    j["whiten"] = model.whiten;
    j["rank_deficient"] = model.rank_deficient;
    io::atomic_write(path, j.dump(2) + "\n");
}

PcaModel read_pca(const std::string& path) {
    PcaModel model;
    try {
        const nlohmann::json j = nlohmann::json::parse(io::read_file(path));
        if (j.at("kind").get<std::string>() != "pca-model")
            throw Error(ErrorCode::ParseError, path + " is not a pca model file");
        model.in_dim = j.at("in_dim").get<Eigen::Index>();
        model.out_dim = j.at("out_dim").get<Eigen::Index>();
        model.mean = detail::vector_from_json(j.at("mean"), model.in_dim);
        model.components = detail::matrix_from_json(j.at("components"), model.out_dim, model.in_dim);
        model.explained_variance = detail::vector_from_json(j.at("explained_variance"), model.out_dim);
        model.whiten = j.at("whiten").get<bool>();
        model.rank_deficient = j.at("rank_deficient").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
    model.check();
    return model;
}

}  // namespace vsad
