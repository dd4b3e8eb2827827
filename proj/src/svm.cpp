#include "vsad/svm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "json_util.hpp"
#include "vsad/io.hpp"
#include "vsad/rng.hpp"

namespace vsad {

namespace {

// Dual coordinate descent for min_w 0.5*||w||^2 + C * sum_i hinge(y_i w.x_i)
// over features already carrying the constant bias column. Returns the
// augmented weight vector and appends the dual objective once per epoch.
Vector solve_binary(const Matrix& x, const std::vector<double>& y, double c, double tol,
                    int max_epochs, Rng rng, std::vector<double>& trace) {
    const Eigen::Index n = x.rows();
    const Eigen::Index f = x.cols();
    Vector w = Vector::Zero(f);
    Vector alpha = Vector::Zero(n);
    Vector q_diag(n);
    for (Eigen::Index i = 0; i < n; ++i) q_diag[i] = x.row(i).squaredNorm();

    double prev_objective = 0.0;  // alpha = 0 gives dual objective 0
    for (int epoch = 0; epoch < max_epochs; ++epoch) {
        const std::vector<std::size_t> order = rng.permutation(static_cast<std::size_t>(n));
        double max_violation = 0.0;
        for (const std::size_t oi : order) {
            const auto i = static_cast<Eigen::Index>(oi);
            const double grad = y[static_cast<std::size_t>(i)] * x.row(i).dot(w) - 1.0;
            double projected = grad;
            if (alpha[i] <= 0.0)
                projected = std::min(grad, 0.0);
            else if (alpha[i] >= c)
                projected = std::max(grad, 0.0);
            max_violation = std::max(max_violation, std::abs(projected));
            if (projected != 0.0) {
                const double next = std::clamp(alpha[i] - grad / q_diag[i], 0.0, c);
                if (next != alpha[i]) {
                    w += (next - alpha[i]) * y[static_cast<std::size_t>(i)] * x.row(i).transpose();
                    alpha[i] = next;
                }
            }
        }
        const double objective = 0.5 * w.squaredNorm() - alpha.sum();
        trace.push_back(objective);
        if (max_violation == 0.0) break;
        if (epoch > 0 &&
            std::abs(prev_objective - objective) <= tol * std::max(1.0, std::abs(prev_objective)))
            break;
        prev_objective = objective;
    }
    return w;
}

int compare_feature_rows(const Matrix& m, Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (m(a, c) < m(b, c)) return -1;
        if (m(a, c) > m(b, c)) return 1;
    }
    return 0;
}

}  // namespace

void LinearOvaModel::check() const {
    if (n_classes < 2 || weights.rows() != n_classes || biases.size() != n_classes)
        throw Error(ErrorCode::InvalidModel, "svm model shape is inconsistent");
    if (!weights.allFinite() || !biases.allFinite())
        throw Error(ErrorCode::NonFinite, "svm model has NaN/Inf");
    if (!(c_param > 0.0)) throw Error(ErrorCode::InvalidModel, "svm C must be positive");
}

Matrix stack_features(const std::vector<EncodedVector>& features) {
    if (features.empty()) throw Error(ErrorCode::EmptyFeatures, "no feature vectors");
    const Eigen::Index f = features.front().data.size();
    Matrix x(static_cast<Eigen::Index>(features.size()), f);
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].data.size() != f)
            throw Error(ErrorCode::InconsistentDim, "feature vectors have mixed lengths");
        x.row(static_cast<Eigen::Index>(i)) = features[i].data.transpose();
    }
    return x;
}

LinearOvaModel svm_train(const Matrix& features, const std::vector<int>& labels,
                         const SvmOptions& opts) {
    const Eigen::Index n = features.rows();
    const Eigen::Index f = features.cols();
    if (n == 0 || f == 0) throw Error(ErrorCode::EmptyFeatures, "svm: empty training set");
    if (static_cast<std::size_t>(n) != labels.size())
        throw Error(ErrorCode::MismatchedRows, "svm: feature/label counts disagree");
    if (!features.allFinite()) throw Error(ErrorCode::NonFinite, "svm: features have NaN/Inf");
    if (!(opts.c > 0.0) || !(opts.tol > 0.0) || opts.max_epochs < 1)
        throw Error(ErrorCode::InvalidConfig, "svm: C, tol and max_epochs must be positive");

    int n_classes = 0;
    for (int l : labels) {
        if (l < 0) throw Error(ErrorCode::InvalidConfig, "svm: negative training label");
        n_classes = std::max(n_classes, l + 1);
    }
    std::vector<Eigen::Index> class_counts(static_cast<std::size_t>(n_classes), 0);
    for (int l : labels) ++class_counts[static_cast<std::size_t>(l)];
    if (n_classes < 2) throw Error(ErrorCode::SingleClass, "svm: need at least two classes");
    for (int c = 0; c < n_classes; ++c)
        if (class_counts[static_cast<std::size_t>(c)] == 0)
            throw Error(ErrorCode::SingleClass,
                        "svm: class " + std::to_string(c) + " has no training examples");

    // Canonical example order (label, then lexicographic features) makes the
    // seeded visiting schedule independent of the caller's row order.
    std::vector<Eigen::Index> canon(static_cast<std::size_t>(n));
    std::iota(canon.begin(), canon.end(), Eigen::Index{0});
    std::sort(canon.begin(), canon.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (labels[static_cast<std::size_t>(a)] != labels[static_cast<std::size_t>(b)])
            return labels[static_cast<std::size_t>(a)] < labels[static_cast<std::size_t>(b)];
        return compare_feature_rows(features, a, b) < 0;
    });

    Matrix x(n, f + 1);
    std::vector<int> sorted_labels(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        x.row(i).head(f) = features.row(canon[static_cast<std::size_t>(i)]);
        x(i, f) = 1.0;
        sorted_labels[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(canon[static_cast<std::size_t>(i)])];
    }

    LinearOvaModel model;
    model.n_classes = n_classes;
    model.c_param = opts.c;
    model.weights.resize(n_classes, f);
    model.biases.resize(n_classes);
    model.objective_traces.resize(static_cast<std::size_t>(n_classes));

    const Rng root(opts.seed);
    std::vector<double> y(static_cast<std::size_t>(n));
    for (int c = 0; c < n_classes; ++c) {
        for (Eigen::Index i = 0; i < n; ++i)
            y[static_cast<std::size_t>(i)] = sorted_labels[static_cast<std::size_t>(i)] == c ? 1.0 : -1.0;
        const Vector w_aug =
            solve_binary(x, y, opts.c, opts.tol, opts.max_epochs,
                         root.stream(static_cast<std::uint64_t>(c)),
                         model.objective_traces[static_cast<std::size_t>(c)]);
        model.weights.row(c) = w_aug.head(f).transpose();
        model.biases[c] = w_aug[f];
    }
    model.check();
    return model;
}

LinearOvaModel svm_train(const std::vector<EncodedVector>& features,
                         const std::vector<int>& labels, const SvmOptions& opts) {
    return svm_train(stack_features(features), labels, opts);
}

std::pair<int, Vector> predict(const LinearOvaModel& model, const Vector& feature) {
    model.check();
    if (feature.size() != model.n_features())
        throw Error(ErrorCode::DimMismatch, "predict: feature length does not match model");
    Vector scores = model.weights * feature + model.biases;
    int best = 0;
    for (int c = 1; c < model.n_classes; ++c)
        if (scores[c] > scores[best]) best = c;
    return {best, std::move(scores)};
}

void EvalReport::check() const {
    if (confusion.rows() != confusion.cols() ||
        per_class_accuracy.size() != confusion.rows())
        throw Error(ErrorCode::InvalidModel, "eval report shape is inconsistent");
    const long total = confusion.sum();
    if (total > 0) {
        const long diag = confusion.diagonal().sum();
        if (std::abs(overall_accuracy - static_cast<double>(diag) / static_cast<double>(total)) >
            1e-12)
            throw Error(ErrorCode::InvariantViolation,
                        "overall accuracy does not match the confusion trace");
    }
}

EvalReport evaluate(const LinearOvaModel& model, const Matrix& features,
                    const std::vector<int>& labels) {
    model.check();
    if (features.cols() != model.n_features())
        throw Error(ErrorCode::DimMismatch, "evaluate: feature dim does not match model");
    if (static_cast<std::size_t>(features.rows()) != labels.size())
        throw Error(ErrorCode::MismatchedRows, "evaluate: feature/label counts disagree");
    if (labels.empty()) throw Error(ErrorCode::EmptyFeatures, "evaluate: empty test set");

    const int c_count = model.n_classes;
    EvalReport report;
    report.confusion = Eigen::MatrixXi::Zero(c_count, c_count);
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        const int truth = labels[static_cast<std::size_t>(i)];
        if (truth < 0 || truth >= c_count)
            throw Error(ErrorCode::InvariantViolation,
                        "evaluate: label " + std::to_string(truth) + " outside model classes");
        const auto [pred, scores] = predict(model, features.row(i).transpose());
        ++report.confusion(truth, pred);
    }

    report.per_class_accuracy = Vector::Zero(c_count);
    int present = 0;
    double class_acc_sum = 0.0;
    long correct = 0;
    for (int c = 0; c < c_count; ++c) {
        const long row_total = report.confusion.row(c).sum();
        correct += report.confusion(c, c);
        if (row_total > 0) {
            report.per_class_accuracy[c] =
                static_cast<double>(report.confusion(c, c)) / static_cast<double>(row_total);
            class_acc_sum += report.per_class_accuracy[c];
            ++present;
        }
    }
    report.overall_accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());
    report.mean_class_accuracy = present > 0 ? class_acc_sum / present : 0.0;
    report.check();
    return report;
}

void write_svm(const std::string& path, const LinearOvaModel& model) {
    model.check();
    nlohmann::json j;
    j["kind"] = "linear-ova-svm";
    j["n_classes"] = model.n_classes;
    j["n_features"] = model.n_features();
    j["c"] = model.c_param;
    j["weights"] = detail::matrix_to_json(model.weights);
    j["biases"] = std::vector<double>(model.biases.begin(), model.biases.end());
    j["objective_traces"] = model.objective_traces;
    io::atomic_write(path, j.dump(2) + "\n");
}

LinearOvaModel read_svm(const std::string& path) {
    LinearOvaModel model;
    try {
        const nlohmann::json j = nlohmann::json::parse(io::read_file(path));
        if (j.at("kind").get<std::string>() != "linear-ova-svm")
            throw Error(ErrorCode::ParseError, path + " is not an svm model file");
        model.n_classes = j.at("n_classes").get<int>();
        const auto f = j.at("n_features").get<Eigen::Index>();
        model.c_param = j.at("c").get<double>();
        model.weights = detail::matrix_from_json(j.at("weights"), model.n_classes, f);
        model.biases = detail::vector_from_json(j.at("biases"), model.n_classes);
        model.objective_traces = j.at("objective_traces").get<std::vector<std::vector<double>>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
    model.check();
    return model;
}

}  // namespace vsad
