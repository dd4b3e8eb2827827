#ifndef VSAD_SVM_HPP
#define VSAD_SVM_HPP

#include <string>
#include <utility>
#include <vector>

#include "vsad/core.hpp"

namespace vsad {

struct LinearOvaModel {
    int n_classes = 0;
    Matrix weights;  // C x F
    Vector biases;   // C
    double c_param = 1.0;
    // Dual objective after each epoch, one trace per binary problem;
    // non-increasing by the solver contract.
    std::vector<std::vector<double>> objective_traces;

    Eigen::Index n_features() const { return weights.cols(); }
    void check() const;
};

struct SvmOptions {
    double c = 1.0;
    double tol = 1e-6;  // relative dual-objective change per epoch
    int max_epochs = 1000;
    std::uint64_t seed = 0;
};

// One-vs-all linear SVM with the unsquared hinge loss, solved by dual
// coordinate descent. The bias rides along as an augmented constant feature.
// Examples are visited in a seed-derived order over a canonical sort of the
// data, so permuting the input rows leaves the model bit-identical.
LinearOvaModel svm_train(const Matrix& features, const std::vector<int>& labels,
                         const SvmOptions& opts);
LinearOvaModel svm_train(const std::vector<EncodedVector>& features,
                         const std::vector<int>& labels, const SvmOptions& opts);

// Maximum decision score wins; ties go to the lowest class index.
std::pair<int, Vector> predict(const LinearOvaModel& model, const Vector& feature);

struct EvalReport {
    double overall_accuracy = 0.0;
    Vector per_class_accuracy;   // C; 0 where a class has no test examples
    Eigen::MatrixXi confusion;   // true class x predicted class
    double mean_class_accuracy = 0.0;  // averaged over classes present in the test set

    void check() const;
};

EvalReport evaluate(const LinearOvaModel& model, const Matrix& features,
                    const std::vector<int>& labels);

void write_svm(const std::string& path, const LinearOvaModel& model);
LinearOvaModel read_svm(const std::string& path);

// Stacks encoded vectors of equal length into rows of a feature matrix.
Matrix stack_features(const std::vector<EncodedVector>& features);

}  // namespace vsad

#endif
