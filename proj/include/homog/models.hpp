#pragma once
// Trainable classifiers feeding the experiment harness: L2-regularized
// logistic regression by full-batch gradient descent, and a one-hidden-layer
// ReLU network by minibatch SGD with momentum. Both standardize features at
// fit time and are bit-deterministic given (data, config).

#include <cstdint>
#include <variant>
#include <vector>

namespace homog {

struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major

    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
};

// Per-feature z-score transform captured at fit time. Zero-variance
// features keep scale 1 so transformed values stay finite.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const FeatureMatrix& features);
    FeatureMatrix apply(const FeatureMatrix& features) const;
    static Standardizer identity(std::size_t dims);
};

struct TrainConfig {
    double l2_strength = 1.0;
    std::size_t max_iterations = 1000;
    double tolerance = 1e-6;
    // Logistic regression scales the curvature-derived 1/L step by this
    // factor; the MLP uses it directly as the SGD step size.
    double learning_rate = 1.0;
    std::uint64_t seed = 0;
    std::size_t hidden_width = 32;  // MLP only
    std::size_t epochs = 200;       // MLP only
    double momentum = 0.9;          // MLP only
    std::size_t batch_size = 32;    // MLP only

    static TrainConfig logreg_defaults();
    static TrainConfig mlp_defaults();
};

// Weights and bias live in standardized feature space.
struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;
    Standardizer standardization;
};

struct MlpModel {
    std::size_t hidden_width = 0;
    std::vector<double> hidden_weights;  // hidden_width x d, row-major
    std::vector<double> hidden_bias;     // hidden_width
    std::vector<double> output_weights;  // hidden_width
    double output_bias = 0.0;
    Standardizer standardization;
};

using AnyModel = std::variant<LinearModel, MlpModel>;

// Minimizes mean logistic loss + l2/2 * |w|^2 on standardized features by
// full-batch gradient descent until the gradient norm drops below
// config.tolerance or max_iterations is reached.
// Throws DegenerateTrainingSet when labels contain a single class.
LinearModel train_logreg(const FeatureMatrix& features, const std::vector<int>& labels,
                         const TrainConfig& config);

// Minimizes mean logistic loss by seeded minibatch SGD with momentum for
// config.epochs. Throws DegenerateTrainingSet on single-class labels.
MlpModel train_mlp(const FeatureMatrix& features, const std::vector<int>& labels,
                   const TrainConfig& config);

// Constant classifier for degenerate training sets: zero weights, bias at
// the logit of the Laplace-smoothed positive rate.
LinearModel constant_model(const std::vector<int>& labels, std::size_t dims);

std::vector<double> predict_proba(const LinearModel& model, const FeatureMatrix& features);
std::vector<double> predict_proba(const MlpModel& model, const FeatureMatrix& features);
std::vector<double> predict_proba(const AnyModel& model, const FeatureMatrix& features);
std::vector<int> predict(const AnyModel& model, const FeatureMatrix& features,
                         double threshold = 0.5);

// The objective train_logreg minimizes, on features as given (callers
// standardize first when comparing against a trained model).
double logistic_objective(const FeatureMatrix& features, const std::vector<int>& labels,
                          const std::vector<double>& weights, double bias, double l2_strength);

enum class ModelKind { Logreg, Mlp };

// Compares the analytic loss gradient against central finite differences at
// a fixed seeded parameter point; returns the worst per-coordinate relative
// discrepancy. Throws InvalidArgument when epsilon <= 0.
double gradient_check(ModelKind kind, const FeatureMatrix& features,
                      const std::vector<int>& labels, double epsilon);

}  // namespace homog
