#include "homog/models.hpp"

#include <algorithm>
#include <cmath>

#include "homog/errors.hpp"
#include "homog/rng.hpp"

namespace homog {

namespace {

double sigmoid(double z) {
    z = std::clamp(z, -35.0, 35.0);  // keeps probabilities strictly inside (0,1)
    return 1.0 / (1.0 + std::exp(-z));
}

// log(1 + exp(z)) - y*z without overflow.
double logistic_loss(double z, int y) {
    const double softplus = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    return softplus - static_cast<double>(y) * z;
}

void require_trainable(const FeatureMatrix& features, const std::vector<int>& labels) {
    if (features.rows != labels.size()) {
        throw InvalidArgument("feature rows and label count differ");
    }
    if (features.rows < 2) {
        throw InvalidArgument("training needs at least two rows");
    }
    for (double v : features.data) {
        if (!std::isfinite(v)) throw InvalidArgument("non-finite feature value");
    }
    bool has_pos = false, has_neg = false;
    for (int y : labels) {
        if (y != 0 && y != 1) throw InvalidArgument("labels must be 0 or 1");
        (y == 1 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) {
        throw DegenerateTrainingSet("degenerate training set: single-class labels");
    }
}

// Mean logistic loss + l2/2 |w|^2 gradient over (w, b).
void logreg_gradient(const FeatureMatrix& x, const std::vector<int>& y,
                     const std::vector<double>& w, double b, double l2,
                     std::vector<double>& grad_w, double& grad_b) {
    const std::size_t n = x.rows;
    const std::size_t d = x.cols;
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    grad_b = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        double z = b;
        for (std::size_t c = 0; c < d; ++c) z += w[c] * x.at(r, c);
        const double residual = sigmoid(z) - static_cast<double>(y[r]);
        for (std::size_t c = 0; c < d; ++c) grad_w[c] += residual * x.at(r, c);
        grad_b += residual;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t c = 0; c < d; ++c) grad_w[c] = grad_w[c] * inv_n + l2 * w[c];
    grad_b *= inv_n;
}

// Largest eigenvalue of X^T X / n (plus the implicit bias column) by power
// iteration; bounds the logistic Hessian by L = lambda_max / 4 + l2.
double curvature_bound(const FeatureMatrix& x, double l2) {
    const std::size_t n = x.rows;
    const std::size_t d = x.cols;
    std::vector<double> v(d + 1, 1.0 / std::sqrt(static_cast<double>(d + 1)));
    std::vector<double> xv(n);
    double lambda = 1.0;
    for (int iter = 0; iter < 30; ++iter) {
        for (std::size_t r = 0; r < n; ++r) {
            double s = v[d];  // bias column of ones
            for (std::size_t c = 0; c < d; ++c) s += x.at(r, c) * v[c];
            xv[r] = s;
        }
        std::vector<double> next(d + 1, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < d; ++c) next[c] += x.at(r, c) * xv[r];
            next[d] += xv[r];
        }
        double norm = 0.0;
        for (double t : next) norm += t * t;
        norm = std::sqrt(norm);
        if (norm == 0.0) break;
        lambda = norm / static_cast<double>(n);
        for (std::size_t c = 0; c <= d; ++c) v[c] = next[c] / norm;
    }
    return 1.1 * lambda / 4.0 + l2;
}

struct MlpParams {
    std::vector<double> w1;  // h x d
    std::vector<double> b1;  // h
    std::vector<double> w2;  // h
    double b2 = 0.0;
};

MlpParams init_mlp(std::size_t d, std::size_t h, rng::Engine& engine) {
    MlpParams p;
    const double a1 = std::sqrt(6.0 / static_cast<double>(d + h));
    const double a2 = std::sqrt(6.0 / static_cast<double>(h + 1));
    p.w1.resize(h * d);
    for (double& w : p.w1) w = engine.uniform(-a1, a1);
    p.b1.assign(h, 0.0);
    p.w2.resize(h);
    for (double& w : p.w2) w = engine.uniform(-a2, a2);
    p.b2 = 0.0;
    return p;
}

// Forward + backward for mean logistic loss over the given rows.
// Returns the loss; accumulates gradients into g (same shapes as p).
double mlp_loss_grad(const FeatureMatrix& x, const std::vector<int>& y,
                     const std::vector<std::size_t>& rows, const MlpParams& p, std::size_t h,
                     MlpParams* g) {
    const std::size_t d = x.cols;
    if (g) {
        std::fill(g->w1.begin(), g->w1.end(), 0.0);
        std::fill(g->b1.begin(), g->b1.end(), 0.0);
        std::fill(g->w2.begin(), g->w2.end(), 0.0);
        g->b2 = 0.0;
    }
    std::vector<double> hidden(h);
    double loss = 0.0;
    for (std::size_t r : rows) {
        for (std::size_t u = 0; u < h; ++u) {
            double z = p.b1[u];
            for (std::size_t c = 0; c < d; ++c) z += p.w1[u * d + c] * x.at(r, c);
            hidden[u] = z > 0.0 ? z : 0.0;
        }
        double out = p.b2;
        for (std::size_t u = 0; u < h; ++u) out += p.w2[u] * hidden[u];
        loss += logistic_loss(out, y[r]);
        if (!g) continue;
        const double residual = sigmoid(out) - static_cast<double>(y[r]);
        g->b2 += residual;
        for (std::size_t u = 0; u < h; ++u) {
            g->w2[u] += residual * hidden[u];
            if (hidden[u] > 0.0) {
                const double back = residual * p.w2[u];
                g->b1[u] += back;
                for (std::size_t c = 0; c < d; ++c) g->w1[u * d + c] += back * x.at(r, c);
            }
        }
    }
    const double inv = 1.0 / static_cast<double>(rows.size());
    loss *= inv;
    if (g) {
        for (double& v : g->w1) v *= inv;
        for (double& v : g->b1) v *= inv;
        for (double& v : g->w2) v *= inv;
        g->b2 *= inv;
    }
    return loss;
}

}  // namespace

Standardizer Standardizer::fit(const FeatureMatrix& features) {
    const std::size_t n = features.rows;
    const std::size_t d = features.cols;
    Standardizer s;
    s.mean.assign(d, 0.0);
    s.scale.assign(d, 1.0);
    if (n == 0) return s;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) s.mean[c] += features.at(r, c);
    }
    for (double& m : s.mean) m /= static_cast<double>(n);
    std::vector<double> var(d, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            const double delta = features.at(r, c) - s.mean[c];
            var[c] += delta * delta;
        }
    }
    for (std::size_t c = 0; c < d; ++c) {
        const double sd = std::sqrt(var[c] / static_cast<double>(n));
        s.scale[c] = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

FeatureMatrix Standardizer::apply(const FeatureMatrix& features) const {
    FeatureMatrix out = features;
    for (std::size_t r = 0; r < out.rows; ++r) {
        for (std::size_t c = 0; c < out.cols; ++c) {
            out.at(r, c) = (out.at(r, c) - mean[c]) / scale[c];
        }
    }
    return out;
}

Standardizer Standardizer::identity(std::size_t dims) {
    Standardizer s;
    s.mean.assign(dims, 0.0);
    s.scale.assign(dims, 1.0);
    return s;
}

TrainConfig TrainConfig::logreg_defaults() {
    TrainConfig c;
    c.l2_strength = 1.0;
    c.max_iterations = 1000;
    c.tolerance = 1e-6;
    c.learning_rate = 1.0;
    return c;
}

TrainConfig TrainConfig::mlp_defaults() {
    TrainConfig c;
    c.l2_strength = 0.0;
    c.learning_rate = 1e-2;
    c.hidden_width = 32;
    c.epochs = 200;
    c.momentum = 0.9;
    c.batch_size = 32;
    return c;
}

LinearModel train_logreg(const FeatureMatrix& features, const std::vector<int>& labels,
                         const TrainConfig& config) {
    require_trainable(features, labels);
    if (config.learning_rate <= 0.0 || config.tolerance <= 0.0) {
        throw InvalidArgument("learning_rate and tolerance must be positive");
    }

    LinearModel model;
    model.standardization = Standardizer::fit(features);
    const FeatureMatrix x = model.standardization.apply(features);
    const std::size_t d = x.cols;

    const double step = config.learning_rate / curvature_bound(x, config.l2_strength);
    model.weights.assign(d, 0.0);
    model.bias = 0.0;

    std::vector<double> grad_w(d);
    double grad_b = 0.0;
    for (std::size_t iter = 0; iter < config.max_iterations; ++iter) {
        logreg_gradient(x, labels, model.weights, model.bias, config.l2_strength, grad_w, grad_b);
        double norm = grad_b * grad_b;
        for (double g : grad_w) norm += g * g;
        if (std::sqrt(norm) < config.tolerance) break;
        for (std::size_t c = 0; c < d; ++c) model.weights[c] -= step * grad_w[c];
        model.bias -= step * grad_b;
    }
    return model;
}

MlpModel train_mlp(const FeatureMatrix& features, const std::vector<int>& labels,
                   const TrainConfig& config) {
    require_trainable(features, labels);
    if (config.learning_rate <= 0.0 || config.hidden_width == 0 || config.batch_size == 0) {
        throw InvalidArgument("invalid MLP config");
    }

    MlpModel model;
    model.standardization = Standardizer::fit(features);
    const FeatureMatrix x = model.standardization.apply(features);
    const std::size_t n = x.rows;
    const std::size_t d = x.cols;
    const std::size_t h = config.hidden_width;

    rng::Engine engine(config.seed);
    MlpParams params = init_mlp(d, h, engine);
    MlpParams grads = params;  // shape only
    MlpParams velocity;
    velocity.w1.assign(h * d, 0.0);
    velocity.b1.assign(h, 0.0);
    velocity.w2.assign(h, 0.0);
    velocity.b2 = 0.0;

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        engine.shuffle(order);
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t stop = std::min(n, start + config.batch_size);
            const std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                                 order.begin() + static_cast<std::ptrdiff_t>(stop));
            mlp_loss_grad(x, labels, batch, params, h, &grads);
            if (config.l2_strength > 0.0) {
                for (std::size_t i = 0; i < grads.w1.size(); ++i)
                    grads.w1[i] += config.l2_strength * params.w1[i];
                for (std::size_t i = 0; i < grads.w2.size(); ++i)
                    grads.w2[i] += config.l2_strength * params.w2[i];
            }
            const double lr = config.learning_rate;
            const double mu = config.momentum;
            for (std::size_t i = 0; i < params.w1.size(); ++i) {
                velocity.w1[i] = mu * velocity.w1[i] - lr * grads.w1[i];
                params.w1[i] += velocity.w1[i];
            }
            for (std::size_t i = 0; i < params.b1.size(); ++i) {
                velocity.b1[i] = mu * velocity.b1[i] - lr * grads.b1[i];
                params.b1[i] += velocity.b1[i];
            }
            for (std::size_t i = 0; i < params.w2.size(); ++i) {
                velocity.w2[i] = mu * velocity.w2[i] - lr * grads.w2[i];
                params.w2[i] += velocity.w2[i];
            }
            velocity.b2 = mu * velocity.b2 - lr * grads.b2;
            params.b2 += velocity.b2;
        }
    }

    model.hidden_width = h;
    model.hidden_weights = std::move(params.w1);
    model.hidden_bias = std::move(params.b1);
    model.output_weights = std::move(params.w2);
    model.output_bias = params.b2;
    return model;
}

LinearModel constant_model(const std::vector<int>& labels, std::size_t dims) {
    std::size_t positives = 0;
    for (int y : labels) positives += y == 1 ? 1 : 0;
    const double p = (static_cast<double>(positives) + 1.0) /
                     (static_cast<double>(labels.size()) + 2.0);
    LinearModel model;
    model.weights.assign(dims, 0.0);
    model.bias = std::log(p / (1.0 - p));
    model.standardization = Standardizer::identity(dims);
    return model;
}

std::vector<double> predict_proba(const LinearModel& model, const FeatureMatrix& features) {
    if (features.cols != model.weights.size()) {
        throw InvalidArgument("feature dimension does not match model");
    }
    const FeatureMatrix x = model.standardization.apply(features);
    std::vector<double> probs(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) {
        double z = model.bias;
        for (std::size_t c = 0; c < x.cols; ++c) z += model.weights[c] * x.at(r, c);
        probs[r] = sigmoid(z);
    }
    return probs;
}

std::vector<double> predict_proba(const MlpModel& model, const FeatureMatrix& features) {
    if (features.cols * model.hidden_width != model.hidden_weights.size()) {
        throw InvalidArgument("feature dimension does not match model");
    }
    const FeatureMatrix x = model.standardization.apply(features);
    const std::size_t h = model.hidden_width;
    const std::size_t d = x.cols;
    std::vector<double> probs(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) {
        double out = model.output_bias;
        for (std::size_t u = 0; u < h; ++u) {
            double z = model.hidden_bias[u];
            for (std::size_t c = 0; c < d; ++c) z += model.hidden_weights[u * d + c] * x.at(r, c);
            if (z > 0.0) out += model.output_weights[u] * z;
        }
        probs[r] = sigmoid(out);
    }
    return probs;
}

std::vector<double> predict_proba(const AnyModel& model, const FeatureMatrix& features) {
    return std::visit([&](const auto& m) { return predict_proba(m, features); }, model);
}

std::vector<int> predict(const AnyModel& model, const FeatureMatrix& features, double threshold) {
    const std::vector<double> probs = predict_proba(model, features);
    std::vector<int> labels(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) labels[i] = probs[i] >= threshold ? 1 : 0;
    return labels;
}

double logistic_objective(const FeatureMatrix& features, const std::vector<int>& labels,
                          const std::vector<double>& weights, double bias, double l2_strength) {
    double loss = 0.0;
    for (std::size_t r = 0; r < features.rows; ++r) {
        double z = bias;
        for (std::size_t c = 0; c < features.cols; ++c) z += weights[c] * features.at(r, c);
        loss += logistic_loss(z, labels[r]);
    }
    loss /= static_cast<double>(features.rows);
    double reg = 0.0;
    for (double w : weights) reg += w * w;
    return loss + 0.5 * l2_strength * reg;
}

double gradient_check(ModelKind kind, const FeatureMatrix& features,
                      const std::vector<int>& labels, double epsilon) {
    if (epsilon <= 0.0) throw InvalidArgument("invalid epsilon");
    if (features.rows != labels.size() || features.rows == 0) {
        throw InvalidArgument("feature rows and label count differ");
    }

    const auto relative = [](double a, double b) {
        return std::abs(a - b) / std::max(1.0, std::abs(a) + std::abs(b));
    };
    double worst = 0.0;

    if (kind == ModelKind::Logreg) {
        const double l2 = 0.1;  // exercises the regularizer term too
        const std::size_t d = features.cols;
        rng::Engine engine(0x9c0ffee1u);
        std::vector<double> w(d);
        for (double& v : w) v = engine.uniform(-0.5, 0.5);
        double b = engine.uniform(-0.5, 0.5);

        std::vector<double> analytic(d);
        double analytic_b = 0.0;
        logreg_gradient(features, labels, w, b, l2, analytic, analytic_b);

        for (std::size_t c = 0; c <= d; ++c) {
            double* param = c < d ? &w[c] : &b;
            const double keep = *param;
            *param = keep + epsilon;
            const double hi = logistic_objective(features, labels, w, b, l2);
            *param = keep - epsilon;
            const double lo = logistic_objective(features, labels, w, b, l2);
            *param = keep;
            const double numeric = (hi - lo) / (2.0 * epsilon);
            worst = std::max(worst, relative(c < d ? analytic[c] : analytic_b, numeric));
        }
        return worst;
    }

    const std::size_t d = features.cols;
    const std::size_t h = 4;
    rng::Engine engine(0x1f2e3d4cu);
    MlpParams params = init_mlp(d, h, engine);
    // Non-zero biases so no ReLU sits exactly at its kink.
    for (double& v : params.b1) v = engine.uniform(0.05, 0.3);
    params.b2 = engine.uniform(-0.3, 0.3);

    std::vector<std::size_t> rows(features.rows);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    MlpParams analytic = params;
    mlp_loss_grad(features, labels, rows, params, h, &analytic);

    std::vector<std::pair<double*, double>> coords;
    for (std::size_t i = 0; i < params.w1.size(); ++i) coords.push_back({&params.w1[i], analytic.w1[i]});
    for (std::size_t i = 0; i < params.b1.size(); ++i) coords.push_back({&params.b1[i], analytic.b1[i]});
    for (std::size_t i = 0; i < params.w2.size(); ++i) coords.push_back({&params.w2[i], analytic.w2[i]});
    coords.push_back({&params.b2, analytic.b2});

    for (auto& [param, grad] : coords) {
        const double keep = *param;
        *param = keep + epsilon;
        const double hi = mlp_loss_grad(features, labels, rows, params, h, nullptr);
        *param = keep - epsilon;
        const double lo = mlp_loss_grad(features, labels, rows, params, h, nullptr);
        *param = keep;
        const double numeric = (hi - lo) / (2.0 * epsilon);
        worst = std::max(worst, relative(grad, numeric));
    }
    return worst;
}

}  // namespace homog
