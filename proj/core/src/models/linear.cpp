#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "internal/math_util.hpp"
#include "spamdet/errors.hpp"
#include "spamdet/models.hpp"

namespace spamdet {

namespace {

void shuffle_indices(std::vector<std::size_t>& idx, std::mt19937_64& rng) {
    for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[rng() % i]);
}

double l2_term(const std::vector<double>& w, double l2, std::vector<double>* grad_w) {
    double sq = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        sq += w[j] * w[j];
        if (grad_w) (*grad_w)[j] += l2 * w[j];
    }
    return 0.5 * l2 * sq;
}

template <typename PerRow>
double mean_loss(const FeatureMatrix& m, const std::vector<double>& w, double bias, double l2,
                 std::vector<double>* grad_w, double* grad_b, PerRow per_row) {
    if (m.n_rows() == 0) throw TrainError("loss over an empty matrix");
    if (grad_w) grad_w->assign(w.size(), 0.0);
    if (grad_b) *grad_b = 0.0;
    double total = 0.0;
    const double inv_n = 1.0 / static_cast<double>(m.n_rows());
    for (std::size_t i = 0; i < m.n_rows(); ++i) {
        const double z = dot(m.rows[i], w) + bias;
        double dz = 0.0;
        total += per_row(z, m.labels[i], dz);
        if (grad_w && dz != 0.0) {
            const double g = dz * inv_n;
            for (const auto& e : m.rows[i].entries) (*grad_w)[e.index] += g * e.value;
            if (grad_b) *grad_b += g;
        }
    }
    return total * inv_n + l2_term(w, l2, grad_w);
}

struct LogisticRow {
    double operator()(double z, int y, double& dz) const {
        dz = detail::stable_sigmoid(z) - static_cast<double>(y);
        return detail::softplus(z) - static_cast<double>(y) * z;
    }
};

struct HingeRow {
    double operator()(double z, int y, double& dz) const {
        const double s = y == 1 ? 1.0 : -1.0;
        const double margin = 1.0 - s * z;
        if (margin <= 0.0) return 0.0;
        dz = -s;
        return margin;
    }
};

template <typename PerRow>
TrainedModel train_gd(const FeatureMatrix& m, const TrainConfig& config, LinearModel::Kind kind,
                      TrainDiagnostics* diag, PerRow per_row) {
    const std::size_t n = m.n_rows();
    if (n == 0) throw TrainError("training requires a non-empty matrix");
    const auto n_pos = static_cast<std::size_t>(
        std::count(m.labels.begin(), m.labels.end(), 1));
    if (n_pos == 0 || n_pos == n) throw TrainError("training set has a single label class");

    LinearModel model;
    model.kind = kind;
    model.weights.assign(m.dimension(), 0.0);
    model.bias = 0.0;
    if (diag) diag->loss.clear();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(config.seed);
    const std::size_t batch = std::max<std::uint32_t>(1, config.batch_size);
    std::vector<double> grad(m.dimension());

    for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_indices(order, rng);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t end = std::min(start + batch, n);
            const double inv_b = 1.0 / static_cast<double>(end - start);
            std::fill(grad.begin(), grad.end(), 0.0);
            double grad_b = 0.0;
            for (std::size_t k = start; k < end; ++k) {
                const std::size_t i = order[k];
                const double z = dot(m.rows[i], model.weights) + model.bias;
                double dz = 0.0;
                per_row(z, m.labels[i], dz);
                if (dz == 0.0) continue;
                const double g = dz * inv_b;
                for (const auto& e : m.rows[i].entries) grad[e.index] += g * e.value;
                grad_b += g;
            }
            for (std::size_t j = 0; j < grad.size(); ++j)
                model.weights[j] -=
                    config.learning_rate * (grad[j] + config.l2_penalty * model.weights[j]);
            model.bias -= config.learning_rate * grad_b;
        }
        const double loss =
            mean_loss(m, model.weights, model.bias, config.l2_penalty, nullptr, nullptr, per_row);
        if (!std::isfinite(loss)) throw TrainError("training diverged: non-finite loss");
        if (diag) diag->loss.push_back(loss);
    }

    TrainedModel out;
    out.model = std::move(model);
    out.dimension = m.dimension();
    return out;
}

} // namespace

double logistic_loss(const FeatureMatrix& m, const std::vector<double>& w, double bias, double l2,
                     std::vector<double>* grad_w, double* grad_b) {
    return mean_loss(m, w, bias, l2, grad_w, grad_b, LogisticRow{});
}

double hinge_loss(const FeatureMatrix& m, const std::vector<double>& w, double bias, double l2,
                  std::vector<double>* grad_w, double* grad_b) {
    return mean_loss(m, w, bias, l2, grad_w, grad_b, HingeRow{});
}

TrainedModel train_logistic(const FeatureMatrix& matrix, const TrainConfig& config,
                            TrainDiagnostics* diag) {
    return train_gd(matrix, config, LinearModel::Kind::logistic, diag, LogisticRow{});
}

TrainedModel train_linear_svm(const FeatureMatrix& matrix, const TrainConfig& config,
                              TrainDiagnostics* diag) {
    return train_gd(matrix, config, LinearModel::Kind::hinge, diag, HingeRow{});
}

} // namespace spamdet
