#pragma once

// Exact (O(n^2)) t-SNE, sufficient for the overlay-plot sample sizes used
// here. Plot-only: nothing numeric downstream keys on the embedding.

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "wearsyn/core/errors.hpp"
#include "wearsyn/quality/pca.hpp"

namespace wearsyn::quality {

struct TsneConfig {
    double perplexity = 30.0;
    int iterations = 400;
    double learning_rate = 100.0;
    double early_exaggeration = 4.0;
    int exaggeration_iters = 100;
};

inline MatrixXd tsne_embed(const std::vector<FlatSample>& mixed, const TsneConfig& cfg,
                           std::uint64_t seed) {
    const Eigen::Index n = static_cast<Eigen::Index>(mixed.size());
    if (static_cast<double>(n) <= 3.0 * cfg.perplexity)
        throw ConfigError("tsne_embed: need more than 3 * perplexity samples");

    MatrixXd X(n, mixed[0].vector.size());
    for (Eigen::Index i = 0; i < n; ++i) X.row(i) = mixed[i].vector.transpose();

    // squared euclidean distances
    MatrixXd D(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) D(i, j) = (X.row(i) - X.row(j)).squaredNorm();

    // conditional probabilities via per-row bandwidth search
    MatrixXd P = MatrixXd::Zero(n, n);
    const double log_perp = std::log(cfg.perplexity);
    for (Eigen::Index i = 0; i < n; ++i) {
        double beta_lo = 0.0, beta_hi = 1e12, beta = 1.0;
        for (int iter = 0; iter < 60; ++iter) {
            double sum = 0.0, dot = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) continue;
                double p = std::exp(-beta * D(i, j));
                sum += p;
                dot += p * D(i, j);
            }
            if (sum <= 0) sum = 1e-300;
            double H = std::log(sum) + beta * dot / sum;  // entropy in nats
            if (std::fabs(H - log_perp) < 1e-5) break;
            if (H > log_perp) {
                beta_lo = beta;
                beta = beta_hi > 1e11 ? beta * 2 : (beta + beta_hi) / 2;
            } else {
                beta_hi = beta;
                beta = (beta + beta_lo) / 2;
            }
        }
        double sum = 0.0;
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) sum += std::exp(-beta * D(i, j));
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) P(i, j) = std::exp(-beta * D(i, j)) / sum;
    }
    P = (P + P.transpose()) / (2.0 * static_cast<double>(n));
    P = P.cwiseMax(1e-12);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> init(0.0, 1e-4);
    MatrixXd Y(n, 2), vel = MatrixXd::Zero(n, 2);
    for (Eigen::Index i = 0; i < Y.size(); ++i) Y(i) = init(rng);

    for (int it = 0; it < cfg.iterations; ++it) {
        double exag = it < cfg.exaggeration_iters ? cfg.early_exaggeration : 1.0;
        // student-t affinities
        MatrixXd num(n, n);
        double denom = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                if (i == j) {
                    num(i, j) = 0.0;
                    continue;
                }
                num(i, j) = 1.0 / (1.0 + (Y.row(i) - Y.row(j)).squaredNorm());
                denom += num(i, j);
            }
        MatrixXd grad = MatrixXd::Zero(n, 2);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                if (i == j) continue;
                double q = num(i, j) / denom;
                double coeff = 4.0 * (exag * P(i, j) - q) * num(i, j);
                grad.row(i) += coeff * (Y.row(i) - Y.row(j));
            }
        double momentum = it < 250 ? 0.5 : 0.8;
        vel = momentum * vel - cfg.learning_rate * grad;
        Y += vel;
        Y.rowwise() -= Y.colwise().mean();
    }
    return Y;
}

}  // namespace wearsyn::quality
