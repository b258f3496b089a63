#pragma once

#include <Eigen/Core>
#include <random>
#include <string>
#include <vector>

#include "wearsyn/core/errors.hpp"

namespace wearsyn::dp {

// Per-example clip, sum, Gaussian perturbation, average. Noise is drawn one
// coordinate at a time from `rng` so callers sharing a stream reproduce the
// output exactly.
inline Eigen::VectorXd clip_and_noise(const std::vector<Eigen::VectorXd>& per_example_grads,
                                      double clip_norm, double sigma,
                                      std::mt19937_64& rng) {
    if (per_example_grads.empty()) throw ConfigError("clip_and_noise: empty gradient list");
    if (clip_norm <= 0.0) throw ConfigError("clip_and_noise: clip_norm must be positive");
    if (sigma < 0.0) throw ConfigError("clip_and_noise: sigma must be non-negative");

    const Eigen::Index dim = per_example_grads.front().size();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
    for (std::size_t i = 0; i < per_example_grads.size(); ++i) {
        const auto& g = per_example_grads[i];
        if (g.size() != dim) throw ConfigError("clip_and_noise: inconsistent gradient sizes");
        if (!g.allFinite())
            throw TrainingError("clip_and_noise: non-finite gradient at index " +
                                std::to_string(i));
        double norm = g.norm();
        double scale = norm > clip_norm ? clip_norm / norm : 1.0;
        sum += g * scale;
    }
    if (sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, sigma * clip_norm);
        for (Eigen::Index k = 0; k < dim; ++k) sum[k] += noise(rng);
    }
    return sum / static_cast<double>(per_example_grads.size());
}

}  // namespace wearsyn::dp
