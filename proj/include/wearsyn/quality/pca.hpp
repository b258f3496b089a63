#pragma once

#include <Eigen/Dense>
#include <vector>

#include "wearsyn/core/types.hpp"

namespace wearsyn::quality {

// A window flattened row-major to 360 values plus its label and origin.
struct FlatSample {
    Eigen::VectorXd vector;  // length 360
    int label = 0;
    bool synthetic = false;
};

inline constexpr int kFlatDim = kWindowSeconds * kNumChannels;

inline std::vector<FlatSample> flatten(const WindowSet& ws, bool synthetic) {
    std::vector<FlatSample> out;
    out.reserve(ws.size());
    for (std::size_t i = 0; i < ws.size(); ++i) {
        FlatSample f;
        f.vector.resize(kFlatDim);
        for (int t = 0; t < kWindowSeconds; ++t)
            for (int c = 0; c < kNumChannels; ++c)
                f.vector[t * kNumChannels + c] = ws.windows[i](t, c);
        f.label = ws.labels[i];
        f.synthetic = synthetic;
        out.push_back(std::move(f));
    }
    return out;
}

struct PcaResult {
    MatrixXd real_points;    // n_real x 2
    MatrixXd synth_points;   // n_synth x 2
    Eigen::Vector2d explained_variance;
    // Signed per-signal contribution to each PC: sum of absolute loadings over
    // the signal's 60 columns, sign taken from the net loading.
    Eigen::Matrix<double, kNumChannels, 2> contributions;
};

// Basis is fitted on the real samples only; synthetic points are projected
// with the real-fitted mean and components.
inline PcaResult pca_project(const std::vector<FlatSample>& real,
                             const std::vector<FlatSample>& synth) {
    if (real.size() < 3) throw ConfigError("pca_project: need at least 3 real samples");
    const Eigen::Index n = static_cast<Eigen::Index>(real.size());
    MatrixXd X(n, kFlatDim);
    for (Eigen::Index i = 0; i < n; ++i) X.row(i) = real[i].vector.transpose();
    Eigen::RowVectorXd mean = X.colwise().mean();
    X.rowwise() -= mean;
    MatrixXd cov = (X.transpose() * X) / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
    // eigenvalues ascend; take the last two
    PcaResult r;
    MatrixXd basis(kFlatDim, 2);
    basis.col(0) = eig.eigenvectors().col(kFlatDim - 1);
    basis.col(1) = eig.eigenvectors().col(kFlatDim - 2);
    r.explained_variance << eig.eigenvalues()(kFlatDim - 1), eig.eigenvalues()(kFlatDim - 2);

    r.real_points = X * basis;
    r.synth_points.resize(static_cast<Eigen::Index>(synth.size()), 2);
    for (std::size_t i = 0; i < synth.size(); ++i)
        r.synth_points.row(static_cast<Eigen::Index>(i)) =
            (synth[i].vector.transpose() - mean) * basis;

    for (int s = 0; s < kNumChannels; ++s)
        for (int pc = 0; pc < 2; ++pc) {
            double abs_sum = 0.0, net = 0.0;
            for (int t = 0; t < kWindowSeconds; ++t) {
                double l = basis(t * kNumChannels + s, pc);
                abs_sum += std::fabs(l);
                net += l;
            }
            r.contributions(s, pc) = net >= 0 ? abs_sum : -abs_sum;
        }
    return r;
}

}  // namespace wearsyn::quality
