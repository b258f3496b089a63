#pragma once

// Classifier two-sample test: Gaussian Naive Bayes distinguishing real from
// synthetic flattened windows. Accuracy near 0.5 means indistinguishable.

#include <Eigen/Dense>
#include <algorithm>
#include <optional>
#include <random>
#include <vector>

#include "wearsyn/quality/pca.hpp"

namespace wearsyn::quality {

struct GaussianNb {
    // index 0 = real, 1 = synthetic
    Eigen::VectorXd mean[2], var[2];
    double prior[2] = {0.5, 0.5};

    void fit(const MatrixXd& x, const std::vector<int>& y) {
        const Eigen::Index d = x.cols();
        for (int c = 0; c < 2; ++c) {
            mean[c] = Eigen::VectorXd::Zero(d);
            var[c] = Eigen::VectorXd::Zero(d);
        }
        long counts[2] = {0, 0};
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            mean[y[i]] += x.row(i).transpose();
            ++counts[y[i]];
        }
        for (int c = 0; c < 2; ++c)
            if (counts[c] > 0) mean[c] /= static_cast<double>(counts[c]);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            Eigen::VectorXd dlt = x.row(i).transpose() - mean[y[i]];
            var[y[i]] += dlt.cwiseProduct(dlt);
        }
        for (int c = 0; c < 2; ++c) {
            if (counts[c] > 0) var[c] /= static_cast<double>(counts[c]);
            var[c].array() += 1e-9;
            prior[c] = static_cast<double>(counts[c]) / static_cast<double>(x.rows());
        }
    }

    int predict(const Eigen::VectorXd& x) const {
        double best = -1e300;
        int arg = 0;
        for (int c = 0; c < 2; ++c) {
            double ll = std::log(std::max(prior[c], 1e-300));
            for (Eigen::Index j = 0; j < x.size(); ++j) {
                double d = x[j] - mean[c][j];
                ll += -0.5 * (std::log(2.0 * M_PI * var[c][j]) + d * d / var[c][j]);
            }
            if (ll > best) {
                best = ll;
                arg = c;
            }
        }
        return arg;
    }
};

struct C2stResult {
    double accuracy_both = 0.0;
    std::optional<double> accuracy_stress;
    std::optional<double> accuracy_nonstress;  // absent when the stratum is empty
};

// Strata (stress / non-stress) are balanced by downsampling the larger side;
// a stratified 70/30 train/test split feeds the classifier.
inline C2stResult c2st(const WindowSet& real, const WindowSet& synth, std::uint64_t seed,
                       double train_fraction = 0.7) {
    std::mt19937_64 rng(seed);
    struct Item {
        Eigen::VectorXd x;
        int origin;  // 0 real / 1 synth
        int stress;
    };
    std::vector<Item> train, test;
    // per stratum: balance counts, then split
    for (int stress : {0, 1}) {
        std::vector<const Window*> r, s;
        for (std::size_t i = 0; i < real.size(); ++i)
            if (real.labels[i] == stress) r.push_back(&real.windows[i]);
        for (std::size_t i = 0; i < synth.size(); ++i)
            if (synth.labels[i] == stress) s.push_back(&synth.windows[i]);
        if (r.empty() || s.empty()) continue;  // stratum skipped, marked by absent accuracy
        std::shuffle(r.begin(), r.end(), rng);
        std::shuffle(s.begin(), s.end(), rng);
        std::size_t n = std::min(r.size(), s.size());
        auto flat = [](const Window& w) {
            Eigen::VectorXd v(kFlatDim);
            for (int t = 0; t < kWindowSeconds; ++t)
                for (int c = 0; c < kNumChannels; ++c) v[t * kNumChannels + c] = w(t, c);
            return v;
        };
        std::size_t n_train = static_cast<std::size_t>(n * train_fraction);
        for (std::size_t i = 0; i < n; ++i) {
            auto& dst = i < n_train ? train : test;
            dst.push_back({flat(*r[i]), 0, stress});
            dst.push_back({flat(*s[i]), 1, stress});
        }
    }
    if (train.empty() || test.empty())
        throw ConfigError("c2st: no overlapping strata between real and synthetic sets");

    MatrixXd xtr(static_cast<Eigen::Index>(train.size()), kFlatDim);
    std::vector<int> ytr(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        xtr.row(static_cast<Eigen::Index>(i)) = train[i].x.transpose();
        ytr[i] = train[i].origin;
    }
    GaussianNb nb;
    nb.fit(xtr, ytr);

    long correct[3] = {0, 0, 0}, total[3] = {0, 0, 0};  // 0 both, 1 stress, 2 nonstress
    for (const auto& item : test) {
        int pred = nb.predict(item.x);
        int strata[2] = {0, item.stress == 1 ? 1 : 2};
        for (int s : strata) {
            ++total[s];
            if (pred == item.origin) ++correct[s];
        }
    }
    C2stResult res;
    res.accuracy_both = static_cast<double>(correct[0]) / static_cast<double>(total[0]);
    if (total[1] > 0)
        res.accuracy_stress = static_cast<double>(correct[1]) / static_cast<double>(total[1]);
    if (total[2] > 0)
        res.accuracy_nonstress = static_cast<double>(correct[2]) / static_cast<double>(total[2]);
    return res;
}

}  // namespace wearsyn::quality
