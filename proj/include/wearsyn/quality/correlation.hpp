#pragma once

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>
#include <vector>

#include "wearsyn/core/types.hpp"

namespace wearsyn::quality {

inline constexpr int kCorrDim = kNumChannels + 1;  // six signals + label

// Pearson r over per-second rows with two-sided t-test p-values
// (n-2 degrees of freedom). Constant columns are flagged and excluded from
// significance claims; their r entries stay NaN off-diagonal.
struct CorrelationReport {
    Eigen::Matrix<double, kCorrDim, kCorrDim> r;
    Eigen::Matrix<double, kCorrDim, kCorrDim> p;
    std::vector<int> degenerate_columns;
};

inline CorrelationReport correlation_with_p(const MatrixXd& rows) {
    if (rows.rows() < 3) throw ConfigError("correlation_with_p: need at least 3 rows");
    if (rows.cols() != kCorrDim) throw ConfigError("correlation_with_p: expected 7 columns");
    const double n = static_cast<double>(rows.rows());

    CorrelationReport rep;
    rep.r.setConstant(std::numeric_limits<double>::quiet_NaN());
    rep.p.setConstant(1.0);

    Eigen::RowVectorXd mean = rows.colwise().mean();
    MatrixXd centered = rows.rowwise() - mean;
    Eigen::VectorXd sd(kCorrDim);
    for (int c = 0; c < kCorrDim; ++c) {
        sd[c] = std::sqrt(centered.col(c).squaredNorm() / (n - 1));
        if (sd[c] == 0.0) rep.degenerate_columns.push_back(c);
    }

    boost::math::students_t dist(n - 2);
    for (int a = 0; a < kCorrDim; ++a) {
        rep.r(a, a) = 1.0;
        rep.p(a, a) = 1.0;  // diagonal significance undefined
        for (int b = a + 1; b < kCorrDim; ++b) {
            if (sd[a] == 0.0 || sd[b] == 0.0) continue;
            double r = centered.col(a).dot(centered.col(b)) / ((n - 1) * sd[a] * sd[b]);
            r = std::clamp(r, -1.0, 1.0);
            rep.r(a, b) = rep.r(b, a) = r;
            double p;
            if (std::fabs(r) >= 1.0 - 1e-15) {
                p = 0.0;
            } else {
                double t = r * std::sqrt((n - 2) / (1 - r * r));
                p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
            }
            rep.p(a, b) = rep.p(b, a) = p;
        }
    }
    return rep;
}

// Stacks per-second rows (6 signals + binary label) from a session.
inline MatrixXd session_rows(const UnifiedSession& s) {
    MatrixXd rows(s.matrix.rows(), kCorrDim);
    rows.leftCols(kNumChannels) = s.matrix;
    for (Eigen::Index t = 0; t < rows.rows(); ++t)
        rows(t, kNumChannels) = s.labels[t];
    return rows;
}

// Stacks the per-second rows of every window in a set (windows carry their
// single label on every row).
inline MatrixXd window_rows(const WindowSet& ws) {
    MatrixXd rows(static_cast<Eigen::Index>(ws.size()) * kWindowSeconds, kCorrDim);
    Eigen::Index r = 0;
    for (std::size_t i = 0; i < ws.size(); ++i)
        for (int t = 0; t < kWindowSeconds; ++t, ++r) {
            rows.block(r, 0, 1, kNumChannels) = ws.windows[i].row(t);
            rows(r, kNumChannels) = ws.labels[i];
        }
    return rows;
}

}  // namespace wearsyn::quality
