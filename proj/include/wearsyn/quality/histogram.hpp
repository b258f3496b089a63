#pragma once

#include <algorithm>
#include <vector>

#include "wearsyn/core/errors.hpp"

namespace wearsyn::quality {

struct Histogram {
    std::vector<double> density;  // integrates to 1 over [0,1]
    std::vector<double> edges;    // bins + 1
    std::size_t count = 0;
};

// Density histogram over [0,1]; out-of-range values clamp into the end bins.
inline Histogram distribution_histogram(const std::vector<double>& values, int bins) {
    if (bins < 2) throw ConfigError("distribution_histogram: need at least 2 bins");
    Histogram h;
    h.edges.resize(bins + 1);
    for (int b = 0; b <= bins; ++b) h.edges[b] = static_cast<double>(b) / bins;
    h.density.assign(bins, 0.0);
    h.count = values.size();
    if (values.empty()) return h;
    for (double v : values) {
        int b = static_cast<int>(v * bins);
        b = std::clamp(b, 0, bins - 1);
        h.density[b] += 1.0;
    }
    const double binwidth = 1.0 / bins;
    for (double& d : h.density) d /= static_cast<double>(values.size()) * binwidth;
    return h;
}

}  // namespace wearsyn::quality
