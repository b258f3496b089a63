#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "wearsyn/core/fft.hpp"
#include "wearsyn/core/types.hpp"

namespace wearsyn::spectral {

inline constexpr int kSpectrumBins = 210;

// Subwindow lengths per signal; length x frequency-range upper bound = 210.
// ACC 7 s x 30 Hz, BVP 30 s x 7 Hz, EDA 30 s x 7 Hz, TEMP 35 s x 6 Hz.
struct SubwindowPlan {
    std::array<int, kNumChannels> subwindow_s = {7, 7, 7, 30, 30, 35};
    double slide_s = 0.25;
    int target_bins = kSpectrumBins;

    int subwindow_for(Signal s) const { return subwindow_s[static_cast<int>(s)]; }
    // Sub-sample slides floor to one sample.
    int stride_samples(double rate_hz = 1.0) const {
        return std::max(1, static_cast<int>(std::lround(slide_s * rate_hz)));
    }
};

struct SpectralFeatures {
    Eigen::Matrix<double, kNumChannels, kSpectrumBins> matrix;
    int label = 0;
    int window_id = -1;
};

inline int subwindow_count(int channel_len, int subwindow_len, int stride) {
    if (channel_len < subwindow_len) return 0;
    return (channel_len - subwindow_len) / stride + 1;
}

// One-sided magnitude spectra of every subwindow, zero-padded on the
// high-frequency end to `target_bins`.
inline std::vector<std::vector<double>> subwindow_spectra(const std::vector<double>& channel,
                                                          int subwindow_len, int stride,
                                                          int target_bins = kSpectrumBins) {
    if (static_cast<int>(channel.size()) < subwindow_len)
        throw ConfigError("subwindow_spectra: channel shorter than subwindow");
    if (subwindow_len < 1 || stride < 1)
        throw ConfigError("subwindow_spectra: bad plan entry");
    std::vector<std::vector<double>> out;
    const int count = subwindow_count(static_cast<int>(channel.size()), subwindow_len, stride);
    out.reserve(count);
    for (int s = 0; s < count; ++s) {
        std::vector<double> sub(channel.begin() + s * stride,
                                channel.begin() + s * stride + subwindow_len);
        std::vector<double> mag = fft::magnitude(fft::rfft(sub));
        if (static_cast<int>(mag.size()) > target_bins)
            throw ConfigError("subwindow_spectra: subwindow yields more bins than target");
        mag.resize(target_bins, 0.0);
        out.push_back(std::move(mag));
    }
    return out;
}

inline std::vector<double> average_spectrum(const std::vector<std::vector<double>>& spectra) {
    if (spectra.empty()) throw ConfigError("average_spectrum: empty list");
    const std::size_t bins = spectra.front().size();
    std::vector<double> avg(bins, 0.0);
    for (const auto& s : spectra) {
        if (s.size() != bins) throw ConfigError("average_spectrum: ragged spectra");
        for (std::size_t i = 0; i < bins; ++i) avg[i] += s[i];
    }
    for (double& v : avg) v /= static_cast<double>(spectra.size());
    return avg;
}

inline SpectralFeatures featurize(const Window& window, const SubwindowPlan& plan = {},
                                  int label = 0, int window_id = -1) {
    SpectralFeatures f;
    f.label = label;
    f.window_id = window_id;
    const int stride = plan.stride_samples();
    for (int c = 0; c < kNumChannels; ++c) {
        std::vector<double> channel(window.rows());
        for (int t = 0; t < window.rows(); ++t) channel[t] = window(t, c);
        auto spectra = subwindow_spectra(channel, plan.subwindow_s[c], stride, plan.target_bins);
        auto avg = average_spectrum(spectra);
        for (int b = 0; b < plan.target_bins; ++b) f.matrix(c, b) = avg[b];
    }
    return f;
}

inline std::vector<SpectralFeatures> featurize_set(const WindowSet& ws,
                                                   const SubwindowPlan& plan = {}) {
    std::vector<SpectralFeatures> out;
    out.reserve(ws.size());
    for (std::size_t i = 0; i < ws.size(); ++i)
        out.push_back(featurize(ws.windows[i], plan, ws.labels[i], static_cast<int>(i)));
    return out;
}

// Per-signal sum of squared bins.
inline std::array<double, kNumChannels> signal_power(const SpectralFeatures& f) {
    std::array<double, kNumChannels> p{};
    for (int c = 0; c < kNumChannels; ++c) p[c] = f.matrix.row(c).squaredNorm();
    return p;
}

// Average percentage change: |a-b| over the mean of a and b, in percent.
inline double percentage_change(double a, double b) {
    double denom = (a + b) / 2.0;
    if (denom == 0.0) return 0.0;
    return std::fabs(a - b) / denom * 100.0;
}

}  // namespace wearsyn::spectral
