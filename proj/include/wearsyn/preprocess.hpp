#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "wearsyn/core/fft.hpp"
#include "wearsyn/core/types.hpp"

namespace wearsyn::preprocess {

// Fourier-method resampling: truncate the discrete spectrum to the new
// Nyquist band, inverse-transform, rescale. Downsampling only.
inline std::vector<double> resample_fourier(const std::vector<double>& signal, double src_hz,
                                            double dst_hz = 1.0) {
    if (signal.empty()) throw ConfigError("resample_fourier: empty signal");
    if (dst_hz <= 0.0 || src_hz <= 0.0) throw ConfigError("resample_fourier: rates must be positive");
    if (src_hz < dst_hz) throw ConfigError("resample_fourier: upsampling unsupported");
    const std::size_t n = signal.size();
    const std::size_t m = static_cast<std::size_t>(
        std::lround(static_cast<double>(n) * dst_hz / src_hz));
    if (m == 0) throw ConfigError("resample_fourier: output would be empty");
    if (m == n) return signal;

    auto spec = fft::rfft(signal);
    std::vector<std::complex<double>> trunc(m / 2 + 1, {0.0, 0.0});
    for (std::size_t k = 0; k < trunc.size() && k < spec.size(); ++k) trunc[k] = spec[k];
    if (m % 2 == 0 && m / 2 < spec.size())
        trunc[m / 2] = {trunc[m / 2].real(), 0.0};  // output Nyquist bin must be real
    auto out = fft::irfft(trunc, m);
    const double scale = static_cast<double>(m) / static_cast<double>(n);
    for (double& v : out) v *= scale;
    return out;
}

// Most frequent label inside each 1 s bucket; labels are categorical so the
// Fourier method does not apply to them.
inline std::vector<int> resample_labels_modal(const std::vector<double>& labels, double src_hz) {
    if (labels.empty()) throw ConfigError("resample_labels_modal: empty stream");
    const std::size_t out_len = static_cast<std::size_t>(
        std::lround(static_cast<double>(labels.size()) / src_hz));
    std::vector<int> out;
    out.reserve(out_len);
    for (std::size_t t = 0; t < out_len; ++t) {
        std::size_t lo = static_cast<std::size_t>(std::llround(t * src_hz));
        std::size_t hi = std::min(labels.size(),
                                  static_cast<std::size_t>(std::llround((t + 1) * src_hz)));
        if (lo >= hi) break;
        std::vector<int> counts(16, 0);
        for (std::size_t i = lo; i < hi; ++i) {
            int code = static_cast<int>(std::lround(labels[i]));
            if (code >= 0 && code < static_cast<int>(counts.size())) ++counts[code];
        }
        out.push_back(static_cast<int>(
            std::max_element(counts.begin(), counts.end()) - counts.begin()));
    }
    return out;
}

struct RelabelResult {
    std::vector<int> binary;   // 0 non-stress / 1 stress, length = input length
    std::vector<bool> keep;    // rows to retain
    int masked_count = 0;      // seconds outside {baseline, amusement, stress}
};

// baseline/amusement -> 0, stress -> 1, everything else masked.
inline RelabelResult relabel_binary(const std::vector<int>& labels_1hz) {
    RelabelResult r;
    r.binary.resize(labels_1hz.size(), 0);
    r.keep.resize(labels_1hz.size(), false);
    for (std::size_t i = 0; i < labels_1hz.size(); ++i) {
        switch (labels_1hz[i]) {
            case kLabelBaseline:
            case kLabelAmusement:
                r.binary[i] = 0;
                r.keep[i] = true;
                break;
            case kLabelStress:
                r.binary[i] = 1;
                r.keep[i] = true;
                break;
            default:
                ++r.masked_count;
        }
    }
    return r;
}

enum class NormalizationScope { PerSubject, Global };

struct NormalizeResult {
    UnifiedSession session;
    std::vector<std::string> degenerate_channels;  // max == min, zeroed out
};

// Per-channel min-max scaling into [0,1]. Scope is per subject unless the
// caller supplies corpus-wide bounds.
inline NormalizeResult normalize_minmax(const UnifiedSession& session,
                                        const MatrixXd* global_bounds = nullptr) {
    NormalizeResult r;
    r.session = session;
    for (int c = 0; c < kNumChannels; ++c) {
        double lo, hi;
        if (global_bounds) {
            lo = (*global_bounds)(0, c);
            hi = (*global_bounds)(1, c);
        } else {
            lo = session.matrix.col(c).minCoeff();
            hi = session.matrix.col(c).maxCoeff();
        }
        if (hi == lo) {
            r.session.matrix.col(c).setZero();
            r.degenerate_channels.push_back(kSignalNames[c]);
        } else {
            r.session.matrix.col(c) = (session.matrix.col(c).array() - lo) / (hi - lo);
        }
    }
    return r;
}

// Assembles the aligned 1 Hz session from a raw subject: Fourier-resample each
// channel, modal-resample the label stream, truncate to the common length,
// then apply the binary relabeling mask. Dropped seconds split the session
// into contiguous segments.
inline UnifiedSession unify_session(const RawSubject& raw) {
    std::array<std::vector<double>, kNumChannels> resampled;
    std::size_t min_len = std::numeric_limits<std::size_t>::max();
    for (int c = 0; c < kNumChannels; ++c) {
        const auto& ch = raw.channel(static_cast<Signal>(c));
        resampled[c] = resample_fourier(ch.samples, ch.rate_hz, 1.0);
        min_len = std::min(min_len, resampled[c].size());
    }
    std::vector<int> labels = resample_labels_modal(raw.label_stream.samples,
                                                    raw.label_stream.rate_hz);
    min_len = std::min(min_len, labels.size());
    labels.resize(min_len);

    RelabelResult rel = relabel_binary(labels);
    UnifiedSession s;
    s.subject_id = raw.subject_id;
    std::size_t kept = 0;
    for (std::size_t i = 0; i < min_len; ++i) kept += rel.keep[i] ? 1 : 0;
    s.matrix.resize(static_cast<Eigen::Index>(kept), kNumChannels);
    s.labels.reserve(kept);
    bool in_gap = true;
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < min_len; ++i) {
        if (!rel.keep[i]) {
            in_gap = true;
            continue;
        }
        if (in_gap) {
            s.segment_starts.push_back(static_cast<int>(row));
            in_gap = false;
        }
        for (int c = 0; c < kNumChannels; ++c) s.matrix(row, c) = resampled[c][i];
        s.labels.push_back(rel.binary[i]);
        ++row;
    }
    return s;
}

struct SliceResult {
    WindowSet set;
    bool too_short = false;  // session below one window length
};

// 60 s windows starting every stride_s seconds inside each contiguous
// segment; incomplete tails dropped; window label is the majority of its 60
// per-second labels, ties going to stress.
inline SliceResult slice_windows(const UnifiedSession& session, int window_s = kWindowSeconds,
                                 int stride_s = 60) {
    if (stride_s != 30 && stride_s != 60) throw ConfigError("slice_windows: stride must be 30 or 60");
    SliceResult r;
    r.set.stride_s = stride_s;
    r.set.provenance.push_back(session.subject_id);
    const int T = static_cast<int>(session.matrix.rows());
    if (T < window_s) {
        r.too_short = true;
        return r;
    }
    std::vector<int> seg = session.segment_starts;
    if (seg.empty()) seg.push_back(0);
    seg.push_back(T);
    for (std::size_t si = 0; si + 1 < seg.size(); ++si) {
        int seg_start = seg[si], seg_end = seg[si + 1];
        for (int start = seg_start; start + window_s <= seg_end; start += stride_s) {
            Window w;
            int stress_rows = 0;
            for (int t = 0; t < window_s; ++t) {
                w.row(t) = session.matrix.row(start + t);
                stress_rows += session.labels[start + t];
            }
            r.set.windows.push_back(w);
            r.set.labels.push_back(stress_rows * 2 >= window_s ? 1 : 0);
            r.set.window_subject.push_back(session.subject_id);
            r.set.window_start_s.push_back(start);
        }
    }
    if (r.set.empty()) r.too_short = true;
    return r;
}

}  // namespace wearsyn::preprocess
