#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wearsyn/core/errors.hpp"

namespace wearsyn {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

inline constexpr int kNumChannels = 6;
inline constexpr int kWindowSeconds = 60;

enum class Signal : int { AccX = 0, AccY, AccZ, Bvp, Eda, Temp };

inline constexpr std::array<const char*, kNumChannels> kSignalNames = {
    "ACC_x", "ACC_y", "ACC_z", "BVP", "EDA", "TEMP"};

inline const char* signal_name(Signal s) { return kSignalNames[static_cast<int>(s)]; }

inline Signal signal_from_name(const std::string& name) {
    for (int i = 0; i < kNumChannels; ++i)
        if (name == kSignalNames[i]) return static_cast<Signal>(i);
    throw ConfigError("unknown signal name: " + name);
}

// WESAD study-protocol label codes.
enum ProtocolLabel : int {
    kLabelTransient = 0,
    kLabelBaseline = 1,
    kLabelStress = 2,
    kLabelAmusement = 3,
    kLabelMeditation = 4,
};

// One channel as recorded: samples at a native rate.
struct ChannelData {
    std::vector<double> samples;
    double rate_hz = 0.0;

    double duration_s() const {
        return rate_hz > 0 ? static_cast<double>(samples.size()) / rate_hz : 0.0;
    }
};

// One subject's wrist channels plus the label stream.
struct RawSubject {
    int subject_id = 0;
    std::map<std::string, ChannelData> channels;  // keyed by signal name
    ChannelData label_stream;

    const ChannelData& channel(Signal s) const {
        auto it = channels.find(signal_name(s));
        if (it == channels.end())
            throw SchemaError(std::string("missing channel ") + signal_name(s));
        return it->second;
    }
};

struct Cohort {
    std::string root;
    std::vector<int> subject_ids;  // sorted
};

// Per-subject 1 Hz aligned matrix. Rows are seconds, columns follow Signal order.
// Masked-out seconds are removed; segment_starts marks where contiguous runs
// begin so that windowing never straddles a protocol gap.
struct UnifiedSession {
    int subject_id = 0;
    MatrixXd matrix;            // T x 6, values in [0,1] once normalized
    std::vector<int> labels;    // length T, 0/1
    std::vector<int> segment_starts;  // row indices where a new contiguous segment begins
};

using Window = Eigen::Matrix<double, kWindowSeconds, kNumChannels>;

struct WindowSet {
    std::vector<Window> windows;
    std::vector<int> labels;  // 0/1 per window
    int stride_s = 60;
    std::vector<int> provenance;  // contributing subject ids (or pseudo ids)
    // per-window origin: subject id and start second, parallel to windows
    std::vector<int> window_subject;
    std::vector<int> window_start_s;

    std::size_t size() const { return windows.size(); }
    bool empty() const { return windows.empty(); }

    void append(const WindowSet& other) {
        windows.insert(windows.end(), other.windows.begin(), other.windows.end());
        labels.insert(labels.end(), other.labels.begin(), other.labels.end());
        window_subject.insert(window_subject.end(), other.window_subject.begin(),
                              other.window_subject.end());
        window_start_s.insert(window_start_s.end(), other.window_start_s.begin(),
                              other.window_start_s.end());
        for (int p : other.provenance)
            if (std::find(provenance.begin(), provenance.end(), p) == provenance.end())
                provenance.push_back(p);
    }
};

// FNV-1a over the raw little-endian doubles of a window set; used for
// leakage-freedom fingerprinting.
inline std::uint64_t fingerprint(const WindowSet& ws) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    for (std::size_t i = 0; i < ws.windows.size(); ++i) {
        mix(ws.windows[i].data(), sizeof(double) * kWindowSeconds * kNumChannels);
        int lab = ws.labels[i];
        mix(&lab, sizeof(lab));
    }
    return h;
}

inline std::uint64_t fingerprint_window(const Window& w) {
    std::uint64_t h = 1469598103934665603ull;
    const auto* b = reinterpret_cast<const unsigned char*>(w.data());
    for (std::size_t i = 0; i < sizeof(double) * kWindowSeconds * kNumChannels; ++i) {
        h ^= b[i];
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace wearsyn
