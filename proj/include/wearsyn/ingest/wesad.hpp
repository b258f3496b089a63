#pragma once

// WESAD cohort discovery and subject loading. Two archive layouts are
// supported, keyed by what is found on disk:
//   S<id>/S<id>.pkl  -- the distribution's serialized record
//   S<id>/*.csv      -- columnar-text fallback, one file per channel plus labels.csv

#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wearsyn/core/types.hpp"
#include "wearsyn/ingest/pickle.hpp"

namespace wearsyn::ingest {

namespace fs = std::filesystem;

// Empatica E4 native rates; the label stream comes from the 700 Hz chest unit.
struct RateTable {
    double acc = 32.0;
    double bvp = 64.0;
    double eda = 4.0;
    double temp = 4.0;
    double label = 700.0;

    double for_signal(Signal s) const {
        switch (s) {
            case Signal::AccX:
            case Signal::AccY:
            case Signal::AccZ:
                return acc;
            case Signal::Bvp:
                return bvp;
            case Signal::Eda:
                return eda;
            case Signal::Temp:
                return temp;
        }
        return 0.0;
    }
};

inline const std::array<int, 15>& full_cohort_ids() {
    static const std::array<int, 15> ids = {2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 13, 14, 15, 16, 17};
    return ids;
}

namespace detail {

inline bool has_pickle(const fs::path& dir, int id) {
    return fs::exists(dir / ("S" + std::to_string(id) + ".pkl"));
}

inline bool has_csv(const fs::path& dir) {
    return fs::exists(dir / "labels.csv");
}

inline std::vector<double> read_csv_column(const fs::path& path, double* rate_out) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path.string());
    std::string header;
    std::getline(f, header);
    if (header.find("timestamp_s") == std::string::npos)
        throw ParseError(path.string() + ": expected header timestamp_s,value");
    std::vector<double> values;
    double t_first = 0.0, t_last = 0.0;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string ts, val;
        std::getline(ss, ts, ',');
        std::getline(ss, val, ',');
        double t = std::stod(ts);
        if (values.empty()) t_first = t;
        t_last = t;
        values.push_back(std::stod(val));
    }
    if (values.empty()) throw ParseError(path.string() + ": no samples");
    if (rate_out) {
        *rate_out = values.size() > 1
                        ? static_cast<double>(values.size() - 1) / (t_last - t_first)
                        : 1.0;
    }
    return values;
}

inline void check_durations(const RawSubject& s) {
    double lo = 1e300, hi = 0.0;
    for (const auto& [name, ch] : s.channels) {
        if (ch.samples.empty()) throw SchemaError("subject " + std::to_string(s.subject_id) +
                                                  ": empty channel " + name);
        lo = std::min(lo, ch.duration_s());
        hi = std::max(hi, ch.duration_s());
    }
    if (hi - lo > 1.0)
        throw SchemaError("subject " + std::to_string(s.subject_id) +
                          ": channel durations disagree by more than 1 s");
}

inline RawSubject load_pickle_subject(const fs::path& dir, int id, const RateTable& rates) {
    const fs::path pkl = dir / ("S" + std::to_string(id) + ".pkl");
    pickle::ValuePtr root;
    try {
        root = pickle::load_file(pkl.string());
    } catch (const ParseError& e) {
        throw ParseError("subject " + std::to_string(id) + ": " + e.what());
    }
    const auto& wrist = root->at("signal")->at("wrist");
    RawSubject s;
    s.subject_id = id;

    auto take = [&](const char* key, Signal sig, int column, int ncols) {
        if (!wrist->has(key))
            throw SchemaError("subject " + std::to_string(id) + ": missing channel " +
                              std::string(key == std::string("ACC") ? signal_name(sig) : key));
        const auto& arr = wrist->at(key)->array();
        ChannelData ch;
        ch.rate_hz = rates.for_signal(sig);
        std::size_t n = arr.shape.empty() ? arr.data.size() : arr.shape[0];
        ch.samples.reserve(n);
        for (std::size_t i = 0; i < n; ++i) ch.samples.push_back(arr.data[i * ncols + column]);
        s.channels[signal_name(sig)] = std::move(ch);
    };
    take("ACC", Signal::AccX, 0, 3);
    take("ACC", Signal::AccY, 1, 3);
    take("ACC", Signal::AccZ, 2, 3);
    take("BVP", Signal::Bvp, 0, 1);
    take("EDA", Signal::Eda, 0, 1);
    take("TEMP", Signal::Temp, 0, 1);

    const auto& lab = root->at("label")->array();
    s.label_stream.rate_hz = rates.label;
    s.label_stream.samples = lab.data;
    return s;
}

inline RawSubject load_csv_subject(const fs::path& dir, int id) {
    RawSubject s;
    s.subject_id = id;
    std::vector<std::string> missing;
    for (int c = 0; c < kNumChannels; ++c) {
        fs::path p = dir / (std::string(kSignalNames[c]) + ".csv");
        if (!fs::exists(p)) {
            missing.push_back(kSignalNames[c]);
            continue;
        }
        ChannelData ch;
        ch.samples = read_csv_column(p, &ch.rate_hz);
        s.channels[kSignalNames[c]] = std::move(ch);
    }
    if (!missing.empty()) {
        std::string msg = "subject " + std::to_string(id) + ": missing channels:";
        for (const auto& m : missing) msg += " " + m;
        throw SchemaError(msg);
    }
    s.label_stream.samples = read_csv_column(dir / "labels.csv", &s.label_stream.rate_hz);
    return s;
}

}  // namespace detail

inline Cohort discover_subjects(const std::string& root) {
    fs::path r(root);
    std::error_code ec;
    if (!fs::is_directory(r, ec)) throw IoError("unreadable root: " + root);
    Cohort cohort;
    cohort.root = root;
    for (const auto& entry : fs::directory_iterator(r, ec)) {
        if (!entry.is_directory()) continue;
        std::string name = entry.path().filename().string();
        if (name.size() < 2 || name[0] != 'S') continue;
        int id = 0;
        auto res = std::from_chars(name.data() + 1, name.data() + name.size(), id);
        if (res.ec != std::errc() || res.ptr != name.data() + name.size()) continue;
        if (detail::has_pickle(entry.path(), id) || detail::has_csv(entry.path()))
            cohort.subject_ids.push_back(id);
    }
    if (ec) throw IoError("cannot scan root: " + root);
    std::sort(cohort.subject_ids.begin(), cohort.subject_ids.end());
    if (cohort.subject_ids.empty()) throw IoError("no subject archives found under " + root);
    return cohort;
}

inline RawSubject load_subject(const std::string& root, int id, const RateTable& rates = {}) {
    fs::path dir = fs::path(root) / ("S" + std::to_string(id));
    RawSubject s;
    if (detail::has_pickle(dir, id))
        s = detail::load_pickle_subject(dir, id, rates);
    else if (detail::has_csv(dir))
        s = detail::load_csv_subject(dir, id);
    else
        throw IoError("subject " + std::to_string(id) + ": no archive under " + dir.string());
    if (s.channels.size() != kNumChannels)
        throw SchemaError("subject " + std::to_string(id) + ": expected 6 wrist channels");
    if (s.label_stream.samples.empty())
        throw SchemaError("subject " + std::to_string(id) + ": empty label stream");
    detail::check_durations(s);
    return s;
}

}  // namespace wearsyn::ingest
