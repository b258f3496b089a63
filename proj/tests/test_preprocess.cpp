#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "wearsyn/preprocess.hpp"

using namespace wearsyn;
namespace pp = wearsyn::preprocess;

// Direct O(n^2) DFT magnitude at bin k, used as the oracle for tone checks.
static double dft_magnitude(const std::vector<double>& x, std::size_t k) {
    std::complex<double> acc(0, 0);
    for (std::size_t n = 0; n < x.size(); ++n)
        acc += x[n] * std::polar(1.0, -2.0 * M_PI * double(k) * double(n) / double(x.size()));
    return std::abs(acc);
}

TEST_CASE("resampling a constant signal preserves the constant") {
    std::vector<double> x(480, 2.5);
    auto y = pp::resample_fourier(x, 4.0, 1.0);
    CHECK(y.size() == 120);
    for (double v : y) CHECK(v == doctest::Approx(2.5).epsilon(1e-9));
}

TEST_CASE("0.1 Hz tone at 4 Hz survives downsampling to 1 Hz") {
    const double src = 4.0, f0 = 0.1, dur = 120.0;
    std::vector<double> x(static_cast<std::size_t>(src * dur));
    for (std::size_t n = 0; n < x.size(); ++n)
        x[n] = std::sin(2.0 * M_PI * f0 * double(n) / src);
    auto y = pp::resample_fourier(x, src, 1.0);
    REQUIRE(y.size() == 120);
    // dominant bin should still be k = f0 * 120 = 12
    std::size_t best = 0;
    double best_mag = -1.0;
    for (std::size_t k = 1; k <= y.size() / 2; ++k) {
        double m = dft_magnitude(y, k);
        if (m > best_mag) {
            best_mag = m;
            best = k;
        }
    }
    CHECK(best == 12);
}

TEST_CASE("upsampling is rejected") {
    std::vector<double> x(10, 1.0);
    CHECK_THROWS_AS(pp::resample_fourier(x, 1.0, 4.0), ConfigError);
}

TEST_CASE("modal label resampling picks the majority code per second") {
    // 700 Hz-style stream: second 0 mostly baseline, second 1 mostly stress
    std::vector<double> stream;
    for (int i = 0; i < 700; ++i) stream.push_back(i < 400 ? 1 : 2);
    for (int i = 0; i < 700; ++i) stream.push_back(i < 100 ? 1 : 2);
    auto out = pp::resample_labels_modal(stream, 700.0);
    REQUIRE(out.size() == 2);
    CHECK(out[0] == 1);
    CHECK(out[1] == 2);
}

TEST_CASE("relabeling maps protocol codes and masks the rest") {
    std::vector<int> codes = {kLabelBaseline, kLabelAmusement, kLabelStress,
                              kLabelTransient, kLabelMeditation, 6};
    auto r = pp::relabel_binary(codes);
    CHECK(r.binary[0] == 0);
    CHECK(r.binary[1] == 0);
    CHECK(r.binary[2] == 1);
    CHECK(r.keep == std::vector<bool>({true, true, true, false, false, false}));
    CHECK(r.masked_count == 3);
}

TEST_CASE("all-stress stream keeps everything as 1") {
    std::vector<int> codes(50, kLabelStress);
    auto r = pp::relabel_binary(codes);
    for (std::size_t i = 0; i < codes.size(); ++i) {
        CHECK(r.binary[i] == 1);
        CHECK(r.keep[i]);
    }
}

TEST_CASE("transient-only stream is fully masked") {
    std::vector<int> codes(30, kLabelTransient);
    auto r = pp::relabel_binary(codes);
    for (bool k : r.keep) CHECK_FALSE(k);
    CHECK(r.masked_count == 30);
}

static UnifiedSession make_session(int T, int label = 0) {
    UnifiedSession s;
    s.subject_id = 1;
    s.matrix = MatrixXd::Zero(T, kNumChannels);
    s.labels.assign(T, label);
    s.segment_starts = {0};
    return s;
}

TEST_CASE("min-max normalization: affine and degenerate channels") {
    auto s = make_session(3);
    s.matrix.col(0) << 2, 4, 6;
    s.matrix.col(1) << 5, 5, 5;
    auto r = pp::normalize_minmax(s);
    CHECK(r.session.matrix(0, 0) == doctest::Approx(0.0));
    CHECK(r.session.matrix(1, 0) == doctest::Approx(0.5));
    CHECK(r.session.matrix(2, 0) == doctest::Approx(1.0));
    CHECK(r.session.matrix.col(1).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(r.degenerate_channels.size() >= 1);
    CHECK(r.degenerate_channels[0] == std::string("ACC_y"));
}

TEST_CASE("normalization is idempotent on non-degenerate data") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3, 7);
    auto s = make_session(40);
    for (Eigen::Index i = 0; i < s.matrix.size(); ++i) s.matrix(i) = u(rng);
    auto once = pp::normalize_minmax(s);
    auto twice = pp::normalize_minmax(once.session);
    CHECK((once.session.matrix - twice.session.matrix).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(once.session.matrix.minCoeff() >= 0.0);
    CHECK(once.session.matrix.maxCoeff() <= 1.0);
}

TEST_CASE("window count formula against exhaustive enumeration") {
    for (int T = 60; T <= 400; ++T)
        for (int stride : {30, 60}) {
            auto s = make_session(T);
            auto r = pp::slice_windows(s, 60, stride);
            int expected = (T - 60) / stride + 1;
            CHECK(static_cast<int>(r.set.size()) == expected);
        }
}

TEST_CASE("exactly one window from a 60 s session at stride 30") {
    auto s = make_session(60);
    auto r = pp::slice_windows(s, 60, 30);
    CHECK(r.set.size() == 1);
}

TEST_CASE("sessions shorter than a window produce an empty flagged set") {
    auto s = make_session(59);
    auto r = pp::slice_windows(s, 60, 30);
    CHECK(r.set.empty());
    CHECK(r.too_short);
}

TEST_CASE("majority labeling and the stress tie rule") {
    auto s = make_session(90);
    // 31 stress rows in [0, 60) -> majority stress
    for (int i = 0; i < 31; ++i) s.labels[i] = 1;
    auto r = pp::slice_windows(s, 60, 30);
    CHECK(r.set.labels[0] == 1);

    auto s2 = make_session(90);
    for (int i = 0; i < 29; ++i) s2.labels[i] = 1;
    CHECK(pp::slice_windows(s2, 60, 30).set.labels[0] == 0);

    auto s3 = make_session(60);
    for (int i = 0; i < 30; ++i) s3.labels[i] = 1;  // 30/30 tie
    CHECK(pp::slice_windows(s3, 60, 60).set.labels[0] == 1);
}

TEST_CASE("stride-30 windows overlap by exactly 30 rows") {
    auto s = make_session(120);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, 1);
    for (Eigen::Index i = 0; i < s.matrix.size(); ++i) s.matrix(i) = u(rng);
    auto r = pp::slice_windows(s, 60, 30);
    REQUIRE(r.set.size() == 3);
    CHECK((r.set.windows[0].bottomRows(30) - r.set.windows[1].topRows(30))
              .cwiseAbs()
              .maxCoeff() == 0.0);
}

TEST_CASE("stride-30 count is about twice the stride-60 count") {
    for (int T : {60, 100, 250, 399}) {
        auto s = make_session(T);
        int n60 = static_cast<int>(pp::slice_windows(s, 60, 60).set.size());
        int n30 = static_cast<int>(pp::slice_windows(s, 60, 30).set.size());
        CHECK(n30 >= 2 * n60 - 1);
        CHECK(n30 <= 2 * n60);
    }
}

TEST_CASE("windowing never straddles a masked gap") {
    auto s = make_session(150);
    s.segment_starts = {0, 70};  // gap between rows 69 and 70
    auto r = pp::slice_windows(s, 60, 30);
    // segment [0,70) -> 1 window at 0; segment [70,150) -> 1 window at 70
    REQUIRE(r.set.size() == 2);
    CHECK(r.set.window_start_s[0] == 0);
    CHECK(r.set.window_start_s[1] == 70);
}

TEST_CASE("unify_session masks, segments, and aligns") {
    RawSubject raw;
    raw.subject_id = 4;
    // 180 s of data; label stream: 60 s baseline, 60 s transient, 60 s stress
    for (int c = 0; c < kNumChannels; ++c) {
        ChannelData ch;
        ch.rate_hz = 4.0;
        for (int i = 0; i < 720; ++i) ch.samples.push_back(std::sin(0.01 * i + c));
        raw.channels[kSignalNames[c]] = ch;
    }
    raw.label_stream.rate_hz = 700.0;
    for (int i = 0; i < 700 * 180; ++i) {
        int sec = i / 700;
        raw.label_stream.samples.push_back(sec < 60 ? kLabelBaseline
                                                    : (sec < 120 ? kLabelTransient : kLabelStress));
    }
    auto s = pp::unify_session(raw);
    CHECK(s.matrix.rows() == 120);  // transient minute dropped
    CHECK(s.segment_starts == std::vector<int>({0, 60}));
    for (int i = 0; i < 60; ++i) CHECK(s.labels[i] == 0);
    for (int i = 60; i < 120; ++i) CHECK(s.labels[i] == 1);
}

TEST_CASE("relabel preserves order and never fabricates rows") {
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<int> code(0, 7);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> codes(200);
        for (auto& c : codes) c = code(rng);
        auto r = pp::relabel_binary(codes);
        std::size_t kept = 0;
        for (bool k : r.keep) kept += k;
        CHECK(kept + r.masked_count == codes.size());
    }
}
