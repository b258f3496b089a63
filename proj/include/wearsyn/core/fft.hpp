#pragma once

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <vector>

#include "wearsyn/core/errors.hpp"

namespace wearsyn::fft {

// FFTW plan creation is not thread-safe; execution of a fresh plan per call is.
inline std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

// Unnormalized forward real-to-complex transform: n/2+1 one-sided bins.
inline std::vector<std::complex<double>> rfft(const std::vector<double>& x) {
    if (x.empty()) throw ConfigError("rfft: empty input");
    const std::size_t n = x.size();
    std::vector<double> in(x);
    std::vector<std::complex<double>> out(n / 2 + 1);
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_plan p = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                           reinterpret_cast<fftw_complex*>(out.data()),
                                           FFTW_ESTIMATE);
        fftw_execute(p);
        fftw_destroy_plan(p);
    }
    return out;
}

// Inverse of rfft for output length n; normalized so irfft(rfft(x), n) == x.
inline std::vector<double> irfft(const std::vector<std::complex<double>>& spec, std::size_t n) {
    if (spec.size() != n / 2 + 1) throw ConfigError("irfft: bin count does not match length");
    std::vector<std::complex<double>> in(spec);
    std::vector<double> out(n);
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_plan p = fftw_plan_dft_c2r_1d(static_cast<int>(n),
                                           reinterpret_cast<fftw_complex*>(in.data()),
                                           out.data(), FFTW_ESTIMATE);
        fftw_execute(p);
        fftw_destroy_plan(p);
    }
    for (double& v : out) v /= static_cast<double>(n);
    return out;
}

inline std::vector<double> magnitude(const std::vector<std::complex<double>>& spec) {
    std::vector<double> m(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) m[i] = std::abs(spec[i]);
    return m;
}

}  // namespace wearsyn::fft
