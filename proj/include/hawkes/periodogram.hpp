#pragma once

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "hawkes/common.hpp"
#include "hawkes/simulation.hpp"

namespace hawkes {

struct Periodogram {
    std::size_t n;
    std::vector<double> ordinates;  // I_n(w_j), j = 0..n-1, w_j = 2pi j/n
    bool mean_removed;

    double frequency(std::size_t j) const { return two_pi * static_cast<double>(j) / static_cast<double>(n); }
};

namespace detail {

struct FftwDeleter {
    void operator()(double* p) const { fftw_free(p); }
    void operator()(fftw_complex* p) const { fftw_free(p); }
};

// One cached plan per length. Planning is the only non-reentrant part of
// FFTW's API; new-array execution on distinct fftw_malloc'd buffers (which
// share the planner's alignment) is safe concurrently. FFTW_ESTIMATE keeps
// plan construction deterministic.
inline fftw_plan r2c_plan(std::size_t n, double* in, fftw_complex* out) {
    static std::mutex mutex;
    static std::map<std::size_t, fftw_plan> plans;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = plans.find(n);
    if (it == plans.end()) {
        fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
        if (!plan) throw NumericalError("fftw plan creation failed");
        it = plans.emplace(n, plan).first;
    }
    return it->second;
}

}  // namespace detail

// I_n(w_j) = (2pi n)^{-1} |sum_k X_k e^{-ik w_j}|^2 via a real-to-complex FFT,
// mirrored onto j > n/2 by conjugate symmetry. Mean removal affects only the
// j = 0 ordinate at Fourier frequencies.
inline Periodogram compute_periodogram(const std::vector<double>& series, bool remove_mean = true) {
    std::size_t n = series.size();
    require(n >= 2, "compute_periodogram: need at least two observations");

    std::unique_ptr<double[], detail::FftwDeleter> in(
        static_cast<double*>(fftw_malloc(sizeof(double) * n)));
    std::unique_ptr<fftw_complex[], detail::FftwDeleter> out(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1))));
    if (!in || !out) throw std::bad_alloc();

    double mean = 0.0;
    if (remove_mean) {
        for (double x : series) mean += x;
        mean /= static_cast<double>(n);
    }
    for (std::size_t k = 0; k < n; ++k) in[k] = series[k] - mean;

    fftw_plan plan = detail::r2c_plan(n, in.get(), out.get());
    fftw_execute_dft_r2c(plan, in.get(), out.get());

    Periodogram pgram{n, std::vector<double>(n), remove_mean};
    double scale = 1.0 / (two_pi * static_cast<double>(n));
    for (std::size_t j = 0; j <= n / 2; ++j) {
        double re = out[j][0], im = out[j][1];
        pgram.ordinates[j] = (re * re + im * im) * scale;
    }
    for (std::size_t j = n / 2 + 1; j < n; ++j) pgram.ordinates[j] = pgram.ordinates[n - j];
    return pgram;
}

inline Periodogram compute_periodogram(const BinCountSeries& series, bool remove_mean = true) {
    std::vector<double> x(series.counts.begin(), series.counts.end());
    return compute_periodogram(x, remove_mean);
}

}  // namespace hawkes
