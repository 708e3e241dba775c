#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fft.hpp"

namespace cdwsim {

/** Linear convolution; output length is a.size() + b.size() - 1.
 *  Small products run the direct sum, larger ones go through the FFT. */
inline std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("convolve: empty input");
    const std::size_t n = a.size() + b.size() - 1;
    if (a.size() * b.size() <= 16384) {
        std::vector<double> out(n, 0.0);
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
        return out;
    }
    const std::size_t m = next_pow2(n);
    std::vector<cdouble> fa = fft_real(a, m);
    const std::vector<cdouble> fb = fft_real(b, m);
    for (std::size_t i = 0; i < m; ++i) fa[i] *= fb[i];
    return ifft_real(std::move(fa), n);
}

/** Envelope of a real signal: magnitude of its analytic signal, built by
 *  one-sided spectrum doubling in the frequency domain. */
inline std::vector<double> envelope_of(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    if (n == 1) return {std::abs(x[0])};
    std::vector<cdouble> spec(n);
    for (std::size_t i = 0; i < n; ++i) spec[i] = cdouble(x[i], 0.0);
    fft(spec, false);
    const std::size_t half = n / 2;
    for (std::size_t i = 1; i < (n + 1) / 2; ++i) spec[i] *= 2.0;
    if (n % 2 == 0) {
        // Nyquist bin stays unscaled
        for (std::size_t i = half + 1; i < n; ++i) spec[i] = cdouble(0.0, 0.0);
    } else {
        for (std::size_t i = half + 1; i < n; ++i) spec[i] = cdouble(0.0, 0.0);
    }
    fft(spec, true);
    std::vector<double> env(n);
    for (std::size_t i = 0; i < n; ++i) env[i] = std::abs(spec[i]);
    return env;
}

inline double energy_of(const std::vector<double>& x) {
    double e = 0.0;
    for (double v : x) e += v * v;
    return e;
}

inline double db_amplitude(double ratio) { return 20.0 * std::log10(ratio); }
inline double db_power(double ratio) { return 10.0 * std::log10(ratio); }

/** Index of the maximum absolute value. */
inline std::size_t peak_index(const std::vector<double>& x) {
    if (x.empty()) throw std::invalid_argument("peak_index: empty input");
    std::size_t best = 0;
    for (std::size_t i = 1; i < x.size(); ++i)
        if (std::abs(x[i]) > std::abs(x[best])) best = i;
    return best;
}

}  // namespace cdwsim
