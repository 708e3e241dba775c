#pragma once

#include <complex>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace cdwsim {

using cdouble = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

/** In-place iterative radix-2 FFT. Size must be a power of two.
 *  The inverse transform includes the 1/N scaling. */
inline void fft_pow2(std::vector<cdouble>& a, bool inverse) {
    const std::size_t n = a.size();
    if (!is_pow2(n)) throw std::invalid_argument("fft_pow2: size must be a power of two");
    if (n < 2) return;

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * kPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const cdouble wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cdouble w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cdouble u = a[i + k];
                const cdouble v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& x : a) x *= inv;
    }
}

/** FFT for arbitrary sizes. Powers of two run radix-2 directly; other sizes
 *  use Bluestein's chirp-z reformulation on top of a zero-padded radix-2
 *  transform. Inverse includes the 1/N scaling. */
inline void fft(std::vector<cdouble>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n < 2) return;
    if (is_pow2(n)) {
        fft_pow2(a, inverse);
        return;
    }

    // Bluestein: X[k] = conj(c[k]) * sum_n a[n] c[n] conj(c[n-k]),
    // with chirp c[m] = exp(-i*pi*m^2/N); the sum is a linear convolution.
    const std::size_t m = next_pow2(2 * n - 1);
    std::vector<cdouble> chirp(n);
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        // i^2 mod 2N keeps the phase argument small for large sizes
        const std::size_t i2 = (i * i) % (2 * n);
        const double ang = sign * kPi * static_cast<double>(i2) / static_cast<double>(n);
        chirp[i] = cdouble(std::cos(ang), std::sin(ang));
    }
    std::vector<cdouble> u(m, cdouble(0.0, 0.0)), v(m, cdouble(0.0, 0.0));
    for (std::size_t i = 0; i < n; ++i) u[i] = a[i] * chirp[i];
    v[0] = std::conj(chirp[0]);
    for (std::size_t i = 1; i < n; ++i) v[i] = v[m - i] = std::conj(chirp[i]);
    fft_pow2(u, false);
    fft_pow2(v, false);
    for (std::size_t i = 0; i < m; ++i) u[i] *= v[i];
    fft_pow2(u, true);
    for (std::size_t i = 0; i < n; ++i) a[i] = u[i] * chirp[i];
    if (inverse) {
        const double invn = 1.0 / static_cast<double>(n);
        for (auto& x : a) x *= invn;
    }
}

/** Forward FFT of a real signal, zero-padded to `size` (0 = signal length). */
inline std::vector<cdouble> fft_real(const std::vector<double>& x, std::size_t size = 0) {
    const std::size_t n = size == 0 ? x.size() : size;
    std::vector<cdouble> a(n, cdouble(0.0, 0.0));
    const std::size_t ncopy = std::min(n, x.size());
    for (std::size_t i = 0; i < ncopy; ++i) a[i] = cdouble(x[i], 0.0);
    fft(a, false);
    return a;
}

/** Inverse FFT returning the real part (caller asserts the spectrum is
 *  conjugate-symmetric); trims or keeps `size` samples (0 = full length). */
inline std::vector<double> ifft_real(std::vector<cdouble> spectrum, std::size_t size = 0) {
    fft(spectrum, true);
    const std::size_t n = size == 0 ? spectrum.size() : size;
    if (n > spectrum.size()) throw std::invalid_argument("ifft_real: size exceeds spectrum length");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = spectrum[i].real();
    return out;
}

}  // namespace cdwsim
