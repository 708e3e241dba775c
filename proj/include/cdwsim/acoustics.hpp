#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "fft.hpp"
#include "rng.hpp"
#include "signal.hpp"
#include "txprofiles.hpp"

namespace cdwsim {

struct Medium {
    double sound_speed = 1450.0;
    double attenuation_db_mhz_cm = 0.5;
};

struct Scatterer {
    double x = 0.0;
    double z = 0.0;
    double reflectivity = 1.0;
};

struct Phantom {
    std::vector<Scatterer> scatterers;
    Medium medium;
    std::string label;
};

/** Per-channel RF data, channel-major. Amplitudes are LSB-equivalent. */
struct RFFrame {
    int n_elements = 0;
    int n_samples = 0;
    double sample_rate = 80e6;
    double t0 = 0.0;
    std::vector<double> samples;

    double& at(int element, int sample) { return samples[static_cast<std::size_t>(element) * n_samples + sample]; }
    double at(int element, int sample) const {
        return samples[static_cast<std::size_t>(element) * n_samples + sample];
    }
    std::vector<double> channel(int element) const {
        const auto base = samples.begin() + static_cast<std::ptrdiff_t>(element) * n_samples;
        return std::vector<double>(base, base + n_samples);
    }
};

struct ElementResponse {
    std::vector<double> impulse;
    double center_freq = 7.5e6;
    double fractional_bandwidth = 0.7;
    double sample_rate = 80e6;
};

namespace detail {

/** Magnitude spectrum peak frequency and -6 dB bandwidth, with linear
 *  interpolation of the half-amplitude crossings. */
inline void measure_band(const std::vector<double>& impulse, double sample_rate, double target_bw_hz,
                         double& peak_freq, double& bw) {
    std::size_t want = next_pow2(4 * impulse.size());
    const double resolution = target_bw_hz / 64.0;
    while (sample_rate / static_cast<double>(want) > resolution && want < (1u << 24)) want *= 2;
    auto spec = fft_real(impulse, want);
    const std::size_t half = want / 2;
    std::size_t k_peak = 0;
    double m_peak = 0.0;
    for (std::size_t k = 0; k <= half; ++k)
        if (std::abs(spec[k]) > m_peak) {
            m_peak = std::abs(spec[k]);
            k_peak = k;
        }
    const double df = sample_rate / static_cast<double>(want);
    peak_freq = k_peak * df;

    const double target = m_peak / 2.0;
    double lo = 0.0, hi = half * df;
    for (std::size_t k = k_peak; k-- > 0;) {
        const double a = std::abs(spec[k]), b = std::abs(spec[k + 1]);
        if (a < target) {
            lo = (k + (target - a) / (b - a)) * df;
            break;
        }
    }
    for (std::size_t k = k_peak; k < half; ++k) {
        const double a = std::abs(spec[k]), b = std::abs(spec[k + 1]);
        if (b < target) {
            hi = (k + (target - a) / (b - a)) * df;
            break;
        }
    }
    bw = hi - lo;
}

}  // namespace detail

/** Two-way element transfer function: a unit-energy Gaussian-enveloped
 *  sinusoid truncated at four envelope standard deviations. The constructed
 *  response is measured and rejected if its spectral peak or -6 dB bandwidth
 *  miss the requested values. */
inline ElementResponse element_impulse_response(double center_freq, double fractional_bw, double sample_rate) {
    if (!(fractional_bw > 0.0 && fractional_bw < 2.0))
        throw std::invalid_argument("element_impulse_response: fractional bandwidth must be in (0, 2)");
    if (sample_rate < 4.0 * center_freq)
        throw std::invalid_argument("element_impulse_response: sample_rate must be at least 4x the center frequency");

    const double sigma = std::sqrt(2.0 * std::log(2.0)) / (kPi * fractional_bw * center_freq);
    const int half = static_cast<int>(std::ceil(4.0 * sigma * sample_rate));
    ElementResponse r;
    r.center_freq = center_freq;
    r.fractional_bandwidth = fractional_bw;
    r.sample_rate = sample_rate;
    r.impulse.resize(2 * half + 1);
    for (int m = -half; m <= half; ++m) {
        const double t = m / sample_rate;
        r.impulse[m + half] = std::exp(-t * t / (2.0 * sigma * sigma)) * std::cos(2.0 * kPi * center_freq * t);
    }
    const double scale = 1.0 / std::sqrt(energy_of(r.impulse));
    for (double& v : r.impulse) v *= scale;

    double peak_freq = 0.0, bw = 0.0;
    detail::measure_band(r.impulse, sample_rate, fractional_bw * center_freq, peak_freq, bw);
    if (std::abs(peak_freq - center_freq) > 0.02 * center_freq)
        throw std::runtime_error("element_impulse_response: spectral peak misses the center frequency");
    if (std::abs(bw - fractional_bw * center_freq) > 0.05 * fractional_bw * center_freq)
        throw std::runtime_error("element_impulse_response: bandwidth misses the requested fraction");
    return r;
}

/** Attenuation in nepers per (Hz * m) for a coefficient in dB/(MHz * cm). */
inline double attenuation_nepers(double alpha_db_mhz_cm) {
    return alpha_db_mhz_cm * (std::log(10.0) / 20.0) * 100.0 * 1e-6;
}

/** Zero-phase frequency-dependent attenuation over a straight path:
 *  gain 10^(-alpha * f_MHz * path_cm / 20), mirrored over negative
 *  frequencies so the output stays real. */
inline std::vector<double> attenuation_filter(const std::vector<double>& signal, double path_length_cm,
                                              double alpha_db_mhz_cm, double sample_rate) {
    if (path_length_cm < 0.0) throw std::invalid_argument("attenuation_filter: path length must be non-negative");
    if (signal.empty()) return {};
    const std::size_t n = signal.size();
    const std::size_t nfft = next_pow2(2 * n);
    auto spec = fft_real(signal, nfft);
    const double beta = attenuation_nepers(alpha_db_mhz_cm) * path_length_cm * 1e-2;
    for (std::size_t k = 0; k < nfft; ++k) {
        const std::size_t mirror = k <= nfft / 2 ? k : nfft - k;
        const double freq = mirror * sample_rate / static_cast<double>(nfft);
        spec[k] *= std::exp(-beta * freq);
    }
    auto out = ifft_real(std::move(spec));
    out.resize(n);
    return out;
}

struct SimOptions {
    int n_samples = 0;
};

/** Per-channel receive synthesis for a linear single-scattering model.
 *
 *  Every (transmit element j, scatterer s, receive element i) path adds the
 *  excitation convolved with the two-way element response, delayed by
 *  tx_delay_j + (|e_j - s| + |s - e_i|)/c, scaled by 1/(|e_j - s| |s - e_i|),
 *  and attenuated along the exact path length. The element response acts as
 *  a zero-phase filter (its buffer center sits at time zero), so an echo's
 *  excitation onset lands exactly at the geometric delay. The sum is
 *  assembled in the frequency domain, where delay and attenuation per bin
 *  form a geometric recurrence per leg, so cost grows with
 *  Ns x (Ntx + Nrx) x Nbins instead of Ns x Ntx x Nrx. White Gaussian noise
 *  of the requested power is added last in channel-major order, so a fixed
 *  seed reproduces the frame bit for bit. */
inline RFFrame simulate_rx(const std::vector<double>& excitation, const DelayProfile& tx_delays,
                           const Phantom& phantom, const ArrayGeometry& geometry, const ElementResponse& response,
                           double noise_power, std::uint64_t seed, const SimOptions& options = {}) {
    const int n_el = geometry.n_elements;
    if (n_el <= 0 || geometry.element_x.empty()) throw std::invalid_argument("simulate_rx: geometry has no elements");
    if (excitation.empty()) throw std::invalid_argument("simulate_rx: excitation is empty");
    if (static_cast<int>(tx_delays.delays.size()) != n_el)
        throw std::invalid_argument("simulate_rx: delay profile does not match the geometry");
    if (noise_power < 0.0) throw std::invalid_argument("simulate_rx: noise power must be non-negative");
    for (const auto& s : phantom.scatterers)
        if (!(s.z > 0.0) || !std::isfinite(s.reflectivity))
            throw std::invalid_argument("simulate_rx: scatterers must sit at z > 0 with finite reflectivity");

    const double fs = response.sample_rate;
    const double c = phantom.medium.sound_speed;
    const auto pulse = convolve(excitation, response.impulse);

    int first_tx = 0, last_tx = n_el - 1;
    if (tx_delays.kind == ProfileKind::single_element) first_tx = last_tx = tx_delays.element_index;

    double max_delay = 0.0;
    for (const auto& s : phantom.scatterers) {
        double tx_worst = 0.0, rx_worst = 0.0;
        for (int j = first_tx; j <= last_tx; ++j)
            tx_worst = std::max(tx_worst, tx_delays.delays[j] + std::hypot(s.x - geometry.element_x[j], s.z) / c);
        for (int i = 0; i < n_el; ++i) rx_worst = std::max(rx_worst, std::hypot(s.x - geometry.element_x[i], s.z) / c);
        max_delay = std::max(max_delay, tx_worst + rx_worst);
    }

    RFFrame frame;
    frame.n_elements = n_el;
    frame.sample_rate = fs;
    frame.t0 = 0.0;
    const int needed = static_cast<int>(std::ceil(max_delay * fs)) + static_cast<int>(pulse.size()) + 16;
    frame.n_samples = options.n_samples > 0 ? options.n_samples : needed;
    frame.samples.assign(static_cast<std::size_t>(n_el) * frame.n_samples, 0.0);

    if (!phantom.scatterers.empty()) {
        const std::size_t nfft = next_pow2(static_cast<std::size_t>(std::max(frame.n_samples, needed)));
        const std::size_t half = nfft / 2;
        const double df = fs / static_cast<double>(nfft);
        const double beta = attenuation_nepers(phantom.medium.attenuation_db_mhz_cm);

        auto pulse_spec = fft_real(pulse, nfft);
        const double t_center = (static_cast<double>(response.impulse.size()) - 1.0) / 2.0 / fs;
        for (std::size_t q = 0; q <= half; ++q)
            pulse_spec[q] *= std::polar(1.0, 2.0 * kPi * (q * df) * t_center);
        double pulse_peak = 0.0;
        for (std::size_t q = 0; q <= half; ++q) pulse_peak = std::max(pulse_peak, std::abs(pulse_spec[q]));
        std::size_t q_max = half;
        while (q_max > 0 && std::abs(pulse_spec[q_max]) < 1e-10 * pulse_peak) --q_max;

        std::vector<cdouble> tx_leg(q_max + 1);
        std::vector<cdouble> acc(static_cast<std::size_t>(n_el) * (q_max + 1), 0.0);
        for (const auto& s : phantom.scatterers) {
            std::fill(tx_leg.begin(), tx_leg.end(), cdouble{0.0, 0.0});
            for (int j = first_tx; j <= last_tx; ++j) {
                const double d = std::hypot(s.x - geometry.element_x[j], s.z);
                const double t_d = tx_delays.delays[j] + d / c;
                const cdouble step = std::exp(-beta * d * df) * std::polar(1.0, -2.0 * kPi * df * t_d);
                cdouble cur = 1.0 / d;
                for (std::size_t q = 0; q <= q_max; ++q) {
                    tx_leg[q] += cur;
                    cur *= step;
                }
            }
            for (int i = 0; i < n_el; ++i) {
                const double d = std::hypot(s.x - geometry.element_x[i], s.z);
                const cdouble step = std::exp(-beta * d * df) * std::polar(1.0, -2.0 * kPi * df * d / c);
                cdouble cur = s.reflectivity / d;
                cdouble* row = acc.data() + static_cast<std::size_t>(i) * (q_max + 1);
                for (std::size_t q = 0; q <= q_max; ++q) {
                    row[q] += cur * tx_leg[q];
                    cur *= step;
                }
            }
        }

        std::vector<cdouble> spec(nfft);
        for (int i = 0; i < n_el; ++i) {
            std::fill(spec.begin(), spec.end(), cdouble{0.0, 0.0});
            const cdouble* row = acc.data() + static_cast<std::size_t>(i) * (q_max + 1);
            for (std::size_t q = 0; q <= q_max; ++q) spec[q] = row[q] * pulse_spec[q];
            spec[0] = spec[0].real();
            if (q_max == half) spec[half] = spec[half].real();
            for (std::size_t q = 1; q < half; ++q) spec[nfft - q] = std::conj(spec[q]);
            auto y = ifft_real(spec);
            const int n_copy = std::min<int>(frame.n_samples, static_cast<int>(nfft));
            for (int l = 0; l < n_copy; ++l) frame.at(i, l) = y[l];
        }
    }

    if (noise_power > 0.0) {
        NormalRng rng(seed);
        const double sigma = std::sqrt(noise_power);
        for (double& v : frame.samples) v += sigma * rng();
    }
    return frame;
}

/** Pin-target layouts mirroring a wire phantom: a vertical column at 5 mm
 *  steps, three horizontal rows, and their union. */
inline Phantom make_pin_phantom(const std::string& layout) {
    Phantom p;
    p.label = layout;
    auto add = [&p](double x_mm, double z_mm) {
        for (const auto& s : p.scatterers)
            if (std::abs(s.x - x_mm * 1e-3) < 1e-9 && std::abs(s.z - z_mm * 1e-3) < 1e-9) return;
        p.scatterers.push_back({x_mm * 1e-3, z_mm * 1e-3, 1.0});
    };
    auto add_column = [&add]() {
        for (int k = 0; k < 12; ++k) add(0.0, 5.0 + 5.0 * k);
    };
    auto add_row = [&add](double z_mm) {
        for (int k = 0; k < 9; ++k) add(-20.0 + 5.0 * k, z_mm);
    };
    if (layout == "vertical_pins") {
        add_column();
    } else if (layout == "horizontal_pins_20mm") {
        add_row(20.0);
    } else if (layout == "horizontal_pins_25mm") {
        add_row(25.0);
    } else if (layout == "horizontal_pins_40mm") {
        add_row(40.0);
    } else if (layout == "full_model550") {
        add_column();
        add_row(20.0);
        add_row(25.0);
        add_row(40.0);
    } else {
        throw std::invalid_argument("make_pin_phantom: unknown layout " + layout);
    }
    return p;
}

struct Rect {
    double x_min = 0.0, x_max = 0.0, z_min = 0.0, z_max = 0.0;
};

struct Cyst {
    double x = 0.0, z = 0.0, diameter = 0.0;
};

/** Uniformly scattered speckle field with zero-mean Gaussian reflectivities;
 *  scatterers inside any cyst disc are removed. */
inline Phantom make_speckle_phantom(const Rect& region, double scatterers_per_mm2, const std::vector<Cyst>& cysts,
                                    std::uint64_t seed) {
    if (scatterers_per_mm2 <= 0.0) throw std::invalid_argument("make_speckle_phantom: density must be positive");
    if (region.x_max <= region.x_min || region.z_max <= region.z_min)
        throw std::invalid_argument("make_speckle_phantom: empty region");
    const double area_mm2 = (region.x_max - region.x_min) * (region.z_max - region.z_min) * 1e6;
    const auto count = static_cast<std::size_t>(std::llround(scatterers_per_mm2 * area_mm2));
    NormalRng rng(seed);
    Phantom p;
    p.label = "speckle";
    p.scatterers.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        Scatterer s;
        s.x = region.x_min + (region.x_max - region.x_min) * rng.uniform();
        s.z = region.z_min + (region.z_max - region.z_min) * rng.uniform();
        s.reflectivity = rng();
        bool inside = false;
        for (const auto& cyst : cysts)
            if (std::hypot(s.x - cyst.x, s.z - cyst.z) < cyst.diameter / 2.0) inside = true;
        if (!inside) p.scatterers.push_back(s);
    }
    return p;
}

}  // namespace cdwsim
