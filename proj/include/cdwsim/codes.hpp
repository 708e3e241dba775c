#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "fft.hpp"

namespace cdwsim {

/** A pair of bipolar sequences whose aperiodic autocorrelations sum to an
 *  impulse: 2N at zero lag, exactly zero at every other lag. */
struct GolayPair {
    std::vector<int> seq_a;
    std::vector<int> seq_b;
    int length_bits = 0;
};

/** Summed aperiodic autocorrelation of the two sequences over all lags
 *  -(N-1)..(N-1), returned as a vector of length 2N-1 with lag 0 in the
 *  middle. Accepts arbitrary bipolar pairs so it can serve as the
 *  verification oracle for candidate pairs. */
inline std::vector<long long> complementary_autocorrelation(const GolayPair& pair) {
    const std::size_t n = pair.seq_a.size();
    if (n == 0 || pair.seq_b.size() != n)
        throw std::invalid_argument("complementary_autocorrelation: sequences must be non-empty and equal length");
    std::vector<long long> acf(2 * n - 1, 0);
    for (std::size_t lag = 0; lag < n; ++lag) {
        long long s = 0;
        for (std::size_t k = 0; k + lag < n; ++k) {
            s += static_cast<long long>(pair.seq_a[k]) * pair.seq_a[k + lag];
            s += static_cast<long long>(pair.seq_b[k]) * pair.seq_b[k + lag];
        }
        acf[n - 1 + lag] = s;
        acf[n - 1 - lag] = s;
    }
    return acf;
}

namespace detail {

inline bool is_complementary(const GolayPair& pair) {
    const auto acf = complementary_autocorrelation(pair);
    const std::size_t n = pair.seq_a.size();
    for (std::size_t i = 0; i < acf.size(); ++i) {
        const long long want = (i == n - 1) ? 2 * static_cast<long long>(n) : 0;
        if (acf[i] != want) return false;
    }
    return true;
}

}  // namespace detail

/** Complementary pair for the supported lengths {2, 4, 8, 10, 16}.
 *
 *  Lengths 2/4/8/16 come from the doubling construction A' = A||B,
 *  B' = A||-B seeded with A=[+1,+1], B=[+1,-1]. Length 10 has no doubling
 *  construction; a known pair is embedded as a constant and re-verified by
 *  the autocorrelation oracle on every call, so a corrupted table cannot
 *  survive construction. */
inline GolayPair golay_pair(int length_bits) {
    GolayPair pair;
    pair.length_bits = length_bits;
    switch (length_bits) {
        case 2:
        case 4:
        case 8:
        case 16: {
            std::vector<int> a = {1, 1}, b = {1, -1};
            while (static_cast<int>(a.size()) < length_bits) {
                std::vector<int> a2(a), b2(a);
                a2.insert(a2.end(), b.begin(), b.end());
                for (int v : b) b2.push_back(-v);
                a = std::move(a2);
                b = std::move(b2);
            }
            pair.seq_a = std::move(a);
            pair.seq_b = std::move(b);
            break;
        }
        case 10:
            pair.seq_a = {1, 1, 1, 1, 1, -1, 1, -1, -1, 1};
            pair.seq_b = {1, 1, -1, -1, 1, 1, 1, -1, 1, -1};
            break;
        default:
            throw std::invalid_argument("golay_pair: no known pair of length " + std::to_string(length_bits));
    }
    if (!detail::is_complementary(pair))
        throw std::runtime_error("golay_pair: constructed pair failed the complementarity check");
    return pair;
}

/** A Golay pair together with its BPSK chip-modulated transmit waveforms. */
struct CodedExcitation {
    GolayPair pair;
    double carrier_freq = 0.0;
    int cycles_per_chip = 0;
    double sample_rate = 0.0;
    std::vector<double> waveform_a;
    std::vector<double> waveform_b;

    int chip_samples() const { return static_cast<int>(waveform_a.size()) / pair.length_bits; }
};

/** BPSK modulation: every chip is the same cycles_per_chip-cycle sinusoid
 *  template multiplied by the chip sign. One shared template (with its sample
 *  count rounded once) keeps every chip boundary aligned to the chip grid, so
 *  waveform length is exactly length_bits x round(cycles * fs / f0). */
inline CodedExcitation bpsk_modulate(const GolayPair& pair, double carrier_freq, int cycles_per_chip,
                                     double sample_rate) {
    if (carrier_freq <= 0.0 || sample_rate <= 0.0)
        throw std::invalid_argument("bpsk_modulate: frequencies must be positive");
    if (cycles_per_chip <= 0) throw std::invalid_argument("bpsk_modulate: cycles_per_chip must be positive");
    if (sample_rate < 4.0 * carrier_freq)
        throw std::invalid_argument("bpsk_modulate: sample_rate must be at least 4x the carrier");

    const int n_chip = static_cast<int>(std::lround(cycles_per_chip * sample_rate / carrier_freq));
    std::vector<double> chip(n_chip);
    for (int m = 0; m < n_chip; ++m)
        chip[m] = std::sin(2.0 * kPi * cycles_per_chip * m / static_cast<double>(n_chip));

    CodedExcitation exc;
    exc.pair = pair;
    exc.carrier_freq = carrier_freq;
    exc.cycles_per_chip = cycles_per_chip;
    exc.sample_rate = sample_rate;
    exc.waveform_a.reserve(pair.seq_a.size() * n_chip);
    exc.waveform_b.reserve(pair.seq_b.size() * n_chip);
    for (int s : pair.seq_a)
        for (int m = 0; m < n_chip; ++m) exc.waveform_a.push_back(s * chip[m]);
    for (int s : pair.seq_b)
        for (int m = 0; m < n_chip; ++m) exc.waveform_b.push_back(s * chip[m]);
    return exc;
}

/** Single-chip pulse (one +1 chip of the same template); code length 1 stands
 *  for plain pulsed operation throughout the pipeline. */
inline CodedExcitation pulse_excitation(double carrier_freq, int cycles, double sample_rate) {
    GolayPair unit;
    unit.length_bits = 1;
    unit.seq_a = {1};
    unit.seq_b = {1};
    CodedExcitation exc;
    exc.pair = unit;
    exc.carrier_freq = carrier_freq;
    exc.cycles_per_chip = cycles;
    exc.sample_rate = sample_rate;
    if (carrier_freq <= 0.0 || sample_rate <= 0.0)
        throw std::invalid_argument("pulse_excitation: frequencies must be positive");
    const int n_chip = static_cast<int>(std::lround(cycles * sample_rate / carrier_freq));
    exc.waveform_a.resize(n_chip);
    for (int m = 0; m < n_chip; ++m)
        exc.waveform_a[m] = std::sin(2.0 * kPi * cycles * m / static_cast<double>(n_chip));
    exc.waveform_b = exc.waveform_a;
    return exc;
}

}  // namespace cdwsim
