#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "acoustics.hpp"
#include "codes.hpp"
#include "fft.hpp"
#include "signal.hpp"
#include "txprofiles.hpp"

namespace cdwsim {

/** Depth-indexed correlation references. Bin r (1-based) matches echoes whose
 *  round-trip path is r x 1 cm, so the bank spans 0.5 cm to 6 cm of depth at
 *  5 mm steps. align_offset shifts correlator output so an echo's peak lands
 *  on its geometric delay instead of on the crop origin of the extracted
 *  reference. */
struct ReferenceBank {
    static constexpr int kBins = 12;
    std::array<std::vector<double>, kBins> refs;
    double depth_step = 5e-3;
    std::string code_id;
    int chips = 1;
    int align_offset = 0;
    double sample_rate = 80e6;

    const std::vector<double>& ref(int r) const {
        if (r < 1 || r > kBins) throw std::invalid_argument("ReferenceBank: bin out of range");
        return refs[r - 1];
    }
};

/** Correlator output; same layout and time base as the input frame. */
struct MFOutput : RFFrame {};

/** Echo of both code sequences recorded by the array's mid element against a
 *  flat reflector at 40 mm in a lossless medium, cropped to the span where
 *  the echo envelope exceeds 1% of its peak. */
struct ExtractedReference {
    std::vector<double> ref_a;
    std::vector<double> ref_b;
    int chips = 1;
    int align_offset = 0;
    double sample_rate = 80e6;
    std::string code_label;
};

inline ExtractedReference extract_reference(const CodedExcitation& excitation, const ArrayGeometry& geometry,
                                            const ElementResponse& response) {
    const int mid = geometry.n_elements / 2 - (geometry.n_elements % 2 == 0 ? 1 : 0);
    const double fs = response.sample_rate;
    Phantom mirror;
    mirror.medium.attenuation_db_mhz_cm = 0.0;
    mirror.label = "flat reflector at 40 mm";
    mirror.scatterers.push_back({geometry.element_x[mid], 40e-3, 1.0});
    const auto tx = single_element_delays(mid, geometry);

    auto fa = simulate_rx(excitation.waveform_a, tx, mirror, geometry, response, 0.0, 0);
    auto fb = simulate_rx(excitation.waveform_b, tx, mirror, geometry, response, 0.0, 0, {fa.n_samples});
    const auto env_a = envelope_of(fa.channel(mid));
    const auto env_b = envelope_of(fb.channel(mid));

    double peak = 0.0;
    for (std::size_t m = 0; m < env_a.size(); ++m) peak = std::max({peak, env_a[m], env_b[m]});
    if (peak <= 0.0) throw std::invalid_argument("extract_reference: excitation produced no echo");
    const double floor_level = 0.01 * peak;
    const std::size_t m_peak = [&] {
        for (std::size_t m = 0; m < env_a.size(); ++m)
            if (std::max(env_a[m], env_b[m]) == peak) return m;
        return std::size_t{0};
    }();
    std::size_t lo = m_peak, hi = m_peak;
    while (lo > 0 && std::max(env_a[lo - 1], env_b[lo - 1]) > floor_level) --lo;
    while (hi + 1 < env_a.size() && std::max(env_a[hi + 1], env_b[hi + 1]) > floor_level) ++hi;

    ExtractedReference out;
    out.chips = excitation.pair.length_bits;
    out.sample_rate = fs;
    out.code_label = std::to_string(excitation.pair.length_bits) + "-chip";
    const double tau_ref = 2.0 * 40e-3 / mirror.medium.sound_speed;
    out.align_offset = static_cast<int>(lo) - static_cast<int>(std::lround(tau_ref * fs));
    auto ch_a = fa.channel(mid);
    auto ch_b = fb.channel(mid);
    out.ref_a.assign(ch_a.begin() + lo, ch_a.begin() + hi + 1);
    out.ref_b.assign(ch_b.begin() + lo, ch_b.begin() + hi + 1);
    return out;
}

/** Attenuation-compensated bank: bin r is the base reference filtered over an
 *  r x 1 cm round-trip path, normalized to unit energy, then scaled so its
 *  energy equals the chip count. */
inline ReferenceBank build_reference_bank(const std::vector<double>& base_ref, const Medium& medium,
                                          double sample_rate, int chips = 1, int align_offset = 0,
                                          const std::string& code_id = "custom") {
    if (energy_of(base_ref) <= 0.0) throw std::invalid_argument("build_reference_bank: base reference has no energy");
    if (chips < 1) throw std::invalid_argument("build_reference_bank: chip count must be positive");
    ReferenceBank bank;
    bank.code_id = code_id;
    bank.chips = chips;
    bank.align_offset = align_offset;
    bank.sample_rate = sample_rate;
    for (int r = 1; r <= ReferenceBank::kBins; ++r) {
        auto ref = attenuation_filter(base_ref, static_cast<double>(r), medium.attenuation_db_mhz_cm, sample_rate);
        const double scale = std::sqrt(static_cast<double>(chips) / energy_of(ref));
        for (double& v : ref) v *= scale;
        bank.refs[r - 1] = std::move(ref);
    }
    return bank;
}

enum class Sequence { a, b };

inline ReferenceBank build_reference_bank(const ExtractedReference& extracted, Sequence which,
                                          const Medium& medium) {
    const auto& base = which == Sequence::a ? extracted.ref_a : extracted.ref_b;
    return build_reference_bank(base, medium, extracted.sample_rate, extracted.chips, extracted.align_offset,
                                extracted.code_label + (which == Sequence::a ? " A" : " B"));
}

/** Sliding correlation R(m) = sum_k y(m+k) s_r(k) per channel, with the
 *  reference bin chosen from the output sample's depth m c / (2 fs) and
 *  samples beyond the frame treated as zero. Computed per depth bin in the
 *  frequency domain and shifted by the bank's alignment offset. */
inline MFOutput matched_filter(const RFFrame& frame, const ReferenceBank& bank, double sound_speed) {
    if (frame.n_samples <= 0 || frame.n_elements <= 0)
        throw std::invalid_argument("matched_filter: empty frame");
    if (frame.sample_rate != bank.sample_rate)
        throw std::invalid_argument("matched_filter: frame and bank sample rates differ");
    if (sound_speed <= 0.0) throw std::invalid_argument("matched_filter: sound speed must be positive");
    std::size_t max_ref = 0;
    for (const auto& r : bank.refs) {
        if (r.empty()) throw std::invalid_argument("matched_filter: bank has an empty bin");
        max_ref = std::max(max_ref, r.size());
    }

    const int n = frame.n_samples;
    const double fs = frame.sample_rate;
    auto bin_for = [&](int m) {
        const double depth = m * sound_speed / (2.0 * fs);
        return std::clamp(static_cast<int>(std::floor(depth / bank.depth_step)) + 1, 1, ReferenceBank::kBins);
    };
    const int r_max = bin_for(n - 1);

    const std::size_t nfft = next_pow2(static_cast<std::size_t>(n) + max_ref + std::abs(bank.align_offset) + 1);
    std::vector<std::vector<cdouble>> ref_spec(r_max);
    for (int r = 1; r <= r_max; ++r) {
        ref_spec[r - 1] = fft_real(bank.ref(r), nfft);
        for (auto& v : ref_spec[r - 1]) v = std::conj(v);
    }

    MFOutput out;
    out.n_elements = frame.n_elements;
    out.n_samples = n;
    out.sample_rate = fs;
    out.t0 = frame.t0;
    out.samples.assign(frame.samples.size(), 0.0);

    std::vector<std::vector<double>> corr(r_max);
    for (int i = 0; i < frame.n_elements; ++i) {
        auto y_spec = fft_real(frame.channel(i), nfft);
        for (int r = 1; r <= r_max; ++r) {
            auto prod = y_spec;
            const auto& s = ref_spec[r - 1];
            for (std::size_t k = 0; k < nfft; ++k) prod[k] *= s[k];
            corr[r - 1] = ifft_real(std::move(prod));
        }
        for (int m = 0; m < n; ++m) {
            const auto t = static_cast<std::ptrdiff_t>(m) + bank.align_offset;
            const auto idx = static_cast<std::size_t>(t >= 0 ? t : static_cast<std::ptrdiff_t>(nfft) + t);
            out.at(i, m) = corr[bin_for(m) - 1][idx];
        }
    }
    return out;
}

/** Sample-wise sum of the two sequences' correlator outputs. */
inline MFOutput golay_combine(const MFOutput& mf_a, const MFOutput& mf_b) {
    if (mf_a.n_elements != mf_b.n_elements || mf_a.n_samples != mf_b.n_samples ||
        mf_a.sample_rate != mf_b.sample_rate || mf_a.t0 != mf_b.t0)
        throw std::invalid_argument("golay_combine: outputs have different shapes or time bases");
    MFOutput out = mf_a;
    for (std::size_t k = 0; k < out.samples.size(); ++k) out.samples[k] += mf_b.samples[k];
    return out;
}

/** Bank laid out as a frame, one channel per depth bin, for inspection with
 *  the same tooling as RF data. Bins shorter than the longest are padded
 *  with zeros. */
inline RFFrame bank_to_frame(const ReferenceBank& bank) {
    std::size_t longest = 0;
    for (const auto& r : bank.refs) longest = std::max(longest, r.size());
    RFFrame f;
    f.n_elements = ReferenceBank::kBins;
    f.n_samples = static_cast<int>(longest);
    f.sample_rate = bank.sample_rate;
    f.t0 = 0.0;
    f.samples.assign(static_cast<std::size_t>(f.n_elements) * f.n_samples, 0.0);
    for (int r = 0; r < ReferenceBank::kBins; ++r)
        for (std::size_t k = 0; k < bank.refs[r].size(); ++k) f.at(r, static_cast<int>(k)) = bank.refs[r][k];
    return f;
}

}  // namespace cdwsim
