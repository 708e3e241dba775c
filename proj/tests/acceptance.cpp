#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cdwsim/cdwsim.hpp"

using namespace cdwsim;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int prec = 3) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(prec);
    os << v;
    return os.str();
}

double mean_square_window(const MFOutput& mf, int m_lo, int m_hi) {
    double acc = 0.0;
    std::size_t count = 0;
    for (int i = 0; i < mf.n_elements; ++i)
        for (int m = m_lo; m < m_hi && m < mf.n_samples; ++m) {
            acc += mf.at(i, m) * mf.at(i, m);
            ++count;
        }
    if (count == 0) throw std::runtime_error("empty averaging window");
    return acc / static_cast<double>(count);
}

Outcome golay_complementarity() {
    for (int bits : {2, 4, 8, 10, 16}) {
        const auto pair = golay_pair(bits);
        const auto acf = complementary_autocorrelation(pair);
        const auto center = static_cast<std::size_t>(bits - 1);
        for (std::size_t k = 0; k < acf.size(); ++k) {
            const long long want = k == center ? 2ll * bits : 0ll;
            if (acf[k] != want)
                return {false, "length " + std::to_string(bits) + " lag " + std::to_string(static_cast<int>(k) - bits + 1) +
                                   " is " + std::to_string(acf[k]) + ", want " + std::to_string(want)};
        }
    }
    return {true, "summed autocorrelation is exactly 2N at lag 0 and 0 elsewhere for lengths 2, 4, 8, 10, 16"};
}

Outcome correlator_oracle() {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> pick_samples(8, 64), pick_channels(1, 4), pick_len(3, 17), pick_off(-8, 8);
    std::uniform_real_distribution<double> pick_val(-1.0, 1.0), pick_step(1.5e-4, 6.0e-4);
    const double c = 1450.0;
    double worst = 0.0;

    for (int trial = 0; trial < 100; ++trial) {
        RFFrame frame;
        frame.n_elements = pick_channels(rng);
        frame.n_samples = pick_samples(rng);
        frame.sample_rate = 80e6;
        frame.samples.resize(static_cast<std::size_t>(frame.n_elements) * frame.n_samples);
        for (double& v : frame.samples) v = pick_val(rng);

        ReferenceBank bank;
        bank.sample_rate = frame.sample_rate;
        bank.depth_step = pick_step(rng);
        bank.align_offset = pick_off(rng);
        bank.chips = 1;
        for (auto& ref : bank.refs) {
            ref.resize(static_cast<std::size_t>(pick_len(rng)));
            for (double& v : ref) v = pick_val(rng);
        }

        const auto out = matched_filter(frame, bank, c);

        const double fs = frame.sample_rate;
        auto bin_for = [&](int m) {
            const double depth = m * c / (2.0 * fs);
            return std::clamp(static_cast<int>(std::floor(depth / bank.depth_step)) + 1, 1, ReferenceBank::kBins);
        };
        double max_abs = 0.0, max_diff = 0.0;
        for (int i = 0; i < frame.n_elements; ++i)
            for (int m = 0; m < frame.n_samples; ++m) {
                const auto& ref = bank.ref(bin_for(m));
                const int start = m + bank.align_offset;
                double acc = 0.0;
                for (std::size_t k = 0; k < ref.size(); ++k) {
                    const int t = start + static_cast<int>(k);
                    if (t >= 0 && t < frame.n_samples) acc += frame.at(i, t) * ref[k];
                }
                max_abs = std::max(max_abs, std::abs(acc));
                max_diff = std::max(max_diff, std::abs(acc - out.at(i, m)));
            }
        if (max_abs > 0.0) worst = std::max(worst, max_diff / max_abs);
    }
    return {worst <= 1e-12,
            "worst relative deviation from the time-domain double loop over 100 random frames: " + fmt(worst * 1e15, 3) +
                "e-15"};
}

Outcome range_lobe_cancellation() {
    const auto exc = bpsk_modulate(golay_pair(4), 7.5e6, 2, 80e6);
    const int n_chip = exc.chip_samples();
    const int offset = 700, n = 2048;

    auto delay_frame = [&](const std::vector<double>& w) {
        RFFrame f;
        f.n_elements = 1;
        f.n_samples = n;
        f.sample_rate = 80e6;
        f.samples.assign(n, 0.0);
        for (std::size_t k = 0; k < w.size(); ++k) f.samples[offset + k] = w[k];
        return f;
    };
    auto literal_bank = [&](const std::vector<double>& w) {
        ReferenceBank b;
        b.sample_rate = 80e6;
        b.chips = 4;
        for (auto& ref : b.refs) ref = w;
        return b;
    };

    const auto mf_a = matched_filter(delay_frame(exc.waveform_a), literal_bank(exc.waveform_a), 1450.0);
    const auto mf_b = matched_filter(delay_frame(exc.waveform_b), literal_bank(exc.waveform_b), 1450.0);
    const auto combined = golay_combine(mf_a, mf_b);

    auto peak_and_lobe = [&](const MFOutput& mf) {
        double peak = std::abs(mf.at(0, offset)), lobe = 0.0;
        for (int m = 0; m < n; ++m)
            if (std::abs(m - offset) >= n_chip) lobe = std::max(lobe, std::abs(mf.at(0, m)));
        return std::pair<double, double>{peak, lobe};
    };
    const auto [peak_c, lobe_c] = peak_and_lobe(combined);
    const auto [peak_a, lobe_a] = peak_and_lobe(mf_a);
    const auto [peak_b, lobe_b] = peak_and_lobe(mf_b);

    const double combined_ratio = lobe_c / peak_c;
    const double single_ratio = std::min(lobe_a / peak_a, lobe_b / peak_b);
    const bool pass = combined_ratio < 1e-6 && single_ratio >= 0.2;
    return {pass, "combined off-peak/peak " + fmt(combined_ratio * 1e15, 3) + "e-15, single-sequence off-peak/peak " +
                      fmt(single_ratio, 3)};
}

Outcome code_length_scaling() {
    const double fs = 80e6, f0 = 7.5e6, c = 1450.0;
    const auto geometry = make_array(32, 0.1e-3);
    const auto response = element_impulse_response(f0, 0.7, fs);
    const Medium lossless{c, 0.0};

    auto speckle = make_speckle_phantom({-8e-3, 8e-3, 8e-3, 28e-3}, 2.0, {}, 11);
    speckle.medium = lossless;
    Phantom silence;
    silence.medium = lossless;
    const auto delays = dw_delays(14e-3, geometry, c);
    const int m_lo = static_cast<int>(2.0 * 10e-3 / c * fs);
    const int m_hi = static_cast<int>(2.0 * 25e-3 / c * fs);

    std::vector<double> speckle_power, noise_power_est;
    for (int bits : {2, 4, 8}) {
        const auto exc = bpsk_modulate(golay_pair(bits), f0, 2, fs);
        const auto extracted = extract_reference(exc, geometry, response);
        const auto bank_a = build_reference_bank(extracted, Sequence::a, lossless);
        const auto bank_b = build_reference_bank(extracted, Sequence::b, lossless);

        const auto frame_a = simulate_rx(exc.waveform_a, delays, speckle, geometry, response, 0.0, 0);
        const auto frame_b =
            simulate_rx(exc.waveform_b, delays, speckle, geometry, response, 0.0, 0, {frame_a.n_samples});
        const auto mf = golay_combine(matched_filter(frame_a, bank_a, c), matched_filter(frame_b, bank_b, c));
        speckle_power.push_back(mean_square_window(mf, m_lo, m_hi));

        double noise_acc = 0.0;
        for (std::uint64_t k = 0; k < 3; ++k) {
            const auto noise_a =
                simulate_rx(exc.waveform_a, delays, silence, geometry, response, 1.0, 900 + k, {frame_a.n_samples});
            const auto noise_b =
                simulate_rx(exc.waveform_b, delays, silence, geometry, response, 1.0, 950 + k, {frame_a.n_samples});
            const auto mf_n = golay_combine(matched_filter(noise_a, bank_a, c), matched_filter(noise_b, bank_b, c));
            noise_acc += mean_square_window(mf_n, m_lo, m_hi);
        }
        noise_power_est.push_back(noise_acc / 3.0);
    }

    const double kappa = speckle_power[0] / (noise_power_est[0] * std::pow(10.0, 1.2));
    auto snr1 = [&](std::size_t k) {
        return 10.0 * std::log10(speckle_power[k] / (kappa * noise_power_est[k]) + 1.0);
    };

    std::ostringstream note;
    bool pass = true;
    for (std::size_t k = 1; k < 3; ++k) {
        const double ds = 10.0 * std::log10(speckle_power[k] / speckle_power[k - 1]);
        const double dn = 10.0 * std::log10(noise_power_est[k] / noise_power_est[k - 1]);
        const double dr = snr1(k) - snr1(k - 1);
        pass = pass && std::abs(ds - 6.0) <= 1.0 && std::abs(dn - 3.0) <= 0.5 && std::abs(dr - 3.0) <= 1.0;
        note << (k == 1 ? "2 to 4" : ", 4 to 8") << " chips: speckle +" << fmt(ds, 2) << " dB, noise +" << fmt(dn, 2)
             << " dB, snr+1 +" << fmt(dr, 2) << " dB";
    }
    return {pass, note.str()};
}

Outcome attenuation_compensation() {
    const double fs = 80e6, f0 = 7.5e6, c = 1450.0;
    const auto geometry = make_array(8, 0.1e-3);
    const auto response = element_impulse_response(f0, 0.8, fs);
    const Medium medium{c, 0.5};

    Phantom pin;
    pin.medium = medium;
    pin.scatterers.push_back({0.0, 30e-3, 1.0});
    const auto exc = bpsk_modulate(golay_pair(8), f0, 1, fs);
    const auto delays = dw_delays(14e-3, geometry, c);
    const auto frame_a = simulate_rx(exc.waveform_a, delays, pin, geometry, response, 0.0, 0);
    const auto frame_b = simulate_rx(exc.waveform_b, delays, pin, geometry, response, 0.0, 0, {frame_a.n_samples});

    const auto extracted = extract_reference(exc, geometry, response);
    auto correlate = [&](const Medium& bank_medium) {
        const auto bank_a = build_reference_bank(extracted, Sequence::a, bank_medium);
        const auto bank_b = build_reference_bank(extracted, Sequence::b, bank_medium);
        return golay_combine(matched_filter(frame_a, bank_a, c), matched_filter(frame_b, bank_b, c));
    };
    const auto mf_comp = correlate(medium);
    const auto mf_flat = correlate({c, 0.0});

    const int mid = geometry.n_elements / 2;
    const int guard = static_cast<int>(extracted.ref_a.size());
    auto peak_and_lobe = [&](const MFOutput& mf) {
        int m_peak = 0;
        double peak = 0.0;
        for (int m = 0; m < mf.n_samples; ++m)
            if (std::abs(mf.at(mid, m)) > peak) {
                peak = std::abs(mf.at(mid, m));
                m_peak = m;
            }
        double lobe = 0.0;
        for (int m = 0; m < mf.n_samples; ++m)
            if (std::abs(m - m_peak) > guard) lobe += mf.at(mid, m) * mf.at(mid, m);
        return std::pair<double, double>{peak, lobe / (peak * peak)};
    };
    const auto [peak_comp, lobe_comp] = peak_and_lobe(mf_comp);
    const auto [peak_flat, lobe_flat] = peak_and_lobe(mf_flat);
    const double gain_db = 20.0 * std::log10(peak_comp / peak_flat);

    const bool pass = peak_comp > peak_flat && lobe_comp < lobe_flat && gain_db >= 1.0;
    return {pass, "peak gain " + fmt(gain_db, 3) + " dB (target >= 1 dB), relative lobe energy " +
                      fmt(10.0 * std::log10(lobe_comp / lobe_flat), 3) + " dB vs uncompensated"};
}

Outcome sector_geometry() {
    const double angle = sector_angle(14e-3, 12.8e-3);
    bool pass = std::abs(angle - 49.1) <= 0.05;
    std::ostringstream note;
    note << "sector angle " << fmt(angle, 3) << " deg";
    const double quoted[] = {5000.0, 78.1, 55.2};
    const int counts[] = {2, 128, 181};
    for (int k = 0; k < 3; ++k) {
        const double rate = frame_rate(counts[k], 0.075, 1500.0);
        pass = pass && std::abs(rate - quoted[k]) / quoted[k] <= 1e-3;
        note << ", " << counts[k] << " tx: " << fmt(rate, 1) << " fps";
    }
    return {pass, note.str()};
}

Outcome snr_anchor_points() {
    const auto grid = make_polar_grid(-10.0, 10.0, 5e-3, 20e-3, 1450.0, 5.0);
    auto uniform = [&](double v) {
        auto img = zero_scanlines(grid);
        for (double& x : img.data) x = v;
        return img;
    };
    const auto noise_curve = noise_power({uniform(2.0)});

    const auto equal = snr_plus_one(uniform(2.0), noise_curve);
    double worst = 0.0;
    for (double v : equal.values) worst = std::max(worst, std::abs(v - 3.0103));
    bool pass = worst <= 0.01;

    const auto zeroed = snr_plus_one(uniform(0.0), noise_curve);
    for (double v : zeroed.values) pass = pass && v == 0.0;
    return {pass, "equal powers within " + fmt(worst, 4) + " dB of 3.01 dB, zero speckle maps to exactly 0 dB"};
}

Outcome source_distance_trends() {
    const auto scenarios = desk_scenarios();
    const auto candidates = desk_rv_candidates();
    const SweepConfig config;

    std::vector<SweepResult> results;
    std::ostringstream note;
    for (const auto& scenario : scenarios) {
        results.push_back(sweep_rv(candidates, scenario, config));
        const auto& r = results.back();
        note << r.scenario_name << ": best r_v " << fmt(r.best_r_v * 1e3, 2) << " mm, dw-sta "
             << fmt(r.central_strength_diff_db, 1) << " dB; ";
    }
    const auto report = trend_report(results);
    std::string detail = note.str();
    for (const auto& violation : report.violations) detail += " VIOLATION: " + violation + ";";
    return {report.all_hold(), detail};
}

Outcome point_target_localization() {
    const double fs = 80e6, f0 = 7.5e6, c = 1450.0;
    const auto geometry = make_array(32, 0.1e-3);
    const auto response = element_impulse_response(f0, 0.7, fs);
    const Medium lossless{c, 0.0};

    Phantom pin;
    pin.medium = lossless;
    pin.scatterers.push_back({0.0, 30e-3, 1.0});
    const auto grid = make_polar_grid(-10.0, 10.0, 25e-3, 35e-3, c);
    const double cell_r = grid.ranges[1] - grid.ranges[0];
    const double cell_a = grid.angles_deg[1] - grid.angles_deg[0];

    auto peak_cell = [&](const Scanlines& env) {
        std::size_t best_a = 0, best_r = 0;
        double best = -1.0;
        for (std::size_t a = 0; a < env.n_angles(); ++a)
            for (std::size_t r = 0; r < env.n_ranges(); ++r)
                if (env.at(a, r) > best) {
                    best = env.at(a, r);
                    best_a = a;
                    best_r = r;
                }
        return std::pair<double, double>{env.grid.angles_deg[best_a], env.grid.ranges[best_r]};
    };
    auto on_target = [&](std::pair<double, double> peak) {
        return std::abs(peak.first) <= cell_a + 1e-12 && std::abs(peak.second - 30e-3) <= cell_r + 1e-12;
    };
    std::ostringstream note;
    bool pass = true;
    auto record = [&](const char* label, std::pair<double, double> peak) {
        pass = pass && on_target(peak);
        note << label << " peak at " << fmt(peak.first, 2) << " deg, " << fmt(peak.second * 1e3, 3) << " mm; ";
    };

    {
        const auto exc = bpsk_modulate(golay_pair(8), f0, 2, fs);
        const auto delays = dw_delays(14e-3, geometry, c);
        const auto frame_a = simulate_rx(exc.waveform_a, delays, pin, geometry, response, 0.0, 0);
        const auto frame_b = simulate_rx(exc.waveform_b, delays, pin, geometry, response, 0.0, 0, {frame_a.n_samples});
        const auto extracted = extract_reference(exc, geometry, response);
        const auto mf = golay_combine(matched_filter(frame_a, build_reference_bank(extracted, Sequence::a, lossless), c),
                                      matched_filter(frame_b, build_reference_bank(extracted, Sequence::b, lossless), c));
        record("dw", peak_cell(envelope(das_dw(mf, 14e-3, grid, geometry, c))));
    }
    {
        const auto exc = pulse_excitation(f0, 2, fs);
        const auto extracted = extract_reference(exc, geometry, response);
        const auto bank = build_reference_bank(extracted, Sequence::a, lossless);
        std::vector<MFOutput> mf_set;
        int n_samples = 0;
        for (int j = 0; j < geometry.n_elements; ++j) {
            const auto frame = simulate_rx(exc.waveform_a, single_element_delays(j, geometry), pin, geometry, response,
                                           0.0, 0, {n_samples});
            n_samples = frame.n_samples;
            mf_set.push_back(matched_filter(frame, bank, c));
        }
        record("sta", peak_cell(envelope(das_sta(mf_set, grid, geometry, c))));
    }
    {
        const auto exc = pulse_excitation(f0, 2, fs);
        std::vector<ScanBeam> plan;
        for (int k = -10; k <= 10; ++k) plan.push_back({0.5 * k, 30e-3});
        std::vector<RFFrame> frames;
        int n_samples = 0;
        for (const auto& beam : plan) {
            const auto delays = focused_delays(beam.focus_range, beam.steer_angle_deg, geometry, c);
            frames.push_back(simulate_rx(exc.waveform_a, delays, pin, geometry, response, 0.0, 0, {n_samples}));
            n_samples = frames.back().n_samples;
        }
        CsfOptions options;
        options.pulse_delay = pulse_envelope_delay(exc.waveform_a, response);
        record("csf", peak_cell(envelope(das_csf(frames, plan, grid.ranges, geometry, c, options))));
    }

    {
        const auto odd = make_array(33, 0.1e-3);
        const int center = 16;
        MFOutput mf;
        mf.n_elements = odd.n_elements;
        mf.n_samples = 1500;
        mf.sample_rate = fs;
        mf.samples.resize(static_cast<std::size_t>(mf.n_elements) * mf.n_samples);
        std::mt19937_64 rng(7);
        std::normal_distribution<double> gauss;
        for (double& v : mf.samples) v = gauss(rng);

        const auto eq_grid = make_polar_grid(-20.0, 20.0, 10e-3, 30e-3, c, 1.0);
        const auto sta_img = das_sta({mf}, eq_grid, odd, c, {center});
        const auto dw_img = das_dw(mf, 0.0, eq_grid, odd, c);
        double max_abs = 0.0, max_diff = 0.0;
        for (std::size_t k = 0; k < sta_img.data.size(); ++k) {
            max_abs = std::max(max_abs, std::abs(dw_img.data[k]));
            max_diff = std::max(max_diff, std::abs(dw_img.data[k] - sta_img.data[k]));
        }
        const double rel = max_diff / max_abs;
        pass = pass && rel <= 1e-9;
        note << "single-event sta vs zero-distance dw relative difference " << fmt(rel * 1e12, 3) << "e-12";
    }
    return {pass, note.str()};
}

Outcome manifest_determinism() {
    const std::string base = "acceptance_work/determinism";
    fs::remove_all(base);
    fs::create_directories(base);
    write_scatterers_csv(base + "/pins.csv", {{0.0, 10e-3, 1.0}, {2e-3, 14e-3, 0.8}});

    ExperimentConfig config;
    config.n_elements = 8;
    config.code_bits = 2;
    config.r_v = 10e-3;
    config.max_depth = 20e-3;
    config.noise_power = 1e-4;
    config.seed = 99;
    config.phantom_preset.clear();
    config.phantom_file = base + "/pins.csv";

    config.out_dir = base + "/first";
    const auto first = run_pipeline(config);
    config.out_dir = base + "/second";
    const auto second = run_pipeline(config);

    const auto bytes_first = detail::read_file_bytes(first.manifest_path);
    const auto bytes_second = detail::read_file_bytes(second.manifest_path);
    const bool pass = !bytes_first.empty() && bytes_first == bytes_second;
    return {pass, pass ? "two runs with the same config and seed wrote byte-identical manifests of " +
                             std::to_string(first.files.size()) + " artifacts"
                       : "manifests differ"};
}

}  // namespace

int main(int argc, char** argv) {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "golay complementarity", golay_complementarity},
        {2, "correlator oracle equivalence", correlator_oracle},
        {3, "range-lobe cancellation", range_lobe_cancellation},
        {4, "code-length scaling", code_length_scaling},
        {5, "attenuation compensation benefit", attenuation_compensation},
        {6, "sector geometry and frame rates", sector_geometry},
        {7, "snr+1 anchor points", snr_anchor_points},
        {8, "virtual source distance trends", source_distance_trends},
        {9, "point-target localization", point_target_localization},
        {10, "manifest determinism", manifest_determinism},
    };

    std::set<int> wanted;
    for (int k = 1; k < argc; ++k) wanted.insert(std::atoi(argv[k]));

    bool all_pass = true;
    for (const auto& criterion : criteria) {
        if (!wanted.empty() && !wanted.count(criterion.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = criterion.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        all_pass = all_pass && outcome.pass;
        std::cout << "criterion " << criterion.id << ": " << (outcome.pass ? "PASS" : "FAIL") << "  " << criterion.name
                  << " (" << fmt(seconds, 1) << " s)  " << outcome.detail << "\n"
                  << std::flush;
    }
    return all_pass ? 0 : 1;
}
