#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "acoustics.hpp"
#include "beamform.hpp"
#include "codes.hpp"
#include "config.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "receiver.hpp"
#include "txprofiles.hpp"

namespace cdwsim {

namespace detail {

inline std::string zero_pad(std::size_t value, int width) {
    std::string s = std::to_string(value);
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

}  // namespace detail

inline Phantom pipeline_phantom(const ExperimentConfig& config) {
    Phantom phantom;
    if (!config.phantom_file.empty()) {
        phantom.scatterers = read_scatterers_csv(config.phantom_file);
        phantom.label = config.phantom_file;
    } else {
        phantom = make_pin_phantom(config.phantom_preset);
    }
    phantom.medium = config.medium();
    return phantom;
}

/** The transmit waveform pair: the configured code for diverging waves, the
 *  plain two-cycle pulse for the single-transmission schemes. */
inline CodedExcitation pipeline_excitation(const ExperimentConfig& config) {
    if (config.scheme != Scheme::dw || config.code_bits == 1)
        return pulse_excitation(config.carrier_freq, config.cycles_per_chip, config.sample_rate);
    return bpsk_modulate(golay_pair(static_cast<std::size_t>(config.code_bits)), config.carrier_freq,
                         config.cycles_per_chip, config.sample_rate);
}

inline std::vector<ScanBeam> pipeline_scan_plan(const ExperimentConfig& config) {
    std::vector<ScanBeam> plan;
    plan.reserve(181);
    for (int i = 0; i <= 180; ++i) plan.push_back({-45.0 + 0.5 * i, config.csf_focus});
    return plan;
}

inline std::vector<std::string> frame_names(const ExperimentConfig& config) {
    std::vector<std::string> names;
    switch (config.scheme) {
        case Scheme::dw:
            names = {"rf_seq_a.bin", "rf_seq_b.bin"};
            break;
        case Scheme::sta:
            for (int j = 0; j < config.n_elements; ++j)
                names.push_back("rf_tx_" + detail::zero_pad(static_cast<std::size_t>(j), 3) + ".bin");
            break;
        case Scheme::csf:
            for (std::size_t b = 0; b < pipeline_scan_plan(config).size(); ++b)
                names.push_back("rf_beam_" + detail::zero_pad(b, 3) + ".bin");
            break;
    }
    return names;
}

namespace detail {

inline int pipeline_samples(const ExperimentConfig& config, const ArrayGeometry& geometry,
                            const CodedExcitation& excitation, const ElementResponse& response) {
    const double worst_delay = (2.0 * config.max_depth + geometry.aperture()) / config.sound_speed;
    return static_cast<int>(std::ceil(worst_delay * config.sample_rate)) +
           static_cast<int>(excitation.waveform_a.size() + response.impulse.size()) + 64;
}

}  // namespace detail

/** One gain-compensated RF frame per transmission of the configured scheme:
 *  both code sequences for dw, one frame per element for sta, one per
 *  planned beam for csf. */
inline std::vector<RFFrame> simulate_frames(const ExperimentConfig& config) {
    const auto geometry = make_array(config.n_elements, config.pitch);
    const auto response =
        element_impulse_response(config.carrier_freq, config.bandwidth_fraction, config.sample_rate);
    const auto phantom = pipeline_phantom(config);
    const auto excitation = pipeline_excitation(config);
    SimOptions sim;
    sim.n_samples = detail::pipeline_samples(config, geometry, excitation, response);

    std::vector<RFFrame> frames;
    switch (config.scheme) {
        case Scheme::dw: {
            const auto delays = dw_delays(config.r_v, geometry, config.sound_speed);
            frames.push_back(simulate_rx(excitation.waveform_a, delays, phantom, geometry, response,
                                         config.noise_power, config.seed, sim));
            frames.push_back(simulate_rx(excitation.waveform_b, delays, phantom, geometry, response,
                                         config.noise_power, config.seed + 1, sim));
            break;
        }
        case Scheme::sta:
            for (int j = 0; j < config.n_elements; ++j)
                frames.push_back(simulate_rx(excitation.waveform_a, single_element_delays(j, geometry), phantom,
                                             geometry, response, config.noise_power,
                                             config.seed + static_cast<std::uint64_t>(j), sim));
            break;
        case Scheme::csf: {
            const auto plan = pipeline_scan_plan(config);
            for (std::size_t b = 0; b < plan.size(); ++b)
                frames.push_back(simulate_rx(excitation.waveform_a,
                                             focused_delays(plan[b].focus_range, plan[b].steer_angle_deg,
                                                            geometry, config.sound_speed),
                                             phantom, geometry, response, config.noise_power,
                                             config.seed + b, sim));
            break;
        }
    }
    for (auto& frame : frames)
        frame = apply_gain(frame, config.fixed_gain_db, config.tgc_db_per_cm, config.sound_speed);
    return frames;
}

inline PolarGrid pipeline_grid(const ExperimentConfig& config) {
    const auto geometry = make_array(config.n_elements, config.pitch);
    double half = 45.0;
    if (config.scheme == Scheme::dw)
        half = std::min(45.0, sector_angle(config.r_v, geometry.aperture()) / 2.0);
    return make_polar_grid(-half, half, 4e-3, config.max_depth, config.sound_speed);
}

struct BeamformResult {
    std::vector<MFOutput> mf_outputs;
    std::vector<std::string> mf_names;
    Scanlines beamformed;
    Scanlines envelope_lines;
    Scanlines compressed;
};

/** Scheme-appropriate receive processing: correlate and combine for dw,
 *  correlate per event for sta, band-pass beamform the raw lines for csf. */
inline BeamformResult beamform_frames(const ExperimentConfig& config, const std::vector<RFFrame>& frames) {
    const auto expected = frame_names(config);
    if (frames.size() != expected.size())
        throw std::invalid_argument("beamform_frames: expected " + std::to_string(expected.size()) +
                                    " frames for scheme " + scheme_name(config.scheme) + ", got " +
                                    std::to_string(frames.size()));
    const auto geometry = make_array(config.n_elements, config.pitch);
    const auto response =
        element_impulse_response(config.carrier_freq, config.bandwidth_fraction, config.sample_rate);
    const auto excitation = pipeline_excitation(config);
    const double c = config.sound_speed;
    const auto grid = pipeline_grid(config);

    BeamformResult result;
    switch (config.scheme) {
        case Scheme::dw: {
            const auto extracted = extract_reference(excitation, geometry, response);
            const auto bank_a = build_reference_bank(extracted, Sequence::a, config.medium());
            const auto bank_b = build_reference_bank(extracted, Sequence::b, config.medium());
            auto combined = golay_combine(matched_filter(frames[0], bank_a, c),
                                          matched_filter(frames[1], bank_b, c));
            result.beamformed = das_dw(combined, config.r_v, grid, geometry, c);
            result.mf_outputs.push_back(std::move(combined));
            result.mf_names.push_back("mf_combined.bin");
            break;
        }
        case Scheme::sta: {
            const auto bank =
                build_reference_bank(extract_reference(excitation, geometry, response), Sequence::a,
                                     config.medium());
            for (std::size_t j = 0; j < frames.size(); ++j) {
                result.mf_outputs.push_back(matched_filter(frames[j], bank, c));
                result.mf_names.push_back("mf_tx_" + detail::zero_pad(j, 3) + ".bin");
            }
            result.beamformed = das_sta(result.mf_outputs, grid, geometry, c);
            break;
        }
        case Scheme::csf: {
            CsfOptions options;
            options.band_center = config.carrier_freq;
            options.band_fraction = config.bandwidth_fraction;
            options.pulse_delay = pulse_envelope_delay(excitation.waveform_a, response);
            result.beamformed = das_csf(frames, pipeline_scan_plan(config), grid.ranges, geometry, c, options);
            break;
        }
    }
    result.envelope_lines = envelope(result.beamformed);
    result.compressed = log_compress(result.envelope_lines, config.dynamic_range_db);
    return result;
}

/** Signal strength at every phantom scatterer the image covers; skipped for
 *  dense speckle phantoms where per-scatterer peaks are meaningless. */
inline PinProfile measured_profile(const ExperimentConfig& config, const Scanlines& envelope_lines) {
    PinProfile profile;
    const auto phantom = pipeline_phantom(config);
    if (phantom.scatterers.size() > 64) return profile;
    const auto& grid = envelope_lines.grid;
    for (const auto& s : phantom.scatterers) {
        const double r = std::hypot(s.x, s.z);
        const double angle = std::atan2(s.x, s.z) * 180.0 / kPi;
        if (angle < grid.angles_deg.front() || angle > grid.angles_deg.back()) continue;
        if (r < grid.ranges.front() || r > grid.ranges.back()) continue;
        profile.pins.push_back({s.x, s.z});
    }
    profile.values_db = signal_strength_profile(envelope_lines, profile.pins);
    return profile;
}

struct RunArtifacts {
    std::string out_dir;
    std::vector<std::string> files;
    std::string manifest_path;
};

/** Simulate, correlate, beamform, render, and measure in one deterministic
 *  pass, writing every artifact plus a hashed manifest into the configured
 *  output directory. */
inline RunArtifacts run_pipeline(const ExperimentConfig& config) {
    namespace fs = std::filesystem;
    RunArtifacts artifacts;
    artifacts.out_dir = config.out_dir;
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory: " + config.out_dir);
    auto emit = [&artifacts](const std::string& name) { artifacts.files.push_back(name); };

    const auto frames = simulate_frames(config);
    const auto names = frame_names(config);
    for (std::size_t k = 0; k < frames.size(); ++k) {
        write_rf_frame(config.out_dir + "/" + names[k], frames[k]);
        emit(names[k]);
    }

    const auto result = beamform_frames(config, frames);
    for (std::size_t k = 0; k < result.mf_outputs.size(); ++k) {
        write_rf_frame(config.out_dir + "/" + result.mf_names[k], result.mf_outputs[k]);
        emit(result.mf_names[k]);
    }
    write_scanlines_csv(config.out_dir + "/env_lines.csv", result.envelope_lines);
    emit("env_lines.csv");
    write_scanlines_csv(config.out_dir + "/log_lines.csv", result.compressed);
    emit("log_lines.csv");

    write_pgm(config.out_dir + "/image.pgm", to_pgm(scan_convert(result.compressed), config.dynamic_range_db));
    emit("image.pgm");

    const auto profile = measured_profile(config, result.envelope_lines);
    if (!profile.pins.empty()) {
        write_profile_csv(config.out_dir + "/signal_strength.csv", profile);
        emit("signal_strength.csv");
    }

    artifacts.manifest_path = config.out_dir + "/manifest.txt";
    write_manifest(artifacts.manifest_path, config.out_dir, artifacts.files);
    return artifacts;
}

}  // namespace cdwsim
