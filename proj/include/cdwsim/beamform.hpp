#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "acoustics.hpp"
#include "fft.hpp"
#include "receiver.hpp"
#include "signal.hpp"
#include "txprofiles.hpp"

namespace cdwsim {

/** Sector sampling lattice: angles in degrees off broadside, ranges in
 *  meters from the array center. */
struct PolarGrid {
    std::vector<double> angles_deg;
    std::vector<double> ranges;
};

inline void validate_grid(const PolarGrid& grid) {
    if (grid.angles_deg.empty() || grid.ranges.empty()) throw std::invalid_argument("polar grid: empty axis");
    for (std::size_t k = 1; k < grid.angles_deg.size(); ++k)
        if (grid.angles_deg[k] <= grid.angles_deg[k - 1])
            throw std::invalid_argument("polar grid: angles must strictly increase");
    for (std::size_t k = 1; k < grid.ranges.size(); ++k)
        if (grid.ranges[k] <= grid.ranges[k - 1])
            throw std::invalid_argument("polar grid: ranges must strictly increase");
    if (grid.ranges.front() <= 0.0) throw std::invalid_argument("polar grid: ranges must be positive");
}

/** Default lattice: half-degree lines and a range step of four RF samples. */
inline PolarGrid make_polar_grid(double angle_min_deg, double angle_max_deg, double r_min, double r_max, double c,
                                 double angle_step_deg = 0.5, double range_step = 0.0) {
    if (range_step <= 0.0) range_step = c / (2.0 * 80e6) * 4.0;
    if (angle_step_deg <= 0.0) throw std::invalid_argument("make_polar_grid: angle step must be positive");
    PolarGrid grid;
    for (double a = angle_min_deg; a <= angle_max_deg + 1e-9; a += angle_step_deg) grid.angles_deg.push_back(a);
    for (double r = r_min; r <= r_max + 1e-12; r += range_step) grid.ranges.push_back(r);
    validate_grid(grid);
    return grid;
}

/** Beamformed values on a polar grid, angle-major. */
struct Scanlines {
    PolarGrid grid;
    std::vector<double> data;

    double& at(std::size_t angle, std::size_t range) { return data[angle * grid.ranges.size() + range]; }
    double at(std::size_t angle, std::size_t range) const { return data[angle * grid.ranges.size() + range]; }
    std::size_t n_angles() const { return grid.angles_deg.size(); }
    std::size_t n_ranges() const { return grid.ranges.size(); }
};

inline Scanlines zero_scanlines(const PolarGrid& grid) {
    validate_grid(grid);
    Scanlines s;
    s.grid = grid;
    s.data.assign(grid.angles_deg.size() * grid.ranges.size(), 0.0);
    return s;
}

namespace detail {

inline double sample_linear(const RFFrame& frame, int element, double t) {
    const double pos = (t - frame.t0) * frame.sample_rate;
    if (pos < 0.0) return 0.0;
    const auto idx = static_cast<int>(pos);
    if (idx + 1 >= frame.n_samples) return 0.0;
    const double frac = pos - idx;
    const double a = frame.at(element, idx);
    return a + frac * (frame.at(element, idx + 1) - a);
}

}  // namespace detail

/** Delay-and-sum against a spherical transmit wavefront radiating from
 *  (source_x, source_z): transmit time (|p - v| - range_offset)/c plus the
 *  per-element receive time, linear interpolation between samples. das_dw
 *  and das_sta are thin wrappers over this. */
inline Scanlines das_point_source(const RFFrame& mf, double source_x, double source_z, double range_offset,
                                  const PolarGrid& grid, const ArrayGeometry& geometry, double c,
                                  double extra_delay = 0.0) {
    validate_grid(grid);
    if (mf.n_elements != geometry.n_elements)
        throw std::invalid_argument("das_point_source: frame does not match the geometry");
    if (c <= 0.0) throw std::invalid_argument("das_point_source: sound speed must be positive");
    auto out = zero_scanlines(grid);
    for (std::size_t a = 0; a < grid.angles_deg.size(); ++a) {
        const double theta = grid.angles_deg[a] * kPi / 180.0;
        const double sx = std::sin(theta), cz = std::cos(theta);
        for (std::size_t r = 0; r < grid.ranges.size(); ++r) {
            const double px = grid.ranges[r] * sx;
            const double pz = grid.ranges[r] * cz;
            if (pz < 0.0) throw std::invalid_argument("das_point_source: image point behind the array");
            const double t_tx =
                (std::sqrt((px - source_x) * (px - source_x) + (pz - source_z) * (pz - source_z)) - range_offset) /
                    c +
                extra_delay;
            double acc = 0.0;
            for (int i = 0; i < geometry.n_elements; ++i) {
                const double dx = px - geometry.element_x[i];
                const double t_rx = std::sqrt(dx * dx + pz * pz) / c;
                acc += detail::sample_linear(mf, i, t_tx + t_rx);
            }
            out.at(a, r) = acc;
        }
    }
    return out;
}

/** Diverging-wave receive beamformer: virtual source at (0, -r_v). A zero
 *  distance puts the source on the array center, the single-element
 *  synthetic-aperture limit. */
inline Scanlines das_dw(const RFFrame& mf, double r_v, const PolarGrid& grid, const ArrayGeometry& geometry,
                        double c) {
    if (r_v < 0.0) throw std::invalid_argument("das_dw: r_v must be non-negative");
    return das_point_source(mf, 0.0, -r_v, r_v, grid, geometry, c);
}

/** Synthetic-aperture beamformer: one correlator output per transmit
 *  element, each beamformed with that element as the wave origin, coherently
 *  summed. tx_elements selects a subset; empty means every element. */
inline Scanlines das_sta(const std::vector<MFOutput>& mf_set, const PolarGrid& grid, const ArrayGeometry& geometry,
                         double c, std::vector<int> tx_elements = {}) {
    if (tx_elements.empty()) {
        tx_elements.resize(geometry.n_elements);
        for (int j = 0; j < geometry.n_elements; ++j) tx_elements[j] = j;
    }
    if (mf_set.size() != tx_elements.size())
        throw std::invalid_argument("das_sta: one correlator output per transmit event is required");
    auto out = zero_scanlines(grid);
    for (std::size_t e = 0; e < tx_elements.size(); ++e) {
        const int j = tx_elements[e];
        if (j < 0 || j >= geometry.n_elements) throw std::invalid_argument("das_sta: transmit element out of range");
        auto one = das_point_source(mf_set[e], geometry.element_x[j], 0.0, 0.0, grid, geometry, c);
        for (std::size_t k = 0; k < out.data.size(); ++k) out.data[k] += one.data[k];
    }
    return out;
}

struct CsfOptions {
    double band_center = 7.5e6;
    double band_fraction = 0.7;
    double pulse_delay = 0.0;
};

namespace detail {

/** Zero-phase Gaussian band-pass matched to a -6 dB fractional bandwidth. */
inline void gaussian_bandpass(std::vector<double>& line, double sample_rate, double center, double fraction) {
    if (line.empty()) return;
    const std::size_t nfft = next_pow2(2 * line.size());
    auto spec = fft_real(line, nfft);
    const double sigma_f = fraction * center / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    for (std::size_t k = 0; k < nfft; ++k) {
        const std::size_t mirror = k <= nfft / 2 ? k : nfft - k;
        const double f = mirror * sample_rate / static_cast<double>(nfft);
        const double d = (f - center) / sigma_f;
        spec[k] *= std::exp(-0.5 * d * d);
    }
    auto filtered = ifft_real(std::move(spec));
    filtered.resize(line.size());
    line = std::move(filtered);
}

}  // namespace detail

/** Conventional sector-focused beamformer: one line per steered beam, formed
 *  directly on raw RF with dynamic receive focusing along the beam axis. The
 *  transmit wave is treated as refocusing through the focal point, so an
 *  echo at range r arrives at max_j |F - e_j|/c + (r - R_F)/c plus the pulse
 *  envelope delay. Each line is Gaussian band-pass filtered. */
inline Scanlines das_csf(const std::vector<RFFrame>& frames, const std::vector<ScanBeam>& plan,
                         const std::vector<double>& ranges, const ArrayGeometry& geometry, double c,
                         const CsfOptions& options = {}) {
    if (frames.size() != plan.size())
        throw std::invalid_argument("das_csf: one frame per planned beam is required");
    if (plan.empty()) throw std::invalid_argument("das_csf: empty scan plan");
    PolarGrid grid;
    grid.ranges = ranges;
    for (const auto& beam : plan) grid.angles_deg.push_back(beam.steer_angle_deg);
    auto out = zero_scanlines(grid);

    for (std::size_t b = 0; b < plan.size(); ++b) {
        const auto& frame = frames[b];
        if (frame.n_elements != geometry.n_elements)
            throw std::invalid_argument("das_csf: frame does not match the geometry");
        const double theta = plan[b].steer_angle_deg * kPi / 180.0;
        const double fx = plan[b].focus_range * std::sin(theta);
        const double fz = plan[b].focus_range * std::cos(theta);
        double t_focus = 0.0;
        for (double x : geometry.element_x)
            t_focus = std::max(t_focus, std::hypot(fx - x, fz) / c);

        std::vector<double> line(ranges.size(), 0.0);
        for (std::size_t r = 0; r < ranges.size(); ++r) {
            const double px = ranges[r] * std::sin(theta);
            const double pz = ranges[r] * std::cos(theta);
            const double t_tx = t_focus + (ranges[r] - plan[b].focus_range) / c + options.pulse_delay;
            double acc = 0.0;
            for (int i = 0; i < geometry.n_elements; ++i) {
                const double dx = px - geometry.element_x[i];
                acc += detail::sample_linear(frame, i, t_tx + std::sqrt(dx * dx + pz * pz) / c);
            }
            line[r] = acc;
        }
        const double dr = ranges.size() > 1 ? ranges[1] - ranges[0] : 1.0;
        detail::gaussian_bandpass(line, c / (2.0 * dr), options.band_center, options.band_fraction);
        for (std::size_t r = 0; r < ranges.size(); ++r) out.at(b, r) = line[r];
    }
    return out;
}

/** Envelope peak of the transmitted pulse relative to its geometric onset;
 *  feed this to das_csf so echoes image at their true range. */
inline double pulse_envelope_delay(const std::vector<double>& excitation, const ElementResponse& response) {
    const auto pulse = convolve(excitation, response.impulse);
    const auto env = envelope_of(pulse);
    const double center = (static_cast<double>(response.impulse.size()) - 1.0) / 2.0;
    return (static_cast<double>(peak_index(env)) - center) / response.sample_rate;
}

/** Magnitude of the analytic signal along each scan line. */
inline Scanlines envelope(const Scanlines& scanlines) {
    Scanlines out = scanlines;
    std::vector<double> line(scanlines.n_ranges());
    for (std::size_t a = 0; a < scanlines.n_angles(); ++a) {
        for (std::size_t r = 0; r < line.size(); ++r) line[r] = scanlines.at(a, r);
        auto env = envelope_of(line);
        for (std::size_t r = 0; r < line.size(); ++r) out.at(a, r) = env[r];
    }
    return out;
}

/** Fixed gain plus linear time-varying gain in dB per centimeter of depth. */
inline RFFrame apply_gain(const RFFrame& frame, double fixed_db, double tgc_db_per_cm, double c) {
    RFFrame out = frame;
    for (int l = 0; l < frame.n_samples; ++l) {
        const double t = frame.t0 + l / frame.sample_rate;
        const double depth_cm = c * t / 2.0 * 100.0;
        const double gain = std::pow(10.0, (fixed_db + tgc_db_per_cm * depth_cm) / 20.0);
        for (int i = 0; i < frame.n_elements; ++i) out.at(i, l) *= gain;
    }
    return out;
}

/** Log compression to a fixed dynamic range: dB = 20 log10(env/peak) + range,
 *  clipped to [0, range], then shifted by a global offset until the mean of
 *  pixels above the clip floor hits the target, re-clipping each pass. */
inline Scanlines log_compress(const Scanlines& env, double dynamic_range_db = 60.0, double target_mean_db = 32.0) {
    double peak = 0.0;
    for (double v : env.data) {
        if (v < 0.0) throw std::invalid_argument("log_compress: envelope must be non-negative");
        peak = std::max(peak, v);
    }
    if (peak <= 0.0) throw std::invalid_argument("log_compress: all-zero envelope");

    std::vector<double> db(env.data.size());
    for (std::size_t k = 0; k < env.data.size(); ++k)
        db[k] = env.data[k] > 0.0 ? 20.0 * std::log10(env.data[k] / peak) + dynamic_range_db
                                  : -std::numeric_limits<double>::infinity();

    double offset = 0.0;
    for (int pass = 0; pass < 64; ++pass) {
        double mean = 0.0;
        std::size_t count = 0;
        for (double v : db) {
            const double clipped = std::clamp(v + offset, 0.0, dynamic_range_db);
            if (clipped > 0.0) {
                mean += clipped;
                ++count;
            }
        }
        if (count == 0) break;
        mean /= static_cast<double>(count);
        if (std::abs(mean - target_mean_db) <= 0.5) break;
        offset += target_mean_db - mean;
    }

    Scanlines out = env;
    for (std::size_t k = 0; k < db.size(); ++k) out.data[k] = std::clamp(db[k] + offset, 0.0, dynamic_range_db);
    return out;
}

/** Cartesian raster in meters; out-of-sector pixels are NaN. */
struct CartesianImage {
    int width = 0;
    int height = 0;
    double x_min = 0.0;
    double z_min = 0.0;
    double pitch = 1e-4;
    std::vector<double> pixels;

    double& at(int col, int row) { return pixels[static_cast<std::size_t>(row) * width + col]; }
    double at(int col, int row) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
};

/** Bilinear polar-to-Cartesian resampling over the sector's bounding box. */
inline CartesianImage scan_convert(const Scanlines& scanlines, double pixel_pitch = 1e-4) {
    validate_grid(scanlines.grid);
    if (pixel_pitch <= 0.0) throw std::invalid_argument("scan_convert: pixel pitch must be positive");
    const auto& angles = scanlines.grid.angles_deg;
    const auto& ranges = scanlines.grid.ranges;
    const double a_lo = angles.front() * kPi / 180.0, a_hi = angles.back() * kPi / 180.0;
    const double r_hi = ranges.back();

    double x_lo = 0.0, x_hi = 0.0;
    for (double a : {a_lo, a_hi}) {
        x_lo = std::min(x_lo, r_hi * std::sin(a));
        x_hi = std::max(x_hi, r_hi * std::sin(a));
    }
    const double z_hi = r_hi;

    CartesianImage img;
    img.pitch = pixel_pitch;
    img.x_min = x_lo;
    img.z_min = 0.0;
    img.width = static_cast<int>(std::ceil((x_hi - x_lo) / pixel_pitch)) + 1;
    img.height = static_cast<int>(std::ceil(z_hi / pixel_pitch)) + 1;
    img.pixels.assign(static_cast<std::size_t>(img.width) * img.height,
                      std::numeric_limits<double>::quiet_NaN());

    for (int row = 0; row < img.height; ++row) {
        const double z = img.z_min + row * pixel_pitch;
        for (int col = 0; col < img.width; ++col) {
            const double x = img.x_min + col * pixel_pitch;
            const double r = std::hypot(x, z);
            const double a = std::atan2(x, z) * 180.0 / kPi;
            if (r < ranges.front() || r > ranges.back() || a < angles.front() || a > angles.back()) continue;

            const auto ia = static_cast<std::size_t>(
                std::upper_bound(angles.begin(), angles.end(), a) - angles.begin());
            const auto ir = static_cast<std::size_t>(
                std::upper_bound(ranges.begin(), ranges.end(), r) - ranges.begin());
            const std::size_t a0 = std::clamp<std::size_t>(ia, 1, angles.size() - 1) - 1;
            const std::size_t r0 = std::clamp<std::size_t>(ir, 1, ranges.size() - 1) - 1;
            const double fa = (a - angles[a0]) / (angles[a0 + 1] - angles[a0]);
            const double fr = (r - ranges[r0]) / (ranges[r0 + 1] - ranges[r0]);
            const double v00 = scanlines.at(a0, r0), v01 = scanlines.at(a0, r0 + 1);
            const double v10 = scanlines.at(a0 + 1, r0), v11 = scanlines.at(a0 + 1, r0 + 1);
            img.at(col, row) = (1.0 - fa) * ((1.0 - fr) * v00 + fr * v01) + fa * ((1.0 - fr) * v10 + fr * v11);
        }
    }
    return img;
}

/** A rendered sector image with every intermediate stage kept. */
struct SectorImage {
    Scanlines beamformed;
    Scanlines envelope_lines;
    Scanlines compressed;
    CartesianImage cartesian;
    std::string scheme;
    int code_length = 0;
    double r_v = 0.0;
};

}  // namespace cdwsim
