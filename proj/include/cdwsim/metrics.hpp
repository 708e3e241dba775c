#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "beamform.hpp"
#include "fft.hpp"

namespace cdwsim {

/** Value-versus-depth curve; values are dB when is_db is set, linear power
 *  otherwise. */
struct DepthCurve {
    std::vector<double> depths;
    std::vector<double> values;
    bool is_db = false;
};

inline constexpr double kDepthBin = 1e-3;

struct RoiSpec {
    enum class Shape { disc, rectangle };
    Shape shape = Shape::disc;
    double x = 0.0;
    double z = 0.0;
    double diameter = 0.0;
    double width = 0.0;
    double height = 0.0;

    bool contains(double px, double pz) const {
        if (shape == Shape::disc) return std::hypot(px - x, pz - z) <= diameter / 2.0;
        return std::abs(px - x) <= width / 2.0 && std::abs(pz - z) <= height / 2.0;
    }
};

namespace detail {

inline double cell_x(const PolarGrid& grid, std::size_t a, std::size_t r) {
    return grid.ranges[r] * std::sin(grid.angles_deg[a] * kPi / 180.0);
}

inline double cell_z(const PolarGrid& grid, std::size_t a, std::size_t r) {
    return grid.ranges[r] * std::cos(grid.angles_deg[a] * kPi / 180.0);
}

/** Mean squared pixel value per 1 mm depth bin, depth taken as the cell's
 *  vertical coordinate. Accumulates across all supplied images. */
inline DepthCurve mean_square_by_depth(const std::vector<const Scanlines*>& images) {
    std::vector<double> acc, cnt;
    for (const auto* img : images) {
        for (std::size_t a = 0; a < img->n_angles(); ++a)
            for (std::size_t r = 0; r < img->n_ranges(); ++r) {
                const double z = cell_z(img->grid, a, r);
                const auto bin = static_cast<std::size_t>(std::floor(z / kDepthBin));
                if (bin >= acc.size()) {
                    acc.resize(bin + 1, 0.0);
                    cnt.resize(bin + 1, 0.0);
                }
                const double v = img->at(a, r);
                acc[bin] += v * v;
                cnt[bin] += 1.0;
            }
    }
    DepthCurve curve;
    for (std::size_t bin = 0; bin < acc.size(); ++bin) {
        if (cnt[bin] == 0.0) continue;
        curve.depths.push_back((static_cast<double>(bin) + 0.5) * kDepthBin);
        curve.values.push_back(acc[bin] / cnt[bin]);
    }
    return curve;
}

}  // namespace detail

/** Noise power versus depth, averaged over every pixel of every realization
 *  falling in each 1 mm depth bin. */
inline DepthCurve noise_power(const std::vector<Scanlines>& noise_images) {
    if (noise_images.empty()) throw std::invalid_argument("noise_power: at least one noise image is required");
    for (const auto& img : noise_images)
        if (img.grid.angles_deg != noise_images.front().grid.angles_deg ||
            img.grid.ranges != noise_images.front().grid.ranges)
            throw std::invalid_argument("noise_power: noise images must share one grid");
    std::vector<const Scanlines*> ptrs;
    for (const auto& img : noise_images) ptrs.push_back(&img);
    return detail::mean_square_by_depth(ptrs);
}

/** SNR+1 per depth bin: 10 log10(P_speckle / P_noise + 1), with speckle power
 *  the lateral mean of the squared envelope at that depth. */
inline DepthCurve snr_plus_one(const Scanlines& speckle_image, const DepthCurve& noise_curve) {
    auto speckle = detail::mean_square_by_depth({&speckle_image});
    if (speckle.depths.size() != noise_curve.depths.size())
        throw std::invalid_argument("snr_plus_one: depth axes do not match");
    for (std::size_t k = 0; k < speckle.depths.size(); ++k)
        if (std::abs(speckle.depths[k] - noise_curve.depths[k]) > 1e-9)
            throw std::invalid_argument("snr_plus_one: depth axes do not match");

    DepthCurve out;
    out.is_db = true;
    out.depths = speckle.depths;
    out.values.resize(speckle.values.size());
    for (std::size_t k = 0; k < speckle.values.size(); ++k) {
        if (noise_curve.values[k] <= 0.0) throw std::invalid_argument("snr_plus_one: zero noise power bin");
        out.values[k] = 10.0 * std::log10(speckle.values[k] / noise_curve.values[k] + 1.0);
    }
    return out;
}

/** First depth at which the curve drops below 6 dB and stays below for the
 *  following two bins; empty when the curve never does. */
inline std::optional<double> penetration_depth(const DepthCurve& curve, double threshold_db = 6.0) {
    if (!curve.is_db) throw std::invalid_argument("penetration_depth: curve must be in dB");
    for (std::size_t k = 0; k + 2 < curve.values.size(); ++k)
        if (curve.values[k] < threshold_db && curve.values[k + 1] < threshold_db &&
            curve.values[k + 2] < threshold_db)
            return curve.depths[k];
    return std::nullopt;
}

/** Contrast-to-noise ratio |mu_C - mu_B| / sqrt(var_C + var_B) over
 *  log-compressed pixel values. */
inline double cnr(const Scanlines& log_image, const RoiSpec& cyst_roi, const RoiSpec& background_roi) {
    auto stats = [&log_image](const RoiSpec& roi, double& mean, double& var) {
        std::vector<double> vals;
        for (std::size_t a = 0; a < log_image.n_angles(); ++a)
            for (std::size_t r = 0; r < log_image.n_ranges(); ++r)
                if (roi.contains(detail::cell_x(log_image.grid, a, r), detail::cell_z(log_image.grid, a, r)))
                    vals.push_back(log_image.at(a, r));
        if (vals.size() < 8) throw std::invalid_argument("cnr: region covers fewer than 8 pixels");
        mean = 0.0;
        for (double v : vals) mean += v;
        mean /= static_cast<double>(vals.size());
        var = 0.0;
        for (double v : vals) var += (v - mean) * (v - mean);
        var /= static_cast<double>(vals.size());
    };
    double mu_c = 0.0, var_c = 0.0, mu_b = 0.0, var_b = 0.0;
    stats(cyst_roi, mu_c, var_c);
    stats(background_roi, mu_b, var_b);
    return std::abs(mu_c - mu_b) / std::sqrt(var_c + var_b);
}

struct PinPosition {
    double x = 0.0;
    double z = 0.0;
};

namespace detail {

/** Peak squared envelope within a 1 mm disc around the pin, in dB. */
inline double pin_peak_db(const Scanlines& envelope_image, const PinPosition& pin, double window = 1e-3) {
    double best = -1.0;
    for (std::size_t a = 0; a < envelope_image.n_angles(); ++a)
        for (std::size_t r = 0; r < envelope_image.n_ranges(); ++r) {
            const double dx = cell_x(envelope_image.grid, a, r) - pin.x;
            const double dz = cell_z(envelope_image.grid, a, r) - pin.z;
            if (std::hypot(dx, dz) > window) continue;
            const double v = envelope_image.at(a, r);
            best = std::max(best, v * v);
        }
    if (best < 0.0) throw std::invalid_argument("signal strength: pin lies outside the image");
    return 10.0 * std::log10(best);
}

}  // namespace detail

/** Per-pin peak of the squared envelope within a 1 mm search window, in dB
 *  relative to one amplitude unit squared. */
inline std::vector<double> signal_strength_profile(const Scanlines& envelope_image,
                                                   const std::vector<PinPosition>& pins) {
    std::vector<double> out;
    out.reserve(pins.size());
    for (const auto& pin : pins) out.push_back(detail::pin_peak_db(envelope_image, pin));
    return out;
}

/** Pin peak power minus the mean speckle power in a 2-4 mm annulus around the
 *  pin, in dB. */
inline double ssr(const Scanlines& envelope_image, const PinPosition& pin, double inner = 2e-3,
                  double outer = 4e-3) {
    const auto& grid = envelope_image.grid;
    for (int k = 0; k < 64; ++k) {
        const double phi = 2.0 * kPi * k / 64.0;
        const double px = pin.x + outer * std::cos(phi);
        const double pz = pin.z + outer * std::sin(phi);
        const double r = std::hypot(px, pz);
        const double a = std::atan2(px, pz) * 180.0 / kPi;
        if (r < grid.ranges.front() || r > grid.ranges.back() || a < grid.angles_deg.front() ||
            a > grid.angles_deg.back())
            throw std::invalid_argument("ssr: annulus leaves the imaged sector");
    }
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t a = 0; a < grid.angles_deg.size(); ++a)
        for (std::size_t r = 0; r < grid.ranges.size(); ++r) {
            const double d = std::hypot(detail::cell_x(grid, a, r) - pin.x, detail::cell_z(grid, a, r) - pin.z);
            if (d < inner || d > outer) continue;
            const double v = envelope_image.at(a, r);
            acc += v * v;
            ++count;
        }
    if (count == 0) throw std::invalid_argument("ssr: annulus covers no pixels");
    return detail::pin_peak_db(envelope_image, pin) - 10.0 * std::log10(acc / static_cast<double>(count));
}

}  // namespace cdwsim
