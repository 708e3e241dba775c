#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "fft.hpp"

namespace cdwsim {

/** Linear array centered on x = 0. */
struct ArrayGeometry {
    int n_elements = 128;
    double pitch = 0.1e-3;
    std::vector<double> element_x;

    double aperture() const { return n_elements * pitch; }
};

inline ArrayGeometry make_array(int n_elements = 128, double pitch = 0.1e-3) {
    if (n_elements <= 0) throw std::invalid_argument("make_array: n_elements must be positive");
    if (pitch <= 0.0) throw std::invalid_argument("make_array: pitch must be positive");
    ArrayGeometry g;
    g.n_elements = n_elements;
    g.pitch = pitch;
    g.element_x.resize(n_elements);
    for (int i = 0; i < n_elements; ++i)
        g.element_x[i] = (i - (n_elements - 1) / 2.0) * pitch;
    return g;
}

enum class ProfileKind { diverging, focused, single_element };

/** Per-element transmit delays, normalized so the earliest element fires at
 *  t = 0. For single_element profiles only element_index transmits. */
struct DelayProfile {
    std::vector<double> delays;
    ProfileKind kind = ProfileKind::diverging;
    double r_v = 0.0;
    double focus_range = 0.0;
    double steer_angle_deg = 0.0;
    int element_index = -1;
};

/** Diverging-wave profile for a virtual source at (0, -r_v) behind the array:
 *  delay_i = (sqrt(r_v^2 + x_i^2) - r_v) / c, shifted so the innermost
 *  element fires exactly at t = 0. */
inline DelayProfile dw_delays(double r_v, const ArrayGeometry& geometry, double c) {
    if (r_v <= 0.0) throw std::invalid_argument("dw_delays: r_v must be positive");
    if (c <= 0.0) throw std::invalid_argument("dw_delays: sound speed must be positive");
    DelayProfile p;
    p.kind = ProfileKind::diverging;
    p.r_v = r_v;
    p.delays.resize(geometry.element_x.size());
    double lead = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < geometry.element_x.size(); ++i) {
        const double x = geometry.element_x[i];
        p.delays[i] = (std::sqrt(r_v * r_v + x * x) - r_v) / c;
        lead = std::min(lead, p.delays[i]);
    }
    for (double& d : p.delays) d -= lead;
    return p;
}

/** Angular width of the sector insonified by a diverging wave, in degrees. */
inline double sector_angle(double r_v, double aperture) {
    if (r_v <= 0.0) throw std::invalid_argument("sector_angle: r_v must be positive");
    return 2.0 * std::atan(aperture / (2.0 * r_v)) * 180.0 / kPi;
}

/** Focused profile converging at polar (focus_range, steer_angle): the
 *  farthest element fires first and the wavefront arrives at the focus
 *  simultaneously from all elements. */
inline DelayProfile focused_delays(double focus_range, double steer_angle_deg, const ArrayGeometry& geometry,
                                   double c) {
    if (focus_range <= 0.0) throw std::invalid_argument("focused_delays: focus_range must be positive");
    if (!(std::abs(steer_angle_deg) < 90.0))
        throw std::invalid_argument("focused_delays: steer angle must be inside (-90, 90) degrees");
    if (c <= 0.0) throw std::invalid_argument("focused_delays: sound speed must be positive");
    const double theta = steer_angle_deg * kPi / 180.0;
    const double fx = focus_range * std::sin(theta);
    const double fz = focus_range * std::cos(theta);
    DelayProfile p;
    p.kind = ProfileKind::focused;
    p.focus_range = focus_range;
    p.steer_angle_deg = steer_angle_deg;
    p.delays.resize(geometry.element_x.size());
    double far = 0.0;
    for (double x : geometry.element_x) far = std::max(far, std::hypot(fx - x, fz));
    for (std::size_t i = 0; i < geometry.element_x.size(); ++i)
        p.delays[i] = (far - std::hypot(fx - geometry.element_x[i], fz)) / c;
    return p;
}

/** Profile in which a single element transmits with zero delay. */
inline DelayProfile single_element_delays(int element_index, const ArrayGeometry& geometry) {
    if (element_index < 0 || element_index >= geometry.n_elements)
        throw std::invalid_argument("single_element_delays: element index out of range");
    DelayProfile p;
    p.kind = ProfileKind::single_element;
    p.element_index = element_index;
    p.delays.assign(geometry.element_x.size(), 0.0);
    return p;
}

struct ScanBeam {
    double steer_angle_deg = 0.0;
    double focus_range = 0.0;
};

/** Sector scan plan: 181 focused beams from -45 to +45 degrees in half-degree
 *  steps, all focused at 40 mm. */
inline std::vector<ScanBeam> csf_scan_plan(const ArrayGeometry&) {
    std::vector<ScanBeam> plan;
    plan.reserve(181);
    for (int i = 0; i <= 180; ++i) plan.push_back({-45.0 + 0.5 * i, 40.0e-3});
    return plan;
}

/** Frames per second when each of n_tx transmissions must wait for the
 *  round trip to the imaging depth. */
inline double frame_rate(int n_tx, double depth, double c) {
    if (n_tx <= 0 || depth <= 0.0 || c <= 0.0)
        throw std::invalid_argument("frame_rate: all arguments must be positive");
    return 1.0 / (n_tx * 2.0 * depth / c);
}

/** Reference wavelength used for virtual-source bookkeeping: quoted source
 *  distances in wavelengths use 1500 m/s at the 7.5 MHz carrier (0.2 mm per
 *  wavelength) regardless of the propagation speed of the medium. */
inline constexpr double kLambdaRefSpeed = 1500.0;

inline double lambda_ref(double carrier_freq) {
    if (carrier_freq <= 0.0) throw std::invalid_argument("lambda_ref: carrier must be positive");
    return kLambdaRefSpeed / carrier_freq;
}

}  // namespace cdwsim
