#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "acoustics.hpp"
#include "codes.hpp"

namespace cdwsim {

enum class Scheme { dw, sta, csf };

inline std::string scheme_name(Scheme scheme) {
    switch (scheme) {
        case Scheme::dw: return "dw";
        case Scheme::sta: return "sta";
        case Scheme::csf: return "csf";
    }
    throw std::logic_error("scheme_name: unhandled scheme");
}

/** Full experiment description; defaults reproduce the reference
 *  measurement parameters. */
struct ExperimentConfig {
    int n_elements = 128;
    double pitch = 0.1e-3;
    double sound_speed = 1450.0;
    double attenuation_db_mhz_cm = 0.5;
    int code_bits = 8;
    double carrier_freq = 7.5e6;
    int cycles_per_chip = 2;
    double sample_rate = 80e6;
    double bandwidth_fraction = 0.7;
    Scheme scheme = Scheme::dw;
    double r_v = 14e-3;
    double csf_focus = 40e-3;
    std::string phantom_preset = "vertical_pins";
    std::string phantom_file;
    double noise_power = 0.0;
    std::uint64_t seed = 1;
    double fixed_gain_db = 22.0;
    double tgc_db_per_cm = 2.3;
    double dynamic_range_db = 60.0;
    double max_depth = 60e-3;
    std::string out_dir = "out";

    Medium medium() const { return {sound_speed, attenuation_db_mhz_cm}; }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t lo = 0, hi = s.size();
    while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
    while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
    return s.substr(lo, hi - lo);
}

struct ConfigParser {
    std::vector<std::string> violations;
    std::set<std::string> seen;

    bool has(const std::string& key) const { return seen.count(key) > 0; }

    void fail(const std::string& message) { violations.push_back(message); }

    template <typename T>
    bool number(const std::string& key, const std::string& value, T& out) {
        const char* first = value.data();
        const char* last = value.data() + value.size();
        T parsed{};
        const auto res = std::from_chars(first, last, parsed);
        if (res.ec != std::errc{} || res.ptr != last) {
            fail(key + ": '" + value + "' is not a valid number");
            return false;
        }
        out = parsed;
        return true;
    }
};

}  // namespace detail

/** Parse `key = value` configuration text with `[section]` headers and `#`
 *  comments. Unknown keys, malformed values, and inconsistent scheme
 *  parameters are all collected and reported together. */
inline ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "config") {
    ExperimentConfig config;
    detail::ConfigParser p;
    std::string section;

    std::string line;
    std::vector<std::pair<std::string, std::string>> entries;
    auto flush_line = [&]() {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const auto stripped = detail::trim(line);
        line.clear();
        if (stripped.empty()) return;
        if (stripped.front() == '[') {
            if (stripped.back() != ']') {
                p.fail("unterminated section header '" + stripped + "'");
                return;
            }
            section = detail::trim(stripped.substr(1, stripped.size() - 2));
            return;
        }
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            p.fail("line without '=': '" + stripped + "'");
            return;
        }
        const auto key = detail::trim(stripped.substr(0, eq));
        const auto value = detail::trim(stripped.substr(eq + 1));
        if (key.empty()) {
            p.fail("missing key before '=' in '" + stripped + "'");
            return;
        }
        entries.emplace_back(section.empty() ? key : section + "." + key, value);
    };
    for (char ch : text) {
        if (ch == '\n')
            flush_line();
        else
            line.push_back(ch);
    }
    flush_line();

    for (const auto& [key, value] : entries) {
        p.seen.insert(key);
        if (key == "array.elements") {
            if (p.number(key, value, config.n_elements) && config.n_elements < 2)
                p.fail(key + ": at least 2 elements are required");
        } else if (key == "array.pitch_mm") {
            double mm = 0.0;
            if (p.number(key, value, mm)) {
                if (mm <= 0.0)
                    p.fail(key + ": pitch must be positive");
                else
                    config.pitch = mm * 1e-3;
            }
        } else if (key == "medium.sound_speed") {
            if (p.number(key, value, config.sound_speed) && config.sound_speed <= 0.0)
                p.fail(key + ": sound speed must be positive");
        } else if (key == "medium.attenuation_db_mhz_cm") {
            if (p.number(key, value, config.attenuation_db_mhz_cm) && config.attenuation_db_mhz_cm < 0.0)
                p.fail(key + ": attenuation must be non-negative");
        } else if (key == "excitation.code_bits") {
            if (p.number(key, value, config.code_bits) && config.code_bits != 1) {
                try {
                    golay_pair(static_cast<std::size_t>(config.code_bits));
                } catch (const std::exception& e) {
                    p.fail(key + ": " + e.what());
                }
            }
        } else if (key == "excitation.carrier_mhz") {
            double mhz = 0.0;
            if (p.number(key, value, mhz)) {
                if (mhz <= 0.0)
                    p.fail(key + ": carrier frequency must be positive");
                else
                    config.carrier_freq = mhz * 1e6;
            }
        } else if (key == "excitation.cycles_per_chip") {
            if (p.number(key, value, config.cycles_per_chip) && config.cycles_per_chip <= 0)
                p.fail(key + ": cycles per chip must be positive");
        } else if (key == "excitation.sample_rate_mhz") {
            double mhz = 0.0;
            if (p.number(key, value, mhz)) {
                if (mhz <= 0.0)
                    p.fail(key + ": sample rate must be positive");
                else
                    config.sample_rate = mhz * 1e6;
            }
        } else if (key == "excitation.bandwidth_fraction") {
            if (p.number(key, value, config.bandwidth_fraction) &&
                (config.bandwidth_fraction <= 0.0 || config.bandwidth_fraction >= 2.0))
                p.fail(key + ": fractional bandwidth must lie in (0, 2)");
        } else if (key == "scheme.name") {
            if (value == "dw")
                config.scheme = Scheme::dw;
            else if (value == "sta")
                config.scheme = Scheme::sta;
            else if (value == "csf")
                config.scheme = Scheme::csf;
            else
                p.fail(key + ": '" + value + "' is not one of dw, sta, csf");
        } else if (key == "scheme.rv_mm") {
            double mm = 0.0;
            if (p.number(key, value, mm)) {
                if (mm <= 0.0)
                    p.fail(key + ": virtual source distance must be positive");
                else
                    config.r_v = mm * 1e-3;
            }
        } else if (key == "scheme.focus_mm") {
            double mm = 0.0;
            if (p.number(key, value, mm)) {
                if (mm <= 0.0)
                    p.fail(key + ": focus range must be positive");
                else
                    config.csf_focus = mm * 1e-3;
            }
        } else if (key == "phantom.preset") {
            try {
                make_pin_phantom(value);
                config.phantom_preset = value;
            } catch (const std::exception& e) {
                p.fail(key + ": " + e.what());
            }
        } else if (key == "phantom.file") {
            if (value.empty())
                p.fail(key + ": file path must not be empty");
            else
                config.phantom_file = value;
        } else if (key == "noise.power") {
            if (p.number(key, value, config.noise_power) && config.noise_power < 0.0)
                p.fail(key + ": noise power must be non-negative");
        } else if (key == "noise.seed") {
            p.number(key, value, config.seed);
        } else if (key == "gain.fixed_db") {
            p.number(key, value, config.fixed_gain_db);
        } else if (key == "gain.tgc_db_per_cm") {
            p.number(key, value, config.tgc_db_per_cm);
        } else if (key == "output.dir") {
            if (value.empty())
                p.fail(key + ": directory must not be empty");
            else
                config.out_dir = value;
        } else if (key == "output.depth_mm") {
            double mm = 0.0;
            if (p.number(key, value, mm)) {
                if (mm <= 0.0)
                    p.fail(key + ": imaging depth must be positive");
                else
                    config.max_depth = mm * 1e-3;
            }
        } else if (key == "output.dynamic_range_db") {
            if (p.number(key, value, config.dynamic_range_db) && config.dynamic_range_db <= 0.0)
                p.fail(key + ": dynamic range must be positive");
        } else {
            p.fail("unknown key '" + key + "'");
        }
    }

    if (config.sample_rate < 4.0 * config.carrier_freq)
        p.fail("excitation.sample_rate_mhz: the sample rate must be at least four times the carrier");
    if (p.has("scheme.name") && config.scheme == Scheme::dw && !p.has("scheme.rv_mm"))
        p.fail("scheme.name: the dw scheme requires scheme.rv_mm");
    if (config.scheme != Scheme::dw && p.has("scheme.rv_mm"))
        p.fail("scheme.rv_mm: only the dw scheme takes a virtual source distance");
    if (config.scheme != Scheme::csf && p.has("scheme.focus_mm"))
        p.fail("scheme.focus_mm: only the csf scheme takes a transmit focus");
    if (config.scheme != Scheme::dw && p.has("excitation.code_bits") && config.code_bits != 1)
        p.fail("excitation.code_bits: sta and csf transmit the uncoded pulse, so code_bits must be 1");
    if (p.has("phantom.preset") && p.has("phantom.file"))
        p.fail("phantom.preset and phantom.file are mutually exclusive");

    if (!p.violations.empty()) {
        std::string message = "invalid " + origin + ":";
        for (const auto& v : p.violations) message += "\n  - " + v;
        throw std::invalid_argument(message);
    }
    return config;
}

inline ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

}  // namespace cdwsim
