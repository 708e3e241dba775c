#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "acoustics.hpp"
#include "beamform.hpp"
#include "metrics.hpp"
#include "optimize.hpp"

namespace cdwsim {

namespace detail {

inline void append_u32le(std::string& out, std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

inline void append_u64le(std::string& out, std::uint64_t v) {
    for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

inline void append_f64le(std::string& out, double v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    append_u64le(out, bits);
}

inline void append_f32le(std::string& out, float v) {
    std::uint32_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    append_u32le(out, bits);
}

struct ByteReader {
    const std::string& bytes;
    std::size_t pos = 0;
    std::string path;

    void need(std::size_t n) const {
        if (pos + n > bytes.size()) throw std::runtime_error("truncated file: " + path);
    }
    std::uint32_t u32le() {
        need(4);
        std::uint32_t v = 0;
        for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos++])) << (8 * k);
        return v;
    }
    std::uint64_t u64le() {
        need(8);
        std::uint64_t v = 0;
        for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos++])) << (8 * k);
        return v;
    }
    double f64le() {
        const std::uint64_t bits = u64le();
        double v = 0.0;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }
    float f32le() {
        const std::uint32_t bits = u32le();
        float v = 0.0f;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }
};

inline std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (!in) throw std::runtime_error("cannot read file: " + path);
    return buf.str();
}

inline void write_file_bytes(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("cannot write file: " + path);
}

/** Shortest decimal form that parses back to the same double. */
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& field, const std::string& path) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        throw std::runtime_error("malformed numeric field '" + field + "' in " + path);
    return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

inline std::vector<std::string> csv_rows(const std::string& bytes) {
    std::vector<std::string> rows;
    std::string cur;
    for (char ch : bytes) {
        if (ch == '\n') {
            rows.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) rows.push_back(cur);
    return rows;
}

}  // namespace detail

inline constexpr char kRFMagic[8] = {'C', 'D', 'W', 'R', 'F', '1', '\0', '\0'};

/** 32-byte header (magic, element and sample counts, sample rate, start
 *  time), then one 32-bit float per sample in channel-major order, all
 *  little-endian. */
inline void write_rf_frame(const std::string& path, const RFFrame& frame) {
    std::string bytes;
    bytes.reserve(32 + frame.samples.size() * 4);
    bytes.append(kRFMagic, 8);
    detail::append_u32le(bytes, static_cast<std::uint32_t>(frame.n_elements));
    detail::append_u32le(bytes, static_cast<std::uint32_t>(frame.n_samples));
    detail::append_f64le(bytes, frame.sample_rate);
    detail::append_f64le(bytes, frame.t0);
    for (double v : frame.samples) detail::append_f32le(bytes, static_cast<float>(v));
    detail::write_file_bytes(path, bytes);
}

inline RFFrame read_rf_frame(const std::string& path) {
    const auto bytes = detail::read_file_bytes(path);
    detail::ByteReader reader{bytes, 0, path};
    reader.need(8);
    if (std::memcmp(bytes.data(), kRFMagic, 8) != 0)
        throw std::runtime_error("not an RF frame file: " + path);
    reader.pos = 8;
    RFFrame frame;
    frame.n_elements = static_cast<int>(reader.u32le());
    frame.n_samples = static_cast<int>(reader.u32le());
    frame.sample_rate = reader.f64le();
    frame.t0 = reader.f64le();
    if (frame.n_elements < 0 || frame.n_samples < 0)
        throw std::runtime_error("corrupt RF frame header: " + path);
    const std::size_t count =
        static_cast<std::size_t>(frame.n_elements) * static_cast<std::size_t>(frame.n_samples);
    if (bytes.size() != 32 + count * 4) throw std::runtime_error("RF frame size mismatch: " + path);
    frame.samples.resize(count);
    for (std::size_t k = 0; k < count; ++k) frame.samples[k] = static_cast<double>(reader.f32le());
    return frame;
}

struct PgmImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;
};

/** Binary 8-bit PGM; dB values map linearly with 60 dB at 255 and the
 *  out-of-sector background at 0. */
inline PgmImage to_pgm(const CartesianImage& image, double full_scale_db = 60.0) {
    PgmImage pgm;
    pgm.width = image.width;
    pgm.height = image.height;
    pgm.pixels.resize(image.width * image.height, 0);
    for (std::size_t row = 0; row < image.height; ++row)
        for (std::size_t col = 0; col < image.width; ++col) {
            const double v = image.at(col, row);
            if (std::isnan(v)) continue;
            const double clipped = std::clamp(v, 0.0, full_scale_db);
            pgm.pixels[row * image.width + col] =
                static_cast<std::uint8_t>(std::lround(clipped / full_scale_db * 255.0));
        }
    return pgm;
}

inline void write_pgm(const std::string& path, const PgmImage& pgm) {
    if (pgm.pixels.size() != pgm.width * pgm.height)
        throw std::invalid_argument("write_pgm: pixel count does not match the dimensions");
    std::string bytes = "P5\n" + std::to_string(pgm.width) + " " + std::to_string(pgm.height) + "\n255\n";
    bytes.append(reinterpret_cast<const char*>(pgm.pixels.data()), pgm.pixels.size());
    detail::write_file_bytes(path, bytes);
}

inline PgmImage read_pgm(const std::string& path) {
    const auto bytes = detail::read_file_bytes(path);
    std::istringstream head(bytes.substr(0, 64));
    std::string magic;
    std::size_t width = 0, height = 0;
    int maxval = 0;
    head >> magic >> width >> height >> maxval;
    if (magic != "P5" || maxval != 255 || !head) throw std::runtime_error("not an 8-bit PGM file: " + path);
    head.get();
    const std::size_t offset = static_cast<std::size_t>(head.tellg());
    if (bytes.size() != offset + width * height) throw std::runtime_error("PGM size mismatch: " + path);
    PgmImage pgm;
    pgm.width = width;
    pgm.height = height;
    pgm.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset), bytes.end());
    return pgm;
}

inline void write_depth_curve_csv(const std::string& path, const DepthCurve& curve) {
    std::string bytes = curve.is_db ? "depth_m,value_db\n" : "depth_m,value\n";
    for (std::size_t k = 0; k < curve.depths.size(); ++k)
        bytes += detail::format_double(curve.depths[k]) + "," + detail::format_double(curve.values[k]) + "\n";
    detail::write_file_bytes(path, bytes);
}

inline DepthCurve read_depth_curve_csv(const std::string& path) {
    const auto rows = detail::csv_rows(detail::read_file_bytes(path));
    if (rows.empty()) throw std::runtime_error("empty depth curve file: " + path);
    DepthCurve curve;
    if (rows.front() == "depth_m,value_db")
        curve.is_db = true;
    else if (rows.front() != "depth_m,value")
        throw std::runtime_error("unrecognized depth curve header in " + path);
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const auto fields = detail::split_csv_line(rows[k]);
        if (fields.size() != 2) throw std::runtime_error("malformed depth curve row in " + path);
        curve.depths.push_back(detail::parse_double(fields[0], path));
        curve.values.push_back(detail::parse_double(fields[1], path));
    }
    return curve;
}

struct PinProfile {
    std::vector<PinPosition> pins;
    std::vector<double> values_db;
};

inline void write_profile_csv(const std::string& path, const PinProfile& profile) {
    if (profile.pins.size() != profile.values_db.size())
        throw std::invalid_argument("write_profile_csv: one value per pin is required");
    std::string bytes = "pin_index,x_m,z_m,value_db\n";
    for (std::size_t k = 0; k < profile.pins.size(); ++k)
        bytes += std::to_string(k) + "," + detail::format_double(profile.pins[k].x) + "," +
                 detail::format_double(profile.pins[k].z) + "," + detail::format_double(profile.values_db[k]) +
                 "\n";
    detail::write_file_bytes(path, bytes);
}

inline PinProfile read_profile_csv(const std::string& path) {
    const auto rows = detail::csv_rows(detail::read_file_bytes(path));
    if (rows.empty() || rows.front() != "pin_index,x_m,z_m,value_db")
        throw std::runtime_error("unrecognized profile header in " + path);
    PinProfile profile;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const auto fields = detail::split_csv_line(rows[k]);
        if (fields.size() != 4) throw std::runtime_error("malformed profile row in " + path);
        profile.pins.push_back({detail::parse_double(fields[1], path), detail::parse_double(fields[2], path)});
        profile.values_db.push_back(detail::parse_double(fields[3], path));
    }
    return profile;
}

/** Polar image data, one row per (angle, range) cell in angle-major order. */
inline void write_scanlines_csv(const std::string& path, const Scanlines& lines) {
    std::string bytes = "angle_deg,range_m,value\n";
    for (std::size_t a = 0; a < lines.n_angles(); ++a)
        for (std::size_t r = 0; r < lines.n_ranges(); ++r)
            bytes += detail::format_double(lines.grid.angles_deg[a]) + "," +
                     detail::format_double(lines.grid.ranges[r]) + "," + detail::format_double(lines.at(a, r)) +
                     "\n";
    detail::write_file_bytes(path, bytes);
}

inline Scanlines read_scanlines_csv(const std::string& path) {
    const auto rows = detail::csv_rows(detail::read_file_bytes(path));
    if (rows.empty() || rows.front() != "angle_deg,range_m,value")
        throw std::runtime_error("unrecognized scanline header in " + path);

    PolarGrid grid;
    std::vector<double> values;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const auto fields = detail::split_csv_line(rows[k]);
        if (fields.size() != 3) throw std::runtime_error("malformed scanline row in " + path);
        const double angle = detail::parse_double(fields[0], path);
        const double range = detail::parse_double(fields[1], path);
        if (grid.angles_deg.empty() || angle != grid.angles_deg.back()) grid.angles_deg.push_back(angle);
        if (grid.angles_deg.size() == 1) grid.ranges.push_back(range);
        values.push_back(detail::parse_double(fields[2], path));
    }
    if (values.size() != grid.angles_deg.size() * grid.ranges.size())
        throw std::runtime_error("ragged scanline data in " + path);
    validate_grid(grid);
    Scanlines lines = zero_scanlines(grid);
    lines.data = std::move(values);
    return lines;
}

/** Scatterer list: one x, z, reflectivity row per scatterer. */
inline std::vector<Scatterer> read_scatterers_csv(const std::string& path) {
    const auto rows = detail::csv_rows(detail::read_file_bytes(path));
    if (rows.empty() || rows.front() != "x_m,z_m,reflectivity")
        throw std::runtime_error("unrecognized scatterer header in " + path);
    std::vector<Scatterer> out;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const auto fields = detail::split_csv_line(rows[k]);
        if (fields.size() != 3) throw std::runtime_error("malformed scatterer row in " + path);
        out.push_back({detail::parse_double(fields[0], path), detail::parse_double(fields[1], path),
                       detail::parse_double(fields[2], path)});
    }
    return out;
}

inline void write_scatterers_csv(const std::string& path, const std::vector<Scatterer>& scatterers) {
    std::string bytes = "x_m,z_m,reflectivity\n";
    for (const auto& s : scatterers)
        bytes += detail::format_double(s.x) + "," + detail::format_double(s.z) + "," +
                 detail::format_double(s.reflectivity) + "\n";
    detail::write_file_bytes(path, bytes);
}

/** Candidate-per-row sweep summary plus the central-pin strength margin of
 *  each candidate over the reference. */
inline void write_sweep_csv(const std::string& path, const SweepResult& result) {
    std::string bytes = "r_v_m,objective,central_diff_db\n";
    for (std::size_t k = 0; k < result.r_v_candidates.size(); ++k) {
        const double diff = result.dw_profiles[k][result.central_pin] - result.sta_profile[result.central_pin];
        bytes += detail::format_double(result.r_v_candidates[k]) + "," +
                 detail::format_double(result.objective[k]) + "," + detail::format_double(diff) + "\n";
    }
    detail::write_file_bytes(path, bytes);
}

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

/** FNV-1a, the 64-bit variant; the manifest's content hash. */
inline std::uint64_t fnv1a64(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t hash = kFnvOffset;
    for (std::size_t k = 0; k < size; ++k) {
        hash ^= bytes[k];
        hash *= kFnvPrime;
    }
    return hash;
}

inline std::uint64_t fnv1a64(const std::string& bytes) { return fnv1a64(bytes.data(), bytes.size()); }

inline std::uint64_t hash_file(const std::string& path) { return fnv1a64(detail::read_file_bytes(path)); }

namespace detail {

inline std::string hex16(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int k = 15; k >= 0; --k) {
        out[static_cast<std::size_t>(k)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

}  // namespace detail

struct CsvDiff {
    bool same_layout = false;
    std::size_t rows_a = 0;
    std::size_t rows_b = 0;
    double max_abs_diff = 0.0;
    std::vector<std::string> notes;

    bool zero() const { return same_layout && notes.empty() && max_abs_diff == 0.0; }
};

/** Cell-by-cell numeric comparison of two CSV files; non-numeric cells are
 *  compared as text and mismatches land in the notes. */
inline CsvDiff compare_csv(const std::string& path_a, const std::string& path_b) {
    const auto rows_a = detail::csv_rows(detail::read_file_bytes(path_a));
    const auto rows_b = detail::csv_rows(detail::read_file_bytes(path_b));
    CsvDiff diff;
    diff.rows_a = rows_a.size();
    diff.rows_b = rows_b.size();
    diff.same_layout = rows_a.size() == rows_b.size();
    if (!diff.same_layout) diff.notes.push_back("row counts differ");

    const std::size_t rows = std::min(rows_a.size(), rows_b.size());
    for (std::size_t r = 0; r < rows; ++r) {
        const auto cells_a = detail::split_csv_line(rows_a[r]);
        const auto cells_b = detail::split_csv_line(rows_b[r]);
        if (cells_a.size() != cells_b.size()) {
            diff.same_layout = false;
            diff.notes.push_back("column counts differ on row " + std::to_string(r + 1));
            continue;
        }
        for (std::size_t c = 0; c < cells_a.size(); ++c) {
            double va = 0.0, vb = 0.0;
            const char* ea = cells_a[c].data() + cells_a[c].size();
            const char* eb = cells_b[c].data() + cells_b[c].size();
            const auto ra = std::from_chars(cells_a[c].data(), ea, va);
            const auto rb = std::from_chars(cells_b[c].data(), eb, vb);
            const bool num_a = ra.ec == std::errc{} && ra.ptr == ea && !cells_a[c].empty();
            const bool num_b = rb.ec == std::errc{} && rb.ptr == eb && !cells_b[c].empty();
            if (num_a && num_b) {
                diff.max_abs_diff = std::max(diff.max_abs_diff, std::abs(va - vb));
            } else if (cells_a[c] != cells_b[c]) {
                diff.notes.push_back("row " + std::to_string(r + 1) + " column " + std::to_string(c + 1) +
                                     ": '" + cells_a[c] + "' vs '" + cells_b[c] + "'");
            }
        }
    }
    return diff;
}

/** One `fnv1a64  <hash>  <name>` line per artifact, sorted by name. */
inline void write_manifest(const std::string& manifest_path, const std::string& base_dir,
                           std::vector<std::string> names) {
    std::sort(names.begin(), names.end());
    std::string bytes;
    for (const auto& name : names)
        bytes += "fnv1a64  " + detail::hex16(hash_file(base_dir + "/" + name)) + "  " + name + "\n";
    detail::write_file_bytes(manifest_path, bytes);
}

}  // namespace cdwsim
