#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "fft.hpp"

namespace cdwsim {

/** Deterministic standard-normal generator: mt19937_64 plus an explicit
 *  Box-Muller transform. std::normal_distribution is implementation-defined,
 *  so rolling the transform by hand keeps output streams identical across
 *  standard libraries, which the reproducibility contract requires. */
class NormalRng {
public:
    explicit NormalRng(std::uint64_t seed) : eng_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0,1], u2 in [0,1): 53-bit mantissa draws
        const double u1 = (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * kPi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /** Uniform draw in [0,1) with 53-bit resolution. */
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace cdwsim
