#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "cdwsim/codes.hpp"
#include "cdwsim/signal.hpp"

TEST_CASE("complementary autocorrelation is an impulse for every supported length") {
    for (int n : {2, 4, 8, 10, 16}) {
        auto pair = cdwsim::golay_pair(n);
        REQUIRE(static_cast<int>(pair.seq_a.size()) == n);
        REQUIRE(static_cast<int>(pair.seq_b.size()) == n);
        for (int v : pair.seq_a) CHECK((v == 1 || v == -1));
        for (int v : pair.seq_b) CHECK((v == 1 || v == -1));
        auto acf = cdwsim::complementary_autocorrelation(pair);
        REQUIRE(acf.size() == static_cast<std::size_t>(2 * n - 1));
        for (int lag = -(n - 1); lag <= n - 1; ++lag) {
            const long long want = lag == 0 ? 2LL * n : 0LL;
            CHECK(acf[static_cast<std::size_t>(lag + n - 1)] == want);
        }
    }
}

TEST_CASE("unsupported code lengths are rejected") {
    for (int n : {0, 1, 3, 5, 6, 7, 9, 11, 12, 32}) CHECK_THROWS_AS(cdwsim::golay_pair(n), std::invalid_argument);
}

TEST_CASE("a single sequence of a pair has nonzero autocorrelation sidelobes") {
    auto pair = cdwsim::golay_pair(8);
    double worst = 0.0;
    const int n = 8;
    for (int lag = 1; lag < n; ++lag) {
        long long s = 0;
        for (int k = 0; k + lag < n; ++k) s += static_cast<long long>(pair.seq_a[k]) * pair.seq_a[k + lag];
        worst = std::max(worst, std::abs(static_cast<double>(s)) / n);
    }
    CHECK(worst > 0.0);
}

TEST_CASE("bpsk waveform length is the bit count times the rounded chip length") {
    const double f0 = 7.5e6, fs = 80e6;
    const int cycles = 2;
    const int n_chip = static_cast<int>(std::lround(cycles * fs / f0));
    REQUIRE(n_chip == 21);
    for (int n : {2, 4, 8, 10, 16}) {
        auto exc = cdwsim::bpsk_modulate(cdwsim::golay_pair(n), f0, cycles, fs);
        CHECK(static_cast<int>(exc.waveform_a.size()) == n * n_chip);
        CHECK(static_cast<int>(exc.waveform_b.size()) == n * n_chip);
        CHECK(exc.chip_samples() == n_chip);
    }
}

TEST_CASE("bpsk chips are sign-flipped copies of one template") {
    auto exc = cdwsim::bpsk_modulate(cdwsim::golay_pair(10), 7.5e6, 2, 80e6);
    const int n_chip = exc.chip_samples();
    for (std::size_t bit = 0; bit < exc.pair.seq_a.size(); ++bit)
        for (int m = 0; m < n_chip; ++m) {
            const double tmpl = exc.waveform_a[m] * exc.pair.seq_a[0];
            CHECK(exc.waveform_a[bit * n_chip + m] == Catch::Approx(exc.pair.seq_a[bit] * tmpl).margin(1e-15));
            CHECK(exc.waveform_b[bit * n_chip + m] == Catch::Approx(exc.pair.seq_b[bit] * tmpl).margin(1e-15));
        }
}

TEST_CASE("bpsk waveform energy grows linearly with code length") {
    const double e2 = cdwsim::energy_of(cdwsim::bpsk_modulate(cdwsim::golay_pair(2), 7.5e6, 2, 80e6).waveform_a);
    for (int n : {4, 8, 16}) {
        const double en = cdwsim::energy_of(cdwsim::bpsk_modulate(cdwsim::golay_pair(n), 7.5e6, 2, 80e6).waveform_a);
        CHECK(en / e2 == Catch::Approx(n / 2.0).epsilon(1e-12));
    }
}

TEST_CASE("bpsk rejects unusable parameters") {
    auto pair = cdwsim::golay_pair(4);
    CHECK_THROWS_AS(cdwsim::bpsk_modulate(pair, -1.0, 2, 80e6), std::invalid_argument);
    CHECK_THROWS_AS(cdwsim::bpsk_modulate(pair, 7.5e6, 0, 80e6), std::invalid_argument);
    CHECK_THROWS_AS(cdwsim::bpsk_modulate(pair, 7.5e6, 2, 20e6), std::invalid_argument);
}

TEST_CASE("single-chip pulse matches one modulated chip") {
    auto pulse = cdwsim::pulse_excitation(7.5e6, 2, 80e6);
    auto coded = cdwsim::bpsk_modulate(cdwsim::golay_pair(2), 7.5e6, 2, 80e6);
    REQUIRE(pulse.waveform_a.size() == static_cast<std::size_t>(coded.chip_samples()));
    CHECK(pulse.pair.length_bits == 1);
    for (std::size_t m = 0; m < pulse.waveform_a.size(); ++m)
        CHECK(pulse.waveform_a[m] == Catch::Approx(coded.waveform_a[m]).margin(1e-15));
}
