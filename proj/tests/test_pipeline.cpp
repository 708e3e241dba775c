#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <string>

#include "cdwsim/cdwsim.hpp"

using namespace cdwsim;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_config(const std::string& out_dir) {
    static bool wrote_phantom = false;
    fs::create_directories("io_test_tmp/pipeline");
    if (!wrote_phantom) {
        write_scatterers_csv("io_test_tmp/pipeline/pins.csv", {{0.0, 10e-3, 1.0}, {2e-3, 14e-3, 0.8}});
        wrote_phantom = true;
    }
    ExperimentConfig config;
    config.n_elements = 8;
    config.code_bits = 2;
    config.r_v = 10e-3;
    config.max_depth = 20e-3;
    config.noise_power = 1e-4;
    config.seed = 5;
    config.phantom_preset.clear();
    config.phantom_file = "io_test_tmp/pipeline/pins.csv";
    config.out_dir = out_dir;
    return config;
}

bool has_file(const RunArtifacts& artifacts, const std::string& name) {
    return std::find(artifacts.files.begin(), artifacts.files.end(), name) != artifacts.files.end();
}

}  // namespace

TEST_CASE("a diverging-wave run writes two RF frames and the full artifact set") {
    const auto config = tiny_config("io_test_tmp/pipeline/dw");
    fs::remove_all(config.out_dir);
    const auto artifacts = run_pipeline(config);

    REQUIRE(frame_names(config).size() == 2);
    for (const auto* name : {"rf_seq_a.bin", "rf_seq_b.bin", "mf_combined.bin", "env_lines.csv",
                             "log_lines.csv", "image.pgm", "signal_strength.csv"}) {
        REQUIRE(has_file(artifacts, name));
        REQUIRE(fs::exists(fs::path(config.out_dir) / name));
    }
    REQUIRE(fs::exists(artifacts.manifest_path));

    const auto manifest = detail::read_file_bytes(artifacts.manifest_path);
    for (const auto& name : artifacts.files) REQUIRE(manifest.find(name) != std::string::npos);
}

TEST_CASE("identical configs and seeds produce byte-identical manifests") {
    auto config = tiny_config("io_test_tmp/pipeline/det1");
    fs::remove_all(config.out_dir);
    const auto first = run_pipeline(config);

    config.out_dir = "io_test_tmp/pipeline/det2";
    fs::remove_all(config.out_dir);
    const auto second = run_pipeline(config);
    REQUIRE(detail::read_file_bytes(first.manifest_path) == detail::read_file_bytes(second.manifest_path));

    config.out_dir = "io_test_tmp/pipeline/det3";
    config.seed = 77;
    fs::remove_all(config.out_dir);
    const auto reseeded = run_pipeline(config);
    REQUIRE(detail::read_file_bytes(first.manifest_path) != detail::read_file_bytes(reseeded.manifest_path));
}

TEST_CASE("pipeline artifacts round-trip byte for byte") {
    const auto config = tiny_config("io_test_tmp/pipeline/rt");
    fs::remove_all(config.out_dir);
    run_pipeline(config);

    const auto env_path = config.out_dir + "/env_lines.csv";
    write_scanlines_csv(config.out_dir + "/env_again.csv", read_scanlines_csv(env_path));
    REQUIRE(detail::read_file_bytes(env_path) == detail::read_file_bytes(config.out_dir + "/env_again.csv"));

    const auto rf_path = config.out_dir + "/rf_seq_a.bin";
    write_rf_frame(config.out_dir + "/rf_again.bin", read_rf_frame(rf_path));
    REQUIRE(detail::read_file_bytes(rf_path) == detail::read_file_bytes(config.out_dir + "/rf_again.bin"));
}

TEST_CASE("the synthetic aperture scheme emits one frame and correlator output per element") {
    auto config = tiny_config("io_test_tmp/pipeline/sta");
    config.scheme = Scheme::sta;
    config.code_bits = 1;
    config.n_elements = 6;
    fs::remove_all(config.out_dir);

    REQUIRE(frame_names(config).size() == 6);
    const auto artifacts = run_pipeline(config);
    std::size_t rf = 0, mf = 0;
    for (const auto& name : artifacts.files) {
        rf += name.rfind("rf_tx_", 0) == 0;
        mf += name.rfind("mf_tx_", 0) == 0;
    }
    REQUIRE(rf == 6);
    REQUIRE(mf == 6);
}

TEST_CASE("the focused scheme emits one frame per planned beam") {
    auto config = tiny_config("io_test_tmp/pipeline/csf");
    config.scheme = Scheme::csf;
    config.code_bits = 1;
    config.n_elements = 6;
    config.max_depth = 15e-3;
    fs::remove_all(config.out_dir);

    REQUIRE(frame_names(config).size() == 181);
    const auto artifacts = run_pipeline(config);
    std::size_t rf = 0;
    for (const auto& name : artifacts.files) rf += name.rfind("rf_beam_", 0) == 0;
    REQUIRE(rf == 181);
    REQUIRE(has_file(artifacts, "env_lines.csv"));
    REQUIRE_FALSE(has_file(artifacts, "mf_combined.bin"));
}

TEST_CASE("the rendered image reaches full scale at the dynamic range top") {
    const auto config = tiny_config("io_test_tmp/pipeline/render");
    fs::remove_all(config.out_dir);
    run_pipeline(config);
    const auto pgm = read_pgm(config.out_dir + "/image.pgm");
    REQUIRE(*std::max_element(pgm.pixels.begin(), pgm.pixels.end()) == 255);
}

TEST_CASE("beamforming rejects a frame count that does not match the scheme") {
    const auto config = tiny_config("io_test_tmp/pipeline/mismatch");
    const auto frames = simulate_frames(config);
    REQUIRE_THROWS_AS(beamform_frames(config, {frames[0]}), std::invalid_argument);
}

TEST_CASE("profiles skip scatterers outside the image and dense phantoms entirely") {
    const auto config = tiny_config("io_test_tmp/pipeline/profile");
    const auto frames = simulate_frames(config);
    const auto result = beamform_frames(config, frames);

    const auto profile = measured_profile(config, result.envelope_lines);
    REQUIRE(profile.pins.size() == 1);
    REQUIRE(profile.pins[0].x == 0.0);

    auto dense = config;
    std::vector<Scatterer> many;
    for (int k = 0; k < 80; ++k) many.push_back({0.0, 5e-3 + k * 0.1e-3, 1.0});
    write_scatterers_csv("io_test_tmp/pipeline/many.csv", many);
    dense.phantom_file = "io_test_tmp/pipeline/many.csv";
    REQUIRE(measured_profile(dense, result.envelope_lines).pins.empty());
}
