#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "burgers/io.hpp"
#include "burgers/scenarios.hpp"
#include "burgers/vortex.hpp"

using namespace burgers;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("burgers_io_test_" + std::to_string(::getpid())) / name;
    fs::create_directories(p.parent_path());
    return p;
}

}  // namespace

TEST(Snapshot, RoundTrip2D) {
    const Grid2D g(12.0, 16);
    Field2D f = gaussian_profile(0.2).sample(g);
    const fs::path p = scratch("f2.bin");
    io::write_field(p, f);
    Field2D r = io::read_field2d(p, g);
    EXPECT_EQ(r.values(), f.values());
    EXPECT_FALSE(fs::exists(fs::path(p.string() + ".tmp")));
}

TEST(Snapshot, RoundTrip3D) {
    const Grid3D g(Grid2D(12.0, 16), 8.0, 4);
    SlicedField3D a(g), b(g);
    for (std::size_t q = 0; q < g.size(); ++q) {
        a.values()[q] = 0.1 * double(q);
        b.values()[q] = -1.0 / (1.0 + double(q));
    }
    const fs::path p = scratch("f3.bin");
    io::write_snapshot(p, io::to_snapshot({&a, &b}));
    auto r = io::read_fields3d(p, g, 2);
    EXPECT_EQ(r[0].values(), a.values());
    EXPECT_EQ(r[1].values(), b.values());
}

TEST(Snapshot, RejectsShapeMismatch) {
    const Grid2D g(12.0, 16);
    const fs::path p = scratch("shape.bin");
    io::write_field(p, Field2D(g));
    EXPECT_THROW(io::read_field2d(p, Grid2D(12.0, 32)), io::IoError);
    EXPECT_THROW(io::read_field2d(p, Grid2D(10.0, 16)), io::IoError);
    EXPECT_THROW(io::read_fields3d(p, Grid3D(g, 8.0, 1), 3), io::IoError);
}

TEST(Snapshot, RejectsCorruption) {
    const Grid2D g(12.0, 16);
    const fs::path p = scratch("corrupt.bin");
    io::write_field(p, gaussian_profile(0.0).sample(g));
    std::string bytes = io::read_all(p);
    {
        std::string flipped = bytes;
        flipped[flipped.size() - 20] ^= 0x5a;
        std::ofstream(p, std::ios::binary) << flipped;
        EXPECT_THROW(io::read_snapshot(p), io::IoError);
    }
    {
        std::ofstream(p, std::ios::binary) << bytes.substr(0, bytes.size() - 8);
        EXPECT_THROW(io::read_snapshot(p), io::IoError);
    }
    {
        std::ofstream(p, std::ios::binary) << "{\"format\": \"burgers-field\"\n" << bytes.substr(bytes.find('\n') + 1);
        EXPECT_THROW(io::read_snapshot(p), io::IoError);
    }
    {
        std::ofstream(p, std::ios::binary) << "garbage";
        EXPECT_THROW(io::read_snapshot(p), io::IoError);
    }
    EXPECT_THROW(io::read_snapshot(scratch("missing.bin")), io::IoError);
}

TEST(Csv, SeventeenDigits) {
    EXPECT_EQ(io::fmt(0.1), "0.10000000000000001");
    io::CsvWriter c({"a", "b"});
    c.row({1.0, 1.0 / 3.0});
    EXPECT_EQ(c.str(), "a,b\n1,0.33333333333333331\n");
    EXPECT_THROW(c.row({1.0}), io::IoError);
}

TEST(Manifest, ListsOnlyExistingOutputsAndWritesOnce) {
    const fs::path dir = scratch("run");
    fs::remove_all(dir);
    io::RunManifest m(dir, "test", io::json{{"k", 1}});
    m.save_text("a.csv", "x\n1\n");
    m.flag("ok", true);
    m.write(false);
    EXPECT_TRUE(fs::exists(dir / "manifest.json"));
    EXPECT_THROW(m.write(false), io::IoError);
    auto j = io::json::parse(io::read_all(dir / "manifest.json"));
    EXPECT_EQ(j["outputs"].size(), 1u);
    EXPECT_FALSE(j.contains("wall_clock_seconds"));

    io::RunManifest bad(scratch("run2"), "test", {});
    bad.add_output("nope.csv");
    EXPECT_THROW(bad.write(), io::IoError);
}

TEST(Config, KeyValueAndJsonAgree) {
    const std::string kv = R"(# sym-shift on the coarse tier
tier = coarse
lambda = 0
rho = 0.1
T = 2
initial.type = builtin
initial.name = sym-shift
measure.slices = 8, 16, 24
)";
    const std::string js = R"({"tier": "coarse", "lambda": 0, "rho": 0.1, "T": 2,
        "initial": {"type": "builtin", "name": "sym-shift"}, "measure": {"slices": [8, 16, 24]}})";
    StabilityConfig a = parse_stability_config(kv), b = parse_stability_config(js);
    EXPECT_EQ(a.to_json(), b.to_json());
    EXPECT_EQ(a.N_perp, 64);
    EXPECT_EQ(a.N_3, 32);
    EXPECT_DOUBLE_EQ(a.dt, 0.02);
    EXPECT_EQ(a.measure_slices, (std::vector<int>{8, 16, 24}));
}

TEST(Config, FieldLevelErrors) {
    auto msg = [](const std::string& text) {
        try {
            parse_stability_config(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    EXPECT_NE(msg("lambda = 1.2").find("lambda"), std::string::npos);
    EXPECT_NE(msg("rho = abc").find("rho"), std::string::npos);
    EXPECT_NE(msg("colour = red").find("colour"), std::string::npos);
    EXPECT_NE(msg("dt = 0.03\nT = 0.1").find("T"), std::string::npos);
    EXPECT_NE(msg("tier = huge").find("tier"), std::string::npos);
    EXPECT_NE(msg("no equals sign").find("line 1"), std::string::npos);
}

TEST(Config, BuiltinScenarios) {
    StabilityConfig e = StabilityConfig::builtin("equilibrium", "coarse");
    EXPECT_EQ(e.amplitude, 0.0);
    EXPECT_EQ(e.phi_amplitude, 0.0);
    StabilityConfig s = StabilityConfig::builtin("sym-shift");
    EXPECT_EQ(s.N_perp, 128);
    EXPECT_DOUBLE_EQ(s.phi_amplitude, 0.02);
    EXPECT_DOUBLE_EQ(s.amplitude, 0.01);
    EXPECT_THROW(StabilityConfig::builtin("nope"), ConfigError);
}
