#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "spdelab/io.hpp"
#include "spdelab/spectral.hpp"

using namespace spdelab;

namespace {

std::filesystem::path temp_path(const std::string& tag) {
    static int counter = 0;
    return std::filesystem::temp_directory_path() /
           ("spdelab_io_" + std::to_string(::getpid()) + "_" + tag + "_" +
            std::to_string(counter++));
}

std::uint64_t hash_string(const std::string& s) {
    return fnv1a64({reinterpret_cast<const unsigned char*>(s.data()), s.size()});
}

struct Cleanup {
    std::filesystem::path path;
    ~Cleanup() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("seventeen significant digits reproduce every double exactly") {
    const double values[] = {0.0,
                             -0.0,
                             1.0,
                             0.1,
                             1.0 / 3.0,
                             std::numbers::pi,
                             6.02214076e23,
                             -123456789.123456789,
                             std::pow(2.0, -53),
                             5e-324,
                             std::numeric_limits<double>::max(),
                             std::numeric_limits<double>::min()};
    for (double v : values) {
        const std::string s = format_g17(v);
        const double back = std::strtod(s.c_str(), nullptr);
        CHECK(std::memcmp(&back, &v, sizeof v) == 0);
    }
    CHECK(format_g17(1.0) == "1");
    CHECK(format_g17(0.5) == "0.5");
    CHECK(format_g17(-0.0) == "-0");
}

TEST_CASE("fnv1a64 matches the published test vectors") {
    CHECK(fnv1a64({}) == 0xcbf29ce484222325ull);
    CHECK(hash_string("a") == 0xaf63dc4c8601ec8cull);
    CHECK(hash_string("foobar") == 0x85944171f73967e8ull);

    const auto p = temp_path("hash");
    Cleanup guard{p};
    write_text_file(p, "foobar");
    CHECK(fnv1a64_file(p) == hash_string("foobar"));

    CHECK_THROWS_AS(fnv1a64_file(temp_path("missing")), std::runtime_error);
}

TEST_CASE("json dumps are canonical") {
    json j;
    j["b"] = 1;
    j["a"] = 0.1;
    j["arr"] = json::array({1.5, "x", true});
    j["nested"] = json{{"k", nullptr}};

    const std::string expected =
        "{\n"
        "  \"a\": 0.10000000000000001,\n"
        "  \"arr\": [\n"
        "    1.5,\n"
        "    \"x\",\n"
        "    true\n"
        "  ],\n"
        "  \"b\": 1,\n"
        "  \"nested\": {\n"
        "    \"k\": null\n"
        "  }\n"
        "}\n";
    CHECK(dump_json_17(j) == expected);

    // Insertion order must not leak into the output.
    json k;
    k["nested"] = json{{"k", nullptr}};
    k["arr"] = json::array({1.5, "x", true});
    k["a"] = 0.1;
    k["b"] = 1;
    CHECK(dump_json_17(k) == expected);

    CHECK(dump_json_17(json::object()) == "{}\n");
    CHECK(dump_json_17(json::array()) == "[]\n");

    json nf;
    nf["pos"] = std::numeric_limits<double>::infinity();
    nf["neg"] = -std::numeric_limits<double>::infinity();
    nf["bad"] = std::nan("");
    const std::string text = dump_json_17(nf);
    CHECK(text.find("\"pos\": \"inf\"") != std::string::npos);
    CHECK(text.find("\"neg\": \"-inf\"") != std::string::npos);
    CHECK(text.find("\"bad\": \"nan\"") != std::string::npos);

    json esc;
    esc["quote\"back\\slash"] = "line\nbreak\ttab\rret";
    esc["ctl"] = std::string(1, '\x01');
    const std::string et = dump_json_17(esc);
    CHECK(et.find("\"quote\\\"back\\\\slash\"") != std::string::npos);
    CHECK(et.find("\"line\\nbreak\\ttab\\rret\"") != std::string::npos);
    CHECK(et.find("\\u0001") != std::string::npos);
}

TEST_CASE("snapshot files round-trip coefficients exactly") {
    auto space = make_space(1.5, 3, 16, 0.3);
    const std::vector<SpectralField> fields = {
        SpectralField(space, {0.25, -0.125, 1e-9}),
        SpectralField(space, {-3.5, 0.0, 42.0}),
    };

    const auto p = temp_path("snap");
    Cleanup guard{p};
    write_snapshots(p, *space, fields);

    // Header (5 + 4 + 4 + 8 + 8) plus two records of three doubles.
    CHECK(std::filesystem::file_size(p) == 29 + 2 * 3 * 8);

    const auto f = read_snapshots(p);
    CHECK(f.modes == 3);
    CHECK(f.grid_size == 16);
    CHECK(f.length == 1.5);
    CHECK(f.gamma == 0.3);
    REQUIRE(f.records.size() == 2);
    CHECK(f.records[0] == std::vector<double>{0.25, -0.125, 1e-9});
    CHECK(f.records[1] == std::vector<double>{-3.5, 0.0, 42.0});

    // Identical writes yield identical bytes.
    const auto p2 = temp_path("snap2");
    Cleanup guard2{p2};
    write_snapshots(p2, *space, fields);
    CHECK(fnv1a64_file(p) == fnv1a64_file(p2));
}

TEST_CASE("snapshot reader rejects malformed files") {
    CHECK_THROWS_AS(read_snapshots(temp_path("gone")), std::runtime_error);

    const auto bad = temp_path("badmagic");
    Cleanup guard{bad};
    write_text_file(bad, "XYZ99 not a snapshot");
    CHECK_THROWS_WITH_AS(read_snapshots(bad),
                         doctest::Contains("bad snapshot magic"), std::runtime_error);

    auto space = make_space(1.0, 2, 8, 0.3);
    const std::vector<SpectralField> fields = {SpectralField(space, {1.0, 2.0})};
    const auto cut = temp_path("truncated");
    Cleanup guard2{cut};
    write_snapshots(cut, *space, fields);
    std::filesystem::resize_file(cut, std::filesystem::file_size(cut) - 8);
    CHECK_THROWS_WITH_AS(read_snapshots(cut),
                         doctest::Contains("truncated snapshot record"), std::runtime_error);
}

TEST_CASE("text writer creates missing directories") {
    const auto root = temp_path("tree");
    Cleanup guard{root};
    const auto deep = root / "a" / "b" / "c.txt";
    write_text_file(deep, "payload\n");

    std::ifstream in(deep, std::ios::binary);
    REQUIRE(in.good());
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    CHECK(content == "payload\n");
    CHECK(fnv1a64_file(deep) == hash_string("payload\n"));
}
