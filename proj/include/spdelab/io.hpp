#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "spdelab/spectral.hpp"

namespace spdelab {

using json = nlohmann::json;

// All floating output goes through one formatter (17 significant digits) so
// identical runs produce identical bytes.
std::string format_g17(double v);

// Deterministic JSON text: keys in map order (sorted), doubles via format_g17,
// two-space indentation. Non-finite doubles become the strings "inf"/"-inf"/"nan".
std::string dump_json_17(const json& j);

std::uint64_t fnv1a64(std::span<const unsigned char> bytes);
std::uint64_t fnv1a64_file(const std::filesystem::path& p);

void write_text_file(const std::filesystem::path& p, const std::string& content);

// Binary snapshot container: magic "SPDE1", u32 modes, u32 grid_size, f64
// length, f64 gamma, then row-major records of `modes` doubles each.
// Little-endian, native doubles.
void write_snapshots(const std::filesystem::path& p, const GalerkinSpace& space,
                     std::span<const SpectralField> fields);

struct SnapshotFile {
    int modes = 0;
    int grid_size = 0;
    double length = 0.0;
    double gamma = 0.0;
    std::vector<std::vector<double>> records;
};

SnapshotFile read_snapshots(const std::filesystem::path& p);

}  // namespace spdelab
