#include "spdelab/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace spdelab {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

void append_escaped(std::string& out, const std::string& s) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

void dump_rec(const json& j, std::string& out, int depth) {
    const std::string pad(2 * static_cast<std::size_t>(depth), ' ');
    const std::string pad_in(2 * static_cast<std::size_t>(depth + 1), ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad_in;
                append_escaped(out, it.key());
                out += ": ";
                dump_rec(it.value(), out, depth + 1);
            }
            out += "\n" + pad + "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            bool first = true;
            for (const auto& el : j) {
                if (!first) out += ",\n";
                first = false;
                out += pad_in;
                dump_rec(el, out, depth + 1);
            }
            out += "\n" + pad + "]";
            return;
        }
        case json::value_t::string:
            append_escaped(out, j.get<std::string>());
            return;
        case json::value_t::boolean:
            out += j.get<bool>() ? "true" : "false";
            return;
        case json::value_t::number_integer:
            out += std::to_string(j.get<std::int64_t>());
            return;
        case json::value_t::number_unsigned:
            out += std::to_string(j.get<std::uint64_t>());
            return;
        case json::value_t::number_float: {
            const double v = j.get<double>();
            if (std::isnan(v)) {
                out += "\"nan\"";
            } else if (std::isinf(v)) {
                out += v > 0 ? "\"inf\"" : "\"-inf\"";
            } else {
                out += format_g17(v);
            }
            return;
        }
        case json::value_t::null:
        default:
            out += "null";
            return;
    }
}

}  // namespace

std::string dump_json_17(const json& j) {
    std::string out;
    dump_rec(j, out, 0);
    out += '\n';
    return out;
}

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for hashing: " + p.string());
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        const std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

void write_text_file(const std::filesystem::path& p, const std::string& content) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << content;
}

void write_snapshots(const std::filesystem::path& p, const GalerkinSpace& space,
                     std::span<const SpectralField> fields) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out.write("SPDE1", 5);
    const std::uint32_t n = static_cast<std::uint32_t>(space.modes());
    const std::uint32_t m = static_cast<std::uint32_t>(space.grid_size());
    const double length = space.length(), gamma = space.gamma();
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&m), 4);
    out.write(reinterpret_cast<const char*>(&length), 8);
    out.write(reinterpret_cast<const char*>(&gamma), 8);
    for (const auto& f : fields)
        out.write(reinterpret_cast<const char*>(f.coeffs().data()),
                  static_cast<std::streamsize>(f.coeffs().size() * 8));
}

SnapshotFile read_snapshots(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    char magic[5];
    in.read(magic, 5);
    if (!in || std::memcmp(magic, "SPDE1", 5) != 0)
        throw std::runtime_error("bad snapshot magic in " + p.string());
    SnapshotFile f;
    std::uint32_t n = 0, m = 0;
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&m), 4);
    in.read(reinterpret_cast<char*>(&f.length), 8);
    in.read(reinterpret_cast<char*>(&f.gamma), 8);
    f.modes = static_cast<int>(n);
    f.grid_size = static_cast<int>(m);
    while (in) {
        std::vector<double> rec(n);
        in.read(reinterpret_cast<char*>(rec.data()), static_cast<std::streamsize>(8ull * n));
        if (in.gcount() == 0) break;
        if (in.gcount() != static_cast<std::streamsize>(8ull * n))
            throw std::runtime_error("truncated snapshot record in " + p.string());
        f.records.push_back(std::move(rec));
    }
    return f;
}

}  // namespace spdelab
