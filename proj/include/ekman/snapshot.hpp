#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "ekman/errors.hpp"
#include "ekman/field.hpp"

namespace ekman {

// Snapshot file layout (all little-endian):
//   "VORT" | u32 version=1 | u32 N | f64 time | N*N f64 grid values, row-major
namespace snapshot {

static_assert(std::endian::native == std::endian::little,
              "snapshot I/O assumes a little-endian host");

inline constexpr char magic[4] = {'V', 'O', 'R', 'T'};
inline constexpr std::uint32_t version = 1;

inline void write(const std::string& path, const ScalarField& field, double time) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("snapshot: cannot open '" + path + "' for writing");
    out.write(magic, 4);
    const std::uint32_t ver = version;
    const std::uint32_t n = static_cast<std::uint32_t>(field.n());
    out.write(reinterpret_cast<const char*>(&ver), 4);
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&time), 8);
    const auto& v = field.values();
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!out) throw config_error("snapshot: write failed for '" + path + "'");
}

struct Loaded {
    ScalarField field;
    double time = 0.0;
};

inline Loaded read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("snapshot: cannot open '" + path + "'");
    char m[4];
    std::uint32_t ver = 0, n = 0;
    double time = 0.0;
    in.read(m, 4);
    in.read(reinterpret_cast<char*>(&ver), 4);
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&time), 8);
    if (!in || std::memcmp(m, magic, 4) != 0)
        throw config_error("snapshot: bad magic in '" + path + "'");
    if (ver != version)
        throw config_error("snapshot: unsupported version " + std::to_string(ver));
    const FourierGrid grid = make_grid(static_cast<int>(n));
    std::vector<double> values(static_cast<std::size_t>(n) * n);
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!in) throw config_error("snapshot: truncated file '" + path + "'");
    return Loaded{ScalarField::from_grid(grid, std::move(values)), time};
}

} // namespace snapshot
} // namespace ekman
