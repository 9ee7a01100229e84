#include "ptrap/grid_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>

#include "ptrap/error.hpp"
#include "ptrap/io.hpp"

namespace ptrap {

namespace {

constexpr char kMagic[8] = {'P', 'T', 'G', 'R', 'I', 'D', '0', '1'};
constexpr std::size_t kHeaderSize = 8 + 3 * 4 + 2 * 8;

template <typename U>
void put_le(std::string& out, U v) {
    for (std::size_t b = 0; b < sizeof(U); ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}

template <typename U>
U get_le(const unsigned char* p) {
    U v = 0;
    for (std::size_t b = 0; b < sizeof(U); ++b) v |= static_cast<U>(p[b]) << (8 * b);
    return v;
}

void put_f64(std::string& out, double d) { put_le(out, std::bit_cast<std::uint64_t>(d)); }
double get_f64(const unsigned char* p) { return std::bit_cast<double>(get_le<std::uint64_t>(p)); }

}  // namespace

std::string encode_grid(const PotentialGrid& grid) {
    const GridSpec& s = grid.spec();
    const std::size_t n = s.node_count();
    std::string out;
    out.reserve(kHeaderSize + 9 * n);
    out.append(kMagic, sizeof kMagic);
    put_le(out, static_cast<std::uint32_t>(s.nx));
    put_le(out, static_cast<std::uint32_t>(s.ny));
    put_le(out, static_cast<std::uint32_t>(s.nz));
    put_f64(out, s.extent);
    put_f64(out, grid.mask.r0);
    for (double v : grid.values) put_f64(out, v);
    for (NodeClass c : grid.mask.classes) out.push_back(static_cast<char>(c));
    return out;
}

PotentialGrid decode_grid(std::string_view bytes) {
    if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
        throw Error("not a PTGRID01 dump (bad magic)");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    GridSpec s;
    s.nx = get_le<std::uint32_t>(p + 8);
    s.ny = get_le<std::uint32_t>(p + 12);
    s.nz = get_le<std::uint32_t>(p + 16);
    s.extent = get_f64(p + 20);
    const double r0 = get_f64(p + 28);
    const std::size_t n = s.node_count();
    if (n == 0 || bytes.size() != kHeaderSize + 9 * n)
        throw Error("PTGRID01 dump size does not match its header");

    PotentialGrid grid;
    grid.mask.spec = s;
    grid.mask.r0 = r0;
    grid.values.resize(n);
    grid.mask.classes.resize(n);
    const unsigned char* vals = p + kHeaderSize;
    const unsigned char* cls = vals + 8 * n;
    std::array<bool, kNodeClassCount> seen{};
    for (std::size_t i = 0; i < n; ++i) {
        grid.values[i] = get_f64(vals + 8 * i);
        if (cls[i] >= kNodeClassCount) throw Error("PTGRID01 dump has an invalid node class");
        const auto c = static_cast<NodeClass>(cls[i]);
        grid.mask.classes[i] = c;
        if (c != NodeClass::free && !seen[cls[i]]) {
            seen[cls[i]] = true;
            grid.mask.fixed_potential[cls[i]] = grid.values[i];
        }
    }
    return grid;
}

void write_grid_dump(const std::filesystem::path& path, const PotentialGrid& grid) {
    write_file_atomic(path, encode_grid(grid));
}

PotentialGrid read_grid_dump(const std::filesystem::path& path) { return decode_grid(read_file(path)); }

std::string axis_profiles_csv(const PotentialGrid& grid) {
    const GridSpec& s = grid.spec();
    const std::size_t ci = s.nx / 2, cj = s.ny / 2, ck = s.nz / 2;
    std::string out = "axis,coordinate_m,potential,node_class\n";
    char buf[128];
    const auto row = [&](Axis a, std::size_t i, std::size_t j, std::size_t k, std::size_t along) {
        const int len = std::snprintf(buf, sizeof buf, "%s,%.9e,%.12e,%d\n", std::string(to_string(a)).c_str(),
                                      s.coordinate(a, along), grid.at(i, j, k), static_cast<int>(grid.mask.at(i, j, k)));
        out.append(buf, static_cast<std::size_t>(len));
    };
    for (std::size_t i = 0; i < s.nx; ++i) row(Axis::x, i, cj, ck, i);
    for (std::size_t j = 0; j < s.ny; ++j) row(Axis::y, ci, j, ck, j);
    for (std::size_t k = 0; k < s.nz; ++k) row(Axis::z, ci, cj, k, k);
    return out;
}

}  // namespace ptrap
