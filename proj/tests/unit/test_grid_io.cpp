#include <filesystem>

#include <gtest/gtest.h>

#include "ptrap/error.hpp"
#include "ptrap/grid_io.hpp"

using namespace ptrap;

namespace {

PotentialGrid small_grid() {
    const ElectrodeMask m = discretize_geometry(TrapGeometry::ideal(0.020), GridSpec{33, 35, 37, 0.030});
    return make_synthetic_grid(m, [](double x, double y, double z) { return 0.25 + x * 3.0 - y * y + z; });
}

}  // namespace

TEST(GridIo, RoundTripIsExact) {
    const PotentialGrid g = small_grid();
    const std::string bytes = encode_grid(g);
    EXPECT_EQ(bytes.size(), 36 + 9 * g.values.size());
    EXPECT_EQ(bytes.substr(0, 8), "PTGRID01");
    const PotentialGrid back = decode_grid(bytes);
    EXPECT_EQ(back.spec().nx, 33u);
    EXPECT_EQ(back.spec().ny, 35u);
    EXPECT_EQ(back.spec().nz, 37u);
    EXPECT_EQ(back.spec().extent, 0.030);
    EXPECT_EQ(back.mask.r0, 0.020);
    EXPECT_EQ(back.values, g.values);
    EXPECT_EQ(back.mask.classes, g.mask.classes);
    EXPECT_EQ(back.mask.fixed_potential[static_cast<int>(NodeClass::ring)], 1.0);
}

TEST(GridIo, HeaderIsLittleEndian) {
    const std::string bytes = encode_grid(small_grid());
    EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 33);
    EXPECT_EQ(static_cast<unsigned char>(bytes[9]), 0);
    EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 35);
}

TEST(GridIo, RejectsMalformedInput) {
    std::string bytes = encode_grid(small_grid());
    EXPECT_THROW(decode_grid(bytes.substr(0, bytes.size() - 1)), Error);
    EXPECT_THROW(decode_grid("PTGRID0"), Error);
    bytes[0] = 'X';
    EXPECT_THROW(decode_grid(bytes), Error);
}

TEST(GridIo, FileRoundTripAndProfiles) {
    const auto dir = std::filesystem::temp_directory_path() / "ptrap_grid_io_test";
    std::filesystem::remove_all(dir);
    const PotentialGrid g = small_grid();
    write_grid_dump(dir / "g.ptgrid", g);
    EXPECT_FALSE(std::filesystem::exists(dir / "g.ptgrid.tmp"));
    EXPECT_EQ(read_grid_dump(dir / "g.ptgrid").values, g.values);
    const std::string csv = axis_profiles_csv(g);
    EXPECT_EQ(csv.rfind("axis,coordinate_m,potential,node_class\n", 0), 0u);
    std::size_t rows = 0;
    for (char c : csv) rows += c == '\n';
    EXPECT_EQ(rows, 1u + 33 + 35 + 37);
    std::filesystem::remove_all(dir);
}
