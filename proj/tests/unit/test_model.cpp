#include <cmath>

#include <gtest/gtest.h>

#include "ptrap/error.hpp"
#include "ptrap/model.hpp"

using namespace ptrap;

TEST(Model, PaperTrapDimensions) {
    const TrapGeometry g = make_paper_trap();
    EXPECT_DOUBLE_EQ(g.r0, 0.020);
    EXPECT_NEAR(g.z0, 0.0141421356, 1e-9);
    EXPECT_NEAR(g.r0 / g.z0, std::sqrt(2.0), 1e-12 * std::sqrt(2.0));
    ASSERT_TRUE(g.filament.has_value());
    EXPECT_DOUBLE_EQ(g.filament->height_above_lower_endcap, 0.005);
    EXPECT_DOUBLE_EQ(g.filament->lateral_offset_x, 0.006);
    EXPECT_DOUBLE_EQ(g.filament->length, 0.022);
    EXPECT_DOUBLE_EQ(g.filament->width, 0.008);
    EXPECT_DOUBLE_EQ(g.potentials.ring, 1.0);
    EXPECT_DOUBLE_EQ(g.potentials.endcap, 0.0);
    EXPECT_DOUBLE_EQ(g.potentials.filament, 0.0);
}

TEST(Model, RemovingFilamentKeepsTheRest) {
    const TrapGeometry full = make_paper_trap();
    TrapGeometry bare = full;
    bare.filament.reset();
    EXPECT_FALSE(bare.filament.has_value());
    EXPECT_EQ(bare.r0, full.r0);
    EXPECT_EQ(bare.z0, full.z0);
    EXPECT_EQ(bare.truncation_radius, full.truncation_radius);
    EXPECT_DOUBLE_EQ(bare.filament_intrusion(), 0.0);
}

TEST(Model, RingPotentialExamples) {
    const OperatingPoint op = OperatingPoint::at_hz(-5.3, 700.0, 500e3);
    EXPECT_NEAR(instantaneous_ring_potential(op, 0.0), 694.7, 1e-12);
    EXPECT_NEAR(instantaneous_ring_potential(op, kPi / op.drive_angular_frequency), -705.3, 1e-9);
    const OperatingPoint op2 = OperatingPoint::at_hz(21.75, 550.0, 500e3);
    EXPECT_NEAR(instantaneous_ring_potential(op2, 0.25 * op2.rf_period()), 21.75, 1e-9);
}

TEST(Model, RingPotentialIsPeriodic) {
    const OperatingPoint op = OperatingPoint::at_hz(3.0, 400.0, 500e3);
    for (double t : {0.0, 1.3e-7, 7.7e-7, 1.9e-6}) {
        const double a = instantaneous_ring_potential(op, t);
        const double b = instantaneous_ring_potential(op, t + op.rf_period());
        EXPECT_NEAR(a, b, 1e-12 * 400.0);
    }
}

TEST(Model, IonSpecies) {
    const IonSpecies eu151 = IonSpecies::europium151();
    const IonSpecies eu153 = IonSpecies::europium153();
    EXPECT_NEAR(eu151.mass / PhysicalConstants::atomic_mass_unit, 150.9199, 1e-4);
    EXPECT_NEAR(eu153.mass / PhysicalConstants::atomic_mass_unit, 152.9212, 1e-4);
    EXPECT_DOUBLE_EQ(eu151.charge, PhysicalConstants::elementary_charge);
    EXPECT_EQ(species_by_name("Eu-153").label, "Eu-153");
    EXPECT_THROW(species_by_name("Xe-131"), PreconditionError);
    EXPECT_THROW(IonSpecies::from_atomic_mass("bad", -1.0), PreconditionError);
    IonSpecies neutral = eu151;
    neutral.charge = 0.0;
    EXPECT_THROW(neutral.validate(), PreconditionError);
}

TEST(Model, ElectrodeClassification) {
    const TrapGeometry g = TrapGeometry::ideal(0.020);
    EXPECT_EQ(g.electrode_at(0, 0, 0), Electrode::none);
    EXPECT_EQ(g.electrode_at(0, 0, 0.0145), Electrode::upper_cap);
    EXPECT_EQ(g.electrode_at(0, 0, -0.0145), Electrode::lower_cap);
    EXPECT_EQ(g.electrode_at(0.0205, 0, 0), Electrode::ring);
    EXPECT_EQ(g.electrode_at(0, -0.0205, 0), Electrode::ring);
    EXPECT_EQ(g.electrode_at(0.019, 0, 0), Electrode::none);
    // beyond the truncation radius nothing is an electrode
    EXPECT_EQ(g.electrode_at(0.045, 0, 0), Electrode::none);
}

TEST(Model, FilamentSlabOccupancy) {
    const TrapGeometry g = make_paper_trap();
    const double zc = -g.z0 + 0.005;
    EXPECT_EQ(g.electrode_at(0.006, 0.0, zc), Electrode::filament);
    // long side runs along y by default
    EXPECT_EQ(g.electrode_at(0.006, 0.010, zc), Electrode::filament);
    EXPECT_EQ(g.electrode_at(0.0115, 0.0, zc), Electrode::none);
    EXPECT_EQ(g.electrode_at(0.006, 0.0, zc + 0.0003), Electrode::none);

    TrapGeometry gx = g;
    gx.filament->orientation = FilamentOrientation::along_x;
    EXPECT_EQ(gx.electrode_at(0.016, 0.0, zc), Electrode::filament);
    EXPECT_EQ(gx.electrode_at(0.006, 0.010, zc), Electrode::none);
    EXPECT_NEAR(g.filament_intrusion(), 0.00525, 1e-15);
}

TEST(Model, GeometryValidation) {
    TrapGeometry g = make_paper_trap();
    EXPECT_NO_THROW(g.validate());
    g.filament->height_above_lower_endcap = g.z0;
    EXPECT_THROW(g.validate(), PreconditionError);
    g = make_paper_trap();
    g.filament->width = 0.0;
    EXPECT_THROW(g.validate(), PreconditionError);
    g = make_paper_trap();
    g.r0 = -1.0;
    EXPECT_THROW(g.validate(), PreconditionError);
}

TEST(Model, ParsersRejectUnknownNames) {
    EXPECT_EQ(parse_axis("y"), Axis::y);
    EXPECT_THROW(parse_axis("w"), PreconditionError);
    EXPECT_EQ(parse_filament_orientation("x"), FilamentOrientation::along_x);
    EXPECT_THROW(parse_filament_orientation("diagonal"), PreconditionError);
}

TEST(Model, OperatingPointValidation) {
    EXPECT_THROW((OperatingPoint{0.0, 100.0, 0.0}.validate()), PreconditionError);
    EXPECT_NO_THROW((OperatingPoint{0.0, 100.0, 1.0}.validate()));
}
