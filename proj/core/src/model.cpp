#include "ptrap/model.hpp"

#include <cmath>

#include "ptrap/error.hpp"

namespace ptrap {

std::string_view to_string(Axis a) noexcept {
    switch (a) {
    case Axis::x: return "x";
    case Axis::y: return "y";
    case Axis::z: return "z";
    }
    return "?";
}

Axis parse_axis(std::string_view s) {
    if (s == "x") return Axis::x;
    if (s == "y") return Axis::y;
    if (s == "z") return Axis::z;
    throw PreconditionError("unknown axis '" + std::string(s) + "' (expected x, y or z)");
}

std::string_view to_string(FilamentOrientation o) noexcept {
    return o == FilamentOrientation::along_x ? "x" : "y";
}

FilamentOrientation parse_filament_orientation(std::string_view s) {
    if (s == "x") return FilamentOrientation::along_x;
    if (s == "y") return FilamentOrientation::along_y;
    throw PreconditionError("unknown filament orientation '" + std::string(s) + "' (expected x or y)");
}

void IonSpecies::validate() const {
    if (!(mass > 0.0) || !std::isfinite(mass)) throw PreconditionError("ion mass must be positive");
    if (charge == 0.0 || !std::isfinite(charge)) throw PreconditionError("ion charge must be non-zero");
}

IonSpecies IonSpecies::from_atomic_mass(std::string label, double mass_u, int charge_state) {
    IonSpecies ion{mass_u * PhysicalConstants::atomic_mass_unit,
                   charge_state * PhysicalConstants::elementary_charge, std::move(label)};
    ion.validate();
    return ion;
}

// Atomic masses from AME2020.
IonSpecies IonSpecies::europium151() { return from_atomic_mass("Eu-151", 150.9198578); }
IonSpecies IonSpecies::europium153() { return from_atomic_mass("Eu-153", 152.9212380); }

IonSpecies species_by_name(std::string_view name) {
    if (name == "Eu-151" || name == "Eu151") return IonSpecies::europium151();
    if (name == "Eu-153" || name == "Eu153") return IonSpecies::europium153();
    throw PreconditionError("unknown ion species '" + std::string(name) + "'");
}

void TrapGeometry::validate() const {
    if (!(r0 > 0.0)) throw PreconditionError("r0 must be positive");
    if (!(z0 > 0.0)) throw PreconditionError("z0 must be positive");
    if (!(truncation_radius > 0.0)) throw PreconditionError("truncation radius must be positive");
    if (filament) {
        const auto& f = *filament;
        if (!(f.length > 0.0 && f.width > 0.0 && f.thickness > 0.0))
            throw PreconditionError("filament extents must be positive");
        if (!(f.height_above_lower_endcap >= 0.0 && f.height_above_lower_endcap < z0))
            throw PreconditionError("filament height must lie in [0, z0)");
    }
}

Electrode TrapGeometry::electrode_at(double x, double y, double z) const noexcept {
    if (filament) {
        const auto& f = *filament;
        const double zc = -z0 + f.height_above_lower_endcap;
        if (std::abs(x - f.lateral_offset_x) <= f.half_extent_x() && std::abs(y) <= f.half_extent_y()
            && std::abs(z - zc) <= 0.5 * f.thickness)
            return Electrode::filament;
    }
    const double rho2 = x * x + y * y;
    if (rho2 > truncation_radius * truncation_radius) return Electrode::none;
    const double r02 = r0 * r0;
    // z0 enters through the cap asymptote: 2 z^2 - rho^2 = 2 z0^2 on the cap.
    if (z * z - 0.5 * rho2 >= z0 * z0) return z > 0.0 ? Electrode::upper_cap : Electrode::lower_cap;
    if (rho2 - 2.0 * z * z >= r02) return Electrode::ring;
    return Electrode::none;
}

double TrapGeometry::potential_of(Electrode e) const noexcept {
    switch (e) {
    case Electrode::ring: return potentials.ring;
    case Electrode::upper_cap:
    case Electrode::lower_cap: return potentials.endcap;
    case Electrode::filament: return potentials.filament;
    case Electrode::none: break;
    }
    return 0.0;
}

double TrapGeometry::filament_intrusion() const noexcept {
    if (!filament) return 0.0;
    return filament->height_above_lower_endcap + 0.5 * filament->thickness;
}

TrapGeometry TrapGeometry::ideal(double r0) {
    TrapGeometry g;
    g.r0 = r0;
    g.z0 = r0 / std::sqrt(2.0);
    g.truncation_radius = 2.0 * r0;
    return g;
}

TrapGeometry make_paper_trap() {
    TrapGeometry g = TrapGeometry::ideal(0.020);
    g.filament = FilamentConfig{};
    return g;
}

void OperatingPoint::validate() const {
    if (!(drive_angular_frequency > 0.0) || !std::isfinite(drive_angular_frequency))
        throw PreconditionError("drive angular frequency must be positive");
    if (!std::isfinite(u_dc) || !std::isfinite(v_rf))
        throw PreconditionError("operating point voltages must be finite");
}

OperatingPoint OperatingPoint::at_hz(double u_dc, double v_rf, double drive_hz) {
    return OperatingPoint{u_dc, v_rf, 2.0 * kPi * drive_hz};
}

double instantaneous_ring_potential(const OperatingPoint& op, double t) noexcept {
    return op.u_dc + op.v_rf * std::cos(op.drive_angular_frequency * t);
}

}  // namespace ptrap
