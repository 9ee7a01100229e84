#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace ptrap {

enum class Axis { x = 0, y = 1, z = 2 };

inline constexpr std::array<Axis, 3> kAllAxes{Axis::x, Axis::y, Axis::z};

constexpr std::size_t index(Axis a) noexcept { return static_cast<std::size_t>(a); }
std::string_view to_string(Axis a) noexcept;
Axis parse_axis(std::string_view s);

using Vec3 = std::array<double, 3>;

/// CODATA 2018 exact/recommended values.
struct PhysicalConstants {
    static constexpr double elementary_charge = 1.602176634e-19;   // C (exact)
    static constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg
};

inline constexpr double kPi = 3.14159265358979323846;

struct IonSpecies {
    double mass = 0.0;    // kg
    double charge = 0.0;  // C
    std::string label;

    /// Charge-to-mass ratio Q/m.
    double specific_charge() const noexcept { return charge / mass; }
    void validate() const;

    /// Singly charged ion with an atomic mass in unified units.
    static IonSpecies from_atomic_mass(std::string label, double mass_u, int charge_state = 1);
    static IonSpecies europium151();
    static IonSpecies europium153();
};

/// Looks up a named species ("Eu-151", "Eu-153").
IonSpecies species_by_name(std::string_view name);

enum class FilamentOrientation { along_x, along_y };

std::string_view to_string(FilamentOrientation o) noexcept;
FilamentOrientation parse_filament_orientation(std::string_view s);

/// Rectangular slab electrode centred at x = `lateral_offset_x`, y = 0, with
/// its mid-plane `height_above_lower_endcap` above the lower end-cap apex.
/// `orientation` names the direction of the long side.
struct FilamentConfig {
    double length = 0.022;
    double width = 0.008;
    double thickness = 0.0005;
    double height_above_lower_endcap = 0.005;
    double lateral_offset_x = 0.006;
    FilamentOrientation orientation = FilamentOrientation::along_y;

    double half_extent_x() const noexcept {
        return 0.5 * (orientation == FilamentOrientation::along_x ? length : width);
    }
    double half_extent_y() const noexcept {
        return 0.5 * (orientation == FilamentOrientation::along_x ? width : length);
    }
};

/// Electrode potentials in units of the ring drive.
struct ElectrodePotentials {
    double ring = 1.0;
    double endcap = 0.0;
    double filament = 0.0;
};

enum class Electrode { none, ring, upper_cap, lower_cap, filament };

struct TrapGeometry {
    double r0 = 0.0;
    double z0 = 0.0;
    /// Hyperbolic electrodes are cut off at this distance from the z axis.
    double truncation_radius = 0.0;
    std::optional<FilamentConfig> filament;
    ElectrodePotentials potentials;

    void validate() const;

    /// Electrode occupying (x, y, z), or Electrode::none for free space.
    Electrode electrode_at(double x, double y, double z) const noexcept;
    double potential_of(Electrode e) const noexcept;

    /// Height of the filament's upper face above the lower end-cap apex
    /// (zero without a filament).
    double filament_intrusion() const noexcept;

    /// Ideal hyperbolic trap with r0 = sqrt(2) z0 and no filament.
    static TrapGeometry ideal(double r0);
};

/// The experimental trap: r0 = 20 mm, grounded 22 x 8 mm filament 5 mm above
/// the lower end-cap, long side along y, centred 6 mm off axis in x.
TrapGeometry make_paper_trap();

struct OperatingPoint {
    double u_dc = 0.0;                      // V
    double v_rf = 0.0;                      // V, amplitude
    double drive_angular_frequency = 0.0;   // rad/s

    double drive_frequency_hz() const noexcept { return drive_angular_frequency / (2.0 * kPi); }
    double rf_period() const noexcept { return 2.0 * kPi / drive_angular_frequency; }
    void validate() const;

    static OperatingPoint at_hz(double u_dc, double v_rf, double drive_hz);
};

/// U_dc + V_rf cos(Omega t), the ring potential at time t.
double instantaneous_ring_potential(const OperatingPoint& op, double t) noexcept;

}  // namespace ptrap
