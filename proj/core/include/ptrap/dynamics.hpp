#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ptrap/model.hpp"
#include "ptrap/multipole_fit.hpp"

namespace ptrap {

struct IntegrationConfig {
    std::size_t steps_per_rf_period = 100;
    std::size_t rf_periods = 2048;
    Vec3 initial_position{0.5e-3, 0.5e-3, 0.5e-3};
    Vec3 initial_velocity{0.0, 0.0, 0.0};

    /// Requires >= 50 steps per period and >= 256 periods.
    void validate() const;
};

struct Trajectory {
    double sample_interval = 0.0;  // s
    std::vector<Vec3> positions;
    std::vector<Vec3> velocities;
    bool escaped = false;
    double escape_time = 0.0;
    std::optional<Axis> escape_axis;

    std::size_t size() const noexcept { return positions.size(); }
    double time(std::size_t i) const noexcept { return static_cast<double>(i) * sample_interval; }
    /// Copy of one coordinate as a series.
    std::vector<double> component(Axis a) const;
};

/// -(Q/m) phi0(t) grad(expansion): the force per unit mass in the fitted
/// potential with phi0(t) = U + V cos(Omega t) on the ring.
Vec3 acceleration(const MultipoleCoefficients& coeffs, const TrapGeometry& geom, const IonSpecies& ion,
                  const OperatingPoint& op, const Vec3& position, double t) noexcept;

/// Fixed-step classical RK4 with dt = T_rf / steps_per_rf_period, sampled at
/// every step. Stops early (escaped = true) once |x| or |y| exceeds r0 or |z|
/// exceeds z0. Throws NumericError on non-finite state.
Trajectory simulate_trajectory(const MultipoleCoefficients& coeffs, const TrapGeometry& geom,
                               const IonSpecies& ion, const OperatingPoint& op, const IntegrationConfig& cfg);

struct ConvergenceReport {
    std::size_t base_steps_per_period = 0;
    /// Largest position difference between the base and step-doubled runs,
    /// compared at common sample times.
    double max_divergence = 0.0;
    /// False when either run escaped.
    bool reliable = true;
};

ConvergenceReport convergence_check(const MultipoleCoefficients& coeffs, const TrapGeometry& geom,
                                    const IonSpecies& ion, const OperatingPoint& op, const IntegrationConfig& cfg);

/// Columns t,x,y,z,vx,vy,vz; every `stride`-th sample.
std::string trajectory_csv(const Trajectory& traj, std::size_t stride = 1);

}  // namespace ptrap
