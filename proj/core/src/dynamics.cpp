#include "ptrap/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ptrap/error.hpp"

namespace ptrap {

namespace {

struct State {
    Vec3 x;
    Vec3 v;
};

inline Vec3 axpy(const Vec3& a, double s, const Vec3& b) noexcept {
    return {a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]};
}

bool finite(const State& s) noexcept {
    for (std::size_t i = 0; i < 3; ++i)
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.v[i])) return false;
    return true;
}

}  // namespace

void IntegrationConfig::validate() const {
    if (steps_per_rf_period < 50) throw PreconditionError("steps_per_rf_period must be >= 50");
    if (rf_periods < 256) throw PreconditionError("rf_periods must be >= 256");
    for (std::size_t i = 0; i < 3; ++i)
        if (!std::isfinite(initial_position[i]) || !std::isfinite(initial_velocity[i]))
            throw PreconditionError("initial state must be finite");
}

std::vector<double> Trajectory::component(Axis a) const {
    std::vector<double> out(positions.size());
    std::transform(positions.begin(), positions.end(), out.begin(), [a](const Vec3& p) { return p[index(a)]; });
    return out;
}

Vec3 acceleration(const MultipoleCoefficients& c, const TrapGeometry& geom, const IonSpecies& ion,
                  const OperatingPoint& op, const Vec3& p, double t) noexcept {
    const double r0 = geom.r0;
    const double scale = -ion.specific_charge() * instantaneous_ring_potential(op, t);
    return {scale * (c.alpha1 / r0 + 2.0 * c.alpha2 * p[0] / (r0 * r0)),
            scale * (2.0 * c.beta2 * p[1] / (r0 * r0)),
            scale * (c.gamma1 / r0 + 2.0 * c.gamma2 * p[2] / (r0 * r0))};
}

Trajectory simulate_trajectory(const MultipoleCoefficients& coeffs, const TrapGeometry& geom,
                               const IonSpecies& ion, const OperatingPoint& op, const IntegrationConfig& cfg) {
    cfg.validate();
    op.validate();
    ion.validate();

    const double dt = op.rf_period() / static_cast<double>(cfg.steps_per_rf_period);
    const std::size_t steps = cfg.steps_per_rf_period * cfg.rf_periods;

    Trajectory traj;
    traj.sample_interval = dt;
    traj.positions.reserve(steps + 1);
    traj.velocities.reserve(steps + 1);

    State s{cfg.initial_position, cfg.initial_velocity};
    traj.positions.push_back(s.x);
    traj.velocities.push_back(s.v);

    const auto acc = [&](const Vec3& x, double t) { return acceleration(coeffs, geom, ion, op, x, t); };
    const Vec3 limit{geom.r0, geom.r0, geom.z0};

    for (std::size_t n = 0; n < steps; ++n) {
        const double t = static_cast<double>(n) * dt;
        const Vec3 k1v = acc(s.x, t);
        const Vec3& k1x = s.v;
        const Vec3 k2x = axpy(s.v, 0.5 * dt, k1v);
        const Vec3 k2v = acc(axpy(s.x, 0.5 * dt, k1x), t + 0.5 * dt);
        const Vec3 k3x = axpy(s.v, 0.5 * dt, k2v);
        const Vec3 k3v = acc(axpy(s.x, 0.5 * dt, k2x), t + 0.5 * dt);
        const Vec3 k4x = axpy(s.v, dt, k3v);
        const Vec3 k4v = acc(axpy(s.x, dt, k3x), t + dt);
        for (std::size_t i = 0; i < 3; ++i) {
            s.x[i] += dt / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
            s.v[i] += dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
        if (!finite(s)) throw NumericError("non-finite ion state at integration step " + std::to_string(n + 1));

        traj.positions.push_back(s.x);
        traj.velocities.push_back(s.v);
        for (Axis a : kAllAxes) {
            if (std::abs(s.x[index(a)]) > limit[index(a)]) {
                traj.escaped = true;
                traj.escape_time = static_cast<double>(n + 1) * dt;
                traj.escape_axis = a;
                return traj;
            }
        }
    }
    return traj;
}

ConvergenceReport convergence_check(const MultipoleCoefficients& coeffs, const TrapGeometry& geom,
                                    const IonSpecies& ion, const OperatingPoint& op, const IntegrationConfig& cfg) {
    cfg.validate();
    IntegrationConfig fine = cfg;
    fine.steps_per_rf_period = 2 * cfg.steps_per_rf_period;

    const Trajectory base = simulate_trajectory(coeffs, geom, ion, op, cfg);
    const Trajectory ref = simulate_trajectory(coeffs, geom, ion, op, fine);

    ConvergenceReport report;
    report.base_steps_per_period = cfg.steps_per_rf_period;
    report.reliable = !base.escaped && !ref.escaped;
    const std::size_t n = std::min(base.size(), (ref.size() + 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3& p = base.positions[i];
        const Vec3& r = ref.positions[2 * i];
        for (std::size_t d = 0; d < 3; ++d) report.max_divergence = std::max(report.max_divergence, std::abs(p[d] - r[d]));
    }
    return report;
}

std::string trajectory_csv(const Trajectory& traj, std::size_t stride) {
    if (stride == 0) stride = 1;
    std::string out = "t,x,y,z,vx,vy,vz\n";
    out.reserve(out.size() + traj.size() / stride * 140);
    char buf[256];
    for (std::size_t i = 0; i < traj.size(); i += stride) {
        const Vec3& p = traj.positions[i];
        const Vec3& v = traj.velocities[i];
        const int len = std::snprintf(buf, sizeof buf, "%.10e,%.10e,%.10e,%.10e,%.10e,%.10e,%.10e\n", traj.time(i), p[0],
                                      p[1], p[2], v[0], v[1], v[2]);
        out.append(buf, static_cast<std::size_t>(len));
    }
    return out;
}

}  // namespace ptrap
