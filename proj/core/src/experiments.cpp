#include "ptrap/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <exception>

#include "ptrap/error.hpp"

namespace ptrap {

namespace {

// Frequency used by the root finder. Unstable points map to the edge of the
// first region they fall off: 0 below beta = 0, Omega/4pi above beta = 1.
double unstable_side_frequency(const MathieuParams& p, double drive_hz) {
    return p.a + 0.5 * p.q * p.q < 0.25 ? 0.0 : 0.5 * drive_hz;
}

double ideal_frequency_or_edge(const TraceSetup& s, const OperatingPoint& op, Axis axis) {
    const MathieuParams p = ideal_aq(s.ion, s.geometry, op, axis);
    const SecularResult r = analyze(p, op);
    return r.stable ? r.secular_frequency : unstable_side_frequency(p, op.drive_frequency_hz());
}

double perturbed_analytic_frequency_or_edge(const TraceSetup& s, const OperatingPoint& op, Axis axis) {
    const MathieuParams p = perturbed_aq(s.ion, s.geometry, op, s.coefficients, axis);
    const SecularResult r = analyze(p, op);
    return r.stable ? r.secular_frequency : unstable_side_frequency(p, op.drive_frequency_hz());
}

double simulated_frequency_or_edge(const TraceSetup& s, const OperatingPoint& op, Axis axis) {
    const Trajectory traj = simulate_trajectory(s.coefficients, s.geometry, s.ion, op, s.integration);
    if (traj.escaped) {
        const MathieuParams p = perturbed_aq(s.ion, s.geometry, op, s.coefficients, axis);
        return unstable_side_frequency(p, op.drive_frequency_hz());
    }
    try {
        return find_secular_peak(spectrum_of(traj, axis), op.drive_frequency_hz()).frequency;
    } catch (const NoPeakError&) {
        return 0.0;
    }
}

struct BisectionResult {
    double u = 0.0;
    double frequency = 0.0;
    bool converged = false;
};

template <typename FrequencyOf>
BisectionResult bisect_u(FrequencyOf&& frequency_of, double target, double tol_hz, double lo, double hi,
                         bool allow_expand) {
    double f_lo = frequency_of(lo), f_hi = frequency_of(hi);
    if ((f_lo - target < 0.0) == (f_hi - target < 0.0)) {
        if (!allow_expand) {
            const bool lo_closer = std::abs(f_lo - target) <= std::abs(f_hi - target);
            return {lo_closer ? lo : hi, lo_closer ? f_lo : f_hi, false};
        }
        const double centre = 0.5 * (lo + hi), half = hi - lo;
        lo = centre - half;
        hi = centre + half;
        f_lo = frequency_of(lo);
        f_hi = frequency_of(hi);
        if ((f_lo - target < 0.0) == (f_hi - target < 0.0)) {
            const bool lo_closer = std::abs(f_lo - target) <= std::abs(f_hi - target);
            return {lo_closer ? lo : hi, lo_closer ? f_lo : f_hi, false};
        }
    }
    if (std::abs(f_lo - target) <= tol_hz) return {lo, f_lo, true};
    if (std::abs(f_hi - target) <= tol_hz) return {hi, f_hi, true};

    BisectionResult best{lo, f_lo, false};
    for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = frequency_of(mid);
        if (std::abs(f_mid - target) < std::abs(best.frequency - target)) best = {mid, f_mid, false};
        if (std::abs(f_mid - target) <= tol_hz) return {mid, f_mid, true};
        if ((f_mid - target < 0.0) == (f_lo - target < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return best;
}

}  // namespace

std::string_view to_string(FrequencyModel m) noexcept {
    return m == FrequencyModel::ideal_pseudo ? "ideal_pseudo" : "perturbed_simulated";
}

FrequencyModel parse_frequency_model(std::string_view s) {
    if (s == "ideal_pseudo" || s == "ideal") return FrequencyModel::ideal_pseudo;
    if (s == "perturbed_simulated" || s == "perturbed") return FrequencyModel::perturbed_simulated;
    throw PreconditionError("unknown frequency model '" + std::string(s)
                            + "' (expected ideal_pseudo or perturbed_simulated)");
}

std::vector<EquiFrequencyPoint> trace_equifrequency(double target_hz, std::span<const double> v_rf_list, Axis axis,
                                                    FrequencyModel model, const TraceSetup& setup) {
    if (v_rf_list.empty()) throw PreconditionError("empty V_rf list");
    const double drive_hz = setup.drive_angular_frequency / (2.0 * kPi);
    if (!(target_hz > 0.0 && target_hz < 0.5 * drive_hz))
        throw PreconditionError("target frequency must lie in (0, Omega/4pi) = (0, "
                                + std::to_string(0.5 * drive_hz) + ") Hz");
    if (!(setup.u_dc_low < setup.u_dc_high)) throw PreconditionError("empty U_dc bracket");
    if (model == FrequencyModel::perturbed_simulated) setup.integration.validate();

    std::vector<EquiFrequencyPoint> out(v_rf_list.size());
    std::vector<std::exception_ptr> errors(v_rf_list.size());

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(v_rf_list.size()); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        try {
            const double v = v_rf_list[i];
            const auto op_at = [&](double u) { return OperatingPoint{u, v, setup.drive_angular_frequency}; };
            BisectionResult r;
            if (model == FrequencyModel::ideal_pseudo) {
                r = bisect_u([&](double u) { return ideal_frequency_or_edge(setup, op_at(u), axis); }, target_hz,
                             setup.tolerance_hz, setup.u_dc_low, setup.u_dc_high, true);
            } else {
                // Analytic perturbed model first, then a narrow simulated bracket.
                const BisectionResult guess = bisect_u(
                    [&](double u) { return perturbed_analytic_frequency_or_edge(setup, op_at(u), axis); }, target_hz,
                    1.0, setup.u_dc_low, setup.u_dc_high, true);
                const auto simulated = [&](double u) { return simulated_frequency_or_edge(setup, op_at(u), axis); };
                r = bisect_u(simulated, target_hz, setup.tolerance_hz, guess.u - 2.0, guess.u + 2.0, false);
                if (!r.converged)
                    r = bisect_u(simulated, target_hz, setup.tolerance_hz, setup.u_dc_low, setup.u_dc_high, true);
            }
            out[i] = {v, r.u, r.frequency, axis, model, r.converged};
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

std::array<double, 3> simulated_frequencies(const MultipoleCoefficients& coeffs, const TrapGeometry& geom,
                                            const IonSpecies& ion, const OperatingPoint& op,
                                            const IntegrationConfig& cfg) {
    const Trajectory traj = simulate_trajectory(coeffs, geom, ion, op, cfg);
    const auto peaks = secular_peaks(traj, op.drive_frequency_hz());
    return {peaks[0].frequency, peaks[1].frequency, peaks[2].frequency};
}

double simulated_frequency(const MultipoleCoefficients& coeffs, const TrapGeometry& geom, const IonSpecies& ion,
                           const OperatingPoint& op, const IntegrationConfig& cfg, Axis axis) {
    const Trajectory traj = simulate_trajectory(coeffs, geom, ion, op, cfg);
    return find_secular_peak(spectrum_of(traj, axis), op.drive_frequency_hz()).frequency;
}

std::array<double, 3> frequency_discrepancy(double v_rf, double u_dc, const IonSpecies& ion,
                                            const TrapGeometry& geom, const OperatingPoint& op_template,
                                            const MultipoleCoefficients& coeffs, const IntegrationConfig& cfg) {
    const OperatingPoint op{u_dc, v_rf, op_template.drive_angular_frequency};
    std::array<double, 3> ideal{};
    for (Axis a : kAllAxes) {
        const SecularResult r = analyze(ideal_aq(ion, geom, op, a), op);
        if (!r.stable)
            throw InstabilityError("ideal_pseudo model unstable along " + std::string(to_string(a)) + " at V_rf="
                                   + std::to_string(v_rf) + " V, U_dc=" + std::to_string(u_dc) + " V");
        ideal[index(a)] = r.secular_frequency;
    }
    const Trajectory traj = simulate_trajectory(coeffs, geom, ion, op, cfg);
    if (traj.escaped)
        throw InstabilityError("perturbed_simulated model unstable: ion escaped along "
                               + std::string(to_string(traj.escape_axis.value_or(Axis::x))) + " at t="
                               + std::to_string(traj.escape_time) + " s");
    const auto peaks = secular_peaks(traj, op.drive_frequency_hz());
    return {ideal[0] - peaks[0].frequency, ideal[1] - peaks[1].frequency, ideal[2] - peaks[2].frequency};
}

SweepPoint run_pipeline(const TrapGeometry& geom, const IonSpecies& ion, const OperatingPoint& op,
                        const PipelineOptions& options) {
    SweepPoint point;
    point.filament_height = geom.filament ? geom.filament->height_above_lower_endcap : 0.0;
    std::string stage = "discretize";
    try {
        const ElectrodeMask mask = discretize_geometry(geom, options.grid);
        stage = "solve";
        const PotentialGrid grid = solve_laplace(mask, options.solver);
        point.solver_iterations = grid.iterations;
        stage = "fit";
        if (options.fit_region_radius > max_fit_region_radius(geom, options.grid))
            throw PreconditionError("fit region radius " + std::to_string(options.fit_region_radius)
                                    + " m exceeds the allowed " + std::to_string(max_fit_region_radius(geom, options.grid))
                                    + " m");
        point.fit = fit_multipoles(grid, options.fit_region_radius, geom.r0);
        point.coefficients = point.fit.coefficients;
        stage = "simulate";
        point.axial_frequency =
            simulated_frequency(point.coefficients, geom, ion, op, options.integration, Axis::z);
    } catch (const std::exception& e) {
        point.error = stage + ": " + e.what();
    }
    return point;
}

std::vector<SweepPoint> filament_height_sweep(std::span<const double> heights, const OperatingPoint& op,
                                              const IonSpecies& ion, const TrapGeometry& base,
                                              const PipelineOptions& options) {
    if (heights.empty()) throw PreconditionError("empty filament height list");
    for (std::size_t i = 0; i < heights.size(); ++i) {
        if (!(heights[i] >= 0.0 && heights[i] < base.z0))
            throw PreconditionError("filament height " + std::to_string(heights[i]) + " m outside [0, z0)");
        if (i > 0 && !(heights[i] > heights[i - 1])) throw PreconditionError("filament heights must be ascending");
    }
    std::vector<SweepPoint> out(heights.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(heights.size()); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        TrapGeometry g = base;
        if (!g.filament) g.filament = FilamentConfig{};
        g.filament->height_above_lower_endcap = heights[i];
        out[i] = run_pipeline(g, ion, op, options);
        out[i].filament_height = heights[i];
    }
    return out;
}

std::string trace_csv(std::span<const EquiFrequencyPoint> points) {
    std::string out = "v_rf,u_dc,achieved_frequency_hz,axis,model,converged\n";
    char buf[192];
    for (const auto& p : points) {
        const int len = std::snprintf(buf, sizeof buf, "%.6f,%.9f,%.6f,%s,%s,%s\n", p.v_rf, p.u_dc,
                                      p.achieved_frequency, std::string(to_string(p.axis)).c_str(),
                                      std::string(to_string(p.model)).c_str(), p.converged ? "true" : "false");
        out.append(buf, static_cast<std::size_t>(len));
    }
    return out;
}

std::string sweep_csv(std::span<const SweepPoint> points) {
    std::string out = "filament_height_m,axial_frequency_hz," + coefficients_csv_header()
                      + ",fit_rms_residual,solver_iterations,error\n";
    char buf[96];
    for (const auto& p : points) {
        std::snprintf(buf, sizeof buf, "%.6e,%.6f,", p.filament_height, p.axial_frequency);
        out += buf;
        out += coefficients_csv_row(p.coefficients);
        std::snprintf(buf, sizeof buf, ",%.6e,%zu,", p.fit.rms_residual, p.solver_iterations);
        out += buf;
        std::string err = p.error;
        for (char& c : err)
            if (c == ',' || c == '\n') c = ';';
        out += err + "\n";
    }
    return out;
}

}  // namespace ptrap
