#include "commands.hpp"

#include <chrono>
#include <cstdio>
#include <ostream>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ptrap/error.hpp"
#include "ptrap/grid_io.hpp"
#include "ptrap/io.hpp"

namespace ptrap::cli {

namespace {

using ordered_json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

// Collects stage timings and output names, then writes manifest.json.
class Run {
public:
    explicit Run(const Context& ctx) : ctx_(ctx) {}

    template <typename F>
    auto timed(const char* stage, F&& f) {
        const auto t0 = Clock::now();
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            timings_[stage] = seconds_since(t0);
        } else {
            auto r = f();
            timings_[stage] = seconds_since(t0);
            return r;
        }
    }

    void write(const std::string& name, std::string_view content) {
        write_file_atomic(ctx_.out_dir / name, content);
        outputs_.push_back(name);
    }

    void finish() {
        ordered_json m;
        m["tool"] = "ptrap";
        m["version"] = PTRAP_VERSION;
        m["command"] = ctx_.command;
        m["threads"] = ctx_.threads;
        m["config"] = ordered_json::parse(resolved_config_json(ctx_.config));
        if (!ctx_.grid_path.empty()) m["grid_input"] = ctx_.grid_path.string();
        m["outputs"] = outputs_;
        m["timings_s"] = timings_;
        write_file_atomic(ctx_.out_dir / "manifest.json", m.dump(2) + "\n");
    }

private:
    static double seconds_since(Clock::time_point t0) {
        return std::chrono::duration<double>(Clock::now() - t0).count();
    }

    const Context& ctx_;
    std::vector<std::string> outputs_;
    ordered_json timings_ = ordered_json::object();
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

void print_coefficients(std::ostream& out, const MultipoleCoefficients& c) {
    const auto v = c.values();
    for (std::size_t i = 0; i < 6; ++i)
        out << (i ? " " : "") << MultipoleCoefficients::names[i] << "=" << fmt("%.4f", v[i]);
    out << "\n";
}

void write_fit_outputs(Run& run, const PotentialGrid& grid, const FitReport& report) {
    run.write("fit_report.json", fit_report_json(report) + "\n");
    run.write("coefficients.csv", coefficients_csv_header() + "\n" + coefficients_csv_row(report.coefficients) + "\n");
    std::string orders = "order,basis_size,rms_residual,relative_reduction\n";
    for (const auto& o : residual_by_order(grid, report)) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%d,%zu,%.6e,%.6e\n", o.order, o.basis_size, o.rms_residual,
                      o.relative_reduction);
        orders += buf;
    }
    run.write("fit_orders.csv", orders);
}

}  // namespace

void solve_field(const Context& ctx, std::ostream& out) {
    const RunConfig& c = ctx.config;
    Run run(ctx);
    const ElectrodeMask mask = run.timed("discretize", [&] { return discretize_geometry(c.geometry, c.grid); });
    const PotentialGrid grid = run.timed("solve", [&] { return solve_laplace(mask, c.solver); });
    const FitReport report = run.timed("fit", [&] { return fit_multipoles(grid, c.fit_region_radius, c.geometry.r0); });
    run.timed("write", [&] {
        write_grid_dump(ctx.out_dir / "grid.ptgrid", grid);
        write_fit_outputs(run, grid, report);
        run.write("profiles.csv", axis_profiles_csv(grid));
    });
    run.finish();
    const GridSpec& s = grid.spec();
    out << "solved " << s.nx << "x" << s.ny << "x" << s.nz << " in " << grid.iterations
        << " iterations, residual " << fmt("%.3e", grid.converged_residual) << ", centre potential "
        << fmt("%.5f", grid.at(s.nx / 2, s.ny / 2, s.nz / 2)) << "\n";
    print_coefficients(out, report.coefficients);
}

void fit(const Context& ctx, std::ostream& out) {
    const RunConfig& c = ctx.config;
    Run run(ctx);
    const PotentialGrid grid = run.timed("read", [&] { return read_grid_dump(ctx.grid_path); });
    const FitReport report = run.timed("fit", [&] { return fit_multipoles(grid, c.fit_region_radius, grid.mask.r0); });
    write_fit_outputs(run, grid, report);
    run.finish();
    print_coefficients(out, report.coefficients);
}

void aq(const Context& ctx, std::ostream& out) {
    const RunConfig& c = ctx.config;
    const OperatingPoint& op = c.operating_point;
    Run run(ctx);
    std::string csv = "model,axis,a,q,beta,secular_frequency_hz,stable\n";
    ordered_json rows = ordered_json::array();
    for (const char* model : {"ideal", "perturbed"}) {
        for (Axis axis : kAllAxes) {
            const MathieuParams p = std::string_view(model) == "ideal"
                                        ? ideal_aq(c.ion, c.geometry, op, axis)
                                        : perturbed_aq(c.ion, c.geometry, op, c.coefficients, axis);
            const SecularResult r = analyze(p, op);
            char buf[192];
            std::snprintf(buf, sizeof buf, "%s,%s,%.9e,%.9e,%.9f,%.6f,%s\n", model,
                          std::string(to_string(axis)).c_str(), p.a, p.q, r.beta, r.secular_frequency,
                          r.stable ? "true" : "false");
            csv += buf;
            rows.push_back({{"model", model},
                            {"axis", std::string(to_string(axis))},
                            {"a", p.a},
                            {"q", p.q},
                            {"beta", r.stable ? ordered_json(r.beta) : ordered_json(nullptr)},
                            {"secular_frequency_hz", r.stable ? ordered_json(r.secular_frequency) : ordered_json(nullptr)},
                            {"stable", r.stable}});
        }
    }
    run.write("aq.csv", csv);
    run.write("aq.json", rows.dump(2) + "\n");
    run.finish();
    out << csv;
}

void simulate(const Context& ctx, std::ostream& out) {
    const RunConfig& c = ctx.config;
    const OperatingPoint& op = c.operating_point;
    Run run(ctx);
    const Trajectory traj = run.timed(
        "integrate", [&] { return simulate_trajectory(c.coefficients, c.geometry, c.ion, op, c.integration); });
    if (traj.escaped) {
        // Keep what was integrated for diagnosis before failing.
        run.write("trajectory.csv", trajectory_csv(traj, c.output.trajectory_stride));
        run.finish();
        throw InstabilityError("ion escaped along " + std::string(to_string(traj.escape_axis.value_or(Axis::x)))
                               + " at t=" + fmt("%.6e", traj.escape_time) + " s");
    }
    std::array<PeakEstimate, 3> peaks{};
    run.timed("spectrum", [&] {
        for (Axis axis : kAllAxes) {
            const Spectrum s = spectrum_of(traj, axis);
            run.write("spectrum_" + std::string(to_string(axis)) + ".csv", spectrum_csv(s, c.output.spectrum_max_hz));
            peaks[index(axis)] = find_secular_peak(s, op.drive_frequency_hz());
        }
    });
    run.write("trajectory.csv", trajectory_csv(traj, c.output.trajectory_stride));
    std::string summary = "axis,frequency_hz,magnitude\n";
    for (Axis axis : kAllAxes) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s,%.6f,%.6e\n", std::string(to_string(axis)).c_str(),
                      peaks[index(axis)].frequency, peaks[index(axis)].magnitude);
        summary += buf;
    }
    run.write("peaks.csv", summary);
    run.finish();
    out << "f_x=" << fmt("%.2f", peaks[0].frequency) << " Hz f_y=" << fmt("%.2f", peaks[1].frequency)
        << " Hz f_z=" << fmt("%.2f", peaks[2].frequency) << " Hz\n";
}

void trace(const Context& ctx, std::ostream& out) {
    const RunConfig& c = ctx.config;
    Run run(ctx);
    const TraceSetup setup = c.trace_setup();
    std::vector<EquiFrequencyPoint> all;
    for (FrequencyModel model : c.trace.models) {
        for (Axis axis : c.trace.axes) {
            const std::string stage = std::string(to_string(model)) + "_" + std::string(to_string(axis));
            auto pts = run.timed(stage.c_str(), [&] {
                return trace_equifrequency(c.trace.target_hz, c.trace.v_rf, axis, model, setup);
            });
            all.insert(all.end(), pts.begin(), pts.end());
        }
    }
    run.write("trace.csv", trace_csv(all));
    run.finish();
    std::size_t unconverged = 0;
    for (const auto& p : all) unconverged += p.converged ? 0 : 1;
    out << "traced " << all.size() << " points at " << fmt("%.1f", c.trace.target_hz) << " Hz";
    if (unconverged) out << ", " << unconverged << " not converged";
    out << "\n";
}

void sweep(const Context& ctx, std::ostream& out) {
    const RunConfig& c = ctx.config;
    Run run(ctx);
    const OperatingPoint op{c.sweep.u_dc, c.sweep.v_rf, c.operating_point.drive_angular_frequency};
    const auto points = run.timed("sweep", [&] {
        return filament_height_sweep(c.sweep.heights, op, c.ion, c.geometry, c.pipeline_options());
    });
    run.write("sweep.csv", sweep_csv(points));
    run.finish();
    for (const auto& p : points) {
        out << "h=" << fmt("%.4f", p.filament_height) << " m ";
        if (p.ok())
            out << "f_z=" << fmt("%.2f", p.axial_frequency) << " Hz\n";
        else
            out << "failed: " << p.error << "\n";
    }
    for (const auto& p : points)
        if (!p.ok()) throw NumericError("sweep point at height " + fmt("%.4f", p.filament_height) + " m failed: " + p.error);
}

}  // namespace ptrap::cli
