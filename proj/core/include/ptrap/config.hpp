#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ptrap/dynamics.hpp"
#include "ptrap/experiments.hpp"
#include "ptrap/field_solver.hpp"
#include "ptrap/model.hpp"
#include "ptrap/multipole_fit.hpp"

namespace ptrap {

struct TraceParams {
    double target_hz = 55.6e3;
    std::vector<double> v_rf{400.0, 500.0, 600.0, 700.0, 800.0, 900.0};
    std::vector<Axis> axes{Axis::z, Axis::x};
    std::vector<FrequencyModel> models{FrequencyModel::ideal_pseudo, FrequencyModel::perturbed_simulated};
    double tolerance_hz = 50.0;
    double u_dc_low = -100.0;
    double u_dc_high = 100.0;
};

struct SweepParams {
    std::vector<double> heights{0.0, 0.001, 0.002, 0.003, 0.004, 0.005, 0.006};
    double u_dc = 21.75;
    double v_rf = 550.0;
};

struct OutputOptions {
    std::size_t trajectory_stride = 10;
    double spectrum_max_hz = 250e3;
};

/// Fully resolved run configuration. Every field has a default; JSON input
/// only needs to name what differs.
struct RunConfig {
    TrapGeometry geometry = make_paper_trap();
    GridSpec grid = GridSpec::default_for(0.020);
    SolverOptions solver;
    double fit_region_radius = 0.005;
    IonSpecies ion = IonSpecies::europium151();
    OperatingPoint operating_point{-5.3, 700.0, 2.0 * kPi * 500e3};
    IntegrationConfig integration;
    /// "paper-table1", "ideal", "inline" or the fit report path it came from.
    std::string coefficients_source = "paper-table1";
    MultipoleCoefficients coefficients = paper_table_coefficients();
    TraceParams trace;
    SweepParams sweep;
    OutputOptions output;

    TraceSetup trace_setup() const;
    PipelineOptions pipeline_options() const;
};

/// Parses JSON text (empty means all defaults), then applies `overrides` of
/// the form "dotted.path=value" where value is JSON or a bare string.
/// Relative coefficient file paths resolve against `base_dir`. Throws
/// ConfigError naming the offending field.
RunConfig parse_run_config(std::string_view json_text, std::span<const std::string> overrides = {},
                           const std::filesystem::path& base_dir = {});

RunConfig load_run_config(const std::filesystem::path& path, std::span<const std::string> overrides = {});

/// Every field of `cfg` as JSON. Parsing the result gives back `cfg`.
std::string resolved_config_json(const RunConfig& cfg, int indent = 2);

}  // namespace ptrap
