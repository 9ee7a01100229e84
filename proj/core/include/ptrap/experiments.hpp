#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ptrap/dynamics.hpp"
#include "ptrap/field_solver.hpp"
#include "ptrap/mathieu.hpp"
#include "ptrap/multipole_fit.hpp"
#include "ptrap/spectral.hpp"

namespace ptrap {

enum class FrequencyModel {
    ideal_pseudo,         ///< ideal (a, q) and continued-fraction beta
    perturbed_simulated,  ///< RK4 trajectory in the fitted potential + FFT
};

std::string_view to_string(FrequencyModel m) noexcept;
FrequencyModel parse_frequency_model(std::string_view s);

/// Everything the equi-frequency tracer holds fixed.
struct TraceSetup {
    IonSpecies ion = IonSpecies::europium151();
    TrapGeometry geometry = make_paper_trap();
    double drive_angular_frequency = 2.0 * kPi * 500e3;
    /// Used by the perturbed model.
    MultipoleCoefficients coefficients = paper_table_coefficients();
    IntegrationConfig integration;
    double tolerance_hz = 50.0;
    double u_dc_low = -100.0;
    double u_dc_high = 100.0;
};

struct EquiFrequencyPoint {
    double v_rf = 0.0;
    double u_dc = 0.0;
    double achieved_frequency = 0.0;
    Axis axis = Axis::z;
    FrequencyModel model = FrequencyModel::ideal_pseudo;
    bool converged = false;
};

/// For each V_rf, bisects U_dc until the axis frequency is within
/// `tolerance_hz` of `target_hz`. The bracket [u_dc_low, u_dc_high] is doubled
/// once if it does not straddle the target; points that still cannot be
/// bracketed are returned with converged = false. Output order follows input.
std::vector<EquiFrequencyPoint> trace_equifrequency(double target_hz, std::span<const double> v_rf_list, Axis axis,
                                                    FrequencyModel model, const TraceSetup& setup);

/// Secular frequency along `axis` from simulation + FFT. Throws
/// InstabilityError if the ion escapes.
double simulated_frequency(const MultipoleCoefficients& coeffs, const TrapGeometry& geom, const IonSpecies& ion,
                           const OperatingPoint& op, const IntegrationConfig& cfg, Axis axis);

/// All three simulated secular frequencies from one trajectory.
std::array<double, 3> simulated_frequencies(const MultipoleCoefficients& coeffs, const TrapGeometry& geom,
                                            const IonSpecies& ion, const OperatingPoint& op,
                                            const IntegrationConfig& cfg);

/// Ideal continued-fraction frequency minus perturbed simulated frequency at
/// (v_rf, u_dc), per axis. `op_template` supplies the drive frequency.
/// Throws InstabilityError naming the model that is unstable.
std::array<double, 3> frequency_discrepancy(double v_rf, double u_dc, const IonSpecies& ion,
                                            const TrapGeometry& geom, const OperatingPoint& op_template,
                                            const MultipoleCoefficients& coeffs, const IntegrationConfig& cfg);

struct PipelineOptions {
    GridSpec grid = GridSpec::default_for(0.020);
    SolverOptions solver;
    double fit_region_radius = 0.005;
    IntegrationConfig integration;
};

struct SweepPoint {
    double filament_height = 0.0;
    double axial_frequency = 0.0;
    MultipoleCoefficients coefficients;
    FitReport fit;
    std::size_t solver_iterations = 0;
    /// Empty on success; otherwise the failing stage's message.
    std::string error;

    bool ok() const noexcept { return error.empty(); }
};

/// discretize -> solve -> fit -> simulate -> FFT for one geometry.
SweepPoint run_pipeline(const TrapGeometry& geom, const IonSpecies& ion, const OperatingPoint& op,
                        const PipelineOptions& options);

/// Runs the pipeline for each filament height (ascending, in [0, z0)) with
/// the rest of `base` fixed. Stage failures are recorded on the point and the
/// sweep continues.
std::vector<SweepPoint> filament_height_sweep(std::span<const double> heights, const OperatingPoint& op,
                                              const IonSpecies& ion, const TrapGeometry& base,
                                              const PipelineOptions& options);

std::string trace_csv(std::span<const EquiFrequencyPoint> points);
std::string sweep_csv(std::span<const SweepPoint> points);

}  // namespace ptrap
