#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ptrap/model.hpp"

namespace ptrap {

/// Uniform node lattice over the cube [-extent, extent]^3 centred on the trap.
struct GridSpec {
    std::size_t nx = 129;
    std::size_t ny = 129;
    std::size_t nz = 129;
    double extent = 0.030;

    std::size_t node_count() const noexcept { return nx * ny * nz; }
    std::size_t count(Axis a) const noexcept;
    double spacing(Axis a) const noexcept;
    double coordinate(Axis a, std::size_t i) const noexcept;
    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const noexcept { return i + nx * (j + ny * k); }

    /// Throws PreconditionError unless counts are odd and >= 33 and the box
    /// holds the electrodes (extent >= 1.05 r0).
    void validate(double r0) const;

    /// 129^3 nodes spanning 1.5 r0.
    static GridSpec default_for(double r0);
};

enum class NodeClass : std::uint8_t { free = 0, ring, upper_cap, lower_cap, filament, outer_boundary };
inline constexpr std::size_t kNodeClassCount = 6;

/// Per-node classification of the lattice plus the fixed potential of each
/// non-free class.
struct ElectrodeMask {
    GridSpec spec;
    double r0 = 0.0;
    std::vector<NodeClass> classes;
    std::array<double, kNodeClassCount> fixed_potential{};
    /// Source geometry, when known. Enables sub-cell boundary distances and
    /// exact inside-electrode tests; grids read back from disk lack it.
    std::optional<TrapGeometry> geometry;

    NodeClass at(std::size_t i, std::size_t j, std::size_t k) const noexcept { return classes[spec.index(i, j, k)]; }
    std::size_t count(NodeClass c) const noexcept;
};

/// Classifies every node against the electrode surfaces. The outermost box
/// layer becomes outer_boundary unless it lies inside an electrode.
ElectrodeMask discretize_geometry(const TrapGeometry& geom, const GridSpec& spec);

enum class BoundaryTreatment {
    staircase,        ///< electrode surface snapped to the nearest lattice node
    shortley_weller,  ///< sub-cell distance to the surface on each boundary link
};

struct SolverOptions {
    double tolerance = 1e-8;
    std::size_t max_iterations = 200000;
    BoundaryTreatment boundary = BoundaryTreatment::shortley_weller;
    /// Over-relaxation factor; defaults to 2 / (1 + pi / n_max).
    std::optional<double> relaxation;
};

struct PotentialGrid {
    ElectrodeMask mask;
    std::vector<double> values;
    double converged_residual = 0.0;
    std::size_t iterations = 0;

    const GridSpec& spec() const noexcept { return mask.spec; }
    double at(std::size_t i, std::size_t j, std::size_t k) const noexcept { return values[mask.spec.index(i, j, k)]; }
};

/// Red-black SOR solution of the discrete Laplace equation with the mask's
/// Dirichlet data. Throws SolverNotConvergedError on exhaustion.
PotentialGrid solve_laplace(const ElectrodeMask& mask, double tolerance, std::size_t max_iterations);
PotentialGrid solve_laplace(const ElectrodeMask& mask, const SolverOptions& options);

/// Fills free nodes from `field(x, y, z)` and electrode nodes with their
/// fixed potentials. Used for synthetic fit inputs.
PotentialGrid make_synthetic_grid(const ElectrodeMask& mask,
                                  const std::function<double(double, double, double)>& field);

/// Trilinear interpolation of node values. Throws PreconditionError outside
/// the box or inside an electrode.
double sample_potential(const PotentialGrid& grid, double x, double y, double z);

}  // namespace ptrap
