#include "ptrap/field_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ptrap/error.hpp"

namespace ptrap {

namespace {

NodeClass to_node_class(Electrode e) noexcept {
    switch (e) {
    case Electrode::ring: return NodeClass::ring;
    case Electrode::upper_cap: return NodeClass::upper_cap;
    case Electrode::lower_cap: return NodeClass::lower_cap;
    case Electrode::filament: return NodeClass::filament;
    case Electrode::none: break;
    }
    return NodeClass::free;
}

// Stencil for a free node whose neighbours include electrode nodes.
struct BoundaryStencil {
    std::array<double, 6> weight{};  // -x, +x, -y, +y, -z, +z
    std::array<bool, 6> fixed{};     // neighbour replaced by a surface value
    double constant = 0.0;           // sum of weight * surface potential
    double diagonal = 0.0;
};

// Fraction of the link from `p` towards `q` at which the first electrode is
// met, found by bisection on the geometry predicate.
double surface_fraction(const TrapGeometry& g, const Vec3& p, const Vec3& q) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 48; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double x = p[0] + mid * (q[0] - p[0]);
        const double y = p[1] + mid * (q[1] - p[1]);
        const double z = p[2] + mid * (q[2] - p[2]);
        if (g.electrode_at(x, y, z) == Electrode::none) lo = mid;
        else hi = mid;
    }
    return std::max(hi, 1e-3);
}

}  // namespace

std::size_t GridSpec::count(Axis a) const noexcept {
    switch (a) {
    case Axis::x: return nx;
    case Axis::y: return ny;
    case Axis::z: return nz;
    }
    return nx;
}

double GridSpec::spacing(Axis a) const noexcept {
    return 2.0 * extent / static_cast<double>(count(a) - 1);
}

double GridSpec::coordinate(Axis a, std::size_t i) const noexcept {
    return -extent + static_cast<double>(i) * spacing(a);
}

void GridSpec::validate(double r0) const {
    for (Axis a : kAllAxes) {
        const std::size_t n = count(a);
        if (n < 33 || n % 2 == 0)
            throw PreconditionError("grid node count along " + std::string(to_string(a))
                                    + " must be odd and >= 33 (got " + std::to_string(n) + ")");
    }
    if (!(extent >= 1.05 * r0))
        throw PreconditionError("grid extent " + std::to_string(extent)
                                + " m is too small to contain the electrodes (need >= 1.05 r0)");
}

GridSpec GridSpec::default_for(double r0) { return GridSpec{129, 129, 129, 1.5 * r0}; }

std::size_t ElectrodeMask::count(NodeClass c) const noexcept {
    return static_cast<std::size_t>(std::count(classes.begin(), classes.end(), c));
}

ElectrodeMask discretize_geometry(const TrapGeometry& geom, const GridSpec& spec) {
    geom.validate();
    if (!(spec.extent > 0.0) || spec.extent < geom.r0)
        throw PreconditionError("grid extent smaller than r0: electrodes lie outside the box");
    spec.validate(geom.r0);

    ElectrodeMask mask;
    mask.spec = spec;
    mask.r0 = geom.r0;
    mask.geometry = geom;
    mask.classes.assign(spec.node_count(), NodeClass::free);
    mask.fixed_potential[static_cast<std::size_t>(NodeClass::ring)] = geom.potentials.ring;
    mask.fixed_potential[static_cast<std::size_t>(NodeClass::upper_cap)] = geom.potentials.endcap;
    mask.fixed_potential[static_cast<std::size_t>(NodeClass::lower_cap)] = geom.potentials.endcap;
    mask.fixed_potential[static_cast<std::size_t>(NodeClass::filament)] = geom.potentials.filament;
    mask.fixed_potential[static_cast<std::size_t>(NodeClass::outer_boundary)] = 0.0;

    for (std::size_t k = 0; k < spec.nz; ++k) {
        const double z = spec.coordinate(Axis::z, k);
        for (std::size_t j = 0; j < spec.ny; ++j) {
            const double y = spec.coordinate(Axis::y, j);
            for (std::size_t i = 0; i < spec.nx; ++i) {
                const double x = spec.coordinate(Axis::x, i);
                NodeClass c = to_node_class(geom.electrode_at(x, y, z));
                const bool face = i == 0 || j == 0 || k == 0 || i + 1 == spec.nx || j + 1 == spec.ny
                                  || k + 1 == spec.nz;
                if (face && c == NodeClass::free) c = NodeClass::outer_boundary;
                mask.classes[spec.index(i, j, k)] = c;
            }
        }
    }

    const auto require = [&](NodeClass c, const char* name) {
        if (mask.count(c) == 0)
            throw PreconditionError(std::string("no ") + name
                                    + " nodes found: grid too coarse or extent too small");
    };
    require(NodeClass::ring, "ring");
    require(NodeClass::upper_cap, "upper end-cap");
    require(NodeClass::lower_cap, "lower end-cap");
    if (geom.filament) require(NodeClass::filament, "filament");
    if (mask.at(spec.nx / 2, spec.ny / 2, spec.nz / 2) != NodeClass::free)
        throw PreconditionError("trap centre node is not free");
    return mask;
}

PotentialGrid solve_laplace(const ElectrodeMask& mask, double tolerance, std::size_t max_iterations) {
    SolverOptions opts;
    opts.tolerance = tolerance;
    opts.max_iterations = max_iterations;
    return solve_laplace(mask, opts);
}

PotentialGrid solve_laplace(const ElectrodeMask& mask, const SolverOptions& options) {
    if (!(options.tolerance > 0.0)) throw PreconditionError("solver tolerance must be positive");
    const GridSpec& s = mask.spec;
    if (mask.classes.size() != s.node_count()) throw PreconditionError("mask size does not match grid");

    const std::size_t nx = s.nx, ny = s.ny, nz = s.nz;
    const std::ptrdiff_t sx = 1, sy = static_cast<std::ptrdiff_t>(nx),
                         sz = static_cast<std::ptrdiff_t>(nx * ny);
    const std::array<double, 3> h{s.spacing(Axis::x), s.spacing(Axis::y), s.spacing(Axis::z)};
    const std::array<double, 3> inv_h2{1.0 / (h[0] * h[0]), 1.0 / (h[1] * h[1]), 1.0 / (h[2] * h[2])};
    const double regular_diag = 2.0 * (inv_h2[0] + inv_h2[1] + inv_h2[2]);
    const std::array<std::ptrdiff_t, 6> offset{-sx, sx, -sy, sy, -sz, sz};

    PotentialGrid grid;
    grid.mask = mask;
    grid.values.assign(s.node_count(), 0.0);
    for (std::size_t n = 0; n < s.node_count(); ++n)
        if (mask.classes[n] != NodeClass::free)
            grid.values[n] = mask.fixed_potential[static_cast<std::size_t>(mask.classes[n])];

    // Boundary-adjacent free nodes get their own stencil.
    std::vector<std::int32_t> stencil_of(s.node_count(), -1);
    std::vector<BoundaryStencil> stencils;
    const bool sub_cell = options.boundary == BoundaryTreatment::shortley_weller && mask.geometry.has_value();
    for (std::size_t k = 1; k + 1 < nz; ++k)
        for (std::size_t j = 1; j + 1 < ny; ++j)
            for (std::size_t i = 1; i + 1 < nx; ++i) {
                const std::size_t n = s.index(i, j, k);
                if (mask.classes[n] != NodeClass::free) continue;
                bool touches = false;
                for (auto off : offset)
                    if (mask.classes[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(n) + off)] != NodeClass::free)
                        touches = true;
                if (!touches || !sub_cell) continue;

                const Vec3 p{s.coordinate(Axis::x, i), s.coordinate(Axis::y, j), s.coordinate(Axis::z, k)};
                std::array<double, 6> theta{1, 1, 1, 1, 1, 1};
                std::array<double, 6> surface_value{};
                BoundaryStencil st;
                for (std::size_t d = 0; d < 6; ++d) {
                    const std::size_t m = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(n) + offset[d]);
                    const NodeClass c = mask.classes[m];
                    if (c == NodeClass::free) continue;
                    st.fixed[d] = true;
                    if (c == NodeClass::outer_boundary) {
                        surface_value[d] = mask.fixed_potential[static_cast<std::size_t>(c)];
                        continue;
                    }
                    Vec3 q = p;
                    q[d / 2] += (d % 2 == 0 ? -1.0 : 1.0) * h[d / 2];
                    theta[d] = surface_fraction(*mask.geometry, p, q);
                    Vec3 hit = p;
                    const double past = std::min(1.0, theta[d] + 1e-9);
                    for (std::size_t a = 0; a < 3; ++a) hit[a] = p[a] + past * (q[a] - p[a]);
                    const Electrode e = mask.geometry->electrode_at(hit[0], hit[1], hit[2]);
                    surface_value[d] = e == Electrode::none
                                           ? mask.fixed_potential[static_cast<std::size_t>(c)]
                                           : mask.geometry->potential_of(e);
                }
                for (std::size_t a = 0; a < 3; ++a) {
                    const double tm = theta[2 * a], tp = theta[2 * a + 1];
                    st.weight[2 * a] = 2.0 * inv_h2[a] / (tm * (tm + tp));
                    st.weight[2 * a + 1] = 2.0 * inv_h2[a] / (tp * (tm + tp));
                }
                for (std::size_t d = 0; d < 6; ++d) {
                    st.diagonal += st.weight[d];
                    if (st.fixed[d]) st.constant += st.weight[d] * surface_value[d];
                }
                stencil_of[n] = static_cast<std::int32_t>(stencils.size());
                stencils.push_back(st);
            }

    const double nmax = static_cast<double>(std::max({nx, ny, nz}));
    const double omega = options.relaxation.value_or(2.0 / (1.0 + kPi / nmax));
    double* phi = grid.values.data();
    const NodeClass* cls = mask.classes.data();

    double residual = 0.0;
    for (std::size_t it = 1; it <= options.max_iterations; ++it) {
        residual = 0.0;
        for (std::size_t color = 0; color < 2; ++color) {
#pragma omp parallel for reduction(max : residual) schedule(static)
            for (std::ptrdiff_t kk = 1; kk < static_cast<std::ptrdiff_t>(nz) - 1; ++kk) {
                const std::size_t k = static_cast<std::size_t>(kk);
                for (std::size_t j = 1; j + 1 < ny; ++j) {
                    const std::size_t i0 = 1 + ((1 + j + k + color) & 1u);
                    for (std::size_t i = i0; i + 1 < nx; i += 2) {
                        const std::size_t n = i + nx * (j + ny * k);
                        if (cls[n] != NodeClass::free) continue;
                        double target;
                        const std::int32_t si = stencil_of[n];
                        if (si < 0) {
                            target = (inv_h2[0] * (phi[n - sx] + phi[n + sx]) + inv_h2[1] * (phi[n - sy] + phi[n + sy])
                                      + inv_h2[2] * (phi[n - sz] + phi[n + sz]))
                                     / regular_diag;
                        } else {
                            const BoundaryStencil& st = stencils[static_cast<std::size_t>(si)];
                            double acc = st.constant;
                            for (std::size_t d = 0; d < 6; ++d)
                                if (!st.fixed[d]) acc += st.weight[d] * phi[static_cast<std::ptrdiff_t>(n) + offset[d]];
                            target = acc / st.diagonal;
                        }
                        const double delta = omega * (target - phi[n]);
                        phi[n] += delta;
                        residual = std::max(residual, std::abs(delta));
                    }
                }
            }
        }
        if (!std::isfinite(residual)) throw NumericError("Laplace solver diverged at iteration " + std::to_string(it));
        if (residual <= options.tolerance) {
            grid.converged_residual = residual;
            grid.iterations = it;
            return grid;
        }
    }
    throw SolverNotConvergedError(residual, options.max_iterations);
}

PotentialGrid make_synthetic_grid(const ElectrodeMask& mask,
                                  const std::function<double(double, double, double)>& field) {
    const GridSpec& s = mask.spec;
    PotentialGrid grid;
    grid.mask = mask;
    grid.values.resize(s.node_count());
    for (std::size_t k = 0; k < s.nz; ++k)
        for (std::size_t j = 0; j < s.ny; ++j)
            for (std::size_t i = 0; i < s.nx; ++i) {
                const std::size_t n = s.index(i, j, k);
                const NodeClass c = mask.classes[n];
                grid.values[n] = c == NodeClass::free
                                     ? field(s.coordinate(Axis::x, i), s.coordinate(Axis::y, j),
                                             s.coordinate(Axis::z, k))
                                     : mask.fixed_potential[static_cast<std::size_t>(c)];
            }
    return grid;
}

double sample_potential(const PotentialGrid& grid, double x, double y, double z) {
    const GridSpec& s = grid.spec();
    const double e = s.extent;
    if (!(std::abs(x) <= e && std::abs(y) <= e && std::abs(z) <= e))
        throw PreconditionError("sample point lies outside the grid box");

    if (grid.mask.geometry) {
        if (grid.mask.geometry->electrode_at(x, y, z) != Electrode::none)
            throw PreconditionError("sample point lies inside an electrode");
    }

    const Vec3 p{x, y, z};
    std::array<std::size_t, 3> lo{};
    std::array<double, 3> frac{};
    for (Axis a : kAllAxes) {
        const std::size_t ai = index(a);
        const double u = (p[ai] + e) / s.spacing(a);
        const std::size_t n = s.count(a);
        std::size_t c = static_cast<std::size_t>(std::floor(u));
        if (c >= n - 1) c = n - 2;
        lo[ai] = c;
        frac[ai] = u - static_cast<double>(c);
    }

    if (!grid.mask.geometry) {
        const std::size_t ni = lo[0] + (frac[0] >= 0.5 ? 1 : 0);
        const std::size_t nj = lo[1] + (frac[1] >= 0.5 ? 1 : 0);
        const std::size_t nk = lo[2] + (frac[2] >= 0.5 ? 1 : 0);
        const NodeClass c = grid.mask.at(ni, nj, nk);
        if (c != NodeClass::free && c != NodeClass::outer_boundary)
            throw PreconditionError("sample point lies inside an electrode");
    }

    double acc = 0.0;
    for (std::size_t dk = 0; dk < 2; ++dk)
        for (std::size_t dj = 0; dj < 2; ++dj)
            for (std::size_t di = 0; di < 2; ++di) {
                const double w = (di ? frac[0] : 1.0 - frac[0]) * (dj ? frac[1] : 1.0 - frac[1])
                                 * (dk ? frac[2] : 1.0 - frac[2]);
                if (w == 0.0) continue;
                acc += w * grid.at(lo[0] + di, lo[1] + dj, lo[2] + dk);
            }
    return acc;
}

}  // namespace ptrap
