#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ptrap/field_solver.hpp"

namespace ptrap {

/// Coefficients of the quadrupole-order expansion
///   phi / phi0 = alpha0 + (alpha1 x + gamma1 z) / r0
///              + (alpha2 x^2 + beta2 y^2 + gamma2 z^2) / r0^2
/// in units of the ring potential.
struct MultipoleCoefficients {
    double alpha0 = 0.0;
    double alpha1 = 0.0;
    double gamma1 = 0.0;
    double alpha2 = 0.0;
    double beta2 = 0.0;
    double gamma2 = 0.0;
    /// One-sigma uncertainties in the order above.
    std::array<double, 6> sigma{};

    static constexpr std::array<std::string_view, 6> names{"alpha0", "alpha1", "gamma1", "alpha2", "beta2", "gamma2"};

    std::array<double, 6> values() const noexcept { return {alpha0, alpha1, gamma1, alpha2, beta2, gamma2}; }
    static MultipoleCoefficients from_values(const std::array<double, 6>& v, const std::array<double, 6>& s = {});

    /// Quadratic coefficient governing motion along `a` (alpha2, beta2, gamma2).
    double quadratic(Axis a) const noexcept;
    bool is_finite() const noexcept;
};

/// Ring at 1, caps at 0, ideal hyperbolic electrodes:
/// phi = 1/2 + (x^2 + y^2 - 2 z^2) / (2 r0^2).
MultipoleCoefficients ideal_coefficients() noexcept;

/// Reference least-squares coefficients for the trap with the filament raised
/// 5 mm, with their quoted uncertainties.
MultipoleCoefficients paper_table_coefficients() noexcept;

/// Expansion value at (x, y, z), in units of the ring potential.
double evaluate_expansion(const MultipoleCoefficients& c, double r0, double x, double y, double z) noexcept;

struct FitReport {
    MultipoleCoefficients coefficients;
    double rms_residual = 0.0;
    double max_residual = 0.0;
    std::size_t sample_count = 0;
    double fit_region_radius = 0.0;
};

/// Term x^px y^py z^pz / r0^(px+py+pz).
struct Monomial {
    int px = 0, py = 0, pz = 0;
    int order() const noexcept { return px + py + pz; }
    std::string name() const;
    friend bool operator==(const Monomial&, const Monomial&) = default;
};

struct PolynomialFit {
    std::vector<Monomial> terms;
    std::vector<double> coefficients;
    std::vector<double> sigma;
    double rms_residual = 0.0;
    double max_residual = 0.0;
    std::size_t sample_count = 0;
};

/// The six-term basis {1, x, z, x^2, y^2, z^2} in coefficient order.
std::vector<Monomial> quadrupole_basis();

/// Linear least squares over every free node within `region_radius` of the
/// trap centre, solved by Householder QR.
/// Throws PreconditionError for fewer than 60 samples or a rank-deficient basis.
PolynomialFit fit_polynomial(const PotentialGrid& grid, double region_radius, double r0,
                             const std::vector<Monomial>& terms);

FitReport fit_multipoles(const PotentialGrid& grid, double region_radius, double r0);

/// Largest fit radius allowed for `geom` on `spec`:
/// 0.5 * min(r0 - filament intrusion, extent).
double max_fit_region_radius(const TrapGeometry& geom, const GridSpec& spec) noexcept;

struct OrderResidual {
    int order = 2;
    std::size_t basis_size = 0;
    double rms_residual = 0.0;
    /// (rms at order 2 - rms here) / rms at order 2.
    double relative_reduction = 0.0;
};

/// Refits with the basis extended by all even-in-y monomials of order 3, then
/// 3 and 4, and reports the residual drop relative to the order-2 report.
std::vector<OrderResidual> residual_by_order(const PotentialGrid& grid, const FitReport& report);

std::string fit_report_json(const FitReport& report, int indent = 2);
FitReport fit_report_from_json(std::string_view text);
std::string coefficients_csv_header();
std::string coefficients_csv_row(const MultipoleCoefficients& c);

}  // namespace ptrap
