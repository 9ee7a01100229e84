#include "ptrap/mathieu.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "ptrap/error.hpp"

namespace ptrap {

namespace {

// Q / (m r0^2 Omega^2)
double drive_scale(const IonSpecies& ion, const TrapGeometry& geom, const OperatingPoint& op) {
    ion.validate();
    op.validate();
    if (!(geom.r0 > 0.0)) throw PreconditionError("r0 must be positive");
    const double w = op.drive_angular_frequency;
    return ion.charge / (ion.mass * geom.r0 * geom.r0 * w * w);
}

double continued_fraction_rhs(double beta, double a, double q, int depth) {
    const double q2 = q * q;
    double up = 0.0, down = 0.0;
    for (int k = depth; k >= 1; --k) {
        const double bp = beta + 2.0 * k;
        const double bm = beta - 2.0 * k;
        up = q2 / (bp * bp - a - up);
        down = q2 / (bm * bm - a - down);
    }
    return a + up + down;
}

// Root of beta^2 = rhs(beta) in (0, 1) at fixed depth.
std::optional<double> solve_at_depth(double a, double q, int depth, double tol) {
    const double radicand = a + 0.5 * q * q;
    double beta = radicand > 0.0 ? std::sqrt(radicand) : 0.05;
    beta = std::clamp(beta, 1e-6, 0.999);

    for (int it = 0; it < 400; ++it) {
        const double rhs = continued_fraction_rhs(beta, a, q, depth);
        if (!(rhs >= 0.0) || !std::isfinite(rhs)) break;
        const double next = std::sqrt(rhs);
        if (next >= 1.0 + 1e-3) break;
        if (std::abs(next - beta) < 0.01 * tol) {
            if (next > 0.0 && next < 1.0) return next;
            break;
        }
        beta = next;
    }

    // Slow or failed iteration (near the region edges): bracket a sign change
    // of h(beta) = rhs - beta^2 and reject brackets that straddle a pole.
    const auto h = [&](double b) { return continued_fraction_rhs(b, a, q, depth) - b * b; };
    constexpr int kScan = 400;
    double b_lo = 1e-9, h_lo = h(b_lo);
    for (int s = 1; s <= kScan; ++s) {
        const double b_hi = s == kScan ? 1.0 - 1e-12 : static_cast<double>(s) / kScan;
        const double h_hi = h(b_hi);
        if (std::isfinite(h_lo) && std::isfinite(h_hi) && (h_lo == 0.0 || (h_lo < 0.0) != (h_hi < 0.0))) {
            double lo = b_lo, hi = b_hi, flo = h_lo;
            for (int it = 0; it < 200 && hi - lo > 0.01 * tol; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = h(mid);
                if ((fm < 0.0) == (flo < 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            const double root = 0.5 * (lo + hi);
            if (std::abs(h(root)) < 1e-6) return root;
        }
        b_lo = b_hi;
        h_lo = h_hi;
    }
    return std::nullopt;
}

std::optional<double> try_beta(double a, double q, double tol) {
    if (!std::isfinite(a) || !std::isfinite(q)) return std::nullopt;
    if (q == 0.0) {
        if (a > 0.0 && a < 1.0) return std::sqrt(a);
        return std::nullopt;
    }
    std::optional<double> prev;
    for (int depth = 2; depth <= 40; depth += 2) {
        const auto cur = solve_at_depth(a, q, depth, tol);
        if (!cur) {
            if (depth >= 8) return std::nullopt;
            prev.reset();
            continue;
        }
        if (prev && std::abs(*cur - *prev) < tol) return *cur;
        prev = cur;
    }
    return prev;
}

}  // namespace

MathieuParams ideal_aq(const IonSpecies& ion, const TrapGeometry& geom, const OperatingPoint& op, Axis axis) {
    const double k = drive_scale(ion, geom, op);
    const double a_base = 8.0 * k * op.u_dc;
    const double q_base = 4.0 * k * op.v_rf;
    if (axis == Axis::z) return {-a_base, q_base, axis};
    return {a_base * 0.5, -q_base * 0.5, axis};
}

MathieuParams perturbed_aq(const IonSpecies& ion, const TrapGeometry& geom, const OperatingPoint& op,
                           const MultipoleCoefficients& coeffs, Axis axis) {
    const double k = drive_scale(ion, geom, op);
    const double c = coeffs.quadratic(axis);
    return {8.0 * k * op.u_dc * c, -(4.0 * k * op.v_rf) * c, axis};
}

double beta_approx(const MathieuParams& p) {
    const double r = p.a + 0.5 * p.q * p.q;
    if (r < 0.0)
        throw InstabilityError("a + q^2/2 < 0 (a=" + std::to_string(p.a) + ", q=" + std::to_string(p.q)
                               + "): no real beta in the small-parameter approximation");
    return std::sqrt(r);
}

double beta_continued_fraction(const MathieuParams& p, double tol) {
    if (!(tol > 0.0)) throw PreconditionError("continued-fraction tolerance must be positive");
    const auto beta = try_beta(p.a, p.q, tol);
    if (!beta || !(*beta > 0.0 && *beta < 1.0))
        throw InstabilityError("(a=" + std::to_string(p.a) + ", q=" + std::to_string(p.q) + ") along "
                               + std::string(to_string(p.axis)) + " is outside the first stability region");
    return *beta;
}

double secular_frequency(double beta, const OperatingPoint& op) {
    if (!(beta > 0.0 && beta < 1.0))
        throw InstabilityError("beta=" + std::to_string(beta) + " is outside the first stability region (0, 1)");
    return beta * op.drive_frequency_hz() * 0.5;
}

SecularResult analyze(const MathieuParams& p, const OperatingPoint& op, double tol) {
    const auto beta = try_beta(p.a, p.q, tol);
    if (!beta || !(*beta > 0.0 && *beta < 1.0)) return {beta.value_or(0.0), 0.0, false};
    return {*beta, *beta * op.drive_frequency_hz() * 0.5, true};
}

}  // namespace ptrap
