#pragma once

#include "ptrap/model.hpp"
#include "ptrap/multipole_fit.hpp"

namespace ptrap {

/// Mathieu parameters for u'' + (a - 2 q cos 2 tau) u = 0 along one axis,
/// tau = Omega t / 2.
struct MathieuParams {
    double a = 0.0;
    double q = 0.0;
    Axis axis = Axis::z;
};

struct SecularResult {
    double beta = 0.0;
    double secular_frequency = 0.0;  // Hz
    bool stable = false;
};

/// Ideal-trap parameters for a ring-driven trap with grounded end-caps:
///   a_z = -8 Q U / (m r0^2 Omega^2),  q_z = 4 Q V / (m r0^2 Omega^2),
///   a_x = a_y = -a_z / 2,             q_x = q_y = -q_z / 2.
/// U > 0 on the ring is radially confining and axially defocusing.
MathieuParams ideal_aq(const IonSpecies& ion, const TrapGeometry& geom, const OperatingPoint& op, Axis axis);

/// Parameters when the quadratic part of the potential has per-axis
/// coefficients alpha2, beta2, gamma2 instead of 1/2, 1/2, -1. Dipole terms
/// shift the equilibrium but not the homogeneous motion, so they do not enter.
MathieuParams perturbed_aq(const IonSpecies& ion, const TrapGeometry& geom, const OperatingPoint& op,
                           const MultipoleCoefficients& coeffs, Axis axis);

/// Small-parameter approximation sqrt(a + q^2/2). Throws InstabilityError
/// for a negative radicand.
double beta_approx(const MathieuParams& p);

/// Characteristic exponent in the first stability region from the
/// continued-fraction relation
///   beta^2 = a + q^2 / ((beta+2)^2 - a - q^2 / ((beta+4)^2 - a - ...))
///              + q^2 / ((beta-2)^2 - a - q^2 / ((beta-4)^2 - a - ...)).
/// Depth grows until beta changes by less than `tol` (at most 40 levels).
/// Throws InstabilityError when no root exists in (0, 1).
double beta_continued_fraction(const MathieuParams& p, double tol = 1e-10);

/// beta * (Omega / 2 pi) / 2. Throws InstabilityError unless 0 < beta < 1.
double secular_frequency(double beta, const OperatingPoint& op);

/// Non-throwing combination of the two above; `stable` is false outside the
/// first region.
SecularResult analyze(const MathieuParams& p, const OperatingPoint& op, double tol = 1e-10);

}  // namespace ptrap
