#include "oracles.hpp"

#include <cmath>
#include <complex>

namespace oracle {

namespace {

struct State {
    double x, v;
};

State rk4_period(double a, double q, State s, int steps) {
    const double pi = std::acos(-1.0);
    const double h = pi / steps;
    const auto f = [&](double t, const State& y) { return State{y.v, -(a - 2.0 * q * std::cos(2.0 * t)) * y.x}; };
    double t = 0.0;
    for (int i = 0; i < steps; ++i) {
        const State k1 = f(t, s);
        const State k2 = f(t + h / 2, {s.x + h / 2 * k1.x, s.v + h / 2 * k1.v});
        const State k3 = f(t + h / 2, {s.x + h / 2 * k2.x, s.v + h / 2 * k2.v});
        const State k4 = f(t + h, {s.x + h * k3.x, s.v + h * k3.v});
        s.x += h / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
        s.v += h / 6 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v);
        t += h;
    }
    return s;
}

}  // namespace

double floquet_beta(double a, double q, int steps) {
    const State c1 = rk4_period(a, q, {1.0, 0.0}, steps);
    const State c2 = rk4_period(a, q, {0.0, 1.0}, steps);
    const double trace = c1.x + c2.v;
    if (std::abs(trace) >= 2.0) return -1.0;
    return std::acos(trace / 2.0) / std::acos(-1.0);
}

double ideal_potential(double r0, double x, double y, double z) {
    return 0.5 + (x * x + y * y - 2.0 * z * z) / (2.0 * r0 * r0);
}

std::pair<double, double> mathieu_from_curvature(double charge_over_mass, double r0, double omega, double u_dc,
                                                 double v_rf, double c) {
    // m x'' = -Q phi0(t) 2 c x / r0^2, t = 2 tau / Omega
    // d2x/dtau2 = -(8 Q c / (m r0^2 Omega^2)) (U + V cos 2 tau) x
    const double k = 8.0 * charge_over_mass * c / (r0 * r0 * omega * omega);
    return {k * u_dc, -0.5 * k * v_rf};
}

double dft_peak(const double* series, int n, double dt, double f_lo, double f_hi, double df) {
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += series[i];
    mean /= n;
    const double two_pi = 2.0 * std::acos(-1.0);
    double best_f = f_lo, best = -1.0;
    for (double f = f_lo; f <= f_hi; f += df) {
        std::complex<double> acc{0.0, 0.0};
        for (int i = 0; i < n; ++i) {
            const double w = 0.5 - 0.5 * std::cos(two_pi * i / (n - 1));
            acc += w * (series[i] - mean) * std::polar(1.0, -two_pi * f * i * dt);
        }
        if (std::abs(acc) > best) {
            best = std::abs(acc);
            best_f = f;
        }
    }
    return best_f;
}

}  // namespace oracle
