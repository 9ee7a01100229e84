#include "ptrap/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <memory>
#include <mutex>
#include <numeric>

#include "ptrap/error.hpp"

namespace ptrap {

namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

class RealForwardPlan {
public:
    RealForwardPlan(std::size_t n, double* in, fftw_complex* out) {
        std::lock_guard lock(planner_mutex());
        plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
        if (!plan_) throw NumericError("FFTW could not plan a transform of length " + std::to_string(n));
    }
    ~RealForwardPlan() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan_);
    }
    RealForwardPlan(const RealForwardPlan&) = delete;
    RealForwardPlan& operator=(const RealForwardPlan&) = delete;

    void execute() const noexcept { fftw_execute(plan_); }

private:
    fftw_plan plan_ = nullptr;
};

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace

Spectrum spectrum_of_series(std::span<const double> series, double sample_interval, Axis axis) {
    const std::size_t n = series.size();
    if (n < 2) throw PreconditionError("spectrum needs at least two samples");
    if (!(sample_interval > 0.0)) throw PreconditionError("sample interval must be positive");

    const std::size_t len = 4 * next_pow2(n);
    FftwBuffer<double> in(static_cast<double*>(fftw_malloc(sizeof(double) * len)));
    FftwBuffer<fftw_complex> out(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (len / 2 + 1))));
    if (!in || !out) throw NumericError("FFT buffer allocation failed");
    RealForwardPlan plan(len, in.get(), out.get());

    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
    double window_sum = 0.0;
    const double denom = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) / denom));
        window_sum += w;
        in[i] = (series[i] - mean) * w;
    }
    std::fill(in.get() + n, in.get() + len, 0.0);
    plan.execute();

    Spectrum s;
    s.source_axis = axis;
    s.transform_length = len;
    s.bin_width = 1.0 / (static_cast<double>(len) * sample_interval);
    s.magnitudes.resize(len / 2 + 1);
    const double norm = window_sum > 0.0 ? 2.0 / window_sum : 0.0;
    for (std::size_t k = 0; k < s.magnitudes.size(); ++k)
        s.magnitudes[k] = norm * std::hypot(out[k][0], out[k][1]);
    return s;
}

Spectrum spectrum_of(const Trajectory& traj, Axis axis) {
    if (traj.escaped)
        throw InstabilityError("trajectory escaped along "
                               + std::string(to_string(traj.escape_axis.value_or(axis))) + " at t="
                               + std::to_string(traj.escape_time) + " s");
    if (traj.size() < 512) throw PreconditionError("spectrum needs at least 512 trajectory samples");
    const std::vector<double> series = traj.component(axis);
    return spectrum_of_series(series, traj.sample_interval, axis);
}

PeakEstimate find_secular_peak(const Spectrum& spectrum, double drive_frequency_hz) {
    const auto& m = spectrum.magnitudes;
    if (m.size() < 3 || !(spectrum.bin_width > 0.0)) throw NoPeakError("spectrum too short for peak search");
    const double limit = 0.5 * drive_frequency_hz;

    double total_power = 0.0;
    for (double v : m) total_power += v * v;

    std::size_t best = 0;
    for (std::size_t k = 1; k + 1 < m.size() && spectrum.frequency(k) < limit; ++k) {
        if (m[k] > m[k - 1] && m[k] >= m[k + 1] && (best == 0 || m[k] > m[best])) best = k;
    }
    if (best == 0 || !(total_power > 0.0) || m[best] * m[best] < 1e-6 * total_power)
        throw NoPeakError("no spectral peak below " + std::to_string(limit) + " Hz above the noise floor");

    PeakEstimate peak{spectrum.frequency(best), m[best], false};
    const double l = m[best - 1], c = m[best], r = m[best + 1];
    if (l > 0.0 && r > 0.0) {
        const double la = std::log(l), lb = std::log(c), lc = std::log(r);
        const double curvature = la - 2.0 * lb + lc;
        if (curvature < 0.0) {
            const double p = 0.5 * (la - lc) / curvature;
            peak.frequency = (static_cast<double>(best) + p) * spectrum.bin_width;
            peak.magnitude = std::exp(lb - 0.25 * (la - lc) * p);
            peak.interpolated = true;
        }
    }
    return peak;
}

std::array<PeakEstimate, 3> secular_peaks(const Trajectory& traj, double drive_frequency_hz) {
    std::array<PeakEstimate, 3> out{};
    for (Axis a : kAllAxes) out[index(a)] = find_secular_peak(spectrum_of(traj, a), drive_frequency_hz);
    return out;
}

std::string spectrum_csv(const Spectrum& spectrum, double max_frequency_hz) {
    std::string out = "frequency_hz,magnitude\n";
    char buf[96];
    for (std::size_t k = 0; k < spectrum.magnitudes.size(); ++k) {
        const double f = spectrum.frequency(k);
        if (max_frequency_hz > 0.0 && f > max_frequency_hz) break;
        const int len = std::snprintf(buf, sizeof buf, "%.6f,%.10e\n", f, spectrum.magnitudes[k]);
        out.append(buf, static_cast<std::size_t>(len));
    }
    return out;
}

}  // namespace ptrap
