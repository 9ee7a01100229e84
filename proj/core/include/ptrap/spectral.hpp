#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ptrap/dynamics.hpp"

namespace ptrap {

struct Spectrum {
    double bin_width = 0.0;          // Hz, 1 / (N dt) for transform length N
    std::size_t transform_length = 0;
    std::vector<double> magnitudes;  // N/2 + 1 bins, amplitude-normalised
    Axis source_axis = Axis::x;

    double frequency(std::size_t bin) const noexcept { return static_cast<double>(bin) * bin_width; }
};

struct PeakEstimate {
    double frequency = 0.0;  // Hz
    double magnitude = 0.0;
    bool interpolated = false;
};

/// Mean-removed, Hann-windowed real DFT magnitude of `series`, zero-padded to
/// four times the next power of two. A unit-amplitude sinusoid peaks near 1.
Spectrum spectrum_of_series(std::span<const double> series, double sample_interval, Axis axis = Axis::x);

/// Spectrum of one coordinate. Throws InstabilityError for an escaped
/// trajectory and PreconditionError below 512 samples.
Spectrum spectrum_of(const Trajectory& traj, Axis axis);

/// Largest local maximum strictly below drive_frequency / 2, refined by a
/// three-point parabola through the log magnitudes. Throws NoPeakError when
/// the spectrum is empty or the peak power is below 1e-6 of the total.
PeakEstimate find_secular_peak(const Spectrum& spectrum, double drive_frequency_hz);

/// Secular peak along every axis of a stable trajectory.
std::array<PeakEstimate, 3> secular_peaks(const Trajectory& traj, double drive_frequency_hz);

/// frequency_hz,magnitude rows up to `max_frequency_hz` (all bins if <= 0).
std::string spectrum_csv(const Spectrum& spectrum, double max_frequency_hz = 0.0);

}  // namespace ptrap
