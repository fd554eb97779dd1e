#pragma once

#include <limits>
#include <span>
#include <vector>

#include "shmedge/types.hpp"

namespace shmedge {

/// Split a trace into contiguous non-overlapping windows of
/// round(duration_s * sample_rate_hz) samples. The trailing remainder is
/// discarded. Throws InsufficientDataError if the trace is shorter than
/// one window.
std::vector<Window> windowize(const AccelTrace& trace, double duration_s);

/// Sum of squared samples.
double window_energy(const Window& w);
double window_energy(std::span<const double> values);

/// Sentinel returned by rsnr_db for an exact reconstruction.
inline constexpr double kRsnrPerfect = std::numeric_limits<double>::infinity();

/// Reconstruction SNR: 20*log10(||x|| / ||x - x_hat||). Returns
/// kRsnrPerfect when the residual is exactly zero. Throws
/// ValidationError when ||x|| == 0 and DimensionError on length mismatch.
double rsnr_db(std::span<const double> x, std::span<const double> x_hat);
double rsnr_db(const Window& x, const Window& x_hat);

/// One-sided magnitude spectrum, scaled 2/M, bins [0, cutoff_hz) at
/// sample_rate/M resolution. Throws ParameterError if cutoff exceeds Nyquist.
SpectralFrame fft_frame(const Window& w, double cutoff_hz = 25.0);

/// Haar DWT approximation coefficients at the requested level. Window
/// length must be divisible by 2^levels.
SpectralFrame dwt_frame(const Window& w, int levels = 2);

/// Full orthonormal Haar decomposition: approximation at `levels` plus the
/// detail coefficients of every level (details[0] is the first, longest
/// level). Energy is preserved exactly up to roundoff.
struct HaarDecomposition {
    std::vector<double> approx;
    std::vector<std::vector<double>> details;
};
HaarDecomposition haar_decompose(std::span<const double> values, int levels);

}  // namespace shmedge
