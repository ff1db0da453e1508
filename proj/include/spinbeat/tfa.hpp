#pragma once

#include "spinbeat/common.hpp"

#include <span>
#include <vector>

namespace spinbeat {

struct CorrelationSeries;

/// (C - <C>_t) / (C(0) - <C>_t). Throws Error for a degenerate series.
std::vector<double> normalize_correlation(std::span<const double> values);

/// Same normalization, computed on the dynamic part of the series.
std::vector<double> normalize_correlation(const CorrelationSeries& series);

struct Spectrum {
    std::vector<double> omega_bar;
    std::vector<double> power;
};

/// One-sided rectangular-window periodogram of `x` zero-padded to
/// zero_pad_factor * x.size() samples. Frequencies are angular, in units of
/// 1 / (time unit of dt).
Spectrum power_spectrum(std::span<const double> x, double dt, int zero_pad_factor = 1);

/// Bump wavelet, psi^(xi) = exp(1 - 1 / (1 - (xi - mu)^2 / sigma^2)) on
/// |xi - mu| < sigma and zero elsewhere.
struct BumpParams {
    double mu = 5.0;
    double sigma = 0.6;

    void validate() const;
    double operator()(double xi) const;
    double support_lo() const { return mu - sigma; }
    double support_hi() const { return mu + sigma; }
    /// RMS duration of the mother wavelet in time.
    double time_spread() const;
};

struct CwtOptions {
    BumpParams bump;
    int voices = 32;
    /// Scale range; zero selects (2 dt, duration / 4).
    double a_min = 0.0;
    double a_max = 0.0;
};

/// Continuous wavelet transform on log-spaced scales. Rows follow `scales`
/// (ascending, so center frequencies descend); columns are time samples.
struct Scalogram {
    std::vector<double> scales;
    std::vector<double> center_freqs;   ///< mu / a
    std::vector<double> coi_halfwidth;  ///< cone of influence half-width per scale, time units
    std::vector<double> times;
    double dt = 0.0;
    int voices = 0;
    BumpParams bump;
    ComplexMatrix coeffs;
    ComplexMatrix dcoeffs;  ///< d/db W, spectral derivative

    /// True when column `col` of row `row` is outside the cone of influence.
    bool interior(Eigen::Index row, Eigen::Index col) const;
};

/// Scales from the options converted to a frequency band [omega_lo, omega_hi].
CwtOptions cwt_options_for_band(const BumpParams& bump, int voices, double omega_lo,
                                double omega_hi);

Scalogram cwt_bump(std::span<const double> x, double dt, const CwtOptions& options);

/// Synchrosqueezed transform. Bins are the scalogram's center frequencies
/// in ascending order.
struct SSTMap {
    std::vector<double> freq_bins;
    std::vector<double> times;
    double threshold_gamma = 0.0;
    ComplexMatrix coeffs;  ///< rows follow freq_bins
};

/// Cells with |W| > gamma max|W| are moved to the bin nearest (in log
/// frequency) to Re(-i dW/W), carrying W a^-3/2 da. Estimates at or below
/// zero, or more than half a bin beyond the grid, are discarded.
SSTMap synchrosqueeze(const Scalogram& w, double gamma);

/// Sum over a^-3/2 da |W| per column, the bound on the squeezed mass.
std::vector<double> cwt_measure_mass(const Scalogram& w);

/// Per-column sum of |coeff| over rows whose frequency lies in [lo, hi].
std::vector<double> band_amplitude(const SSTMap& map, double omega_lo, double omega_hi);
std::vector<double> band_amplitude(const Scalogram& w, double omega_lo, double omega_hi);

}  // namespace spinbeat
