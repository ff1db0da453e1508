#include "spinbeat/tfa.hpp"

#include "spinbeat/cce.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>

namespace spinbeat {

namespace {

constexpr double kPi = constants::kPi;
// Cone of influence half-width, in RMS durations of the scaled wavelet.
constexpr double kCoiSpreads = 3.0;

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

FftwBuffer fftw_buffer(std::size_t n) {
    return FftwBuffer(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
}

class Plan {
public:
    explicit Plan(fftw_plan p) : plan_(p) {}
    ~Plan() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan_);
    }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
    fftw_plan get() const { return plan_; }

private:
    fftw_plan plan_;
};

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

/// Forward DFT of a real sequence zero-padded to `n`; returns bins 0..n/2.
std::vector<Complex> real_dft(std::span<const double> x, std::size_t n) {
    std::unique_ptr<double[], FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
    FftwBuffer out = fftw_buffer(n / 2 + 1);
    std::fill(in.get(), in.get() + n, 0.0);
    std::copy(x.begin(), x.end(), in.get());
    fftw_plan raw;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        raw = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE);
    }
    Plan plan(raw);
    fftw_execute(plan.get());
    std::vector<Complex> bins(n / 2 + 1);
    for (std::size_t k = 0; k < bins.size(); ++k) bins[k] = {out[k][0], out[k][1]};
    return bins;
}

std::vector<double> normalize_impl(std::span<const double> v, double reference) {
    const std::size_t n = v.size();
    if (n < 2) throw Error("normalize: series needs at least 2 samples");
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(n);
    std::vector<double> y(n);
    double m2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        y[j] = v[j] - m;
        m2 += y[j];
    }
    m2 /= static_cast<double>(n);
    for (double& x : y) x -= m2;
    const double denom = y[0];
    if (!(std::abs(denom) > 1e-14 * std::abs(reference)) || denom == 0.0) {
        throw Error("normalize: degenerate series, C(0) equals its time average");
    }
    for (double& x : y) x /= denom;
    return y;
}

std::size_t bin_count(const std::vector<double>& axis, double lo, double hi) {
    return static_cast<std::size_t>(std::count_if(
        axis.begin(), axis.end(), [&](double f) { return f >= lo && f <= hi; }));
}

}  // namespace

std::vector<double> normalize_correlation(std::span<const double> values) {
    if (values.empty()) throw Error("normalize: empty series");
    return normalize_impl(values, values[0]);
}

std::vector<double> normalize_correlation(const CorrelationSeries& series) {
    return normalize_impl(series.dynamic, series.c0);
}

Spectrum power_spectrum(std::span<const double> x, double dt, int zero_pad_factor) {
    if (x.size() < 2) throw Error("power spectrum: series needs at least 2 samples");
    if (!(dt > 0.0)) throw Error("power spectrum: dt must be positive");
    if (zero_pad_factor < 1) throw Error("power spectrum: zero-pad factor must be >= 1");
    const std::size_t n = x.size() * static_cast<std::size_t>(zero_pad_factor);
    const std::vector<Complex> bins = real_dft(x, n);
    Spectrum s;
    s.omega_bar.resize(bins.size());
    s.power.resize(bins.size());
    const double scale = dt / static_cast<double>(x.size());
    for (std::size_t k = 0; k < bins.size(); ++k) {
        s.omega_bar[k] = 2.0 * kPi * static_cast<double>(k) / (static_cast<double>(n) * dt);
        const bool edge = k == 0 || (n % 2 == 0 && k == n / 2);
        s.power[k] = std::norm(bins[k]) * scale * (edge ? 1.0 : 2.0);
    }
    return s;
}

void BumpParams::validate() const {
    if (!(sigma > 0.0 && mu > sigma)) throw Error("bump wavelet needs mu > sigma > 0");
}

double BumpParams::operator()(double xi) const {
    const double u = (xi - mu) / sigma;
    if (!(std::abs(u) < 1.0)) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - u * u));
}

double BumpParams::time_spread() const {
    validate();
    // Parseval: <t^2> = int |psi^'|^2 / int |psi^|^2 over the support.
    constexpr int kSteps = 20000;
    const double h = 2.0 * sigma / kSteps;
    double num = 0.0, den = 0.0;
    for (int k = 1; k < kSteps; ++k) {
        const double xi = mu - sigma + k * h;
        const double u = (xi - mu) / sigma;
        const double p = (*this)(xi);
        const double dp = p * (-2.0 * u / (sigma * (1.0 - u * u) * (1.0 - u * u)));
        num += dp * dp;
        den += p * p;
    }
    return std::sqrt(num / den);
}

bool Scalogram::interior(Eigen::Index row, Eigen::Index col) const {
    const double t = times[static_cast<std::size_t>(col)];
    const double w = coi_halfwidth[static_cast<std::size_t>(row)];
    return t >= times.front() + w && t <= times.back() - w;
}

CwtOptions cwt_options_for_band(const BumpParams& bump, int voices, double omega_lo,
                                double omega_hi) {
    if (!(omega_lo > 0.0 && omega_hi > omega_lo)) throw Error("cwt: invalid frequency band");
    CwtOptions o;
    o.bump = bump;
    o.voices = voices;
    o.a_min = bump.mu / omega_hi;
    o.a_max = bump.mu / omega_lo;
    return o;
}

Scalogram cwt_bump(std::span<const double> x, double dt, const CwtOptions& options) {
    options.bump.validate();
    if (options.voices < 1) throw Error("cwt: voices per octave must be >= 1");
    if (x.size() < 2) throw Error("cwt: series needs at least 2 samples");
    if (!(dt > 0.0)) throw Error("cwt: dt must be positive");
    const std::size_t n = x.size();
    const double duration = static_cast<double>(n - 1) * dt;
    const double a_min = options.a_min > 0.0 ? options.a_min : 2.0 * dt;
    const double a_max = options.a_max > 0.0 ? options.a_max : duration / 4.0;
    if (!(a_max >= a_min)) throw Error("cwt: empty scale range");
    const double nyquist = kPi / dt;
    if (options.bump.support_lo() / a_min >= nyquist) {
        throw Error("cwt: scale range has no wavelet support below the Nyquist frequency");
    }

    Scalogram w;
    w.dt = dt;
    w.voices = options.voices;
    w.bump = options.bump;
    const double v = options.voices;
    const int top = static_cast<int>(std::floor(v * std::log2(a_max / a_min) + 1e-9));
    const double spread = options.bump.time_spread();
    for (int j = 0; j <= top; ++j) {
        const double a = a_min * std::exp2(j / v);
        w.scales.push_back(a);
        w.center_freqs.push_back(options.bump.mu / a);
        w.coi_halfwidth.push_back(kCoiSpreads * spread * a);
    }
    w.times.resize(n);
    for (std::size_t j = 0; j < n; ++j) w.times[j] = static_cast<double>(j) * dt;

    const std::size_t npad = next_pow2(2 * n);
    const std::vector<Complex> spectrum = real_dft(x, npad);
    const Eigen::Index rows = static_cast<Eigen::Index>(w.scales.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(n);
    w.coeffs.resize(rows, cols);
    w.dcoeffs.resize(rows, cols);

    fftw_plan raw;
    {
        FftwBuffer in = fftw_buffer(npad), out = fftw_buffer(npad);
        std::lock_guard<std::mutex> lock(planner_mutex());
        raw = fftw_plan_dft_1d(static_cast<int>(npad), in.get(), out.get(), FFTW_BACKWARD,
                               FFTW_ESTIMATE);
    }
    const Plan plan(raw);
    const double inv_n = 1.0 / static_cast<double>(npad);
    const double domega = 2.0 * kPi / (static_cast<double>(npad) * dt);

#pragma omp parallel
    {
        FftwBuffer yin = fftw_buffer(npad), yout = fftw_buffer(npad);
        FftwBuffer din = fftw_buffer(npad), dout = fftw_buffer(npad);
#pragma omp for schedule(dynamic, 1)
        for (Eigen::Index r = 0; r < rows; ++r) {
            const double a = w.scales[static_cast<std::size_t>(r)];
            const double root = std::sqrt(a);
            std::fill_n(&yin[0][0], 2 * npad, 0.0);
            std::fill_n(&din[0][0], 2 * npad, 0.0);
            // Analytic transform: only positive frequencies carry the wavelet.
            for (std::size_t k = 1; k <= npad / 2; ++k) {
                const double omega = static_cast<double>(k) * domega;
                const double psi = options.bump(a * omega);
                if (psi == 0.0) continue;
                const Complex y = spectrum[k] * (root * psi);
                const Complex d = y * Complex(0.0, omega);
                yin[k][0] = y.real();
                yin[k][1] = y.imag();
                din[k][0] = d.real();
                din[k][1] = d.imag();
            }
            fftw_execute_dft(plan.get(), yin.get(), yout.get());
            fftw_execute_dft(plan.get(), din.get(), dout.get());
            for (Eigen::Index c = 0; c < cols; ++c) {
                w.coeffs(r, c) = Complex(yout[c][0], yout[c][1]) * inv_n;
                w.dcoeffs(r, c) = Complex(dout[c][0], dout[c][1]) * inv_n;
            }
        }
    }
    return w;
}

SSTMap synchrosqueeze(const Scalogram& w, double gamma) {
    if (!(gamma >= 0.0)) throw Error("synchrosqueeze: gamma must be non-negative");
    const Eigen::Index rows = w.coeffs.rows();
    const Eigen::Index cols = w.coeffs.cols();
    if (rows == 0) throw Error("synchrosqueeze: empty scalogram");
    SSTMap map;
    map.threshold_gamma = gamma;
    map.times = w.times;
    map.freq_bins.assign(w.center_freqs.rbegin(), w.center_freqs.rend());
    map.coeffs = ComplexMatrix::Zero(rows, cols);

    const double threshold = gamma * w.coeffs.cwiseAbs().maxCoeff();
    const double f_lo = map.freq_bins.front();
    const double log_step = std::log(2.0) / w.voices;
    std::vector<double> measure(static_cast<std::size_t>(rows));
    for (Eigen::Index r = 0; r < rows; ++r) {
        const double a = w.scales[static_cast<std::size_t>(r)];
        measure[static_cast<std::size_t>(r)] = std::pow(a, -1.5) * a * log_step;
    }

#pragma omp parallel for schedule(static)
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            const Complex W = w.coeffs(r, c);
            if (!(std::abs(W) > threshold) || W == Complex(0.0)) continue;
            const double omega = (Complex(0.0, -1.0) * w.dcoeffs(r, c) / W).real();
            if (!(omega > 0.0)) continue;
            const double pos = std::log(omega / f_lo) / log_step;
            const double bin = std::round(pos);
            if (bin < 0.0 || bin >= static_cast<double>(rows)) continue;
            map.coeffs(static_cast<Eigen::Index>(bin), c) += W * measure[static_cast<std::size_t>(r)];
        }
    }
    return map;
}

std::vector<double> cwt_measure_mass(const Scalogram& w) {
    const double log_step = std::log(2.0) / w.voices;
    std::vector<double> mass(static_cast<std::size_t>(w.coeffs.cols()), 0.0);
    for (Eigen::Index r = 0; r < w.coeffs.rows(); ++r) {
        const double a = w.scales[static_cast<std::size_t>(r)];
        const double m = std::pow(a, -1.5) * a * log_step;
        for (Eigen::Index c = 0; c < w.coeffs.cols(); ++c) {
            mass[static_cast<std::size_t>(c)] += std::abs(w.coeffs(r, c)) * m;
        }
    }
    return mass;
}

std::vector<double> band_amplitude(const SSTMap& map, double omega_lo, double omega_hi) {
    if (!(omega_hi >= omega_lo) || bin_count(map.freq_bins, omega_lo, omega_hi) == 0) {
        throw Error("band amplitude: empty band");
    }
    std::vector<double> out(static_cast<std::size_t>(map.coeffs.cols()), 0.0);
    for (std::size_t r = 0; r < map.freq_bins.size(); ++r) {
        if (map.freq_bins[r] < omega_lo || map.freq_bins[r] > omega_hi) continue;
        for (Eigen::Index c = 0; c < map.coeffs.cols(); ++c) {
            out[static_cast<std::size_t>(c)] += std::abs(map.coeffs(static_cast<Eigen::Index>(r), c));
        }
    }
    return out;
}

std::vector<double> band_amplitude(const Scalogram& w, double omega_lo, double omega_hi) {
    if (!(omega_hi >= omega_lo) || bin_count(w.center_freqs, omega_lo, omega_hi) == 0) {
        throw Error("band amplitude: empty band");
    }
    std::vector<double> out(static_cast<std::size_t>(w.coeffs.cols()), 0.0);
    for (std::size_t r = 0; r < w.center_freqs.size(); ++r) {
        if (w.center_freqs[r] < omega_lo || w.center_freqs[r] > omega_hi) continue;
        for (Eigen::Index c = 0; c < w.coeffs.cols(); ++c) {
            out[static_cast<std::size_t>(c)] += std::abs(w.coeffs(static_cast<Eigen::Index>(r), c));
        }
    }
    return out;
}

}  // namespace spinbeat
