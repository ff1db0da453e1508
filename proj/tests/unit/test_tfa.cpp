#include "helpers.hpp"
#include "spinbeat/tfa.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace spinbeat;
using testing::tone;

namespace {

constexpr double kPi = constants::kPi;

std::size_t nearest_row(const std::vector<double>& freqs, double f) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < freqs.size(); ++k) {
        if (std::abs(freqs[k] - f) < std::abs(freqs[best] - f)) best = k;
    }
    return best;
}

/// Mean spacing of local minima of `y` over [lo, hi), refined by parabolic fits.
double trough_period(const std::vector<double>& y, double dt, std::size_t lo, std::size_t hi) {
    std::vector<double> troughs;
    for (std::size_t j = lo + 1; j + 1 < hi; ++j) {
        if (y[j] < y[j - 1] && y[j] <= y[j + 1]) {
            const double den = y[j - 1] - 2 * y[j] + y[j + 1];
            const double shift = den > 0 ? 0.5 * (y[j - 1] - y[j + 1]) / den : 0.0;
            troughs.push_back((static_cast<double>(j) + shift) * dt);
        }
    }
    if (troughs.size() < 2) return 0.0;
    return (troughs.back() - troughs.front()) / static_cast<double>(troughs.size() - 1);
}

double spread(const std::vector<double>& f, const Eigen::VectorXcd& col) {
    double w = 0, m = 0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double e = std::norm(col(static_cast<Eigen::Index>(k)));
        w += e;
        m += e * f[k];
    }
    m /= w;
    double v = 0;
    for (std::size_t k = 0; k < f.size(); ++k) v += std::norm(col(static_cast<Eigen::Index>(k))) * (f[k] - m) * (f[k] - m);
    return std::sqrt(v / w);
}

}  // namespace

TEST_CASE("normalization pins C(0) and removes the mean") {
    std::vector<double> c(1000);
    for (std::size_t j = 0; j < c.size(); ++j) c[j] = 5.0 + 1e-6 * std::exp(-0.01 * j) * std::cos(0.3 * j);
    const auto cb = normalize_correlation(c);
    CHECK(cb[0] == 1.0);
    CHECK(std::abs(std::accumulate(cb.begin(), cb.end(), 0.0) / cb.size()) < 1e-12);
    CHECK_THROWS_AS(normalize_correlation(std::vector<double>(50, 2.0)), Error);
    CHECK_THROWS_AS(normalize_correlation(std::vector<double>{1.0}), Error);

    const std::size_t n = 512;
    std::vector<double> x(n);
    for (std::size_t j = 0; j < n; ++j) x[j] = std::cos(2 * kPi * 7 * j / n);
    const auto xb = normalize_correlation(x);
    for (std::size_t j = 0; j < n; ++j) CHECK(std::abs(xb[j] - x[j]) < 1e-12);
}

TEST_CASE("normalization of a series uses its dynamic part") {
    CorrelationSeries s;
    s.grid = {10.0, 100};
    s.c0 = 1e8;
    s.dynamic.resize(100);
    for (std::size_t j = 0; j < 100; ++j) s.dynamic[j] = std::cos(0.7 * j) - 1.0;
    const auto cb = normalize_correlation(s);
    CHECK(cb[0] == 1.0);
    CHECK(std::abs(std::accumulate(cb.begin(), cb.end(), 0.0)) / 100 < 1e-12);
    s.dynamic.assign(100, 0.0);
    CHECK_THROWS_AS(normalize_correlation(s), Error);
}

TEST_CASE("periodogram places tones on their bins") {
    const std::size_t n = 4096;
    const double dt = 2 * kPi * 100 / (n * 0.5);  // 0.5 falls on bin 100
    const Spectrum s = power_spectrum(tone(n, dt, 0.5), dt);
    CHECK(s.power.size() == n / 2 + 1);
    const auto peak = std::max_element(s.power.begin(), s.power.end()) - s.power.begin();
    CHECK(peak == 100);
    CHECK(s.omega_bar[100] == doctest::Approx(0.5).epsilon(1e-12));
    for (double p : s.power) CHECK(p >= 0.0);
    for (std::size_t k = 1; k < s.omega_bar.size(); ++k) {
        CHECK(s.omega_bar[k] - s.omega_bar[k - 1] == doctest::Approx(s.omega_bar[1]).epsilon(1e-12));
    }

    auto two = tone(n, dt, 0.5);
    const auto other = tone(n, dt, 0.9);
    for (std::size_t j = 0; j < n; ++j) two[j] += other[j];
    const Spectrum s2 = power_spectrum(two, dt, 2);
    CHECK(s2.power[200] == doctest::Approx(s2.power[360]).epsilon(0.01));

    const Spectrum off = power_spectrum(tone(1000, 0.05, 0.5), 0.05, 4);
    const auto pk = std::max_element(off.power.begin(), off.power.end()) - off.power.begin();
    CHECK(std::abs(off.omega_bar[pk] - 0.5) <= off.omega_bar[1]);
    CHECK_THROWS_AS(power_spectrum(tone(10, 0.1, 1), 0.1, 0), Error);
}

TEST_CASE("bump wavelet support") {
    const BumpParams b;
    CHECK(b(b.mu) == 1.0);
    CHECK(b(0.0) == 0.0);
    CHECK(b(b.support_lo()) == 0.0);
    CHECK(b(b.support_hi()) == 0.0);
    CHECK(b(b.support_lo() + 1e-3) > 0.0);
    CHECK(b.support_lo() > 0.0);
    CHECK(b.time_spread() > 0.0);
    CHECK_THROWS_AS((BumpParams{0.5, 0.6}.validate()), Error);
    CHECK_THROWS_AS((BumpParams{5.0, 0.0}.validate()), Error);
}

TEST_CASE("CWT of zero is zero and scales are log-spaced") {
    const Scalogram w = cwt_bump(std::vector<double>(256, 0.0), 0.1, {});
    CHECK(w.coeffs.cwiseAbs().maxCoeff() == 0.0);
    for (std::size_t k = 1; k < w.scales.size(); ++k) {
        CHECK(w.scales[k] / w.scales[k - 1] == doctest::Approx(std::exp2(1.0 / 32)).epsilon(1e-12));
        CHECK(w.center_freqs[k] < w.center_freqs[k - 1]);
    }
    CHECK(w.scales.front() == doctest::Approx(0.2));
}

TEST_CASE("CWT tone ridge sits at the tone frequency and is flat") {
    const std::size_t n = 4096;
    const double dt = 0.25;
    const Scalogram w = cwt_bump(tone(n, dt, 0.5), dt, {});
    const Eigen::Index mid = n / 2;
    Eigen::Index ridge = 0;
    w.coeffs.col(mid).cwiseAbs().maxCoeff(&ridge);
    CHECK(std::abs(static_cast<long>(ridge) - static_cast<long>(nearest_row(w.center_freqs, 0.5))) <= 1);
    double lo = INFINITY, hi = 0;
    for (std::size_t c = n / 4; c < 3 * n / 4; ++c) {
        const double v = std::abs(w.coeffs(ridge, static_cast<Eigen::Index>(c)));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK((hi - lo) / hi < 0.02);
}

TEST_CASE("CWT linearity and time-shift covariance") {
    const std::size_t n = 2048;
    const double dt = 0.1;
    std::vector<double> x(n), y(n), xs(n, 0.0);
    const std::size_t k = 37;
    for (std::size_t j = 0; j < n; ++j) {
        const double t = (static_cast<double>(j) - 900.0) * dt;
        x[j] = std::exp(-t * t / 800.0) * std::cos(0.8 * t);
        y[j] = std::sin(0.13 * j) + 0.2 * std::cos(1.7 * j);
    }
    for (std::size_t j = k; j < n; ++j) xs[j] = x[j - k];
    const CwtOptions opt;
    const Scalogram wx = cwt_bump(x, dt, opt), wy = cwt_bump(y, dt, opt);
    std::vector<double> z(n);
    for (std::size_t j = 0; j < n; ++j) z[j] = 2.5 * x[j] - 0.7 * y[j];
    const Scalogram wz = cwt_bump(z, dt, opt);
    const double scale = wz.coeffs.cwiseAbs().maxCoeff();
    CHECK((wz.coeffs - (2.5 * wx.coeffs - 0.7 * wy.coeffs)).cwiseAbs().maxCoeff() < 1e-10 * scale);

    const Scalogram ws = cwt_bump(xs, dt, opt);
    double worst = 0.0;
    for (Eigen::Index r = 0; r < wx.coeffs.rows(); ++r) {
        for (Eigen::Index c = 0; c + static_cast<Eigen::Index>(k) < wx.coeffs.cols(); ++c) {
            if (!wx.interior(r, c) || !ws.interior(r, c + k)) continue;
            worst = std::max(worst, std::abs(ws.coeffs(r, c + k) - wx.coeffs(r, c)));
        }
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("two tones in one wavelet band beat at their difference frequency") {
    const std::size_t n = 8192;
    const double dt = 0.1;
    auto x = tone(n, dt, 0.50);
    const auto x2 = tone(n, dt, 0.52);
    for (std::size_t j = 0; j < n; ++j) x[j] += x2[j];
    const Scalogram w = cwt_bump(x, dt, {});
    const std::size_t row = nearest_row(w.center_freqs, 0.51);
    std::vector<double> env(n);
    for (std::size_t j = 0; j < n; ++j) env[j] = std::abs(w.coeffs(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)));
    const double expected = 2 * kPi / 0.02;
    CHECK(trough_period(env, dt, n / 8, 7 * n / 8) == doctest::Approx(expected).epsilon(0.05));
    const auto band = band_amplitude(w, 0.45, 0.57);
    CHECK(trough_period(band, dt, n / 8, 7 * n / 8) == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("synchrosqueezing concentrates a tone") {
    const std::size_t n = 4096;
    const double dt = 0.25;
    const Scalogram w = cwt_bump(tone(n, dt, 0.5), dt, {});
    const SSTMap t = synchrosqueeze(w, 1e-4);
    CHECK(std::is_sorted(t.freq_bins.begin(), t.freq_bins.end()));
    const Eigen::Index mid = n / 2;
    const Eigen::VectorXcd col = t.coeffs.col(mid);
    const std::size_t f0 = nearest_row(t.freq_bins, 0.5);
    double near = 0, total = 0;
    for (Eigen::Index r = 0; r < col.size(); ++r) {
        total += std::abs(col(r));
        if (std::abs(static_cast<long>(r) - static_cast<long>(f0)) <= 1) near += std::abs(col(r));
    }
    CHECK(near >= 0.9 * total);
    CHECK(spread(t.freq_bins, col) <= 0.5 * spread(w.center_freqs, w.coeffs.col(mid)));

    const auto bound = cwt_measure_mass(w);
    for (Eigen::Index c = 0; c < t.coeffs.cols(); c += 97) {
        CHECK(t.coeffs.col(c).cwiseAbs().sum() <= bound[static_cast<std::size_t>(c)] * (1 + 1e-12));
    }
    CHECK(synchrosqueeze(w, 1.0).coeffs.cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(synchrosqueeze(w, -1.0), Error);
}

TEST_CASE("band amplitude") {
    const std::size_t n = 4096;
    const double dt = 0.25;
    const Scalogram w = cwt_bump(tone(n, dt, 0.5), dt, {});
    const SSTMap t = synchrosqueeze(w, 1e-4);
    for (const auto& band : {band_amplitude(t, 0.4, 0.6), band_amplitude(w, 0.4, 0.6)}) {
        double lo = INFINITY, hi = 0;
        for (std::size_t c = n / 4; c < 3 * n / 4; ++c) {
            lo = std::min(lo, band[c]);
            hi = std::max(hi, band[c]);
        }
        CHECK((hi - lo) / hi < 0.05);
    }
    const Scalogram zero = cwt_bump(std::vector<double>(n, 0.0), dt, {});
    const auto zb = band_amplitude(synchrosqueeze(zero, 0.0), 0.4, 0.6);
    CHECK(*std::max_element(zb.begin(), zb.end()) == 0.0);
    CHECK_THROWS_AS(band_amplitude(t, 1000.0, 2000.0), Error);
    CHECK_THROWS_AS(band_amplitude(w, 0.6, 0.4), Error);
}

TEST_CASE("scale range validation") {
    CwtOptions o;
    o.a_min = 1e-4;  // support entirely above Nyquist
    CHECK_THROWS_AS(cwt_bump(tone(128, 0.1, 1.0), 0.1, o), Error);
    o.a_min = 2.0;
    o.a_max = 1.0;
    CHECK_THROWS_AS(cwt_bump(tone(128, 0.1, 1.0), 0.1, o), Error);
    const CwtOptions b = cwt_options_for_band({}, 16, 0.25, 2.0);
    CHECK(b.a_min == doctest::Approx(2.5));
    CHECK(b.a_max == doctest::Approx(20.0));
}
