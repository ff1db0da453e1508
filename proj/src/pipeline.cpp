#include "spinbeat/pipeline.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

namespace spinbeat {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

template <class F>
auto stage(const std::string& name, RunManifest* manifest, F&& body) {
    const auto start = Clock::now();
    auto finish = [&] {
        if (manifest) {
            const std::chrono::duration<double> d = Clock::now() - start;
            manifest->timings.emplace_back(name, d.count());
        }
    };
    try {
        if constexpr (std::is_void_v<std::invoke_result_t<F>>) {
            body();
            finish();
        } else {
            auto result = body();
            finish();
            return result;
        }
    } catch (const StageError&) {
        throw;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

class ProductWriter {
public:
    ProductWriter(RunManifest& manifest, fs::path root) : manifest_(manifest), root_(std::move(root)) {
        fs::create_directories(root_);
    }

    template <class F>
    void text(const std::string& name, F&& fill) {
        const fs::path path = root_ / name;
        fs::create_directories(path.parent_path());
        {
            std::ofstream out(path);
            if (!out) throw Error("cannot open " + path.string() + " for writing");
            fill(out);
            if (!out) throw Error("write failed: " + path.string());
        }
        record(name);
    }

    void matrix(const std::string& name, const ComplexMatrix& m) {
        fs::create_directories((root_ / name).parent_path());
        write_modulus_matrix(root_ / name, m);
        record(name);
    }

private:
    void record(const std::string& name) {
        const fs::path path = root_ / name;
        manifest_.products.push_back({name, sha256_file(path), fs::file_size(path)});
    }

    RunManifest& manifest_;
    fs::path root_;
};

std::string join_doubles(const std::vector<double>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? " " : "") + format_double(v[k]);
    return s;
}

/// Mean-subtracted series and the normalization denominator, computed the
/// same way as normalize_correlation.
struct Centered {
    std::vector<double> y;
    double denom = 0.0;
};

Centered center(std::span<const double> v) {
    const std::size_t n = v.size();
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(n);
    Centered c;
    c.y.resize(n);
    double m2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        c.y[j] = v[j] - m;
        m2 += c.y[j];
    }
    m2 /= static_cast<double>(n);
    for (double& x : c.y) x -= m2;
    c.denom = c.y[0];
    return c;
}

void record_realization(RunManifest& m, const BathRealization& r) {
    m.derived["N_spinful"] = static_cast<double>(r.size());
    m.derived["E_dd_rad_s"] = r.E_dd;
    m.derived["A0_rad_s"] = r.A0();
    m.derived["A_bar_rad_s"] = r.A_bar;
    m.derived["sigma_hf_rad_s"] = r.sigma_hf;
}

void record_clusters(RunManifest& m, const ClusterSet& set) {
    m.cluster_counts.clear();
    for (int k = 1; k <= set.max_order; ++k) {
        m.cluster_counts.push_back(set.count_of_size(static_cast<std::size_t>(k)));
    }
}

void record_series(RunManifest& m, const CorrelationSeries& s) {
    m.derived["C0_A_bar2"] = s.c0;
    m.derived["max_imag_A_bar2"] = s.max_imag;
}

std::map<std::string, std::string> transform_metadata(const Scalogram& w, const RunConfig& cfg) {
    return {{"mu", format_double(w.bump.mu)},
            {"sigma", format_double(w.bump.sigma)},
            {"voices", std::to_string(w.voices)},
            {"dt", format_double(w.dt)},
            {"sst_gamma", format_double(cfg.sst_gamma)},
            {"scales", join_doubles(w.scales)},
            {"coi_halfwidth", join_doubles(w.coi_halfwidth)},
            {"coi_rule", "column b is interior for row a when coi_halfwidth[a] <= tbar[b] <= tbar[end] - coi_halfwidth[a]"}};
}

void write_bands(std::ostream& out, const std::vector<Band>& bands,
                 const std::vector<std::vector<double>>& traces, const std::vector<double>& times) {
    out << "# columns=tbar";
    for (const Band& b : bands) out << ' ' << b.name;
    out << '\n';
    for (std::size_t k = 0; k < bands.size(); ++k) {
        out << "# band " << bands[k].name << '=' << format_double(bands[k].lo) << ','
            << format_double(bands[k].hi) << (traces[k].empty() ? " no-bins" : "") << '\n';
    }
    for (std::size_t j = 0; j < times.size(); ++j) {
        out << format_double(times[j]);
        for (const auto& t : traces) out << ' ' << (t.empty() ? std::string("nan") : format_double(t[j]));
        out << '\n';
    }
}

void write_analysis(ProductWriter& w, const std::string& prefix, const Analysis& a,
                    const RunConfig& cfg) {
    w.text(prefix + "spectrum.txt", [&](std::ostream& o) { write_spectrum(o, a.spectrum); });
    const auto meta = transform_metadata(a.cwt, cfg);
    w.matrix(prefix + "cwt.bin", a.cwt.coeffs);
    w.text(prefix + "cwt.txt", [&](std::ostream& o) {
        write_sidecar(o, "cwt", "cwt.bin", a.cwt.center_freqs, a.cwt.times, meta);
    });
    w.matrix(prefix + "sst.bin", a.sst.coeffs);
    w.text(prefix + "sst.txt", [&](std::ostream& o) {
        write_sidecar(o, "sst", "sst.bin", a.sst.freq_bins, a.sst.times, meta);
    });
    if (cfg.long_form) {
        w.text(prefix + "cwt_long.txt", [&](std::ostream& o) {
            write_long_form(o, a.cwt.center_freqs, a.cwt.times, a.cwt.coeffs);
        });
        w.text(prefix + "sst_long.txt", [&](std::ostream& o) {
            write_long_form(o, a.sst.freq_bins, a.sst.times, a.sst.coeffs);
        });
    }
    w.text(prefix + "bands_sst.txt", [&](std::ostream& o) { write_bands(o, a.bands, a.sst_bands, a.sst.times); });
    w.text(prefix + "bands_cwt.txt", [&](std::ostream& o) { write_bands(o, a.bands, a.cwt_bands, a.cwt.times); });
}

RunManifest new_manifest(const RunConfig& cfg, const std::string& command, const fs::path& dir) {
    RunManifest m;
    m.output_dir = dir;
    m.command = command;
    m.config_echo = describe_config(cfg);
    return m;
}

std::string order_label(int order) { return order == 0 ? std::string("exact") : "M" + std::to_string(order); }

}  // namespace

const ProductRecord* RunManifest::product(const std::string& name) const {
    for (const auto& p : products) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

void RunManifest::write() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["config"] = config_echo;
    nlohmann::ordered_json derived_json = nlohmann::ordered_json::object();
    for (const auto& [k, v] : derived) derived_json[k] = v;
    j["derived"] = derived_json;
    nlohmann::ordered_json counts = nlohmann::ordered_json::object();
    for (std::size_t k = 0; k < cluster_counts.size(); ++k) counts[std::to_string(k + 1)] = cluster_counts[k];
    j["cluster_counts"] = counts;
    nlohmann::ordered_json prods = nlohmann::ordered_json::array();
    for (const auto& p : products) prods.push_back({{"name", p.name}, {"sha256", p.sha256}, {"bytes", p.bytes}});
    j["products"] = prods;
    nlohmann::ordered_json times = nlohmann::ordered_json::object();
    for (const auto& [k, v] : timings) times[k] = v;
    j["timings_s"] = times;
    fs::create_directories(output_dir);
    std::ofstream out(output_dir / "manifest.json");
    if (!out) throw Error("cannot write manifest in " + output_dir.string());
    out << j.dump(2) << '\n';
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256 init failed");
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    std::ostringstream hex;
    for (unsigned int k = 0; k < len; ++k) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[k]);
    return hex.str();
}

BathRealization build_realization(const RunConfig& config) {
    return stage("bath", nullptr, [&] {
        if (config.realization_file) {
            std::ifstream in(*config.realization_file);
            if (!in) throw Error("cannot open realization file " + config.realization_file->string());
            return with_hf_axis(read_realization(in), config.hf_axis);
        }
        config.lattice.validate();
        return make_realization(config.lattice, config.hf_axis);
    });
}

ClusterSet build_clusters(const BathRealization& realization, const RunConfig& config) {
    return stage("cce", nullptr, [&] {
        return enumerate_clusters(realization, config.cutoff_a0 * realization.a0, config.cce_order);
    });
}

CorrelationSeries simulate(const BathRealization& realization, const RunConfig& config,
                           const TermMask& mask) {
    return stage("cce", nullptr, [&] {
        const ClusterSet set = enumerate_clusters(realization, config.cutoff_a0 * realization.a0,
                                                  config.cce_order);
        return cce_correlation(realization, set, config.effective, mask, config.grid);
    });
}

Analysis analyze(std::span<const double> cbar, const TimeGrid& grid, const RunConfig& config) {
    return stage("analysis", nullptr, [&] {
        Analysis a;
        const double dt = grid.step();
        a.spectrum = power_spectrum(cbar, dt, config.zero_pad);
        a.cwt = cwt_bump(cbar, dt, config.cwt);
        a.sst = synchrosqueeze(a.cwt, config.sst_gamma);
        a.bands = default_bands();
        for (const Band& b : a.bands) {
            // bands outside the analysed scale range are reported without bins
            try {
                a.sst_bands.push_back(band_amplitude(a.sst, b.lo, b.hi));
            } catch (const Error&) {
                a.sst_bands.emplace_back();
            }
            try {
                a.cwt_bands.push_back(band_amplitude(a.cwt, b.lo, b.hi));
            } catch (const Error&) {
                a.cwt_bands.emplace_back();
            }
        }
        return a;
    });
}

RunManifest generate_bath(const RunConfig& config) {
    RunManifest m = new_manifest(config, "generate-bath", config.output_dir);
    const BathRealization r = stage("bath", &m, [&] { return build_realization(config); });
    record_realization(m, r);
    stage("output", &m, [&] {
        ProductWriter w(m, config.output_dir);
        w.text("realization.csv", [&](std::ostream& o) { write_realization(o, r); });
    });
    m.write();
    return m;
}

RunManifest simulate_only(const RunConfig& config) {
    RunManifest m = new_manifest(config, "simulate", config.output_dir);
    const BathRealization r = stage("bath", &m, [&] { return build_realization(config); });
    record_realization(m, r);
    const ClusterSet set = stage("clusters", &m, [&] { return build_clusters(r, config); });
    record_clusters(m, set);
    const CorrelationSeries s = stage("cce", &m, [&] {
        return cce_correlation(r, set, config.effective, config.mask, config.grid);
    });
    record_series(m, s);
    const std::vector<double> cbar = stage("normalize", &m, [&] { return normalize_correlation(s); });
    stage("output", &m, [&] {
        ProductWriter w(m, config.output_dir);
        w.text("realization.csv", [&](std::ostream& o) { write_realization(o, r); });
        w.text("correlation.txt", [&](std::ostream& o) { write_correlation(o, s, cbar); });
    });
    m.write();
    return m;
}

RunManifest analyze_file(const RunConfig& config, const fs::path& correlation) {
    RunManifest m = new_manifest(config, "analyze", config.output_dir);
    const NormalizedCorrelation nc = stage("input", &m, [&] {
        std::ifstream in(correlation);
        if (!in) throw Error("cannot open " + correlation.string());
        return read_correlation(in);
    });
    const Analysis a = stage("analysis", &m, [&] { return analyze(nc.cbar, nc.grid, config); });
    stage("output", &m, [&] {
        ProductWriter w(m, config.output_dir);
        write_analysis(w, "", a, config);
    });
    m.write();
    return m;
}

RunManifest run_pipeline(const RunConfig& config) {
    RunManifest m = new_manifest(config, "run", config.output_dir);
    const BathRealization r = stage("bath", &m, [&] { return build_realization(config); });
    record_realization(m, r);
    const ClusterSet set = stage("clusters", &m, [&] { return build_clusters(r, config); });
    record_clusters(m, set);
    const CorrelationSeries s = stage("cce", &m, [&] {
        return cce_correlation(r, set, config.effective, config.mask, config.grid);
    });
    record_series(m, s);
    const std::vector<double> cbar = stage("normalize", &m, [&] { return normalize_correlation(s); });
    const Analysis a = stage("analysis", &m, [&] { return analyze(cbar, config.grid, config); });
    stage("output", &m, [&] {
        ProductWriter w(m, config.output_dir);
        w.text("realization.csv", [&](std::ostream& o) { write_realization(o, r); });
        w.text("correlation.txt", [&](std::ostream& o) { write_correlation(o, s, cbar); });
        write_analysis(w, "", a, config);
    });
    m.write();
    return m;
}

std::pair<double, double> deviation(std::span<const double> a, std::span<const double> b,
                                    const TimeGrid& grid, double lo, double hi) {
    if (a.size() != b.size() || a.size() != grid.samples) throw Error("deviation: length mismatch");
    double max_dev = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double t = grid.at(i);
        if (t < lo || t > hi) continue;
        const double d = std::abs(a[i] - b[i]);
        max_dev = std::max(max_dev, d);
        sq += d * d;
        ++n;
    }
    if (n == 0) throw Error("deviation: window contains no samples");
    return {max_dev, std::sqrt(sq / static_cast<double>(n))};
}

DeviationReport compare_orders(const RunConfig& config, const std::vector<int>& orders) {
    if (orders.size() < 2) throw Error("compare-orders needs at least two orders");
    if (!std::is_sorted(orders.begin(), orders.end()) ||
        std::adjacent_find(orders.begin(), orders.end()) != orders.end()) {
        throw Error("compare-orders: orders must be strictly ascending");
    }
    const BathRealization r = build_realization(config);
    DeviationReport rep;
    rep.grid = config.grid;
    rep.orders = orders;
    rep.window_lo = config.deviation_lo;
    rep.window_hi = config.deviation_hi < 0.0 ? config.grid.t_max : config.deviation_hi;
    for (int order : orders) {
        RunConfig c = config;
        c.cce_order = order;
        rep.cbar.push_back(normalize_correlation(simulate(r, c, config.mask)));
    }
    const double dim = std::pow(r.species.local_dim(), static_cast<double>(r.size()));
    if (r.size() > 0 && dim <= static_cast<double>(kExactDimensionCap)) {
        rep.exact_cbar = stage("exact", nullptr, [&] {
            return normalize_correlation(exact_bath_correlation(r, config.effective, config.mask, config.grid));
        });
    }
    for (const auto& cb : rep.cbar) {
        const auto [mx, l2] = deviation(cb, rep.cbar.back(), rep.grid, rep.window_lo, rep.window_hi);
        rep.max_dev.push_back(mx);
        rep.l2_dev.push_back(l2);
        if (rep.exact_cbar) {
            const auto [ex, el2] = deviation(cb, *rep.exact_cbar, rep.grid, rep.window_lo, rep.window_hi);
            rep.max_dev_exact.push_back(ex);
            rep.l2_dev_exact.push_back(el2);
        }
    }
    return rep;
}

void DeviationReport::write(std::ostream& out) const {
    out << "# window=" << format_double(window_lo) << ',' << format_double(window_hi) << '\n'
        << "# reference=" << order_label(orders.back()) << '\n';
    for (std::size_t k = 0; k < orders.size(); ++k) {
        out << "# " << order_label(orders[k]) << " max_dev=" << format_double(max_dev[k])
            << " l2_dev=" << format_double(l2_dev[k]);
        if (exact_cbar) {
            out << " max_dev_exact=" << format_double(max_dev_exact[k])
                << " l2_dev_exact=" << format_double(l2_dev_exact[k]);
        }
        out << '\n';
    }
    out << "# columns=tbar";
    for (int o : orders) out << " Cbar_" << order_label(o);
    if (exact_cbar) out << " Cbar_exact";
    out << '\n';
    for (std::size_t i = 0; i < grid.samples; ++i) {
        out << format_double(grid.at(i));
        for (const auto& cb : cbar) out << ' ' << format_double(cb[i]);
        if (exact_cbar) out << ' ' << format_double((*exact_cbar)[i]);
        out << '\n';
    }
}

RunManifest compare_orders_run(const RunConfig& config) {
    if (config.compare_orders.empty()) throw ConfigError("compare_orders", "required for compare-orders");
    RunManifest m = new_manifest(config, "compare-orders", config.output_dir);
    const BathRealization r = stage("bath", &m, [&] { return build_realization(config); });
    record_realization(m, r);
    RunConfig top = config;
    top.cce_order = config.compare_orders.back();
    record_clusters(m, stage("clusters", &m, [&] { return build_clusters(r, top); }));
    const DeviationReport rep = stage("cce", &m, [&] { return compare_orders(config, config.compare_orders); });
    std::vector<Analysis> analyses;
    stage("analysis", &m, [&] {
        for (const auto& cb : rep.cbar) analyses.push_back(analyze(cb, config.grid, config));
    });
    stage("output", &m, [&] {
        ProductWriter w(m, config.output_dir);
        w.text("realization.csv", [&](std::ostream& o) { write_realization(o, r); });
        w.text("deviation.txt", [&](std::ostream& o) { rep.write(o); });
        for (std::size_t k = 0; k < analyses.size(); ++k) {
            write_analysis(w, order_label(rep.orders[k]) + "/", analyses[k], config);
        }
    });
    m.write();
    return m;
}

std::vector<RunManifest> sweep_hf_axis(const RunConfig& config, const std::vector<std::string>& axes) {
    if (axes.empty()) throw Error("sweep-axis needs at least one axis");
    const BathRealization base = build_realization(config);
    {
        RunManifest root = new_manifest(config, "sweep-axis", config.output_dir);
        record_realization(root, base);
        ProductWriter w(root, config.output_dir);
        w.text("realization.csv", [&](std::ostream& o) { write_realization(o, base); });
        root.write();
    }
    struct Channel {
        std::string name;
        TermMask mask;
    };
    std::vector<Channel> channels;
    const TermMask& full = config.mask;
    if (full.B) channels.push_back({"A+B", TermMask{full.A, true, false, false}});
    if (full.CD) channels.push_back({"A+CD", TermMask{full.A, false, true, false}});
    if (full.EF) channels.push_back({"A+EF", TermMask{full.A, false, false, true}});

    std::vector<RunManifest> out;
    for (std::size_t k = 0; k < axes.size(); ++k) {
        RunConfig c = config;
        c.hf_axis = parse_axis(axes[k]);
        c.hf_axis_text = axes[k];
        c.output_dir = config.output_dir / ("axis_" + std::to_string(k));
        RunManifest m = new_manifest(c, "sweep-axis", c.output_dir);
        const BathRealization r = with_hf_axis(base, c.hf_axis);
        record_realization(m, r);
        const ClusterSet set = stage("clusters", &m, [&] { return build_clusters(r, c); });
        record_clusters(m, set);
        const CorrelationSeries s = stage("cce", &m, [&] {
            return cce_correlation(r, set, c.effective, c.mask, c.grid);
        });
        record_series(m, s);
        const Centered full_c = center(s.dynamic);
        const std::vector<double> cbar = stage("normalize", &m, [&] { return normalize_correlation(s); });
        const Analysis a = stage("analysis", &m, [&] { return analyze(cbar, c.grid, c); });
        std::vector<std::pair<CorrelationSeries, std::vector<double>>> runs;
        std::vector<Analysis> chan;
        stage("channels", &m, [&] {
            for (const Channel& ch : channels) {
                CorrelationSeries cs = cce_correlation(r, set, c.effective, ch.mask, c.grid);
                // channels share the full run's denominator so that their amplitudes compare
                std::vector<double> cb = center(cs.dynamic).y;
                for (double& x : cb) x /= full_c.denom;
                chan.push_back(analyze(cb, c.grid, c));
                runs.emplace_back(std::move(cs), std::move(cb));
            }
        });
        stage("output", &m, [&] {
            ProductWriter w(m, c.output_dir);
            w.text("realization.csv", [&](std::ostream& o) { write_realization(o, base); });
            w.text("correlation.txt", [&](std::ostream& o) { write_correlation(o, s, cbar); });
            write_analysis(w, "", a, c);
            for (std::size_t j = 0; j < channels.size(); ++j) {
                const std::string prefix = channels[j].name + "/";
                w.text(prefix + "correlation.txt", [&](std::ostream& o) {
                    write_correlation(o, runs[j].first, runs[j].second);
                });
                write_analysis(w, prefix, chan[j], c);
            }
        });
        m.write();
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace spinbeat
