#include "spinbeat/config.hpp"

#include "spinbeat/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace spinbeat {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, const std::string& seps) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : s) {
        if (seps.find(ch) != std::string::npos) {
            if (!trim(cur).empty()) parts.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!trim(cur).empty()) parts.push_back(trim(cur));
    return parts;
}

double to_double(const std::string& key, const std::string& v) {
    double x = 0.0;
    const char* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc() || p != end || !std::isfinite(x)) {
        throw ConfigError(key, "expected a number, got '" + v + "'");
    }
    return x;
}

long long to_int(const std::string& key, const std::string& v) {
    long long x = 0;
    const char* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc() || p != end) throw ConfigError(key, "expected an integer, got '" + v + "'");
    return x;
}

bool to_bool(const std::string& key, std::string v) {
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw ConfigError(key, "expected a boolean, got '" + v + "'");
}

double positive(const std::string& key, double x) {
    if (!(x > 0.0)) throw ConfigError(key, "must be positive");
    return x;
}

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + std::to_string(v[k]);
    return s;
}

}  // namespace

std::vector<Band> default_bands() { return {{"0Q", 0.0, 0.1}, {"1Q", 0.4, 0.6}, {"2Q", 0.9, 1.1}}; }

double RunConfig::cutoff() const { return cutoff_a0 * lattice.a0; }

Vec3 parse_axis(const std::string& raw) {
    const std::string text = trim(raw);
    if (text.empty()) throw ConfigError("hf_axis", "empty direction");
    Vec3 v;
    if (text.front() == '[') {
        if (text.back() != ']') throw ConfigError("hf_axis", "unterminated Miller direction '" + text + "'");
        const std::string body = trim(text.substr(1, text.size() - 2));
        std::vector<double> comps;
        if (body.find_first_of(" ,") != std::string::npos) {
            for (const auto& tok : split(body, " ,")) comps.push_back(to_double("hf_axis", tok));
        } else {
            // compact form: one digit per component, '-' negates the next digit
            double sign = 1.0;
            for (char ch : body) {
                if (ch == '-') {
                    sign = -1.0;
                } else if (std::isdigit(static_cast<unsigned char>(ch))) {
                    comps.push_back(sign * (ch - '0'));
                    sign = 1.0;
                } else {
                    throw ConfigError("hf_axis", "bad Miller direction '" + text + "'");
                }
            }
        }
        if (comps.size() != 3) throw ConfigError("hf_axis", "Miller direction needs 3 components");
        v = Vec3(comps[0], comps[1], comps[2]);
    } else {
        const auto parts = split(text, ",");
        if (parts.size() != 2) {
            throw ConfigError("hf_axis", "expected [uvw] or 'theta,phi' in degrees, got '" + text + "'");
        }
        v = axis_from_angles(to_double("hf_axis", parts[0]), to_double("hf_axis", parts[1]));
    }
    if (!(v.norm() > 0.0)) throw ConfigError("hf_axis", "zero direction");
    return v.normalized();
}

RunConfig parse_config(std::string_view text) {
    std::map<std::string, std::string> kv;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(trim(line), "line " + std::to_string(lineno) + " is not key = value");
        }
        std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key == "rho") key = "abundance";
        if (key.empty()) throw ConfigError("", "line " + std::to_string(lineno) + " has no key");
        if (value.empty()) throw ConfigError(key, "missing value");
        if (!kv.emplace(key, value).second) throw ConfigError(key, "duplicate key");
    }

    RunConfig cfg;
    auto take = [&](const std::string& key) -> std::optional<std::string> {
        const auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    };

    // species preset first so that explicit overrides win
    if (auto v = take("species")) {
        if (*v == "si29") {
            cfg.lattice.species = SpeciesParams::silicon29();
            cfg.lattice.a0 = 5.43e-10;
        } else if (*v == "c13") {
            cfg.lattice.species = SpeciesParams::carbon13();
            cfg.lattice.a0 = 3.567e-10;
        } else if (*v != "custom") {
            throw ConfigError("species", "expected si29, c13 or custom");
        }
        cfg.species_name = *v;
    }
    SpeciesParams& sp = cfg.lattice.species;
    if (auto v = take("lattice_constant_A")) cfg.lattice.a0 = positive("lattice_constant_A", to_double("lattice_constant_A", *v)) / 1e10;
    if (auto v = take("spin_I")) {
        const double s = to_double("spin_I", *v);
        if (!(s > 0.0) || std::abs(2.0 * s - std::round(2.0 * s)) > 1e-12) {
            throw ConfigError("spin_I", "must be a positive multiple of 1/2");
        }
        sp.spin_I = s;
    }
    if (auto v = take("gamma")) {
        sp.gamma = to_double("gamma", *v);
        if (sp.gamma == 0.0) throw ConfigError("gamma", "must be nonzero");
    }
    if (auto v = take("L0_nm")) sp.L0 = positive("L0_nm", to_double("L0_nm", *v)) / 1e9;
    if (auto v = take("A0_over_Edd")) sp.A0_over_Edd = positive("A0_over_Edd", to_double("A0_over_Edd", *v));
    if (auto v = take("box")) {
        const auto parts = split(*v, " ,x");
        if (parts.size() != 3) throw ConfigError("box", "expected three cell counts");
        for (int k = 0; k < 3; ++k) {
            const long long n = to_int("box", parts[k]);
            if (n < 1 || n > 1000) throw ConfigError("box", "cell counts must lie in [1, 1000]");
            cfg.lattice.box[k] = static_cast<int>(n);
        }
    }
    const auto abundance = take("abundance");
    if (abundance) {
        const double rho = to_double("abundance", *abundance);
        if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("abundance", "must lie in [0, 1]");
        cfg.lattice.abundance = rho;
    }
    if (auto v = take("seed")) {
        const long long s = to_int("seed", *v);
        if (s < 0) throw ConfigError("seed", "must be non-negative");
        cfg.lattice.seed = static_cast<std::uint64_t>(s);
    }
    if (auto v = take("sites")) {
        std::vector<std::size_t> sites;
        for (const auto& tok : split(*v, " ,")) {
            const long long s = to_int("sites", tok);
            if (s < 0) throw ConfigError("sites", "lattice indices must be non-negative");
            sites.push_back(static_cast<std::size_t>(s));
        }
        if (sites.empty()) throw ConfigError("sites", "empty site list");
        if (*std::max_element(sites.begin(), sites.end()) >= cfg.lattice.site_count()) {
            throw ConfigError("sites", "lattice index outside the box");
        }
        cfg.lattice.explicit_sites = std::move(sites);
    }
    if (auto v = take("realization_file")) cfg.realization_file = *v;

    if (auto v = take("hf_axis")) {
        cfg.hf_axis = parse_axis(*v);
        cfg.hf_axis_text = *v;
    }

    const auto order = take("cce_order");
    if (!order) throw ConfigError("cce_order", "required key is missing");
    const long long m = to_int("cce_order", *order);
    if (m < 1 || m > 6) throw ConfigError("cce_order", "must lie in [1, 6]");
    cfg.cce_order = static_cast<int>(m);
    if (auto v = take("cutoff_a0")) cfg.cutoff_a0 = positive("cutoff_a0", to_double("cutoff_a0", *v));
    if (auto v = take("terms")) {
        try {
            cfg.mask = TermMask::parse(*v);
        } catch (const Error& e) {
            throw ConfigError("terms", e.what());
        }
    }
    if (auto v = take("secular")) cfg.secular = to_bool("secular", *v);
    if (cfg.secular) {
        cfg.mask.CD = false;
        cfg.mask.EF = false;
    }
    const auto c_hf = take("c_hf");
    const auto p_plus = take("P_plus");
    const auto p_minus = take("P_minus");
    if (c_hf && (p_plus || p_minus)) throw ConfigError("c_hf", "give either c_hf or P_plus/P_minus");
    if (c_hf) {
        const double c = positive("c_hf", to_double("c_hf", *c_hf));
        cfg.effective = {c, -c};
    }
    if (p_plus) cfg.effective.P_plus = to_double("P_plus", *p_plus);
    if (p_minus) cfg.effective.P_minus = to_double("P_minus", *p_minus);
    if (!(cfg.effective.c_hf() > 0.0)) throw ConfigError("P_plus", "c_hf must be positive");

    if (auto v = take("t_max")) cfg.grid.t_max = positive("t_max", to_double("t_max", *v));
    if (auto v = take("samples")) {
        const long long n = to_int("samples", *v);
        if (n < 2) throw ConfigError("samples", "must be at least 2");
        cfg.grid.samples = static_cast<std::size_t>(n);
    }

    if (auto v = take("mu")) cfg.cwt.bump.mu = positive("mu", to_double("mu", *v));
    if (auto v = take("sigma")) cfg.cwt.bump.sigma = positive("sigma", to_double("sigma", *v));
    if (!(cfg.cwt.bump.mu > cfg.cwt.bump.sigma)) throw ConfigError("sigma", "must be smaller than mu");
    if (auto v = take("voices")) {
        const long long n = to_int("voices", *v);
        if (n < 1 || n > 256) throw ConfigError("voices", "must lie in [1, 256]");
        cfg.cwt.voices = static_cast<int>(n);
    }
    if (auto v = take("a_min")) cfg.cwt.a_min = positive("a_min", to_double("a_min", *v));
    if (auto v = take("a_max")) cfg.cwt.a_max = positive("a_max", to_double("a_max", *v));
    if (cfg.cwt.a_min > 0.0 && cfg.cwt.a_max > 0.0 && cfg.cwt.a_max < cfg.cwt.a_min) {
        throw ConfigError("a_max", "must not be below a_min");
    }
    if (auto v = take("sst_gamma")) {
        cfg.sst_gamma = to_double("sst_gamma", *v);
        if (cfg.sst_gamma < 0.0) throw ConfigError("sst_gamma", "must be non-negative");
    }
    if (auto v = take("zero_pad")) {
        const long long n = to_int("zero_pad", *v);
        if (n < 1 || n > 64) throw ConfigError("zero_pad", "must lie in [1, 64]");
        cfg.zero_pad = static_cast<int>(n);
    }
    if (auto v = take("long_form")) cfg.long_form = to_bool("long_form", *v);

    if (auto v = take("output_dir")) cfg.output_dir = *v;
    if (auto v = take("compare_orders")) {
        for (const auto& tok : split(*v, " ,")) {
            const long long o = to_int("compare_orders", tok);
            if (o < 1 || o > 6) throw ConfigError("compare_orders", "orders must lie in [1, 6]");
            cfg.compare_orders.push_back(static_cast<int>(o));
        }
        if (!std::is_sorted(cfg.compare_orders.begin(), cfg.compare_orders.end()) ||
            std::adjacent_find(cfg.compare_orders.begin(), cfg.compare_orders.end()) !=
                cfg.compare_orders.end()) {
            throw ConfigError("compare_orders", "orders must be strictly ascending");
        }
    }
    if (auto v = take("deviation_window")) {
        const auto parts = split(*v, " ,");
        if (parts.size() != 2) throw ConfigError("deviation_window", "expected 'lo,hi'");
        cfg.deviation_lo = to_double("deviation_window", parts[0]);
        cfg.deviation_hi = to_double("deviation_window", parts[1]);
        if (cfg.deviation_lo < 0.0 || cfg.deviation_hi < cfg.deviation_lo) {
            throw ConfigError("deviation_window", "need 0 <= lo <= hi");
        }
    }
    if (auto v = take("sweep_axes")) {
        for (const auto& tok : split(*v, ";")) {
            parse_axis(tok);
            cfg.sweep_axes.push_back(tok);
        }
    }

    if (!kv.empty()) throw ConfigError(kv.begin()->first, "unknown key");

    const bool explicit_bath = cfg.realization_file || cfg.lattice.explicit_sites;
    if (!explicit_bath && !abundance) throw ConfigError("abundance", "required key is missing");
    try {
        sp.validate();
    } catch (const Error& e) {
        throw ConfigError("species", e.what());
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string describe_config(const RunConfig& c) {
    std::ostringstream o;
    const auto& sp = c.lattice.species;
    if (c.realization_file) o << "realization_file = " << c.realization_file->string() << '\n';
    o << "species = " << c.species_name << '\n'
      << "lattice_constant_A = " << format_double(c.lattice.a0 * 1e10) << '\n'
      << "spin_I = " << format_double(sp.spin_I) << '\n'
      << "gamma = " << format_double(sp.gamma) << '\n'
      << "L0_nm = " << format_double(sp.L0 * 1e9) << '\n'
      << "A0_over_Edd = " << format_double(sp.A0_over_Edd) << '\n'
      << "box = " << c.lattice.box[0] << ' ' << c.lattice.box[1] << ' ' << c.lattice.box[2] << '\n'
      << "abundance = " << format_double(c.lattice.abundance) << '\n'
      << "seed = " << c.lattice.seed << '\n';
    if (c.lattice.explicit_sites) {
        o << "sites =";
        for (std::size_t s : *c.lattice.explicit_sites) o << ' ' << s;
        o << '\n';
    }
    o << "hf_axis = " << c.hf_axis_text << '\n'
      << "cce_order = " << c.cce_order << '\n'
      << "cutoff_a0 = " << format_double(c.cutoff_a0) << '\n'
      << "terms = " << c.mask.to_string() << '\n'
      << "secular = " << (c.secular ? "true" : "false") << '\n'
      << "P_plus = " << format_double(c.effective.P_plus) << '\n'
      << "P_minus = " << format_double(c.effective.P_minus) << '\n'
      << "t_max = " << format_double(c.grid.t_max) << '\n'
      << "samples = " << c.grid.samples << '\n'
      << "mu = " << format_double(c.cwt.bump.mu) << '\n'
      << "sigma = " << format_double(c.cwt.bump.sigma) << '\n'
      << "voices = " << c.cwt.voices << '\n'
      << "sst_gamma = " << format_double(c.sst_gamma) << '\n'
      << (c.cwt.a_min > 0.0 ? "a_min = " + format_double(c.cwt.a_min) + "\n" : "")
      << (c.cwt.a_max > 0.0 ? "a_max = " + format_double(c.cwt.a_max) + "\n" : "")
      << "zero_pad = " << c.zero_pad << '\n'
      << "long_form = " << (c.long_form ? "true" : "false") << '\n'
      << "output_dir = " << c.output_dir.string() << '\n';
    if (!c.compare_orders.empty()) o << "compare_orders = " << join_ints(c.compare_orders) << '\n';
    if (c.deviation_hi >= 0.0) {
        o << "deviation_window = " << format_double(c.deviation_lo) << ',' << format_double(c.deviation_hi) << '\n';
    }
    if (!c.sweep_axes.empty()) {
        o << "sweep_axes =";
        for (std::size_t k = 0; k < c.sweep_axes.size(); ++k) o << (k ? "; " : " ") << c.sweep_axes[k];
        o << '\n';
    }
    return o.str();
}

}  // namespace spinbeat
