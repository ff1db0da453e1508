#include "spinbeat/lattice.hpp"

#include "spinbeat/io.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

namespace spinbeat {

namespace {

constexpr std::array<std::array<double, 3>, 8> kDiamondBasis{{
    {0.0, 0.0, 0.0},
    {0.0, 0.5, 0.5},
    {0.5, 0.0, 0.5},
    {0.5, 0.5, 0.0},
    {0.25, 0.25, 0.25},
    {0.25, 0.75, 0.75},
    {0.75, 0.25, 0.75},
    {0.75, 0.75, 0.25},
}};

bool is_half_integer(double spin) {
    const double twice = 2.0 * spin;
    return twice >= 1.0 - 1e-12 && std::abs(twice - std::round(twice)) < 1e-12;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, sep)) out.push_back(field);
    return out;
}

double to_double(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size() && text.find_first_not_of(" \t\r", used) != std::string::npos) {
            throw Error("trailing characters");
        }
        return v;
    } catch (const std::exception&) {
        throw Error("realization: bad number for " + what + ": '" + text + "'");
    }
}

}  // namespace

void SpeciesParams::validate() const {
    if (!is_half_integer(spin_I)) throw Error("species: spin_I must be a positive half-integer");
    if (!(std::isfinite(gamma) && gamma != 0.0)) throw Error("species: gamma must be nonzero");
    if (!(A0_over_Edd > 0.0)) throw Error("species: A0 must be positive");
    if (!(L0 > 0.0)) throw Error("species: L0 must be positive");
}

SpeciesParams SpeciesParams::silicon29() { return {0.5, -5.3190e7, 1.0e4, 3.4e-9}; }

SpeciesParams SpeciesParams::carbon13() { return {0.5, 6.7283e7, 1.0e4, 3.4e-9}; }

void LatticeSpec::validate() const {
    if (!(a0 > 0.0)) throw Error("lattice: a0 must be positive");
    for (int n : box) {
        if (n < 1) throw Error("lattice: box dimensions must be >= 1");
    }
    if (!(abundance >= 0.0 && abundance <= 1.0)) throw Error("lattice: abundance must lie in [0, 1]");
    species.validate();
    if (explicit_sites) {
        const std::size_t n = site_count();
        for (std::size_t s : *explicit_sites) {
            if (s >= n) throw Error("lattice: explicit site index out of range");
        }
    }
}

std::size_t LatticeSpec::site_count() const {
    return 8u * static_cast<std::size_t>(box[0]) * static_cast<std::size_t>(box[1]) *
           static_cast<std::size_t>(box[2]);
}

std::vector<Vec3> build_diamond_lattice(const LatticeSpec& spec) {
    spec.validate();
    std::vector<Vec3> sites;
    sites.reserve(spec.site_count());
    // Bounding box of the site cloud runs from 0 to (n - 1/4) a0 per axis.
    const Vec3 center(0.5 * (spec.box[0] - 0.25), 0.5 * (spec.box[1] - 0.25),
                      0.5 * (spec.box[2] - 0.25));
    for (int ix = 0; ix < spec.box[0]; ++ix) {
        for (int iy = 0; iy < spec.box[1]; ++iy) {
            for (int iz = 0; iz < spec.box[2]; ++iz) {
                for (const auto& b : kDiamondBasis) {
                    const Vec3 frac(ix + b[0], iy + b[1], iz + b[2]);
                    sites.emplace_back((frac - center) * spec.a0);
                }
            }
        }
    }
    return sites;
}

std::vector<std::size_t> sample_spinful_sites(std::size_t site_count, double rho,
                                              std::uint64_t seed) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw Error("abundance must lie in [0, 1]");
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> picked;
    for (std::size_t i = 0; i < site_count; ++i) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        if (u < rho) picked.push_back(i);
    }
    return picked;
}

double compute_E_dd(const SpeciesParams& species, double a0) {
    if (!(a0 > 0.0)) throw Error("E_dd: a0 must be positive");
    const double bond = a0 * std::sqrt(3.0) / 4.0;
    return constants::kMu0Over4Pi * constants::kHbar * species.gamma * species.gamma /
           (bond * bond * bond);
}

HyperfineAssignment assign_hf_couplings(std::span<const Vec3> positions,
                                        const SpeciesParams& species, double a0) {
    if (!(species.L0 > 0.0)) throw Error("hyperfine: L0 must be positive");
    const double A0 = species.A0_over_Edd * compute_E_dd(species, a0);
    HyperfineAssignment out;
    out.couplings.reserve(positions.size());
    const double inv_l2 = 1.0 / (species.L0 * species.L0);
    for (const Vec3& r : positions) out.couplings.push_back(A0 * std::exp(-r.squaredNorm() * inv_l2));
    if (!out.couplings.empty()) {
        const double n = static_cast<double>(out.couplings.size());
        out.mean = std::accumulate(out.couplings.begin(), out.couplings.end(), 0.0) / n;
        double var = 0.0;
        for (double a : out.couplings) var += (a - out.mean) * (a - out.mean);
        out.stddev = std::sqrt(var / n);
    }
    return out;
}

Eigen::Matrix3d hf_frame(const Vec3& hf_axis) {
    const double norm = hf_axis.norm();
    if (!(norm > 0.0)) throw Error("hf axis must be nonzero");
    const Vec3 n = hf_axis / norm;
    const Vec3 z = Vec3::UnitZ();
    const Vec3 cross = z.cross(n);
    const double s = cross.norm();
    const double c = n.z();
    if (s < 1e-15) {
        if (c > 0.0) return Eigen::Matrix3d::Identity();
        return Eigen::AngleAxisd(constants::kPi, Vec3::UnitX()).toRotationMatrix();
    }
    return Eigen::AngleAxisd(std::atan2(s, c), cross / s).toRotationMatrix();
}

PairGeometry pair_geometry(const Vec3& r_i, const Vec3& r_j, const Vec3& hf_axis,
                           const SpeciesParams& species) {
    const Vec3 d = r_j - r_i;
    const double r = d.norm();
    if (!(r > 0.0)) throw Error("pair geometry: coincident sites");
    const Vec3 local = hf_frame(hf_axis).transpose() * d;
    PairGeometry g;
    g.r_norm = r;
    g.theta = std::acos(std::clamp(local.z() / r, -1.0, 1.0));
    double phi = std::atan2(local.y(), local.x());
    if (phi < 0.0) phi += 2.0 * constants::kPi;
    if (phi >= 2.0 * constants::kPi) phi = 0.0;
    g.phi = phi;
    g.prefactor = constants::kMu0Over4Pi * constants::kHbar * species.gamma * species.gamma /
                  (r * r * r);
    return g;
}

Vec3 axis_from_angles(double theta_deg, double phi_deg) {
    const double t = theta_deg * constants::kPi / 180.0;
    const double p = phi_deg * constants::kPi / 180.0;
    return {std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t)};
}

void BathRealization::validate() const {
    species.validate();
    if (std::abs(hf_axis.norm() - 1.0) > 1e-12) throw Error("realization: hf axis is not a unit vector");
    if (positions.size() != hf_couplings.size() || positions.size() != site_index.size()) {
        throw Error("realization: inconsistent array sizes");
    }
    const double a0_peak = A0();
    for (double a : hf_couplings) {
        if (!(a > 0.0) || a > a0_peak * (1.0 + 1e-12)) {
            throw Error("realization: hyperfine coupling outside (0, A0]");
        }
    }
}

BathRealization make_realization(double a0, const SpeciesParams& species,
                                 std::vector<std::size_t> site_index,
                                 std::vector<Vec3> positions,
                                 std::vector<double> hf_couplings, const Vec3& hf_axis) {
    BathRealization r;
    r.a0 = a0;
    r.species = species;
    r.site_index = std::move(site_index);
    r.positions = std::move(positions);
    r.hf_couplings = std::move(hf_couplings);
    r.hf_axis = hf_axis.normalized();
    r.E_dd = compute_E_dd(species, a0);
    if (!r.hf_couplings.empty()) {
        const double n = static_cast<double>(r.hf_couplings.size());
        r.A_bar = std::accumulate(r.hf_couplings.begin(), r.hf_couplings.end(), 0.0) / n;
        double var = 0.0;
        for (double a : r.hf_couplings) var += (a - r.A_bar) * (a - r.A_bar);
        r.sigma_hf = std::sqrt(var / n);
    }
    r.validate();
    return r;
}

BathRealization make_realization(const LatticeSpec& spec, const Vec3& hf_axis) {
    const std::vector<Vec3> sites = build_diamond_lattice(spec);
    std::vector<std::size_t> chosen = spec.explicit_sites
                                          ? *spec.explicit_sites
                                          : sample_spinful_sites(sites.size(), spec.abundance, spec.seed);
    std::vector<Vec3> positions;
    positions.reserve(chosen.size());
    for (std::size_t s : chosen) positions.push_back(sites[s]);
    HyperfineAssignment hf = assign_hf_couplings(positions, spec.species, spec.a0);
    return make_realization(spec.a0, spec.species, std::move(chosen), std::move(positions),
                            std::move(hf.couplings), hf_axis);
}

BathRealization with_hf_axis(BathRealization realization, const Vec3& hf_axis) {
    realization.hf_axis = hf_axis.normalized();
    realization.validate();
    return realization;
}

void write_realization(std::ostream& out, const BathRealization& r) {
    out << "a0=" << format_double(r.a0) << ",L0=" << format_double(r.species.L0)
        << ",A0_over_Edd=" << format_double(r.species.A0_over_Edd)
        << ",spin_I=" << format_double(r.species.spin_I)
        << ",gamma=" << format_double(r.species.gamma)
        << ",hf_x=" << format_double(r.hf_axis.x()) << ",hf_y=" << format_double(r.hf_axis.y())
        << ",hf_z=" << format_double(r.hf_axis.z()) << '\n';
    for (std::size_t i = 0; i < r.size(); ++i) {
        out << r.site_index[i] << ',' << format_double(r.positions[i].x()) << ','
            << format_double(r.positions[i].y()) << ',' << format_double(r.positions[i].z()) << ','
            << format_double(r.hf_couplings[i]) << '\n';
    }
}

BathRealization read_realization(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw Error("realization: missing header line");
    std::map<std::string, double> fields;
    for (const std::string& kv : split(header, ',')) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw Error("realization: malformed header field '" + kv + "'");
        fields[kv.substr(0, eq)] = to_double(kv.substr(eq + 1), kv.substr(0, eq));
    }
    auto need = [&](const char* key) {
        auto it = fields.find(key);
        if (it == fields.end()) throw Error(std::string("realization: header lacks ") + key);
        return it->second;
    };
    SpeciesParams species{need("spin_I"), need("gamma"), need("A0_over_Edd"), need("L0")};
    const double a0 = need("a0");
    const Vec3 axis(need("hf_x"), need("hf_y"), need("hf_z"));

    std::vector<std::size_t> index;
    std::vector<Vec3> pos;
    std::vector<double> hf;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto f = split(line, ',');
        if (f.size() != 5) throw Error("realization: expected 5 fields in '" + line + "'");
        index.push_back(static_cast<std::size_t>(std::stoull(f[0])));
        pos.emplace_back(to_double(f[1], "x"), to_double(f[2], "y"), to_double(f[3], "z"));
        hf.push_back(to_double(f[4], "A"));
    }
    return make_realization(a0, species, std::move(index), std::move(pos), std::move(hf), axis);
}

}  // namespace spinbeat
