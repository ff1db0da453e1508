#include "spinbeat/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace spinbeat {

std::string format_double(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_correlation(std::ostream& out, const CorrelationSeries& series,
                       std::span<const double> cbar) {
    if (cbar.size() != series.grid.samples) throw Error("correlation export: length mismatch");
    out << "# samples=" << series.grid.samples << '\n'
        << "# t_max=" << format_double(series.grid.t_max) << '\n'
        << "# A_bar=" << format_double(series.A_bar) << '\n'
        << "# C0=" << format_double(series.c0) << '\n'
        << "# max_imag=" << format_double(series.max_imag) << '\n'
        << "# order=" << series.order << '\n'
        << "# terms=" << series.mask.to_string() << '\n'
        << "# spins=" << series.spins << '\n'
        << "# columns=tbar Cbar\n";
    for (std::size_t i = 0; i < cbar.size(); ++i) {
        out << format_double(series.grid.at(i)) << ' ' << format_double(cbar[i]) << '\n';
    }
}

NormalizedCorrelation read_correlation(std::istream& in) {
    NormalizedCorrelation nc;
    std::vector<double> times;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(1, eq - 1);
            key.erase(0, key.find_first_not_of(' '));
            nc.metadata[key] = line.substr(eq + 1);
            continue;
        }
        std::istringstream row(line);
        double t = 0.0, c = 0.0;
        if (!(row >> t >> c)) {
            throw Error("correlation file: malformed row at line " + std::to_string(lineno));
        }
        times.push_back(t);
        nc.cbar.push_back(c);
    }
    if (nc.cbar.size() < 2) throw Error("correlation file: fewer than 2 samples");
    nc.grid.samples = nc.cbar.size();
    const auto it = nc.metadata.find("t_max");
    nc.grid.t_max = it != nc.metadata.end() ? std::stod(it->second) : times.back();
    if (times.front() != 0.0) throw Error("correlation file: time grid must start at zero");
    return nc;
}

void write_spectrum(std::ostream& out, const Spectrum& spectrum) {
    out << "# columns=omega_bar power\n";
    for (std::size_t k = 0; k < spectrum.power.size(); ++k) {
        out << format_double(spectrum.omega_bar[k]) << ' ' << format_double(spectrum.power[k])
            << '\n';
    }
}

namespace {

void put_le(std::ostream& out, double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    char bytes[8];
    for (int k = 0; k < 8; ++k) bytes[k] = static_cast<char>((bits >> (8 * k)) & 0xffu);
    out.write(bytes, 8);
}

double get_le(const unsigned char* bytes) {
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
    return std::bit_cast<double>(bits);
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) s += ' ';
        s += format_double(v[k]);
    }
    return s;
}

}  // namespace

void write_modulus_matrix(const std::filesystem::path& path, const ComplexMatrix& coeffs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    for (Eigen::Index r = 0; r < coeffs.rows(); ++r) {
        for (Eigen::Index c = 0; c < coeffs.cols(); ++c) put_le(out, std::abs(coeffs(r, c)));
    }
    if (!out) throw Error("write failed: " + path.string());
}

Eigen::MatrixXd read_modulus_matrix(const std::filesystem::path& path, Eigen::Index rows,
                                    Eigen::Index cols) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<unsigned char> buf(std::istreambuf_iterator<char>(in), {});
    if (buf.size() != static_cast<std::size_t>(rows * cols) * 8) {
        throw Error("matrix file " + path.string() + " has unexpected size");
    }
    Eigen::MatrixXd m(rows, cols);
    std::size_t off = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c, off += 8) m(r, c) = get_le(&buf[off]);
    }
    return m;
}

void write_sidecar(std::ostream& out, const std::string& kind, const std::string& binary_name,
                   const std::vector<double>& row_axis, const std::vector<double>& times,
                   const std::map<std::string, std::string>& metadata) {
    out << "kind=" << kind << '\n'
        << "binary=" << binary_name << '\n'
        << "format=float64 little-endian row-major modulus\n"
        << "rows=" << row_axis.size() << '\n'
        << "cols=" << times.size() << '\n';
    for (const auto& [key, value] : metadata) out << key << '=' << value << '\n';
    out << "row_axis=" << join(row_axis) << '\n' << "times=" << join(times) << '\n';
}

void write_long_form(std::ostream& out, const std::vector<double>& row_axis,
                     const std::vector<double>& times, const ComplexMatrix& coeffs) {
    out << "# columns=omega_bar tbar modulus\n";
    for (Eigen::Index r = 0; r < coeffs.rows(); ++r) {
        const std::string f = format_double(row_axis[static_cast<std::size_t>(r)]);
        for (Eigen::Index c = 0; c < coeffs.cols(); ++c) {
            out << f << ' ' << format_double(times[static_cast<std::size_t>(c)]) << ' '
                << format_double(std::abs(coeffs(r, c))) << '\n';
        }
    }
}

}  // namespace spinbeat
