#pragma once

#include "spinbeat/cce.hpp"
#include "spinbeat/tfa.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace spinbeat {

/// Normalized correlation as read back from disk.
struct NormalizedCorrelation {
    TimeGrid grid;
    std::vector<double> cbar;
    std::map<std::string, std::string> metadata;
};

/// `# key=value` metadata lines followed by `tbar Cbar` rows.
void write_correlation(std::ostream& out, const CorrelationSeries& series,
                       std::span<const double> cbar);
NormalizedCorrelation read_correlation(std::istream& in);

void write_spectrum(std::ostream& out, const Spectrum& spectrum);

/// Little-endian float64 moduli, row-major, rows follow `row_axis`.
void write_modulus_matrix(const std::filesystem::path& path, const ComplexMatrix& coeffs);
/// Reads a matrix written by write_modulus_matrix.
Eigen::MatrixXd read_modulus_matrix(const std::filesystem::path& path, Eigen::Index rows,
                                    Eigen::Index cols);

/// Text sidecar describing a binary matrix: dimensions, grids and metadata.
void write_sidecar(std::ostream& out, const std::string& kind, const std::string& binary_name,
                   const std::vector<double>& row_axis, const std::vector<double>& times,
                   const std::map<std::string, std::string>& metadata);

/// `omega_bar tbar |coeff|` rows, one per matrix cell.
void write_long_form(std::ostream& out, const std::vector<double>& row_axis,
                     const std::vector<double>& times, const ComplexMatrix& coeffs);

/// Formats a double with 17 significant digits.
std::string format_double(double value);

}  // namespace spinbeat
