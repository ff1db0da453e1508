#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace spinbeat {

using Vec3 = Eigen::Vector3d;
using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

namespace constants {
// SI values; hbar is exact since the 2019 redefinition.
inline constexpr double kHbar = 1.054571817e-34;        // J s
inline constexpr double kMu0Over4Pi = 1.00000000055e-7; // T m / A
inline constexpr double kPi = 3.14159265358979323846;
// arccos(1/sqrt(3))
inline constexpr double kMagicAngle = 0.95531661812450927816;
}  // namespace constants

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace spinbeat
