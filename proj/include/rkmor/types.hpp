#pragma once

#include <complex>

#include <Eigen/Dense>

namespace rkmor {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

}  // namespace rkmor
