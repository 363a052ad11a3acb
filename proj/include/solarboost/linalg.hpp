#pragma once

#include <Eigen/Dense>

namespace solarboost::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct SymmetricRoots {
    Matrix root;
    Matrix inv_root;
};

/// max |S - S^T|
double max_asymmetry(const Matrix& s);

/// True when max |S - S^T| <= tol * max(1, max |S|).
bool is_symmetric(const Matrix& s, double tol = 1e-10);

double min_eigenvalue(const Matrix& s);

/// S with every eigenvalue below floor raised to floor. S must be symmetric.
Matrix floor_spectrum(const Matrix& s, double floor);

/**
 * Floored symmetric square root and its inverse: S = V L V^T,
 * L <- max(L, floor), root = V L^{1/2} V^T, inv_root = V L^{-1/2} V^T.
 * Throws ValidationError when S is not symmetric within 1e-10.
 */
SymmetricRoots sym_sqrt(const Matrix& s, double floor);

}  // namespace solarboost::linalg
