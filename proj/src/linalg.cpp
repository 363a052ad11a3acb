#include "solarboost/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "solarboost/core_model.hpp"

namespace solarboost::linalg {

double max_asymmetry(const Matrix& s) {
    if (s.rows() != s.cols()) return std::numeric_limits<double>::infinity();
    return (s - s.transpose()).cwiseAbs().maxCoeff();
}

bool is_symmetric(const Matrix& s, double tol) {
    if (s.rows() != s.cols()) return false;
    if (s.size() == 0) return true;
    return max_asymmetry(s) <= tol * std::max(1.0, s.cwiseAbs().maxCoeff());
}

double min_eigenvalue(const Matrix& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

Matrix floor_spectrum(const Matrix& s, double floor) {
    const Matrix sym = 0.5 * (s + s.transpose());
    // Cholesky of S - floor*I succeeds only if every eigenvalue exceeds the
    // floor, in which case clamping is the identity.
    Matrix shifted = sym;
    shifted.diagonal().array() -= floor;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() == Eigen::Success) return sym;

    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    const Vector clamped = eig.eigenvalues().cwiseMax(floor);
    return eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
}

SymmetricRoots sym_sqrt(const Matrix& s, double floor) {
    if (s.rows() != s.cols()) throw ValidationError("sym_sqrt needs a square matrix");
    if (!(floor > 0.0)) throw ValidationError("sym_sqrt floor must be positive");
    if (!is_symmetric(s)) throw ValidationError("sym_sqrt input is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (s + s.transpose()));
    if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    const Vector lambda = eig.eigenvalues().cwiseMax(floor);
    const Matrix& v = eig.eigenvectors();
    return {v * lambda.cwiseSqrt().asDiagonal() * v.transpose(),
            v * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose()};
}

}  // namespace solarboost::linalg
