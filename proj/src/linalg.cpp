#include "nc/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace nc {

namespace {

bool nearly_symmetric(const Eigen::Ref<const Matrix>& m) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

std::string shape_string(const Eigen::Ref<const Matrix>& m) {
  std::ostringstream out;
  out << m.rows() << "x" << m.cols();
  return out.str();
}

}  // namespace

SvdResult svd(const Eigen::Ref<const Matrix>& m) {
  if (m.size() == 0) throw std::invalid_argument("svd: empty matrix");
  if (!m.allFinite())
    throw std::invalid_argument("svd: non-finite entries in a " +
                                shape_string(m) + " matrix");
  Eigen::BDCSVD<Matrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("svd: no convergence on a " + shape_string(m) +
                             " matrix");
  return SvdResult{solver.matrixU(), solver.singularValues(),
                   solver.matrixV().transpose()};
}

double default_pinv_rel_tol(Index dim) {
  return static_cast<double>(dim) * std::numeric_limits<double>::epsilon();
}

Matrix pseudoinverse(const Eigen::Ref<const Matrix>& m, double rel_tol,
                     PinvMethod method) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("pseudoinverse: expected a square matrix, got " +
                                shape_string(m));
  if (!(rel_tol > 0.0))
    throw std::invalid_argument("pseudoinverse: rel_tol must be > 0");

  if (method == PinvMethod::kAuto)
    method = nearly_symmetric(m) ? PinvMethod::kSelfAdjoint : PinvMethod::kSvd;

  if (method == PinvMethod::kSelfAdjoint) {
    const Matrix sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    if (eig.info() != Eigen::Success)
      throw std::runtime_error(
          "pseudoinverse: eigendecomposition failed on a " + shape_string(m) +
          " matrix");
    const Vector& lambda = eig.eigenvalues();
    const double cutoff = rel_tol * lambda.cwiseAbs().maxCoeff();
    Vector inv = Vector::Zero(lambda.size());
    for (Index i = 0; i < lambda.size(); ++i)
      if (std::abs(lambda[i]) > cutoff) inv[i] = 1.0 / lambda[i];
    return eig.eigenvectors() * inv.asDiagonal() *
           eig.eigenvectors().transpose();
  }

  const SvdResult f = svd(m);
  const double cutoff = rel_tol * f.singular_values[0];
  Vector inv = Vector::Zero(f.singular_values.size());
  for (Index i = 0; i < inv.size(); ++i)
    if (f.singular_values[i] > cutoff) inv[i] = 1.0 / f.singular_values[i];
  return f.vt.transpose() * inv.asDiagonal() * f.u.transpose();
}

Matrix pseudoinverse(const Eigen::Ref<const Matrix>& m) {
  return pseudoinverse(m, default_pinv_rel_tol(m.rows()));
}

}  // namespace nc
