#pragma once

#include "nc/types.hpp"

namespace nc {

struct SvdResult {
  Matrix u;                // orthonormal columns, rows() x k
  Vector singular_values;  // k entries, non-increasing, all >= 0
  Matrix vt;               // k x cols(), orthonormal rows
};

// Thin SVD of a dense matrix. Throws if the input is empty or non-finite, or
// if the solver fails to converge (the message names the matrix shape).
SvdResult svd(const Eigen::Ref<const Matrix>& m);

// Rank-revealing cutoff used when no explicit tolerance is given:
// singular values <= dim * eps * sigma_max are treated as zero.
double default_pinv_rel_tol(Index dim);

enum class PinvMethod {
  kAuto,         // self-adjoint path for symmetric inputs, SVD otherwise
  kSelfAdjoint,  // eigendecomposition of the symmetrized input
  kSvd,          // general SVD route
};

// Moore-Penrose pseudoinverse of a square matrix. Singular values at or below
// rel_tol * sigma_max are dropped.
Matrix pseudoinverse(const Eigen::Ref<const Matrix>& m, double rel_tol,
                     PinvMethod method = PinvMethod::kAuto);
Matrix pseudoinverse(const Eigen::Ref<const Matrix>& m);

}  // namespace nc
