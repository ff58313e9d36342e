// Test-only reference implementations, deliberately written as direct
// transliterations of the defining formulas. They share no code with the
// streaming/production paths they are used to check.
#pragma once

#include "nc/class_stats.hpp"
#include "nc/mlp.hpp"
#include "nc/types.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace nc::testing {

struct NaiveStats {
  Vector mu_g;
  Matrix mu_c;  // class_count x dim
  Matrix sigma_w;
  Matrix sigma_b;
};

NaiveStats naive_statistics(const Matrix& samples,
                            std::span<const std::int32_t> labels,
                            Index class_count);

// Full JacobiSVD route (the production symmetric path uses an
// eigendecomposition instead).
Matrix naive_pinv(const Matrix& m, double rel_tol);

double naive_nc1(const NaiveStats& stats, Index class_count, double rel_tol);
double naive_nc2_norms(const NaiveStats& stats);
double naive_nc2_angles(const NaiveStats& stats);
double naive_nc4(const Matrix& activations, const Matrix& mu_c,
                 std::span<const std::int32_t> predictions);

// Central differences of mse_loss through the forward pass.
Gradients finite_difference_gradients(const MlpModel& model,
                                      const Matrix& batch,
                                      std::span<const std::int32_t> labels,
                                      double h);

// Straight-line per-sample re-evaluation of the affine+nonlinearity chain.
Matrix reference_forward_logits(const MlpModel& model, const Matrix& batch,
                                std::vector<Matrix>* hidden = nullptr);

Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng,
                     double scale = 1.0);
Matrix random_orthogonal(Index dim, std::mt19937_64& rng);
std::vector<std::int32_t> random_labels(Index n, Index class_count,
                                        std::mt19937_64& rng);

}  // namespace nc::testing
