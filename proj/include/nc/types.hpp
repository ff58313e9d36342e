#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>

namespace nc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class Activation { kRelu, kTanh, kLeakyRelu };

std::string to_string(Activation kind);
Activation activation_from_string(const std::string& name);

// splitmix64 mix of (base, stream). Distinct stream ids yield unrelated RNG
// seeds from one user-facing base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

bool all_finite(const Eigen::Ref<const Matrix>& m);

}  // namespace nc
