#include "nc/types.hpp"

#include <stdexcept>

namespace nc {

std::string to_string(Activation kind) {
  switch (kind) {
    case Activation::kRelu:
      return "relu";
    case Activation::kTanh:
      return "tanh";
    case Activation::kLeakyRelu:
      return "leakyrelu";
  }
  throw std::logic_error("unknown activation tag");
}

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "leakyrelu") return Activation::kLeakyRelu;
  throw std::invalid_argument("unknown activation '" + name +
                              "' (expected relu|tanh|leakyrelu)");
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

}  // namespace nc
