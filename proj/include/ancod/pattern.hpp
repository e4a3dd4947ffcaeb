#pragma once

#include <span>
#include <vector>

namespace ancod {

/// Strictly increasing set of k row indices in [0, n): the important samples.
class ErasurePattern {
 public:
  ErasurePattern() = default;
  /// Validates ordering, distinctness and range; throws DimensionError.
  ErasurePattern(std::vector<int> indices, int n);

  [[nodiscard]] int size() const { return static_cast<int>(indices_.size()); }
  [[nodiscard]] int universe() const { return n_; }
  [[nodiscard]] std::span<const int> indices() const { return indices_; }
  [[nodiscard]] const std::vector<int>& vector() const { return indices_; }
  [[nodiscard]] int operator[](int i) const { return indices_[static_cast<std::size_t>(i)]; }

  friend bool operator==(const ErasurePattern&, const ErasurePattern&) = default;

 private:
  std::vector<int> indices_;
  int n_ = 0;
};

}  // namespace ancod
