#pragma once

#include <string>
#include <vector>

#include "cocyclelab/errors.hpp"

namespace cocyclelab {

/// Strictly increasing gap positions tau_1 < ... < tau_k inside an ambient
/// dimension m, with 1 <= tau_1 and tau_k < m.  The convention tau_0 = 0 is
/// exposed through position0().
class Signature {
 public:
  Signature(std::vector<int> positions, int ambient_dim)
      : positions_(std::move(positions)), ambient_(ambient_dim) {
    if (ambient_ < 2) throw DomainError("signature: ambient dimension must be >= 2");
    if (positions_.empty()) throw DomainError("signature: needs at least one position");
    int prev = 0;
    for (int p : positions_) {
      if (p <= prev) throw DomainError("signature: positions must be strictly increasing and >= 1");
      prev = p;
    }
    if (positions_.back() >= ambient_)
      throw DomainError("signature: last position must be < ambient dimension");
  }

  int k() const { return static_cast<int>(positions_.size()); }
  int ambient_dim() const { return ambient_; }

  /// tau_j for 1 <= j <= k; position0() covers the tau_0 = 0 convention.
  int position(int j) const { return positions_.at(static_cast<size_t>(j) - 1); }
  static int position0() { return 0; }

  /// Largest position tau_k (the flag frame width).
  int top() const { return positions_.back(); }

  const std::vector<int>& positions() const { return positions_; }

  bool operator==(const Signature& o) const {
    return ambient_ == o.ambient_ && positions_ == o.positions_;
  }
  bool operator!=(const Signature& o) const { return !(*this == o); }

  std::string str() const {
    std::string s = "(";
    for (size_t i = 0; i < positions_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(positions_[i]);
    }
    s += ")";
    return s;
  }

 private:
  std::vector<int> positions_;
  int ambient_;
};

}  // namespace cocyclelab
