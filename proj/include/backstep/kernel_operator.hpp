#pragma once

#include <string>

#include "backstep/numerics.hpp"

namespace backstep {

/// Maps a parameter estimate beta_hat to a backstepping gain kernel.
class KernelOperator {
 public:
  virtual ~KernelOperator() = default;
  virtual GridFunction operator()(const GridFunction& beta_hat) const = 0;
  virtual std::string name() const = 0;
};

/// The exact operator: marching Volterra solve.
class ExactKernelOperator final : public KernelOperator {
 public:
  GridFunction operator()(const GridFunction& beta_hat) const override;
  std::string name() const override { return "exact"; }
};

}  // namespace backstep
