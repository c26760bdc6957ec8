#pragma once

#include <string>
#include <vector>

#include "trajformer/numerics/ops.hpp"

namespace trajformer::model {

struct NamedTensor {
  std::string name;
  nn::Tensor tensor;
};

/// Ordered registry of trainable leaves. Registration order is the
/// initialization and serialization order.
class ParamStore {
 public:
  /// Uniform in +-sqrt(6 / (fan_in + fan_out)).
  nn::Tensor xavier(const std::string& name, nn::Shape shape, std::size_t fan_in,
                    std::size_t fan_out, nn::Rng& rng);
  nn::Tensor constant(const std::string& name, nn::Shape shape, double value);

  std::vector<NamedTensor>& entries() { return entries_; }
  const std::vector<NamedTensor>& entries() const { return entries_; }
  std::vector<nn::Tensor> tensors() const;
  const nn::Tensor* find(const std::string& name) const;
  std::size_t parameter_count() const;
  void zero_grad();

 private:
  nn::Tensor add(const std::string& name, nn::Tensor t);
  std::vector<NamedTensor> entries_;
};

}  // namespace trajformer::model
