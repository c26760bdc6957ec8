#include "trajformer/model/params.hpp"

#include <cmath>
#include <stdexcept>

namespace trajformer::model {

nn::Tensor ParamStore::add(const std::string& name, nn::Tensor t) {
  if (find(name)) throw std::logic_error("duplicate parameter name " + name);
  entries_.push_back({name, t});
  return t;
}

nn::Tensor ParamStore::xavier(const std::string& name, nn::Shape shape, std::size_t fan_in,
                              std::size_t fan_out, nn::Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  std::vector<double> values(nn::shape_numel(shape));
  for (auto& v : values) v = dist(rng);
  return add(name, nn::Tensor(std::move(shape), std::move(values), true));
}

nn::Tensor ParamStore::constant(const std::string& name, nn::Shape shape, double value) {
  return add(name, nn::Tensor::full(std::move(shape), value, true));
}

std::vector<nn::Tensor> ParamStore::tensors() const {
  std::vector<nn::Tensor> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.tensor);
  return out;
}

const nn::Tensor* ParamStore::find(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return &e.tensor;
  return nullptr;
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.tensor.numel();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& e : entries_) e.tensor.zero_grad();
}

}  // namespace trajformer::model
