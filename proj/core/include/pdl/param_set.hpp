#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdl/tensor.hpp"

namespace pdl {

// Ordered, uniquely named collection of parameter tensors (one of theta_F,
// theta_M, theta_D or an updated copy of theta_M).
class ParamSet {
 public:
  ParamSet() = default;

  void add(std::string name, Tensor value);

  std::size_t size() const { return tensors_.size(); }
  bool empty() const { return tensors_.empty(); }
  std::size_t numel() const;

  const std::string& name(std::size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const { return names_; }
  const Tensor& operator[](std::size_t i) const { return tensors_.at(i); }
  Tensor& operator[](std::size_t i) { return tensors_.at(i); }
  const Tensor& get(const std::string& name) const;
  Tensor& get(const std::string& name);
  bool contains(const std::string& name) const;

  auto begin() const { return tensors_.begin(); }
  auto end() const { return tensors_.end(); }

  // Deep copy; the copy never shares storage with this set.
  ParamSet clone() const;
  // Deep copy of the accumulated gradients, zero where none were accumulated.
  ParamSet grads() const;
  ParamSet zeros_like() const;

  void set_requires_grad(bool on);
  void zero_grad();

  bool same_structure(const ParamSet& other) const;
  void require_same_structure(const ParamSet& other, const char* what) const;

  // Flat copy of all values in order; and the inverse.
  std::vector<double> flatten() const;
  void assign_flat(const std::vector<double>& values);

  // FNV-1a over names, shapes and the raw value bytes.
  std::uint64_t checksum() const;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
};

// out[k] = base[k] + scale * direction[k]; returns a new set, base untouched.
ParamSet param_axpy(const ParamSet& base, const ParamSet& direction, double scale);

// a[k] += b[k] in place (values only).
void param_add_inplace(ParamSet& a, const ParamSet& b);

double param_dot(const ParamSet& a, const ParamSet& b);
double param_norm(const ParamSet& a);

}  // namespace pdl
