#include "pdl/param_set.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "pdl/error.hpp"
#include "pdl/hash.hpp"

namespace pdl {

void ParamSet::add(std::string name, Tensor value) {
  if (contains(name)) throw ValidationError("ParamSet: duplicate parameter name '" + name + "'");
  if (!value.defined()) throw ValidationError("ParamSet: parameter '" + name + "' is undefined");
  names_.push_back(std::move(name));
  tensors_.push_back(std::move(value));
}

std::size_t ParamSet::numel() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.numel();
  return n;
}

bool ParamSet::contains(const std::string& name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const Tensor& ParamSet::get(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw ValidationError("ParamSet: no parameter named '" + name + "'");
  return tensors_[static_cast<std::size_t>(it - names_.begin())];
}

Tensor& ParamSet::get(const std::string& name) {
  return const_cast<Tensor&>(static_cast<const ParamSet&>(*this).get(name));
}

ParamSet ParamSet::clone() const {
  ParamSet out;
  for (std::size_t i = 0; i < size(); ++i) out.add(names_[i], tensors_[i].clone());
  return out;
}

ParamSet ParamSet::grads() const {
  ParamSet out;
  for (std::size_t i = 0; i < size(); ++i) {
    const Tensor& t = tensors_[i];
    std::vector<double> g(t.numel(), 0.0);
    if (t.has_grad()) std::copy(t.grad().begin(), t.grad().end(), g.begin());
    out.add(names_[i], Tensor::from(t.shape(), std::move(g)));
  }
  return out;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (std::size_t i = 0; i < size(); ++i) out.add(names_[i], Tensor::zeros(tensors_[i].shape()));
  return out;
}

void ParamSet::set_requires_grad(bool on) {
  for (auto& t : tensors_) t.set_requires_grad(on);
}

void ParamSet::zero_grad() {
  for (auto& t : tensors_) t.zero_grad();
}

bool ParamSet::same_structure(const ParamSet& other) const {
  if (size() != other.size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (names_[i] != other.names_[i] || tensors_[i].shape() != other.tensors_[i].shape()) return false;
  }
  return true;
}

void ParamSet::require_same_structure(const ParamSet& other, const char* what) const {
  if (same_structure(other)) return;
  std::string msg = std::string(what) + ": parameter sets differ in structure (";
  msg += std::to_string(size()) + " vs " + std::to_string(other.size()) + " tensors";
  for (std::size_t i = 0; i < std::min(size(), other.size()); ++i) {
    if (names_[i] != other.names_[i] || tensors_[i].shape() != other.tensors_[i].shape()) {
      msg += "; first difference at '" + names_[i] + "' " + shape_str(tensors_[i].shape()) + " vs '" +
             other.names_[i] + "' " + shape_str(other.tensors_[i].shape());
      break;
    }
  }
  throw ShapeError(msg + ")");
}

std::vector<double> ParamSet::flatten() const {
  std::vector<double> out;
  out.reserve(numel());
  for (const auto& t : tensors_) out.insert(out.end(), t.data().begin(), t.data().end());
  return out;
}

void ParamSet::assign_flat(const std::vector<double>& values) {
  if (values.size() != numel()) {
    throw ShapeError("ParamSet::assign_flat: expected " + std::to_string(numel()) + " values, got " +
                     std::to_string(values.size()));
  }
  std::size_t off = 0;
  for (auto& t : tensors_) {
    auto d = t.mutable_data();
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(off), d.size(), d.begin());
    off += d.size();
  }
}

std::uint64_t ParamSet::checksum() const {
  Fnv1a h;
  for (std::size_t i = 0; i < size(); ++i) {
    h.update(names_[i]);
    for (std::size_t d : tensors_[i].shape()) h.update_pod(static_cast<std::uint64_t>(d));
    const auto data = tensors_[i].data();
    h.update_bytes(data.data(), data.size() * sizeof(double));
  }
  return h.value();
}

ParamSet param_axpy(const ParamSet& base, const ParamSet& direction, double scale) {
  base.require_same_structure(direction, "param_axpy");
  ParamSet out;
  for (std::size_t i = 0; i < base.size(); ++i) {
    const auto b = base[i].data();
    const auto d = direction[i].data();
    std::vector<double> v(b.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = b[k] + scale * d[k];
    out.add(base.name(i), Tensor::from(base[i].shape(), std::move(v), base[i].requires_grad()));
  }
  return out;
}

void param_add_inplace(ParamSet& a, const ParamSet& b) {
  a.require_same_structure(b, "param_add_inplace");
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto x = a[i].mutable_data();
    const auto y = b[i].data();
    for (std::size_t k = 0; k < x.size(); ++k) x[k] += y[k];
  }
}

double param_dot(const ParamSet& a, const ParamSet& b) {
  a.require_same_structure(b, "param_dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto x = a[i].data();
    const auto y = b[i].data();
    for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
  }
  return s;
}

double param_norm(const ParamSet& a) { return std::sqrt(param_dot(a, a)); }

}  // namespace pdl
