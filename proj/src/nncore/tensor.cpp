#include "kdi/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "kdi/error.hpp"

namespace kdi {

std::string shape_string(const Shape& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  require(shape_.size() <= 4, "tensor: at most 4 axes");
  data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  require(shape_.size() <= 4, "tensor: at most 4 axes");
  require(data_.size() == shape_size(shape_), "tensor: value count does not match shape " +
                                                  shape_string(shape_));
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Tensor Tensor::reshaped(Shape shape) const {
  require(shape_size(shape) == data_.size(),
          "tensor: cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  return Tensor(std::move(shape), data_);
}

void require_finite(const Tensor& t, std::string_view where) {
  for (double v : t.values()) {
    if (!std::isfinite(v)) throw NumericError("non-finite value at " + std::string(where));
  }
}

void require_shape(const Tensor& t, const Shape& expected, std::string_view where) {
  if (t.shape() != expected) {
    throw ValidationError(std::string(where) + ": expected shape " + shape_string(expected) +
                          ", got " + shape_string(t.shape()));
  }
}

}  // namespace kdi
