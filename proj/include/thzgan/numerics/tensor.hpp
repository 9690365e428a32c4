#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace thzgan::num {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

struct Node;

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  bool requires_grad = false;
  // Set when the tensor was produced by a recorded operation.
  std::shared_ptr<Node> grad_fn;
  // Accumulated by backward() for leaves.
  std::shared_ptr<TensorImpl> grad;
};

/// Shared handle to a row-major array of doubles that can take part in a
/// differentiable computation. Copies alias the same storage.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}

  static Tensor zeros(Shape shape);
  static Tensor ones(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor from(Shape shape, std::vector<double> values);
  static Tensor scalar(double value);

  bool defined() const noexcept { return impl_ != nullptr; }

  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t numel() const;
  std::size_t dim(std::size_t axis) const;

  std::span<const double> data() const;
  // Only meaningful for leaves; mutating a recorded tensor invalidates its graph.
  std::span<double> mutable_data();
  double item() const;
  double at(std::size_t flat_index) const;

  bool requires_grad() const;
  Tensor& requires_grad_(bool flag = true);
  bool is_leaf() const;

  Tensor grad() const;
  void zero_grad();

  // Same values, no history, no grad requirement.
  Tensor detach() const;

  const std::shared_ptr<TensorImpl>& impl() const noexcept { return impl_; }
  TensorImpl* key() const noexcept { return impl_.get(); }

 private:
  std::shared_ptr<TensorImpl> impl_;
};

}  // namespace thzgan::num
