#ifndef MEDXAI_TENSOR_HPP
#define MEDXAI_TENSOR_HPP

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace medxai {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_to_string(const Shape& shape);

// Dense row-major array of doubles. A rank-0 tensor holds one scalar.
class Tensor {
 public:
  Tensor() : data_(1, 0.0) {}
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value) { return Tensor({}, {value}); }
  static Tensor vector(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t axis) const;

  std::span<const double> data() const { return data_; }
  std::span<double> mutable_data() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double operator[](std::size_t flat) const { return data_[flat]; }
  double& operator[](std::size_t flat) { return data_[flat]; }

  // Multi-index access; bounds are checked against the shape.
  double at(std::initializer_list<std::size_t> index) const;
  double& at(std::initializer_list<std::size_t> index);

  Tensor reshaped(Shape shape) const;
  Tensor flattened() const { return reshaped({size()}); }

  bool all_finite() const;

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  std::size_t flat_index(std::initializer_list<std::size_t> index) const;

  Shape shape_;
  std::vector<double> data_;
};

enum class ElementwiseOp { kAdd, kSub, kMul, kDiv };

// b must have a's shape or hold a single value (scalar broadcast).
Tensor elementwise(ElementwiseOp op, const Tensor& a, const Tensor& b);

inline Tensor operator+(const Tensor& a, const Tensor& b) {
  return elementwise(ElementwiseOp::kAdd, a, b);
}
inline Tensor operator-(const Tensor& a, const Tensor& b) {
  return elementwise(ElementwiseOp::kSub, a, b);
}
inline Tensor operator*(const Tensor& a, const Tensor& b) {
  return elementwise(ElementwiseOp::kMul, a, b);
}
inline Tensor operator/(const Tensor& a, const Tensor& b) {
  return elementwise(ElementwiseOp::kDiv, a, b);
}

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

enum class ReduceOp { kSum, kMean, kArgmax };

// Reduces along `axis`; the result drops that axis. For kArgmax the result
// holds indices (lowest index wins ties).
Tensor reduce(ReduceOp op, const Tensor& t, std::size_t axis);

// Sum of every element, accumulated front to back.
double sum_all(const Tensor& t);

// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> values);

// "TENSOR v1 <rank> <d1> ... <dk>\n" followed by little-endian float64s.
void write_tensor(std::ostream& out, const Tensor& t);
Tensor read_tensor(std::istream& in);

}  // namespace medxai

#endif  // MEDXAI_TENSOR_HPP
