#include "medxai/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>

#include "medxai/errors.hpp"

namespace medxai {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

namespace {

void check_shape(const Shape& shape) {
  for (std::size_t d : shape) {
    if (d == 0) {
      throw ShapeError("tensor dimensions must be positive, got " +
                       shape_to_string(shape));
    }
  }
}

}  // namespace

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(shape_size(shape_), 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (data_.size() != shape_size(shape_)) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_to_string(shape_));
  }
}

Tensor Tensor::full(Shape shape, double value) {
  Tensor t(std::move(shape));
  std::fill(t.data_.begin(), t.data_.end(), value);
  return t;
}

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " +
                     shape_to_string(shape_));
  }
  return shape_[axis];
}

std::size_t Tensor::flat_index(std::initializer_list<std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw ShapeError("index rank " + std::to_string(index.size()) +
                     " does not match tensor rank " +
                     std::to_string(shape_.size()));
  }
  std::size_t flat = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    if (i >= shape_[axis]) {
      throw ShapeError("index " + std::to_string(i) + " out of range on axis " +
                       std::to_string(axis));
    }
    flat = flat * shape_[axis] + i;
    ++axis;
  }
  return flat;
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
  return data_[flat_index(index)];
}

double& Tensor::at(std::initializer_list<std::size_t> index) {
  return data_[flat_index(index)];
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + shape_to_string(shape_) + " to " +
                     shape_to_string(shape));
  }
  return Tensor(std::move(shape), data_);
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

Tensor elementwise(ElementwiseOp op, const Tensor& a, const Tensor& b) {
  const bool broadcast = b.size() == 1 && a.shape() != b.shape();
  if (!broadcast && a.shape() != b.shape()) {
    throw ShapeError("elementwise shape mismatch: " +
                     shape_to_string(a.shape()) + " vs " +
                     shape_to_string(b.shape()));
  }
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i];
    const double y = broadcast ? b[0] : b[i];
    switch (op) {
      case ElementwiseOp::kAdd: out[i] = x + y; break;
      case ElementwiseOp::kSub: out[i] = x - y; break;
      case ElementwiseOp::kMul: out[i] = x * y; break;
      case ElementwiseOp::kDiv: out[i] = x / y; break;
    }
    if (!std::isfinite(out[i]) && std::isfinite(x) && std::isfinite(y)) {
      throw NumericError("elementwise operation produced a non-finite value at "
                         "index " + std::to_string(i));
    }
  }
  return Tensor(a.shape(), std::move(out));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2) {
    throw ShapeError("matmul expects rank-2 operands, got " +
                     shape_to_string(a.shape()) + " and " +
                     shape_to_string(b.shape()));
  }
  const std::size_t n = a.dim(0), k = a.dim(1), m = b.dim(1);
  if (b.dim(0) != k) {
    throw ShapeError("matmul inner dimension mismatch: " +
                     shape_to_string(a.shape()) + " x " +
                     shape_to_string(b.shape()));
  }
  std::vector<double> out(n * m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      for (std::size_t j = 0; j < m; ++j) out[i * m + j] += av * b[p * m + j];
    }
  }
  return Tensor({n, m}, std::move(out));
}

Tensor transpose(const Tensor& a) {
  if (a.rank() != 2) {
    throw ShapeError("transpose expects a rank-2 tensor, got " +
                     shape_to_string(a.shape()));
  }
  const std::size_t n = a.dim(0), m = a.dim(1);
  std::vector<double> out(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[j * n + i] = a[i * m + j];
  return Tensor({m, n}, std::move(out));
}

Tensor reduce(ReduceOp op, const Tensor& t, std::size_t axis) {
  if (axis >= t.rank()) {
    throw ShapeError("reduce axis " + std::to_string(axis) +
                     " out of range for shape " + shape_to_string(t.shape()));
  }
  const Shape& shape = t.shape();
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  const std::size_t len = shape[axis];

  Shape out_shape;
  for (std::size_t i = 0; i < shape.size(); ++i)
    if (i != axis) out_shape.push_back(shape[i]);
  Tensor out(out_shape);

  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * len * inner + in;
      double result = 0.0;
      if (op == ReduceOp::kArgmax) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < len; ++i)
          if (t[base + i * inner] > t[base + best * inner]) best = i;
        result = static_cast<double>(best);
      } else {
        for (std::size_t i = 0; i < len; ++i) result += t[base + i * inner];
        if (op == ReduceOp::kMean) result /= static_cast<double>(len);
      }
      out[o * inner + in] = result;
    }
  }
  return out;
}

double sum_all(const Tensor& t) {
  double s = 0.0;
  for (double v : t.data()) s += v;
  return s;
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw ShapeError("argmax of an empty sequence");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

namespace {

constexpr const char* kTensorMagic = "TENSOR";
constexpr const char* kTensorVersion = "v1";

}  // namespace

void write_tensor(std::ostream& out, const Tensor& t) {
  out << kTensorMagic << ' ' << kTensorVersion << ' ' << t.rank();
  for (std::size_t d : t.shape()) out << ' ' << d;
  out << '\n';
  for (double v : t.data()) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xffu);
    out.write(bytes, 8);
  }
  if (!out) throw DataError("failed to write tensor payload");
}

Tensor read_tensor(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("missing tensor header");
  std::istringstream header(line);
  std::string magic, version;
  std::size_t rank = 0;
  if (!(header >> magic >> version >> rank) || magic != kTensorMagic ||
      version != kTensorVersion) {
    throw DataError("malformed tensor header: '" + line + "'");
  }
  Shape shape(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    if (!(header >> shape[i]) || shape[i] == 0) {
      throw DataError("malformed tensor dimensions in header: '" + line + "'");
    }
  }
  std::string trailing;
  if (header >> trailing) {
    throw DataError("unexpected trailing header content: '" + line + "'");
  }
  std::vector<double> data(shape_size(shape));
  for (std::size_t i = 0; i < data.size(); ++i) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
      throw DataError("truncated tensor payload at element " +
                      std::to_string(i) + " of " + std::to_string(data.size()));
    }
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= std::uint64_t{bytes[b]} << (8 * b);
    data[i] = std::bit_cast<double>(bits);
  }
  return Tensor(std::move(shape), std::move(data));
}

}  // namespace medxai
