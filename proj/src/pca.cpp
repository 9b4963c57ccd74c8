#include "medxai/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "medxai/errors.hpp"
#include "medxai/random.hpp"

namespace medxai {

namespace {

using Matrix = std::vector<std::vector<double>>;

Matrix to_rows(const Tensor& t) {
  Matrix m(t.dim(0), std::vector<double>(t.dim(1)));
  for (std::size_t i = 0; i < t.dim(0); ++i)
    for (std::size_t j = 0; j < t.dim(1); ++j) m[i][j] = t[i * t.dim(1) + j];
  return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> multiply(const Matrix& m, const std::vector<double>& v) {
  std::vector<double> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = dot(m[i], v);
  return out;
}

double normalize(std::vector<double>& v) {
  const double norm = std::sqrt(dot(v, v));
  if (norm > 0.0)
    for (double& x : v) x /= norm;
  return norm;
}

void orthogonalize(std::vector<double>& v, const Matrix& basis) {
  // Two passes of classical Gram-Schmidt keep the basis orthonormal to
  // machine precision.
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& b : basis) {
      const double proj = dot(v, b);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= proj * b[i];
    }
  }
}

void fix_sign(std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  if (v[best] < 0.0)
    for (double& x : v) x = -x;
}

SymmetricEigen jacobi(Matrix a) {
  const std::size_t n = a.size();
  Matrix v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;

  double total = 0.0;
  for (const auto& row : a)
    for (double x : row) total += x * x;
  const double tolerance = 1e-30 * std::max(total, 1e-300);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off <= tolerance) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a[i][i] > a[j][j];
  });
  SymmetricEigen result;
  result.vectors = Tensor({n, n});
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t col = order[r];
    result.values.push_back(a[col][col]);
    for (std::size_t k = 0; k < n; ++k) result.vectors[r * n + k] = v[k][col];
  }
  return result;
}

// Leading eigenpairs of a covariance matrix by power iteration with
// Hotelling deflation, polished by a Rayleigh-Ritz step on the found
// subspace.
Matrix power_components(Matrix cov, std::size_t k) {
  const std::size_t d = cov.size();
  const Matrix original = cov;
  Matrix basis;
  constexpr int kMaxIterations = 3000;
  constexpr double kTolerance = 1e-12;

  for (std::size_t j = 0; j < k; ++j) {
    Rng rng(derive_seed(j, "pca/power-start"));
    std::vector<double> v(d);
    for (double& x : v) x = rng.normal();
    orthogonalize(v, basis);
    normalize(v);
    for (int it = 0; it < kMaxIterations; ++it) {
      std::vector<double> w = multiply(cov, v);
      orthogonalize(w, basis);
      if (normalize(w) == 0.0) break;  // null space: any orthonormal v will do
      double change = 0.0;
      for (std::size_t i = 0; i < d; ++i) change = std::max(change, std::abs(w[i] - v[i]));
      v = std::move(w);
      if (change < kTolerance) break;
    }
    const double lambda = dot(v, multiply(cov, v));
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) cov[r][c] -= lambda * v[r] * v[c];
    basis.push_back(std::move(v));
  }

  Tensor projected({k, k});
  for (std::size_t a = 0; a < k; ++a) {
    const auto cb = multiply(original, basis[a]);
    for (std::size_t b = 0; b < k; ++b) projected[a * k + b] = dot(basis[b], cb);
  }
  const SymmetricEigen ritz = jacobi(to_rows(projected));
  Matrix rotated(k, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t c = 0; c < d; ++c)
        rotated[i][c] += ritz.vectors[i * k + j] * basis[j][c];
  return rotated;
}

}  // namespace

SymmetricEigen symmetric_eigen(const Tensor& matrix) {
  if (matrix.rank() != 2 || matrix.dim(0) != matrix.dim(1)) {
    throw ShapeError("symmetric_eigen expects a square matrix, got " +
                     shape_to_string(matrix.shape()));
  }
  return jacobi(to_rows(matrix));
}

PcaModel pca_fit(const Tensor& matrix, std::size_t k) {
  if (matrix.rank() != 2) {
    throw ShapeError("pca_fit expects an [n,d] matrix, got " +
                     shape_to_string(matrix.shape()));
  }
  const std::size_t n = matrix.dim(0), d = matrix.dim(1);
  if (k == 0 || n < 2 || k > std::min(n - 1, d)) {
    throw ConfigError("pca_fit: k=" + std::to_string(k) +
                      " must satisfy 1 <= k <= min(n-1, d) with n=" +
                      std::to_string(n) + ", d=" + std::to_string(d));
  }

  PcaModel model;
  model.mean = reduce(ReduceOp::kMean, matrix, 0);

  Matrix centered(n, std::vector<double>(d));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j)
      centered[i][j] = matrix[i * d + j] - model.mean[j];

  Matrix cov(d, std::vector<double>(d, 0.0));
  for (const auto& row : centered)
    for (std::size_t a = 0; a < d; ++a) {
      if (row[a] == 0.0) continue;
      for (std::size_t b = a; b < d; ++b) cov[a][b] += row[a] * row[b];
    }
  double trace = 0.0;
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      cov[a][b] /= static_cast<double>(n - 1);
      cov[b][a] = cov[a][b];
    }
    trace += cov[a][a];
  }
  if (trace == 0.0) {
    throw DataError("pca_fit: input has zero variance; components are undefined");
  }

  Matrix components;
  if (d <= kFullEigenMaxDimension) {
    Tensor cov_tensor({d, d});
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) cov_tensor[a * d + b] = cov[a][b];
    const SymmetricEigen eig = symmetric_eigen(cov_tensor);
    for (std::size_t i = 0; i < k; ++i) {
      components.emplace_back(eig.vectors.data().begin() + static_cast<std::ptrdiff_t>(i * d),
                              eig.vectors.data().begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
    }
  } else {
    components = power_components(cov, k);
  }

  std::vector<std::pair<double, std::vector<double>>> ranked;
  for (auto& c : components) {
    fix_sign(c);
    const double variance = std::max(0.0, dot(c, multiply(cov, c)));
    ranked.emplace_back(variance, std::move(c));
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });

  model.components = Tensor({k, d});
  for (std::size_t i = 0; i < k; ++i) {
    model.explained_variance.push_back(ranked[i].first);
    std::copy(ranked[i].second.begin(), ranked[i].second.end(),
              model.components.mutable_data().begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  return model;
}

Tensor pca_transform(const PcaModel& model, const Tensor& matrix) {
  if (matrix.rank() != 2 || matrix.dim(1) != model.dimension()) {
    throw ShapeError("pca_transform: expected [n," +
                     std::to_string(model.dimension()) + "], got " +
                     shape_to_string(matrix.shape()));
  }
  const std::size_t n = matrix.dim(0), d = model.dimension(),
                    k = model.component_count();
  Tensor out({n, k});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j)
        s += (matrix[i * d + j] - model.mean[j]) * model.components[c * d + j];
      out[i * k + c] = s;
    }
  }
  return out;
}

Tensor pca_reconstruct(const PcaModel& model, const Tensor& reduced) {
  const std::size_t d = model.dimension(), k = model.component_count();
  if (reduced.rank() != 2 || reduced.dim(1) != k) {
    throw ShapeError("pca_reconstruct: expected [n," + std::to_string(k) +
                     "], got " + shape_to_string(reduced.shape()));
  }
  const std::size_t n = reduced.dim(0);
  Tensor out({n, d});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double s = model.mean[j];
      for (std::size_t c = 0; c < k; ++c)
        s += reduced[i * k + c] * model.components[c * d + j];
      out[i * d + j] = s;
    }
  return out;
}

Tensor flatten_images(const Dataset& dataset) {
  const std::size_t d = shape_size(dataset.image_shape());
  Tensor out({dataset.size(), d});
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto pixels = dataset.samples[i].image.data();
    std::copy(pixels.begin(), pixels.end(),
              out.mutable_data().begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  return out;
}

TensorBundle pca_to_bundle(const PcaModel& model) {
  TensorBundle bundle;
  bundle.manifest = {{"kind", "pca"},
                     {"dimension", model.dimension()},
                     {"components", model.component_count()}};
  bundle.tensors.push_back({"pca.mean", model.mean});
  bundle.tensors.push_back({"pca.components", model.components});
  bundle.tensors.push_back(
      {"pca.explained_variance", Tensor::vector(model.explained_variance)});
  return bundle;
}

PcaModel pca_from_bundle(const TensorBundle& bundle) {
  PcaModel model;
  model.mean = bundle.get("pca.mean");
  model.components = bundle.get("pca.components");
  model.explained_variance = bundle.get("pca.explained_variance").values();
  if (model.components.rank() != 2 ||
      model.components.dim(1) != model.mean.size() ||
      model.components.dim(0) != model.explained_variance.size()) {
    throw DataError("inconsistent PCA tensors in checkpoint");
  }
  return model;
}

}  // namespace medxai
