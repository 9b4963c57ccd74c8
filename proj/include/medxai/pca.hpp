#ifndef MEDXAI_PCA_HPP
#define MEDXAI_PCA_HPP

#include <cstddef>
#include <vector>

#include "medxai/bundle.hpp"
#include "medxai/dataset.hpp"
#include "medxai/tensor.hpp"

namespace medxai {

struct PcaModel {
  Tensor mean;        // [d]
  Tensor components;  // [k,d], orthonormal rows
  std::vector<double> explained_variance;  // non-increasing, length k

  std::size_t dimension() const { return mean.size(); }
  std::size_t component_count() const { return explained_variance.size(); }
};

struct SymmetricEigen {
  std::vector<double> values;  // descending
  Tensor vectors;              // [n,n], row i is the eigenvector of values[i]
};

// Cyclic Jacobi rotations on a symmetric [n,n] matrix.
SymmetricEigen symmetric_eigen(const Tensor& matrix);

// Matrices with at most this many columns use the full Jacobi solve; wider
// ones use power iteration with deflation.
inline constexpr std::size_t kFullEigenMaxDimension = 64;

// Top-k principal directions of the sample covariance of `matrix` [n,d].
// Each component's largest-magnitude entry is made positive.
PcaModel pca_fit(const Tensor& matrix, std::size_t k);

// (x - mean) * components^T for every row of `matrix` [n,d] -> [n,k].
Tensor pca_transform(const PcaModel& model, const Tensor& matrix);
// reduced * components + mean -> [n,d].
Tensor pca_reconstruct(const PcaModel& model, const Tensor& reduced);

// Rows are the flattened images of `dataset`.
Tensor flatten_images(const Dataset& dataset);

TensorBundle pca_to_bundle(const PcaModel& model);
PcaModel pca_from_bundle(const TensorBundle& bundle);

}  // namespace medxai

#endif  // MEDXAI_PCA_HPP
