#ifndef MEDXAI_SMALL_CNN_HPP
#define MEDXAI_SMALL_CNN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "medxai/predictor.hpp"

namespace medxai {

// Stride-1 convolution with zero padding (k-1)/2, followed by ReLU and an
// optional 2x2/stride-2 max-pool.
struct ConvLayer {
  Tensor kernel;  // [out, in, kh, kw]
  Tensor bias;    // [out]
  bool pool = true;
};

// Fully connected layer; ReLU on every dense layer except the last.
struct DenseLayer {
  Tensor weight;  // [out, in]
  Tensor bias;    // [out]
};

struct CnnArchitecture {
  Shape input_shape{1, 28, 28};
  std::vector<std::size_t> conv_channels{8, 16};
  std::size_t kernel_size = 3;
  bool pool = true;
  std::vector<std::size_t> hidden_units;
  // 1 output means a sigmoid head over two classes; k > 1 means softmax.
  std::size_t outputs = 1;
};

class SmallCnn final : public TrainableModel {
 public:
  SmallCnn(std::string name, Shape input_shape, std::vector<ConvLayer> conv,
           std::vector<DenseLayer> dense);

  // He-normal weights and zero biases drawn from `seed`.
  static SmallCnn initialized(std::string name, const CnnArchitecture& arch,
                              std::uint64_t seed);

  const std::string& name() const override { return name_; }
  std::size_t class_count() const override;
  const Shape& input_shape() const override { return input_shape_; }
  std::vector<double> predict(const Tensor& input) const override;

  std::unique_ptr<TrainableModel> clone() const override;
  std::vector<Tensor*> parameters() override;
  std::vector<NamedTensor> named_parameters() const override;
  double accumulate_gradient(const Tensor& input, int label,
                             std::span<Tensor> gradients) const override;

  struct Activations {
    std::vector<double> probabilities;
    // Pre-softmax class scores. With a sigmoid head the scores are
    // {-z, z} for the single logit z.
    std::vector<double> scores;
    // Post-ReLU (pre-pool) output of each conv layer; the last entry is
    // the Grad-CAM target layer.
    std::vector<Tensor> feature_maps;
  };
  Activations forward_with_activations(const Tensor& input) const;

  // d(score of class_index) / d(last conv layer's post-ReLU output).
  Tensor grad_wrt_feature_maps(const Tensor& input, std::size_t class_index) const;

  bool has_conv_layers() const { return !conv_.empty(); }
  const std::vector<ConvLayer>& conv_layers() const { return conv_; }
  const std::vector<DenseLayer>& dense_layers() const { return dense_; }
  // Shape of each conv layer's feature map, then of the flattened dense input.
  std::vector<Shape> layer_shapes() const;

 private:
  struct Trace;
  Trace forward_trace(const Tensor& input) const;
  // Backpropagates `score_grad` (d/d scores). Parameter gradients are added
  // into `gradients` when non-empty; the gradient at the last conv layer's
  // post-ReLU output is stored in `feature_grad` when non-null.
  void backward(const Trace& trace, const std::vector<double>& score_grad,
                std::span<Tensor> gradients, Tensor* feature_grad) const;

  std::string name_;
  Shape input_shape_;
  std::vector<ConvLayer> conv_;
  std::vector<DenseLayer> dense_;
};

}  // namespace medxai

#endif  // MEDXAI_SMALL_CNN_HPP
