#include "medxai/small_cnn.hpp"

#include <algorithm>
#include <cmath>

#include "medxai/errors.hpp"
#include "medxai/loss.hpp"
#include "medxai/random.hpp"

namespace medxai {

namespace {

std::size_t padding(std::size_t kernel) { return (kernel - 1) / 2; }

std::string layer_prefix(const char* kind, std::size_t index) {
  return std::string(kind) + " layer " + std::to_string(index) + ": ";
}

std::vector<double> softmax(const std::vector<double>& logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - top);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

}  // namespace

struct SmallCnn::Trace {
  std::vector<Tensor> conv_inputs;
  std::vector<Tensor> conv_outputs;  // post-ReLU, pre-pool
  std::vector<std::vector<std::size_t>> pool_argmax;
  std::vector<Tensor> dense_inputs;
  std::vector<Tensor> dense_outputs;  // post-ReLU for hidden, raw logits last
  std::vector<double> scores;
  std::vector<double> probabilities;
};

SmallCnn::SmallCnn(std::string name, Shape input_shape, std::vector<ConvLayer> conv,
                   std::vector<DenseLayer> dense)
    : name_(std::move(name)),
      input_shape_(std::move(input_shape)),
      conv_(std::move(conv)),
      dense_(std::move(dense)) {
  // Validates the layer chain; throws on the first inconsistent layer.
  layer_shapes();
}

std::vector<Shape> SmallCnn::layer_shapes() const {
  if (input_shape_.size() != 3) {
    throw ShapeError("small CNN input must be [C,H,W], got " +
                     shape_to_string(input_shape_));
  }
  if (dense_.empty()) throw ShapeError("small CNN needs at least one dense layer");
  std::vector<Shape> shapes;
  Shape current = input_shape_;
  for (std::size_t l = 0; l < conv_.size(); ++l) {
    const ConvLayer& layer = conv_[l];
    const Shape& k = layer.kernel.shape();
    if (k.size() != 4 || k[1] != current[0]) {
      throw ShapeError(layer_prefix("conv", l) + "kernel " + shape_to_string(k) +
                       " does not accept input " + shape_to_string(current));
    }
    if (layer.bias.shape() != Shape{k[0]}) {
      throw ShapeError(layer_prefix("conv", l) + "bias " +
                       shape_to_string(layer.bias.shape()) + " does not match " +
                       std::to_string(k[0]) + " output channels");
    }
    const std::size_t ph = padding(k[2]), pw = padding(k[3]);
    if (current[1] + 2 * ph < k[2] || current[2] + 2 * pw < k[3]) {
      throw ShapeError(layer_prefix("conv", l) + "kernel larger than input " +
                       shape_to_string(current));
    }
    Shape out{k[0], current[1] + 2 * ph - k[2] + 1, current[2] + 2 * pw - k[3] + 1};
    shapes.push_back(out);
    if (layer.pool) {
      if (out[1] < 2 || out[2] < 2) {
        throw ShapeError(layer_prefix("conv", l) + "cannot max-pool feature map " +
                         shape_to_string(out));
      }
      out = {out[0], out[1] / 2, out[2] / 2};
    }
    current = out;
  }
  std::size_t width = shape_size(current);
  shapes.push_back({width});
  for (std::size_t l = 0; l < dense_.size(); ++l) {
    const Shape& w = dense_[l].weight.shape();
    if (w.size() != 2 || w[1] != width || dense_[l].bias.shape() != Shape{w[0]}) {
      throw ShapeError(layer_prefix("dense", l) + "weight " + shape_to_string(w) +
                       " / bias " + shape_to_string(dense_[l].bias.shape()) +
                       " do not accept " + std::to_string(width) + " inputs");
    }
    width = w[0];
  }
  return shapes;
}

SmallCnn SmallCnn::initialized(std::string name, const CnnArchitecture& arch,
                               std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ConvLayer> conv;
  std::size_t channels = arch.input_shape.at(0);
  std::size_t height = arch.input_shape.at(1), width = arch.input_shape.at(2);
  const std::size_t k = arch.kernel_size;
  for (std::size_t out : arch.conv_channels) {
    ConvLayer layer{Tensor({out, channels, k, k}), Tensor({out}), arch.pool};
    const double scale = std::sqrt(2.0 / static_cast<double>(channels * k * k));
    for (double& v : layer.kernel.mutable_data()) v = scale * rng.normal();
    conv.push_back(std::move(layer));
    channels = out;
    height = height + 2 * padding(k) - k + 1;
    width = width + 2 * padding(k) - k + 1;
    if (arch.pool) {
      height /= 2;
      width /= 2;
    }
  }
  std::size_t fan_in = channels * height * width;
  std::vector<DenseLayer> dense;
  std::vector<std::size_t> units = arch.hidden_units;
  units.push_back(arch.outputs);
  for (std::size_t out : units) {
    DenseLayer layer{Tensor({out, fan_in}), Tensor({out})};
    const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (double& v : layer.weight.mutable_data()) v = scale * rng.normal();
    dense.push_back(std::move(layer));
    fan_in = out;
  }
  return SmallCnn(std::move(name), arch.input_shape, std::move(conv), std::move(dense));
}

std::size_t SmallCnn::class_count() const {
  const std::size_t outputs = dense_.back().weight.dim(0);
  return outputs == 1 ? 2 : outputs;
}

SmallCnn::Trace SmallCnn::forward_trace(const Tensor& input) const {
  if (input.shape() != input_shape_) {
    throw ShapeError(layer_prefix(conv_.empty() ? "dense" : "conv", 0) +
                     "expected input " + shape_to_string(input_shape_) +
                     ", got " + shape_to_string(input.shape()));
  }
  Trace trace;
  Tensor current = input;
  for (const ConvLayer& layer : conv_) {
    const Shape& ks = layer.kernel.shape();
    const std::size_t out_c = ks[0], in_c = ks[1], kh = ks[2], kw = ks[3];
    const std::size_t in_h = current.dim(1), in_w = current.dim(2);
    const std::size_t ph = padding(kh), pw = padding(kw);
    const std::size_t out_h = in_h + 2 * ph - kh + 1, out_w = in_w + 2 * pw - kw + 1;

    Tensor out({out_c, out_h, out_w});
    for (std::size_t o = 0; o < out_c; ++o) {
      for (std::size_t y = 0; y < out_h; ++y) {
        for (std::size_t x = 0; x < out_w; ++x) {
          double s = layer.bias[o];
          for (std::size_t i = 0; i < in_c; ++i) {
            for (std::size_t ky = 0; ky < kh; ++ky) {
              const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y + ky) -
                                        static_cast<std::ptrdiff_t>(ph);
              if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(in_h)) continue;
              for (std::size_t kx = 0; kx < kw; ++kx) {
                const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(x + kx) -
                                          static_cast<std::ptrdiff_t>(pw);
                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(in_w)) continue;
                s += layer.kernel[((o * in_c + i) * kh + ky) * kw + kx] *
                     current[(i * in_h + static_cast<std::size_t>(iy)) * in_w +
                             static_cast<std::size_t>(ix)];
              }
            }
          }
          out[(o * out_h + y) * out_w + x] = std::max(0.0, s);
        }
      }
    }
    trace.conv_inputs.push_back(std::move(current));

    std::vector<std::size_t> winners;
    Tensor block_output = out;
    if (layer.pool) {
      const std::size_t ph2 = out_h / 2, pw2 = out_w / 2;
      Tensor pooled({out_c, ph2, pw2});
      winners.resize(pooled.size());
      for (std::size_t c = 0; c < out_c; ++c) {
        for (std::size_t y = 0; y < ph2; ++y) {
          for (std::size_t x = 0; x < pw2; ++x) {
            std::size_t best = (c * out_h + 2 * y) * out_w + 2 * x;
            for (std::size_t dy = 0; dy < 2; ++dy)
              for (std::size_t dx = 0; dx < 2; ++dx) {
                const std::size_t idx = (c * out_h + 2 * y + dy) * out_w + 2 * x + dx;
                if (out[idx] > out[best]) best = idx;
              }
            const std::size_t cell = (c * ph2 + y) * pw2 + x;
            winners[cell] = best;
            pooled[cell] = out[best];
          }
        }
      }
      block_output = std::move(pooled);
    }
    trace.conv_outputs.push_back(std::move(out));
    trace.pool_argmax.push_back(std::move(winners));
    current = std::move(block_output);
  }

  current = current.flattened();
  for (std::size_t l = 0; l < dense_.size(); ++l) {
    const DenseLayer& layer = dense_[l];
    const std::size_t n_out = layer.weight.dim(0), n_in = layer.weight.dim(1);
    Tensor out({n_out});
    const bool hidden = l + 1 < dense_.size();
    for (std::size_t o = 0; o < n_out; ++o) {
      double s = layer.bias[o];
      for (std::size_t i = 0; i < n_in; ++i) s += layer.weight[o * n_in + i] * current[i];
      out[o] = hidden ? std::max(0.0, s) : s;
    }
    trace.dense_inputs.push_back(std::move(current));
    current = out;
    trace.dense_outputs.push_back(std::move(out));
  }

  const auto& logits = trace.dense_outputs.back().values();
  if (logits.size() == 1) {
    const double p = sigmoid(logits[0]);
    trace.scores = {-logits[0], logits[0]};
    trace.probabilities = {1.0 - p, p};
  } else {
    trace.scores = logits;
    trace.probabilities = softmax(logits);
  }
  return trace;
}

void SmallCnn::backward(const Trace& trace, const std::vector<double>& logit_grad,
                        std::span<Tensor> gradients, Tensor* feature_grad) const {
  const bool want_params = !gradients.empty();
  const std::size_t dense_offset = 2 * conv_.size();

  std::vector<double> d = logit_grad;
  for (std::size_t l = dense_.size(); l-- > 0;) {
    const DenseLayer& layer = dense_[l];
    const std::size_t n_out = layer.weight.dim(0), n_in = layer.weight.dim(1);
    if (l + 1 < dense_.size()) {
      for (std::size_t o = 0; o < n_out; ++o)
        if (trace.dense_outputs[l][o] <= 0.0) d[o] = 0.0;
    }
    const Tensor& a = trace.dense_inputs[l];
    if (want_params) {
      auto dw = gradients[dense_offset + 2 * l].mutable_data();
      auto db = gradients[dense_offset + 2 * l + 1].mutable_data();
      for (std::size_t o = 0; o < n_out; ++o) {
        if (d[o] == 0.0) continue;
        db[o] += d[o];
        for (std::size_t i = 0; i < n_in; ++i) dw[o * n_in + i] += d[o] * a[i];
      }
    }
    std::vector<double> d_in(n_in, 0.0);
    for (std::size_t o = 0; o < n_out; ++o) {
      if (d[o] == 0.0) continue;
      for (std::size_t i = 0; i < n_in; ++i) d_in[i] += layer.weight[o * n_in + i] * d[o];
    }
    d = std::move(d_in);
  }
  if (conv_.empty()) return;

  std::vector<double> block_grad = std::move(d);
  for (std::size_t l = conv_.size(); l-- > 0;) {
    const ConvLayer& layer = conv_[l];
    const Tensor& out = trace.conv_outputs[l];
    Tensor g(out.shape());
    if (layer.pool) {
      const auto& winners = trace.pool_argmax[l];
      for (std::size_t cell = 0; cell < winners.size(); ++cell)
        g[winners[cell]] += block_grad[cell];
    } else {
      std::copy(block_grad.begin(), block_grad.end(), g.mutable_data().begin());
    }
    if (l + 1 == conv_.size() && feature_grad) *feature_grad = g;
    if (!want_params) return;

    for (std::size_t i = 0; i < g.size(); ++i)
      if (out[i] <= 0.0) g[i] = 0.0;

    const Tensor& in = trace.conv_inputs[l];
    const Shape& ks = layer.kernel.shape();
    const std::size_t out_c = ks[0], in_c = ks[1], kh = ks[2], kw = ks[3];
    const std::size_t in_h = in.dim(1), in_w = in.dim(2);
    const std::size_t out_h = out.dim(1), out_w = out.dim(2);
    const std::size_t ph = padding(kh), pw = padding(kw);
    auto dk = gradients[2 * l].mutable_data();
    auto db = gradients[2 * l + 1].mutable_data();
    std::vector<double> d_in(l > 0 ? in.size() : 0, 0.0);

    for (std::size_t o = 0; o < out_c; ++o) {
      for (std::size_t y = 0; y < out_h; ++y) {
        for (std::size_t x = 0; x < out_w; ++x) {
          const double go = g[(o * out_h + y) * out_w + x];
          if (go == 0.0) continue;
          db[o] += go;
          for (std::size_t i = 0; i < in_c; ++i) {
            for (std::size_t ky = 0; ky < kh; ++ky) {
              const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y + ky) -
                                        static_cast<std::ptrdiff_t>(ph);
              if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(in_h)) continue;
              for (std::size_t kx = 0; kx < kw; ++kx) {
                const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(x + kx) -
                                          static_cast<std::ptrdiff_t>(pw);
                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(in_w)) continue;
                const std::size_t k_idx = ((o * in_c + i) * kh + ky) * kw + kx;
                const std::size_t in_idx = (i * in_h + static_cast<std::size_t>(iy)) * in_w +
                                           static_cast<std::size_t>(ix);
                dk[k_idx] += go * in[in_idx];
                if (l > 0) d_in[in_idx] += go * layer.kernel[k_idx];
              }
            }
          }
        }
      }
    }
    block_grad = std::move(d_in);
  }
}

std::vector<double> SmallCnn::predict(const Tensor& input) const {
  return forward_trace(input).probabilities;
}

SmallCnn::Activations SmallCnn::forward_with_activations(const Tensor& input) const {
  Trace trace = forward_trace(input);
  return {std::move(trace.probabilities), std::move(trace.scores),
          std::move(trace.conv_outputs)};
}

Tensor SmallCnn::grad_wrt_feature_maps(const Tensor& input,
                                       std::size_t class_index) const {
  if (class_index >= class_count()) {
    throw ConfigError("class index " + std::to_string(class_index) +
                      " out of range for " + std::to_string(class_count()) +
                      " classes");
  }
  if (conv_.empty()) {
    throw ConfigError("model '" + name_ + "' has no convolutional feature maps");
  }
  const Trace trace = forward_trace(input);
  std::vector<double> logit_grad(dense_.back().weight.dim(0), 0.0);
  if (logit_grad.size() == 1) {
    logit_grad[0] = class_index == 1 ? 1.0 : -1.0;
  } else {
    logit_grad[class_index] = 1.0;
  }
  Tensor feature_grad;
  backward(trace, logit_grad, {}, &feature_grad);
  return feature_grad;
}

std::unique_ptr<TrainableModel> SmallCnn::clone() const {
  return std::make_unique<SmallCnn>(*this);
}

std::vector<Tensor*> SmallCnn::parameters() {
  std::vector<Tensor*> params;
  for (ConvLayer& layer : conv_) {
    params.push_back(&layer.kernel);
    params.push_back(&layer.bias);
  }
  for (DenseLayer& layer : dense_) {
    params.push_back(&layer.weight);
    params.push_back(&layer.bias);
  }
  return params;
}

std::vector<NamedTensor> SmallCnn::named_parameters() const {
  std::vector<NamedTensor> named;
  for (std::size_t l = 0; l < conv_.size(); ++l) {
    named.push_back({"conv" + std::to_string(l) + ".kernel", conv_[l].kernel});
    named.push_back({"conv" + std::to_string(l) + ".bias", conv_[l].bias});
  }
  for (std::size_t l = 0; l < dense_.size(); ++l) {
    named.push_back({"dense" + std::to_string(l) + ".weight", dense_[l].weight});
    named.push_back({"dense" + std::to_string(l) + ".bias", dense_[l].bias});
  }
  return named;
}

double SmallCnn::accumulate_gradient(const Tensor& input, int label,
                                     std::span<Tensor> gradients) const {
  if (label < 0 || static_cast<std::size_t>(label) >= class_count()) {
    throw ConfigError("label " + std::to_string(label) + " out of range");
  }
  const Trace trace = forward_trace(input);
  const auto& p = trace.probabilities;
  std::vector<double> logit_grad;
  double loss = 0.0;
  if (dense_.back().weight.dim(0) == 1) {
    logit_grad = {p[1] - static_cast<double>(label)};
    loss = bce_per_class(p[1], label);
  } else {
    logit_grad = p;
    logit_grad[static_cast<std::size_t>(label)] -= 1.0;
    loss = -std::log(std::clamp(p[static_cast<std::size_t>(label)], kLogClamp, 1.0));
  }
  backward(trace, logit_grad, gradients, nullptr);
  return loss;
}

}  // namespace medxai
