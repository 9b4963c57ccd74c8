#include "medxai/lime.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "medxai/errors.hpp"
#include "medxai/random.hpp"

namespace medxai {

namespace {

struct Spatial {
  std::size_t channels, height, width;
};

Spatial spatial_dims(const Tensor& image) {
  if (image.rank() == 3) return {image.dim(0), image.dim(1), image.dim(2)};
  if (image.rank() == 2) return {1, image.dim(0), image.dim(1)};
  throw ShapeError("expected an [H,W] or [C,H,W] image, got " +
                   shape_to_string(image.shape()));
}

// Solves the symmetric positive-definite system a x = b in place (a is
// n x n, row-major). Returns false when a pivot is not positive.
bool cholesky_solve(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * n + k] * a[j * n + k];
    if (!(diag > 0.0) || !std::isfinite(diag)) return false;
    const double l_jj = std::sqrt(diag);
    a[j * n + j] = l_jj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / l_jj;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
    b[i] = s / a[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[k * n + i] * b[k];
    b[i] = s / a[i * n + i];
  }
  return true;
}

struct RidgeFit {
  double intercept;
  std::vector<double> beta;  // one per column in `columns`
};

RidgeFit weighted_ridge(const Tensor& z, std::span<const double> y,
                        std::span<const double> w, double lambda,
                        const std::vector<std::size_t>& columns) {
  const std::size_t rows = z.dim(0), stride = z.dim(1);
  const std::size_t p = columns.size() + 1;
  std::vector<double> a(p * p, 0.0), b(p, 0.0);
  std::vector<double> x(p);
  for (std::size_t r = 0; r < rows; ++r) {
    x[0] = 1.0;
    for (std::size_t c = 0; c < columns.size(); ++c) x[c + 1] = z[r * stride + columns[c]];
    for (std::size_t i = 0; i < p; ++i) {
      const double wx = w[r] * x[i];
      b[i] += wx * y[r];
      for (std::size_t j = 0; j <= i; ++j) a[i * p + j] += wx * x[j];
    }
  }
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < i; ++j) a[j * p + i] = a[i * p + j];
  for (std::size_t i = 1; i < p; ++i) a[i * p + i] += lambda;

  if (!cholesky_solve(a, b, p)) {
    throw NumericError(
        "local surrogate normal equations are singular; increase the number "
        "of samples or the ridge penalty");
  }
  return {b[0], std::vector<double>(b.begin() + 1, b.end())};
}

}  // namespace

std::vector<std::size_t> SegmentMask::segment_sizes() const {
  std::vector<std::size_t> sizes(segment_count, 0);
  for (std::size_t l : labels) ++sizes[l];
  return sizes;
}

Tensor SegmentMask::to_tensor() const {
  Tensor t({height, width});
  for (std::size_t i = 0; i < labels.size(); ++i) t[i] = static_cast<double>(labels[i]);
  return t;
}

SegmentMask segment_image(const Tensor& image, std::size_t grid) {
  if (grid == 0) throw ConfigError("segment grid size must be at least 1");
  const Spatial dims = spatial_dims(image);
  if (dims.height < grid || dims.width < grid) {
    throw ConfigError("image " + std::to_string(dims.height) + "x" +
                      std::to_string(dims.width) + " is smaller than the " +
                      std::to_string(grid) + "x" + std::to_string(grid) + " grid");
  }
  const std::size_t cell_h = dims.height / grid, cell_w = dims.width / grid;
  SegmentMask mask{dims.height, dims.width, grid * grid, {}};
  mask.labels.resize(dims.height * dims.width);
  for (std::size_t y = 0; y < dims.height; ++y) {
    const std::size_t row = std::min(y / cell_h, grid - 1);
    for (std::size_t x = 0; x < dims.width; ++x) {
      const std::size_t col = std::min(x / cell_w, grid - 1);
      mask.labels[y * dims.width + x] = row * grid + col;
    }
  }
  return mask;
}

Tensor perturb(const Tensor& image, const SegmentMask& mask,
               std::span<const double> active, double baseline) {
  const Spatial dims = spatial_dims(image);
  if (dims.height != mask.height || dims.width != mask.width) {
    throw ShapeError("segment mask " + std::to_string(mask.height) + "x" +
                     std::to_string(mask.width) + " does not match image " +
                     shape_to_string(image.shape()));
  }
  if (active.size() != mask.segment_count) {
    throw ShapeError("perturbation has " + std::to_string(active.size()) +
                     " entries for " + std::to_string(mask.segment_count) + " segments");
  }
  Tensor out = image;
  const std::size_t plane = dims.height * dims.width;
  for (std::size_t p = 0; p < plane; ++p) {
    if (active[mask.labels[p]] != 0.0) continue;
    for (std::size_t c = 0; c < dims.channels; ++c) out[c * plane + p] = baseline;
  }
  return out;
}

PerturbationSet sample_perturbations(const Tensor& image, const SegmentMask& mask,
                                     std::size_t samples, std::uint64_t seed,
                                     double baseline) {
  const std::size_t s = mask.segment_count;
  if (samples < s + 2) {
    throw ConfigError("need at least " + std::to_string(s + 2) +
                      " perturbation samples for " + std::to_string(s) +
                      " segments, got " + std::to_string(samples));
  }
  Rng rng(seed);
  PerturbationSet set{Tensor({samples, s}), {}};
  set.inputs.reserve(samples);
  for (std::size_t r = 0; r < samples; ++r) {
    for (std::size_t j = 0; j < s; ++j) set.z[r * s + j] = (r == 0 || rng.bit()) ? 1.0 : 0.0;
    set.inputs.push_back(perturb(image, mask, set.z.data().subspan(r * s, s), baseline));
  }
  return set;
}

std::vector<double> proximity_weights(const Tensor& z, double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("kernel width must be positive");
  if (z.rank() != 2) throw ShapeError("perturbation matrix must be [n,S]");
  const std::size_t n = z.dim(0), s = z.dim(1);
  std::vector<double> w(n);
  for (std::size_t r = 0; r < n; ++r) {
    double on = 0.0;
    for (std::size_t j = 0; j < s; ++j) on += z[r * s + j];
    const double distance = 1.0 - on / static_cast<double>(s);
    w[r] = std::exp(-(distance * distance) / (sigma * sigma));
  }
  return w;
}

LimeExplanation fit_local_model(const Tensor& z, std::span<const double> targets,
                                std::span<const double> weights, double lambda,
                                std::size_t top_k) {
  if (z.rank() != 2) throw ShapeError("perturbation matrix must be [n,S]");
  const std::size_t n = z.dim(0), s = z.dim(1);
  if (targets.size() != n || weights.size() != n) {
    throw ShapeError("local model: " + std::to_string(n) + " samples, " +
                     std::to_string(targets.size()) + " targets, " +
                     std::to_string(weights.size()) + " weights");
  }
  if (!(lambda >= 0.0)) throw ConfigError("ridge penalty must be non-negative");
  if (top_k < 1 || top_k > s) {
    throw ConfigError("top-k must lie in [1, " + std::to_string(s) + "], got " +
                      std::to_string(top_k));
  }
  lambda = std::max(lambda, kMinRidge);

  std::vector<std::size_t> all(s);
  std::iota(all.begin(), all.end(), 0);
  RidgeFit fit = weighted_ridge(z, targets, weights, lambda, all);

  std::vector<std::size_t> selected = all;
  if (top_k < s) {
    std::vector<std::size_t> ranked = all;
    std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(fit.beta[a]) > std::abs(fit.beta[b]);
    });
    selected.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(top_k));
    std::sort(selected.begin(), selected.end());
    fit = weighted_ridge(z, targets, weights, lambda, selected);
  }

  LimeExplanation out;
  out.coefficients.assign(s, 0.0);
  for (std::size_t c = 0; c < selected.size(); ++c) out.coefficients[selected[c]] = fit.beta[c];
  out.intercept = fit.intercept;
  out.selected = selected;
  out.sample_count = n;
  out.lambda = lambda;

  double wsum = 0.0, wy = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    wsum += weights[r];
    wy += weights[r] * targets[r];
  }
  const double mean = wy / wsum;
  double ss_res = 0.0, ss_tot = 0.0, ss_raw = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    ss_raw += weights[r] * targets[r] * targets[r];
    double fitted = out.intercept;
    for (std::size_t j : selected) fitted += out.coefficients[j] * z[r * s + j];
    ss_res += weights[r] * (targets[r] - fitted) * (targets[r] - fitted);
    ss_tot += weights[r] * (targets[r] - mean) * (targets[r] - mean);
  }
  // Targets that are constant up to rounding leave nothing to explain.
  out.r2 = ss_tot > 1e-20 * ss_raw ? 1.0 - ss_res / ss_tot : 1.0;
  return out;
}

LimeExplanation explain_lime(const Predictor& predictor, const Tensor& image,
                             const LimeConfig& config) {
  if (config.class_index >= predictor.class_count()) {
    throw ConfigError("class index " + std::to_string(config.class_index) +
                      " out of range for " + std::to_string(predictor.class_count()) +
                      " classes");
  }
  const SegmentMask mask = segment_image(image, config.grid);
  const PerturbationSet set =
      sample_perturbations(image, mask, config.samples, config.seed, config.baseline);
  std::vector<double> targets(set.inputs.size());
  for (std::size_t r = 0; r < set.inputs.size(); ++r)
    targets[r] = predictor.predict(set.inputs[r]).at(config.class_index);
  const std::vector<double> weights = proximity_weights(set.z, config.sigma);
  LimeExplanation out = fit_local_model(set.z, targets, weights, config.lambda,
                                        std::min(config.top_k, mask.segment_count));
  out.kernel_width = config.sigma;
  out.class_index = config.class_index;
  return out;
}

nlohmann::json lime_to_json(const LimeExplanation& e) {
  return {{"method", "lime"},
          {"class_index", e.class_index},
          {"intercept", e.intercept},
          {"coefficients", e.coefficients},
          {"selected_segments", e.selected},
          {"local_fit_r2", e.r2},
          {"sample_count", e.sample_count},
          {"kernel_width", e.kernel_width},
          {"ridge_lambda", e.lambda}};
}

Tensor to_grayscale(const Tensor& image) {
  const Spatial dims = spatial_dims(image);
  const std::size_t plane = dims.height * dims.width;
  Tensor gray({1, dims.height, dims.width});
  for (std::size_t p = 0; p < plane; ++p) {
    double s = 0.0;
    for (std::size_t c = 0; c < dims.channels; ++c) s += image[c * plane + p];
    gray[p] = s / static_cast<double>(dims.channels);
  }
  return gray;
}

Tensor render_lime_mask(const Tensor& image, const SegmentMask& mask,
                        const LimeExplanation& explanation) {
  constexpr double kDimFactor = 0.25;
  Tensor gray = to_grayscale(image);
  if (gray.dim(1) != mask.height || gray.dim(2) != mask.width) {
    throw ShapeError("segment mask does not match image");
  }
  std::vector<bool> keep(mask.segment_count, false);
  for (std::size_t s : explanation.selected) keep.at(s) = true;
  for (std::size_t p = 0; p < gray.size(); ++p)
    if (!keep[mask.labels[p]]) gray[p] *= kDimFactor;
  return gray;
}

}  // namespace medxai
