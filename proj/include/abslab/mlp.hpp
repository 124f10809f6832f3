#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "abslab/rng.hpp"
#include "abslab/types.hpp"

namespace abslab::net {

inline constexpr double kLayerNormEps = 1e-5;

using GradVector = Vector;

struct LayerShape {
  int in = 0;
  int out = 0;
  bool normalized = false;  // hidden layers carry layer-norm gain and shift
};

// Parameters of a perceptron with layer-normalized ReLU hidden layers and an
// affine output layer, stored as one flat vector. Per layer the flat layout
// is: weight (out x in, row-major), bias (out), then for hidden layers
// gain (out) and shift (out).
class MlpParams {
 public:
  MlpParams() = default;
  // Zero weights and biases, unit gains, zero shifts.
  MlpParams(int input_dim, std::vector<int> hidden_sizes, int output_dim);

  // Scaled-uniform (Glorot) weights, zero biases, unit gains, zero shifts.
  static MlpParams initialize(int input_dim, std::vector<int> hidden_sizes, int output_dim,
                              Rng& rng);

  int input_dim() const { return layers_.front().in; }
  int output_dim() const { return layers_.back().out; }
  const std::vector<int>& hidden_sizes() const { return hidden_; }
  int layer_count() const { return static_cast<int>(layers_.size()); }
  const LayerShape& layer(int l) const { return layers_[l]; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

  Eigen::Map<const Matrix> weight(int l) const;
  Eigen::Map<Matrix> weight(int l);
  Eigen::Map<const Vector> bias(int l) const;
  Eigen::Map<Vector> bias(int l);
  Eigen::Map<const Vector> gain(int l) const;
  Eigen::Map<Vector> gain(int l);
  Eigen::Map<const Vector> shift(int l) const;
  Eigen::Map<Vector> shift(int l);

  const Vector& flatten() const { return values_; }
  Vector& values() { return values_; }
  // Replaces every parameter; `flat` must have size() entries.
  void unflatten(const Vector& flat);

  bool same_shape(const MlpParams& other) const;

 private:
  struct Offsets {
    Eigen::Index weight, bias, gain, shift;
  };

  std::vector<int> hidden_;
  std::vector<LayerShape> layers_;
  std::vector<Offsets> offsets_;
  Vector values_;
};

// Intermediate values kept by forward() for backward().
struct ForwardCache {
  std::vector<Matrix> inputs;    // input of every layer
  std::vector<Matrix> normed;    // x-hat of hidden layers
  std::vector<Vector> inv_std;   // 1/sqrt(var + eps) per row, hidden layers
  std::vector<Matrix> activated; // gain * x-hat + shift, pre-ReLU
};

Matrix forward(const MlpParams& params, const Matrix& x);
Matrix forward(const MlpParams& params, const Matrix& x, ForwardCache& cache);

// Gradient of sum(forward(params, x) .* upstream) with respect to flatten(params).
GradVector backward(const MlpParams& params, const ForwardCache& cache, const Matrix& upstream);
GradVector backward(const MlpParams& params, const Matrix& x, const Matrix& upstream);

GradVector clip_global_norm(const GradVector& g, double max_norm);

// Throws TrainingDivergence naming `what` if any entry is NaN or infinite.
void check_finite(const Vector& v, const char* what);

}  // namespace abslab::net
