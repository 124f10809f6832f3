#include "abslab/mlp.hpp"

#include <cmath>

#include <fmt/format.h>

#include "abslab/error.hpp"

namespace abslab::net {

MlpParams::MlpParams(int input_dim, std::vector<int> hidden_sizes, int output_dim)
    : hidden_(std::move(hidden_sizes)) {
  require(input_dim > 0 && output_dim > 0, "MLP input and output dimensions must be positive");
  int in = input_dim;
  Eigen::Index cursor = 0;
  auto add_layer = [&](int out, bool normalized) {
    require(out > 0, "MLP layer widths must be positive");
    layers_.push_back({in, out, normalized});
    Offsets off{};
    off.weight = cursor;
    cursor += static_cast<Eigen::Index>(in) * out;
    off.bias = cursor;
    cursor += out;
    off.gain = normalized ? cursor : -1;
    if (normalized) cursor += out;
    off.shift = normalized ? cursor : -1;
    if (normalized) cursor += out;
    offsets_.push_back(off);
    in = out;
  };
  for (int width : hidden_) add_layer(width, true);
  add_layer(output_dim, false);
  values_ = Vector::Zero(cursor);
  for (int l = 0; l < layer_count(); ++l) {
    if (layers_[l].normalized) gain(l).setOnes();
  }
}

MlpParams MlpParams::initialize(int input_dim, std::vector<int> hidden_sizes, int output_dim,
                                Rng& rng) {
  MlpParams p(input_dim, std::move(hidden_sizes), output_dim);
  for (int l = 0; l < p.layer_count(); ++l) {
    const auto& shape = p.layer(l);
    const double limit = std::sqrt(6.0 / (shape.in + shape.out));
    std::uniform_real_distribution<double> u(-limit, limit);
    auto w = p.weight(l);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = u(rng);
    }
  }
  return p;
}

Eigen::Map<const Matrix> MlpParams::weight(int l) const {
  return {values_.data() + offsets_[l].weight, layers_[l].out, layers_[l].in};
}
Eigen::Map<Matrix> MlpParams::weight(int l) {
  return {values_.data() + offsets_[l].weight, layers_[l].out, layers_[l].in};
}
Eigen::Map<const Vector> MlpParams::bias(int l) const {
  return {values_.data() + offsets_[l].bias, layers_[l].out};
}
Eigen::Map<Vector> MlpParams::bias(int l) { return {values_.data() + offsets_[l].bias, layers_[l].out}; }
Eigen::Map<const Vector> MlpParams::gain(int l) const {
  require(layers_[l].normalized, "output layer has no layer-norm gain");
  return {values_.data() + offsets_[l].gain, layers_[l].out};
}
Eigen::Map<Vector> MlpParams::gain(int l) {
  require(layers_[l].normalized, "output layer has no layer-norm gain");
  return {values_.data() + offsets_[l].gain, layers_[l].out};
}
Eigen::Map<const Vector> MlpParams::shift(int l) const {
  require(layers_[l].normalized, "output layer has no layer-norm shift");
  return {values_.data() + offsets_[l].shift, layers_[l].out};
}
Eigen::Map<Vector> MlpParams::shift(int l) {
  require(layers_[l].normalized, "output layer has no layer-norm shift");
  return {values_.data() + offsets_[l].shift, layers_[l].out};
}

void MlpParams::unflatten(const Vector& flat) {
  require(flat.size() == values_.size(),
          fmt::format("parameter vector has {} entries, expected {}", flat.size(), values_.size()));
  values_ = flat;
}

bool MlpParams::same_shape(const MlpParams& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].in != other.layers_[l].in || layers_[l].out != other.layers_[l].out ||
        layers_[l].normalized != other.layers_[l].normalized) {
      return false;
    }
  }
  return true;
}

namespace {

template <bool kKeep>
Matrix forward_impl(const MlpParams& params, const Matrix& x, ForwardCache* cache) {
  require(x.cols() == params.input_dim(),
          fmt::format("input has {} columns, network expects {}", x.cols(), params.input_dim()));
  const Eigen::Index batch = x.rows();
  if constexpr (kKeep) {
    cache->inputs.clear();
    cache->normed.clear();
    cache->inv_std.clear();
    cache->activated.clear();
  }
  Matrix h = x;
  for (int l = 0; l < params.layer_count(); ++l) {
    const auto& shape = params.layer(l);
    Matrix z = h * params.weight(l).transpose();
    z.rowwise() += params.bias(l).transpose();
    if constexpr (kKeep) cache->inputs.push_back(std::move(h));
    if (!shape.normalized) {
      h = std::move(z);
      continue;
    }
    const auto gain = params.gain(l);
    const auto shift = params.shift(l);
    Vector inv_std(batch);
    for (Eigen::Index r = 0; r < batch; ++r) {
      auto row = z.row(r);
      const double mean = row.mean();
      row.array() -= mean;
      const double var = row.squaredNorm() / shape.out;
      inv_std[r] = 1.0 / std::sqrt(var + kLayerNormEps);
      row *= inv_std[r];
    }
    Matrix y = ((z.array().rowwise() * gain.transpose().array()).rowwise() +
                shift.transpose().array())
                   .matrix();
    h = y.cwiseMax(0.0);
    if constexpr (kKeep) {
      cache->normed.push_back(std::move(z));
      cache->inv_std.push_back(std::move(inv_std));
      cache->activated.push_back(std::move(y));
    }
  }
  return h;
}

}  // namespace

Matrix forward(const MlpParams& params, const Matrix& x) {
  return forward_impl<false>(params, x, nullptr);
}

Matrix forward(const MlpParams& params, const Matrix& x, ForwardCache& cache) {
  return forward_impl<true>(params, x, &cache);
}

GradVector backward(const MlpParams& params, const ForwardCache& cache, const Matrix& upstream) {
  const int layers = params.layer_count();
  require(static_cast<int>(cache.inputs.size()) == layers, "forward cache does not match network");
  const Eigen::Index batch = cache.inputs.front().rows();
  require(upstream.rows() == batch && upstream.cols() == params.output_dim(),
          fmt::format("upstream gradient is {}x{}, expected {}x{}", upstream.rows(),
                      upstream.cols(), batch, params.output_dim()));

  MlpParams grad(params.input_dim(), params.hidden_sizes(), params.output_dim());
  grad.values().setZero();

  Matrix delta = upstream;  // gradient w.r.t. the current layer's output
  int hidden_index = layers - 2;
  for (int l = layers - 1; l >= 0; --l) {
    const auto& shape = params.layer(l);
    const Matrix& input = cache.inputs[l];
    Matrix dz;
    if (!shape.normalized) {
      dz = std::move(delta);
    } else {
      const Matrix& xhat = cache.normed[hidden_index];
      const Vector& inv_std = cache.inv_std[hidden_index];
      const Matrix& y = cache.activated[hidden_index];
      --hidden_index;
      Matrix dy = (y.array() > 0.0).select(delta.array(), 0.0).matrix();
      grad.gain(l) = (dy.array() * xhat.array()).colwise().sum().transpose();
      grad.shift(l) = dy.colwise().sum().transpose();
      Matrix dxhat = (dy.array().rowwise() * params.gain(l).transpose().array()).matrix();
      dz.resize(batch, shape.out);
      for (Eigen::Index r = 0; r < batch; ++r) {
        const double mean_d = dxhat.row(r).mean();
        const double mean_dx = dxhat.row(r).dot(xhat.row(r)) / shape.out;
        dz.row(r) = inv_std[r] *
                    (dxhat.row(r).array() - mean_d - xhat.row(r).array() * mean_dx).matrix();
      }
    }
    grad.weight(l) = dz.transpose() * input;
    grad.bias(l) = dz.colwise().sum().transpose();
    if (l > 0) delta = dz * params.weight(l);
  }
  return grad.flatten();
}

GradVector backward(const MlpParams& params, const Matrix& x, const Matrix& upstream) {
  ForwardCache cache;
  forward(params, x, cache);
  return backward(params, cache, upstream);
}

GradVector clip_global_norm(const GradVector& g, double max_norm) {
  require(max_norm > 0.0, "max_norm must be positive");
  const double norm = g.norm();
  if (norm <= max_norm) return g;
  return g * (max_norm / norm);
}

void check_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw TrainingDivergence(fmt::format("non-finite value in {}", what));
}

}  // namespace abslab::net
