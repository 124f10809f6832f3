#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "abslab/adam.hpp"
#include "abslab/checkpoint.hpp"
#include "abslab/error.hpp"
#include "abslab/mlp.hpp"

namespace abslab::net {
namespace {

Matrix random_matrix(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = n(rng);
  return m;
}

// Randomizes every parameter, gains and shifts included, so the check
// exercises the layer-norm backward pass away from its initial point.
MlpParams random_net(int in, std::vector<int> hidden, int out, Rng& rng) {
  MlpParams p(in, std::move(hidden), out);
  std::normal_distribution<double> n(0.0, 0.7);
  for (Eigen::Index i = 0; i < p.values().size(); ++i) p.values()[i] = n(rng);
  return p;
}

double max_fd_error(const MlpParams& p, const Matrix& x, const Matrix& up, double h) {
  const GradVector g = backward(p, x, up);
  double worst = 0.0;
  MlpParams probe = p;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double v = p.flatten()[i];
    probe.values()[i] = v + h;
    const double plus = forward(probe, x).cwiseProduct(up).sum();
    probe.values()[i] = v - h;
    const double minus = forward(probe, x).cwiseProduct(up).sum();
    probe.values()[i] = v;
    const double fd = (plus - minus) / (2.0 * h);
    const double rel = std::abs(fd - g[i]) / std::max({std::abs(fd), std::abs(g[i]), 1e-6});
    worst = std::max(worst, rel);
  }
  return worst;
}

TEST(Forward, ZeroNetworkOutputsZero) {
  MlpParams p(3, {5, 4}, 2);
  Rng rng(1);
  EXPECT_TRUE(forward(p, random_matrix(7, 3, rng)).isZero(0.0));
}

TEST(Forward, HandComputedSingleHiddenLayer) {
  MlpParams p(2, {2}, 1);
  p.weight(0) << 1.0, 2.0, -1.0, 0.5;
  p.bias(0) << 0.25, -0.5;
  p.gain(0) << 2.0, 1.5;
  p.shift(0) << 0.1, -0.2;
  p.weight(1) << 3.0, -1.0;
  p.bias(1) << 0.7;
  Matrix x(1, 2);
  x << 1.0, -1.0;

  // z = (1 - 2 + 0.25, -1 - 0.5 - 0.5) = (-0.75, -2)
  const double z0 = -0.75, z1 = -2.0;
  const double mean = (z0 + z1) / 2.0;
  const double var = ((z0 - mean) * (z0 - mean) + (z1 - mean) * (z1 - mean)) / 2.0;
  const double s = 1.0 / std::sqrt(var + kLayerNormEps);
  const double h0 = std::max(0.0, 2.0 * (z0 - mean) * s + 0.1);
  const double h1 = std::max(0.0, 1.5 * (z1 - mean) * s - 0.2);
  const double expected = 3.0 * h0 - 1.0 * h1 + 0.7;
  EXPECT_NEAR(forward(p, x)(0, 0), expected, 1e-12);
}

TEST(Forward, LayerNormIgnoresConstantShift) {
  Rng rng(2);
  MlpParams p = MlpParams::initialize(3, {6}, 2, rng);
  const Matrix x = random_matrix(4, 3, rng);
  const Matrix before = forward(p, x);
  p.bias(0).array() += 3.25;  // same constant added to every pre-norm activation
  EXPECT_TRUE(forward(p, x).isApprox(before, 1e-9));
}

TEST(Forward, RejectsWrongWidth) {
  MlpParams p(3, {4}, 2);
  EXPECT_THROW(forward(p, Matrix::Zero(2, 4)), ContractViolation);
}

TEST(Forward, RepeatedCallsAreBitIdentical) {
  Rng rng(3);
  MlpParams p = MlpParams::initialize(5, {16, 16}, 3, rng);
  const Matrix x = random_matrix(32, 5, rng);
  EXPECT_EQ(forward(p, x), forward(p, x));
}

TEST(Backward, ZeroUpstreamGivesZeroGradient) {
  Rng rng(4);
  MlpParams p = random_net(3, {4}, 2, rng);
  EXPECT_TRUE(backward(p, random_matrix(5, 3, rng), Matrix::Zero(5, 2)).isZero(0.0));
}

TEST(Backward, MatchesFiniteDifferencesOnSmallNet) {
  Rng rng(5);
  MlpParams p = random_net(3, {4}, 2, rng);
  EXPECT_LT(max_fd_error(p, random_matrix(5, 3, rng), random_matrix(5, 2, rng), 1e-5), 1e-4);
}

TEST(Backward, MatchesFiniteDifferencesOnRandomNets) {
  Rng rng(6);
  std::uniform_int_distribution<int> width(1, 6), depth(0, 3), batch(1, 6);
  int checked = 0;
  while (checked < 25) {
    const int in = width(rng), out = width(rng);
    std::vector<int> hidden(depth(rng));
    // Width-2 layer norm outputs +-1 whatever its input, which leaves only
    // eps-sized gradients upstream; too small for a relative comparison.
    for (auto& h : hidden) h = width(rng) + 2;
    MlpParams p = random_net(in, hidden, out, rng);
    if (p.size() > 200) continue;
    const int n = batch(rng);
    EXPECT_LT(max_fd_error(p, random_matrix(n, in, rng), random_matrix(n, out, rng), 1e-5), 1e-4)
        << "net " << checked;
    ++checked;
  }
}

TEST(Backward, DuplicatedRowDoublesItsContribution) {
  Rng rng(7);
  MlpParams p = random_net(3, {4}, 2, rng);
  const Matrix x = random_matrix(1, 3, rng), up = random_matrix(1, 2, rng);
  Matrix x2(2, 3), up2(2, 2);
  x2 << x, x;
  up2 << up, up;
  EXPECT_TRUE(backward(p, x2, up2).isApprox(2.0 * backward(p, x, up), 1e-14));
}

TEST(Params, FlattenUnflattenRoundTrip) {
  Rng rng(8);
  MlpParams p(4, {8, 3}, 2);
  EXPECT_EQ(p.size(), static_cast<std::size_t>(4 * 8 + 8 * 3 + 8 * 3 + 3 * 3 + 3 * 2 + 2));
  Vector v = Vector::Random(static_cast<Eigen::Index>(p.size()));
  p.unflatten(v);
  EXPECT_EQ(p.flatten(), v);
  EXPECT_THROW(p.unflatten(Vector::Zero(3)), ContractViolation);
}

TEST(Params, InitializationFollowsTheScaledUniformRule) {
  Rng rng(9);
  MlpParams p = MlpParams::initialize(10, {30, 20}, 4, rng);
  for (int l = 0; l < p.layer_count(); ++l) {
    const double limit = std::sqrt(6.0 / (p.layer(l).in + p.layer(l).out));
    EXPECT_LE(p.weight(l).cwiseAbs().maxCoeff(), limit);
    EXPECT_GT(p.weight(l).cwiseAbs().maxCoeff(), 0.8 * limit);
    EXPECT_TRUE(p.bias(l).isZero(0.0));
    if (p.layer(l).normalized) {
      EXPECT_TRUE(p.gain(l).isOnes(0.0));
      EXPECT_TRUE(p.shift(l).isZero(0.0));
    }
  }
  EXPECT_FALSE(p.layer(2).normalized);
}

TEST(ClipGlobalNorm, Examples) {
  Vector g(2);
  g << 3.0, 4.0;
  EXPECT_EQ(clip_global_norm(g, 10.0), g);
  const Vector c = clip_global_norm(g, 1.0);
  EXPECT_DOUBLE_EQ(c[0], 0.6);
  EXPECT_DOUBLE_EQ(c[1], 0.8);
  EXPECT_TRUE(clip_global_norm(Vector::Zero(4), 1.0).isZero(0.0));
  EXPECT_THROW(clip_global_norm(g, 0.0), ContractViolation);
}

TEST(CheckFinite, FlagsNanAndInf) {
  Vector v = Vector::Ones(3);
  EXPECT_NO_THROW(check_finite(v, "v"));
  v[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(check_finite(v, "v"), TrainingDivergence);
  v[1] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(check_finite(v, "v"), TrainingDivergence);
}

TEST(Adam, ZeroGradientLeavesParamsUnchanged) {
  Vector p = Vector::LinSpaced(5, -1.0, 1.0);
  const Vector before = p;
  AdamState opt(5);
  for (int i = 0; i < 3; ++i) adam_step(p, opt, Vector::Zero(5), 0.1);
  EXPECT_EQ(p, before);
  EXPECT_EQ(opt.step, 3);
}

TEST(Adam, FirstStepMovesByAboutTheLearningRate) {
  Vector p = Vector::Constant(1, 2.0);
  AdamState opt(1);
  adam_step(p, opt, Vector::Constant(1, 1.0), 0.01);
  EXPECT_NEAR(p[0], 2.0 - 0.01 * 1.0 / (1.0 + 1e-8), 1e-15);
}

TEST(Adam, TwoStepsMatchTheClosedForm) {
  const double lr = 0.05, g = 0.3;
  Vector p = Vector::Constant(1, 1.0);
  AdamState opt(1);
  adam_step(p, opt, Vector::Constant(1, g), lr);
  adam_step(p, opt, Vector::Constant(1, g), lr);
  double expected = 1.0;
  double m = 0.0, v = 0.0;
  for (int t = 1; t <= 2; ++t) {
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1.0 - std::pow(0.9, t));
    const double vh = v / (1.0 - std::pow(0.999, t));
    expected -= lr * mh / (std::sqrt(vh) + 1e-8);
  }
  EXPECT_NEAR(p[0], expected, 1e-12);
}

TEST(Adam, NanGradientAbortsWithoutSideEffects) {
  Vector p = Vector::Ones(2);
  AdamState opt(2);
  Vector g = Vector::Ones(2);
  g[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(adam_step(p, opt, g, 0.1), TrainingDivergence);
  EXPECT_EQ(opt.step, 0);
  EXPECT_TRUE(p.isOnes(0.0));
}

TEST(Checkpoint, RoundTripAndLayout) {
  Rng rng(10);
  MlpParams p = MlpParams::initialize(3, {4}, 2, rng);
  const auto bytes = encode_checkpoint(p);
  EXPECT_EQ(bytes.size(), 8 + 2 * 16 + 8 * p.size());
  EXPECT_EQ(bytes[0], 2);  // layer count, little-endian
  EXPECT_EQ(bytes[8], 3);  // first fan_in
  EXPECT_EQ(bytes[16], 4);
  MlpParams back = decode_checkpoint(bytes);
  EXPECT_TRUE(back.same_shape(p));
  EXPECT_EQ(back.flatten(), p.flatten());

  const auto path = std::filesystem::temp_directory_path() / "abslab_net_test.bin";
  save_checkpoint(path, p);
  EXPECT_EQ(load_checkpoint(path).flatten(), p.flatten());
  std::filesystem::remove(path);
}

TEST(Checkpoint, CorruptInputRaisesIoError) {
  Rng rng(11);
  auto bytes = encode_checkpoint(MlpParams::initialize(3, {4}, 2, rng));
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(decode_checkpoint(truncated), IoError);
  auto bad_chain = bytes;
  bad_chain[24] = 9;  // second layer fan_in no longer matches
  EXPECT_THROW(decode_checkpoint(bad_chain), IoError);
  EXPECT_THROW(decode_checkpoint({}), IoError);
  EXPECT_THROW(load_checkpoint("/nonexistent/dir/ckpt.bin"), IoError);
}

}  // namespace
}  // namespace abslab::net
