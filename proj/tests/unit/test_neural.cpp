#include "common.hpp"
#include "causalop/neural.hpp"

using namespace causalop;
using namespace causalop::nn;

namespace {

constexpr Activation kAll[] = {Activation::relu, Activation::tanh, Activation::sin, Activation::sigmoid,
                               Activation::shifted_sigmoid};

double reference(Activation a, double x) {
  switch (a) {
    case Activation::relu: return x > 0 ? x : 0.0;
    case Activation::tanh: return std::tanh(x);
    case Activation::sin: return std::sin(x);
    case Activation::sigmoid: return 1 / (1 + std::exp(-x));
    case Activation::shifted_sigmoid: return 1 / (1 + std::exp(-x)) - 0.5;
  }
  return 0;
}

// Smallest |pre-activation| over every hidden unit and sample.
double min_hidden_pre(const Mlp& net, const MatrixXd& x) {
  Cache cache;
  forward(net, x, Dropout{}, cache);
  double m = 1e300;
  for (std::size_t l = 0; l + 1 < net.layers.size(); ++l) m = std::min(m, cache.pre[l].cwiseAbs().minCoeff());
  return m;
}

}  // namespace

TEST_CASE("activation values") {
  CHECK(activate(Activation::shifted_sigmoid, 0.0) == 0.0);
  CHECK(activate(Activation::relu, -3.0) == 0.0);
  CHECK(activate(Activation::relu, 2.0) == 2.0);
  CHECK(activate_derivative(Activation::relu, 0.0) == 0.0);
  for (auto a : kAll)
    for (double x : {-7.0, -1.0, -0.03, 0.0, 0.01, 0.3, 2.0, 19.0})
      CHECK(std::abs(activate(a, x) - reference(a, x)) <= 1e-15 * std::max(1.0, std::abs(x)));
  CHECK(parse_activation("shifted_sigmoid") == Activation::shifted_sigmoid);
  CHECK_THROWS_CODE(parse_activation("gelu"), Errc::config);
}

TEST_CASE("activation derivatives match central differences") {
  const double h = 1e-6;
  for (auto a : kAll)
    for (double x : {-1.0, 0.3, 2.0}) {
      const double fd = (activate(a, x + h) - activate(a, x - h)) / (2 * h);
      CHECK(std::abs(activate_derivative(a, x) - fd) <= 1e-8);
    }
}

TEST_CASE("batched activations agree with the scalar definitions") {
  // The vectorised kernels run over whole matrices; compare element-wise.
  std::vector<double> xs;
  for (int i = -4000; i <= 4000; ++i) xs.push_back(i * 0.005);
  for (double x : {1e-9, -3e-5, 0.039, 0.041, 25.0, -40.0, 400.0}) xs.push_back(x);
  const Eigen::Index n = Eigen::Index(xs.size());
  for (auto a : kAll) {
    Mlp net({1, int(n), 1}, a);
    net.layers[0].weight = Eigen::Map<const VectorXd>(xs.data(), n);
    net.layers[1].weight.setZero();
    Cache cache;
    forward(net, MatrixXd::Ones(1, 1), Dropout{}, cache);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      worst = std::max(worst, std::abs(cache.act[0](i, 0) - reference(a, xs[std::size_t(i)])));
    CHECK(worst <= 4e-16);
  }
}

TEST_CASE("forward pass basics") {
  Mlp zero({3, 4, 2}, Activation::tanh);
  zero.layers.back().bias << 0.5, -1.5;
  const VectorXd out = forward(zero, VectorXd(VectorXd::Constant(3, 7.0)));
  CHECK(out[0] == 0.5);
  CHECK(out[1] == -1.5);

  Mlp unit({1, 1, 1}, Activation::tanh);
  unit.layers[0].weight(0, 0) = 1;
  unit.layers[1].weight(0, 0) = 1;
  CHECK(forward(unit, VectorXd(VectorXd::Zero(1)))[0] == 0.0);

  std::mt19937_64 rng(3);
  const auto net = Mlp::glorot({4, 9, 7, 3}, Activation::sin, rng);
  const MatrixXd x = testutil::randn_matrix(4, 6, 8);
  Cache cache;
  const MatrixXd train = forward(net, x, Dropout{0.0, 99}, cache);
  CHECK(train == forward(net, x));
  CHECK_THROWS_CODE(forward(net, MatrixXd(MatrixXd::Zero(5, 2))), Errc::dimension_mismatch);

  for (const auto& layer : net.layers) {
    const double bound = std::sqrt(6.0 / double(layer.weight.rows() + layer.weight.cols()));
    CHECK(layer.weight.cwiseAbs().maxCoeff() <= bound);
    CHECK(layer.bias.isZero(0.0));
  }
  CHECK(net.parameter_count() == 4 * 9 + 9 + 9 * 7 + 7 + 7 * 3 + 3);
  CHECK(net.dims() == std::vector<int>{4, 9, 7, 3});
}

TEST_CASE("dropout masks") {
  const MatrixXd m = dropout_mask(40, 50, 0.25, 17);
  std::size_t dropped = 0;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    CHECK((m(i) == 0.0 || m(i) == doctest::Approx(1 / 0.75).epsilon(1e-15)));
    dropped += m(i) == 0.0;
  }
  CHECK(double(dropped) / 2000.0 == doctest::Approx(0.25).epsilon(0.1));
  CHECK(dropout_mask(40, 50, 0.25, 17) == m);
  CHECK(dropout_mask(40, 50, 0.25, 18) != m);
  CHECK(dropout_mask(3, 3, 0.0, 1) == MatrixXd::Ones(3, 3));
  CHECK_THROWS_CODE(dropout_mask(2, 2, 1.0, 1), Errc::invalid_argument);
}

TEST_CASE("dropout expectation matches the eval forward") {
  std::mt19937_64 rng(21);
  const auto net = Mlp::glorot({3, 16, 2}, Activation::tanh, rng);
  const MatrixXd x = testutil::randn_matrix(3, 1, 2);
  const MatrixXd eval = forward(net, x);
  const int trials = 10000;
  Eigen::Vector2d sum = Eigen::Vector2d::Zero(), sq = Eigen::Vector2d::Zero();
  Cache cache;
  for (int s = 0; s < trials; ++s) {
    const Eigen::Vector2d y = forward(net, x, Dropout{0.5, std::uint64_t(s) * 7919}, cache).col(0);
    sum += y;
    sq += y.cwiseProduct(y);
  }
  const Eigen::Vector2d mean = sum / trials;
  for (int k = 0; k < 2; ++k) {
    const double var = sq[k] / trials - mean[k] * mean[k];
    CHECK(std::abs(mean[k] - eval(k, 0)) <= 3 * std::sqrt(var / trials));
  }
}

TEST_CASE("backward pass against finite differences") {
  for (auto a : {Activation::tanh, Activation::sin, Activation::sigmoid, Activation::shifted_sigmoid}) {
    std::mt19937_64 rng(5);
    const auto net = Mlp::glorot({3, 5, 2}, a, rng);
    const auto g = check_gradients(net, testutil::randn_matrix(3, 4, 6), testutil::randn_matrix(2, 4, 7));
    CHECK(g.max_rel_error <= 1e-5);
    CHECK(g.checked == net.parameter_count());
  }
}

TEST_CASE("gradient property: every activation, five seeds, three layers") {
  for (auto a : kAll) {
    int accepted = 0;
    for (std::uint64_t seed = 1; accepted < 5; ++seed) {
      std::mt19937_64 rng(seed);
      const auto net = Mlp::glorot({4, 6, 6, 3}, a, rng);
      const MatrixXd x = testutil::randn_matrix(4, 5, seed + 100);
      if (a == Activation::relu && min_hidden_pre(net, x) < 1e-3) continue;
      ++accepted;
      CHECK(check_gradients(net, x, testutil::randn_matrix(3, 5, seed + 200)).max_rel_error <= 1e-5);
    }
  }
}

TEST_CASE("backward special cases") {
  std::mt19937_64 rng(8);
  const auto net = Mlp::glorot({3, 5, 2}, Activation::tanh, rng);
  const MatrixXd x = testutil::randn_matrix(3, 4, 1);
  Cache cache;
  forward(net, x, Dropout{}, cache);
  Mlp grad = zeros_like(net);
  backward(net, cache, MatrixXd::Zero(2, 4), grad);
  for (const auto& l : grad.layers) {
    CHECK(l.weight.isZero(0.0));
    CHECK(l.bias.isZero(0.0));
  }

  const auto linear = Mlp::glorot({3, 2}, Activation::tanh, rng);
  const Eigen::Vector3d xi(0.3, -1.2, 2.0);
  const Eigen::Vector2d up(0.7, -0.4);
  Cache c2;
  forward(linear, MatrixXd(xi), Dropout{}, c2);
  Mlp g2 = zeros_like(linear);
  backward(linear, c2, MatrixXd(up), g2);
  CHECK((g2.layers[0].weight - up * xi.transpose()).norm() <= 1e-15);
  CHECK((g2.layers[0].bias - up).norm() == 0.0);

  // The mask drawn in forward is reused by backward.
  const auto deep = Mlp::glorot({3, 6, 6, 2}, Activation::tanh, rng);
  const Dropout drop{0.3, 4242};
  const MatrixXd u = testutil::randn_matrix(2, 4, 9);
  Cache c3;
  forward(deep, x, drop, c3);
  Mlp g3 = zeros_like(deep);
  backward(deep, c3, u, g3);
  Mlp probe = deep;
  const double h = 1e-6;
  double worst = 0.0;
  for (std::size_t l = 0; l < deep.layers.size(); ++l)
    for (Eigen::Index i = 0; i < deep.layers[l].weight.size(); ++i) {
      double& w = probe.layers[l].weight(i);
      const double keep = w;
      Cache c;
      w = keep + h;
      const double fp = (forward(probe, x, drop, c).array() * u.array()).sum();
      w = keep - h;
      const double fm = (forward(probe, x, drop, c).array() * u.array()).sum();
      w = keep;
      const double an = g3.layers[l].weight(i);
      worst = std::max(worst, std::abs(an - (fp - fm) / (2 * h)) / std::max({std::abs(an), 1e-8}));
    }
  CHECK(worst <= 1e-5);
}

TEST_CASE("Adam") {
  std::vector<double> w{0.5, -2.0}, g{0.0, 0.0};
  std::vector<ParamView> params{{w.data(), 2, Group::branch, true}}, grads{{g.data(), 2, Group::branch, true}};
  AdamState still;
  adam_step(still, params, grads, 1e-3, RegConfig{});
  CHECK(w == std::vector<double>{0.5, -2.0});

  double x = 0.0, gx = 1.0;
  std::vector<ParamView> px{{&x, 1, Group::other, false}}, gxv{{&gx, 1, Group::other, false}};
  AdamState s;
  adam_step(s, px, gxv, 0.1, RegConfig{});
  CHECK(x == doctest::Approx(-0.1 / (1 + 1e-8)).epsilon(1e-14));
  // Constant gradient keeps both bias-corrected moments at 1.
  for (int k = 0; k < 4; ++k) adam_step(s, px, gxv, 0.1, RegConfig{});
  CHECK(x == doctest::Approx(-0.5).epsilon(1e-7));
  CHECK(s.step == 5);

  RegConfig reg;
  reg.l2_branch = 0.01;
  AdamState decay;
  std::vector<double> before = w;
  std::vector<double> b{0.25};
  std::vector<double> gb{0.0};
  params.push_back({b.data(), 1, Group::branch, false});
  grads.push_back({gb.data(), 1, Group::branch, false});
  for (int k = 0; k < 3; ++k) {
    adam_step(decay, params, grads, 1e-2, reg);
    CHECK(std::abs(w[0]) < std::abs(before[0]));
    CHECK(std::abs(w[1]) < std::abs(before[1]));
    before = w;
  }
  CHECK(b[0] == 0.25);
}

TEST_CASE("learning-rate schedule") {
  const LrSchedule s{{{2000, 1e-3}, {10000, 1e-4}, {20000, 1e-5}}};
  s.validate();
  CHECK(lr_at(s, 0) == 1e-3);
  CHECK(lr_at(s, 1999) == 1e-3);
  CHECK(lr_at(s, 2000) == 1e-4);
  CHECK(lr_at(s, 19999) == 1e-5);
  CHECK(lr_at(s, 50000) == 1e-5);
  CHECK_THROWS_CODE((LrSchedule{{{10, 1e-3}, {10, 1e-4}}}.validate()), Errc::config);
  CHECK_THROWS_CODE((LrSchedule{{{10, -1.0}}}.validate()), Errc::config);
  CHECK_THROWS_CODE(LrSchedule{}.validate(), Errc::config);
}

TEST_CASE("regularisation config validation") {
  RegConfig ok{1e-4, 0.0, 0.01, 0.0};
  ok.validate();
  CHECK(ok.l2(Group::branch) == 1e-4);
  CHECK(ok.l2(Group::other) == 0.0);
  CHECK_THROWS(RegConfig{-1.0, 0, 0, 0}.validate());
  CHECK_THROWS(RegConfig{0, 0, 1.0, 0}.validate());
}
