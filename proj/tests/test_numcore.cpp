#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "pgsgan/errors.hpp"
#include "pgsgan/numcore/adam.hpp"
#include "pgsgan/numcore/layers.hpp"
#include "support/gradcheck.hpp"

using namespace pgsgan;
using namespace pgsgan::num;
using gradcheck::random_tensor;

namespace {

constexpr double kLayerTol = 1e-4;

std::vector<double> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

double largest_singular_value(const Tensor& w) {
  const auto rows = w.dim(0), cols = w.numel() / w.dim(0);
  Eigen::MatrixXd m(rows, cols);
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t c = 0; c < cols; ++c) m(r, c) = w.at(r * cols + c);
  }
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

// Direct summation oracle for conv1d.
std::vector<double> naive_conv(const Tensor& x, const Tensor& w, const Tensor& b, const Conv1dSpec& s) {
  const auto B = x.dim(0), C = x.dim(1), L = x.dim(2), O = w.dim(0), K = w.dim(2);
  const auto out_len = conv1d_output_length(L, K, s);
  std::vector<double> y;
  for (std::int64_t n = 0; n < B; ++n) {
    for (std::int64_t o = 0; o < O; ++o) {
      for (std::int64_t t = 0; t < out_len; ++t) {
        double acc = b.at(o);
        for (std::int64_t c = 0; c < C; ++c) {
          for (std::int64_t k = 0; k < K; ++k) {
            std::int64_t pos = t * s.stride - s.padding + k * s.dilation;
            if (s.mode == PadMode::circular) {
              pos = ((pos % L) + L) % L;
            } else if (pos < 0 || pos >= L) {
              continue;
            }
            acc += w.at((o * C + c) * K + k) * x.at((n * C + c) * L + pos);
          }
        }
        y.push_back(acc);
      }
    }
  }
  return y;
}

}  // namespace

TEST_CASE("tensor construction validates shape against data") {
  CHECK_THROWS_AS(Tensor::from({2, 2}, {1, 2, 3}), ShapeError);
  CHECK_THROWS_AS(Tensor::zeros({0, 3}), ShapeError);
  const auto t = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(t.numel() == 6);
  CHECK(t.rank() == 2);
  CHECK(t.dim(1) == 3);
}

TEST_CASE("linear forward examples") {
  auto y = linear(Tensor::from({1, 2}, {1, 2}), Tensor::from({2, 2}, {1, 0, 0, 1}), Tensor::from({2}, {0, 0}));
  CHECK(values(y) == std::vector<double>{1, 2});
  y = linear(Tensor::from({1, 2}, {1, 1}), Tensor::from({1, 2}, {2, 3}), Tensor::from({1}, {1}));
  CHECK(values(y) == std::vector<double>{6});
}

TEST_CASE("linear rejects shape mismatch with a dimension report") {
  try {
    linear(Tensor::zeros({2, 3}), Tensor::zeros({4, 2}), Tensor::zeros({4}));
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("[2,3]") != std::string::npos);
  }
  CHECK_THROWS_AS(linear(Tensor::zeros({2, 3}), Tensor::zeros({4, 3}), Tensor::zeros({3})), ShapeError);
}

TEST_CASE("linear gradients match finite differences") {
  Rng rng(11);
  auto x = random_tensor({3, 4}, rng), w = random_tensor({5, 4}, rng), b = random_tensor({5}, rng);
  const auto r = random_tensor({3, 5}, rng, false);
  const auto res = gradcheck::check([&] { return gradcheck::dot(linear(x, w, b), r); }, {{"x", x}, {"w", w}, {"b", b}});
  INFO(res.worst);
  CHECK(res.max_rel_err < kLayerTol);
}

TEST_CASE("conv1d output lengths") {
  CHECK(conv1d_output_length(20, 3, Conv1dSpec{1, 1, 1, PadMode::zero}) == 20);
  // kernel 3 with dilation 2 spans (3-1)*2+1 = 5 inputs
  CHECK(conv1d_output_length(5, 3, Conv1dSpec{1, 2, 0, PadMode::zero}) == 1);
  CHECK(conv1d_output_length(4, 3, Conv1dSpec{1, 2, 0, PadMode::zero}) <= 0);
  CHECK(conv1d_output_length(20, 3, Conv1dSpec{2, 1, 1, PadMode::zero}) == 10);
}

TEST_CASE("circular conv wraps indices") {
  const auto x = Tensor::from({1, 1, 4}, {1, 2, 3, 4});
  const auto w = Tensor::from({1, 1, 3}, {1, 0, 0});
  const auto y = conv1d(x, w, Tensor::from({1}, {0}), Conv1dSpec{1, 1, 1, PadMode::circular});
  // y[t] = x[(t - 1) mod 4]
  CHECK(values(y) == std::vector<double>{4, 1, 2, 3});
  const auto z = conv1d(x, w, Tensor::from({1}, {0}), Conv1dSpec{1, 1, 1, PadMode::zero});
  CHECK(values(z) == std::vector<double>{0, 1, 2, 3});
}

TEST_CASE("conv1d matches the direct-summation oracle") {
  Rng rng(5);
  for (const auto& spec : {Conv1dSpec{1, 1, 1, PadMode::zero}, Conv1dSpec{1, 2, 2, PadMode::zero},
                           Conv1dSpec{2, 1, 1, PadMode::zero}, Conv1dSpec{1, 1, 1, PadMode::circular},
                           Conv1dSpec{1, 2, 2, PadMode::circular}, Conv1dSpec{1, 1, 0, PadMode::zero}}) {
    auto x = random_tensor({2, 3, 9}, rng), w = random_tensor({4, 3, 3}, rng), b = random_tensor({4}, rng);
    const auto y = values(conv1d(x, w, b, spec));
    const auto oracle = naive_conv(x, w, b, spec);
    REQUIRE(y.size() == oracle.size());
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
  }
}

TEST_CASE("conv1d rejects a kernel wider than the padded input") {
  CHECK_THROWS_AS(conv1d(Tensor::zeros({1, 1, 2}), Tensor::zeros({1, 1, 5}), Tensor::zeros({1}), Conv1dSpec{}),
                  ShapeError);
  CHECK_THROWS_AS(conv1d(Tensor::zeros({1, 2, 8}), Tensor::zeros({1, 3, 3}), Tensor::zeros({1}), Conv1dSpec{}),
                  ShapeError);
}

TEST_CASE("conv1d gradients match finite differences") {
  Rng rng(7);
  for (const auto& spec : {Conv1dSpec{1, 1, 1, PadMode::zero}, Conv1dSpec{1, 2, 2, PadMode::zero},
                           Conv1dSpec{2, 1, 1, PadMode::zero}, Conv1dSpec{1, 1, 1, PadMode::circular}}) {
    auto x = random_tensor({2, 2, 7}, rng), w = random_tensor({3, 2, 3}, rng), b = random_tensor({3}, rng);
    const auto r = random_tensor(conv1d(x, w, b, spec).shape(), rng, false);
    const auto res =
        gradcheck::check([&] { return gradcheck::dot(conv1d(x, w, b, spec), r); }, {{"x", x}, {"w", w}, {"b", b}});
    INFO(res.worst);
    CHECK(res.max_rel_err < kLayerTol);
  }
}

TEST_CASE("avg_pool1d examples and errors") {
  CHECK(values(avg_pool1d(Tensor::from({1, 1, 4}, {1, 2, 3, 4}), 2, 2)) == std::vector<double>{1.5, 3.5});
  const auto c = avg_pool1d(Tensor::full({2, 3, 6}, 4.25), 3, 1);
  for (double v : c.data()) CHECK(v == 4.25);
  CHECK_THROWS_AS(avg_pool1d(Tensor::zeros({1, 1, 4}), 0, 1), ShapeError);
  CHECK_THROWS_AS(avg_pool1d(Tensor::zeros({1, 1, 4}), 5, 1), ShapeError);
}

TEST_CASE("avg_pool1d spreads 1/window of the gradient to each element") {
  auto x = Tensor::from({1, 1, 4}, {1, 2, 3, 4}, true);
  backward(sum(avg_pool1d(x, 2, 2)));
  CHECK(x.grad() == std::vector<double>{0.5, 0.5, 0.5, 0.5});
  Rng rng(3);
  auto y = random_tensor({2, 3, 8}, rng);
  const auto r = random_tensor({2, 3, 3}, rng, false);
  const auto res = gradcheck::check([&] { return gradcheck::dot(avg_pool1d(y, 3, 2), r); }, {{"x", y}});
  CHECK(res.max_rel_err < kLayerTol);
}

TEST_CASE("batch norm normalizes and tracks running statistics") {
  ParamStore store;
  BatchNorm bn(store, "bn", 1);
  const auto y = bn(Tensor::from({2, 1}, {1, 3}), Phase::train);
  CHECK(y.at(0) == doctest::Approx(-1.0));
  CHECK(y.at(1) == doctest::Approx(1.0));
  CHECK(store.get("bn.running_mean").at(0) == doctest::Approx(0.2));
  // unbiased batch variance of {1,3} is 2: 0.9 * 1 + 0.1 * 2
  CHECK(store.get("bn.running_var").at(0) == doctest::Approx(1.1));
  const auto e = bn(Tensor::from({1, 1}, {0.2}), Phase::eval);
  CHECK(e.at(0) == doctest::Approx(0.0));
}

TEST_CASE("batch norm on a constant batch gives zeros via the variance floor") {
  Tensor rm = Tensor::zeros({2}), rv = Tensor::full({2}, 1.0);
  const auto y = batch_norm(Tensor::full({4, 2}, 7.0), Tensor::full({2}, 1.0), Tensor::zeros({2}), rm, rv, true);
  for (double v : y.data()) {
    CHECK(std::isfinite(v));
    CHECK(v == 0.0);
  }
  CHECK_THROWS_AS(batch_norm(Tensor::zeros({1, 2}), Tensor::full({2}, 1.0), Tensor::zeros({2}), rm, rv, true),
                  ShapeError);
}

TEST_CASE("norm layer gradients match finite differences") {
  Rng rng(13);
  for (bool training : {true, false}) {
    for (const Shape& shape : {Shape{5, 3}, Shape{4, 2, 5}}) {
      auto x = random_tensor(shape, rng), g = random_tensor({shape[1]}, rng), b = random_tensor({shape[1]}, rng);
      Tensor rm = Tensor::from({shape[1]}, std::vector<double>(shape[1], 0.3));
      Tensor rv = Tensor::from({shape[1]}, std::vector<double>(shape[1], 1.7));
      const auto r = random_tensor(shape, rng, false);
      const auto res = gradcheck::check(
          [&] { return gradcheck::dot(batch_norm(x, g, b, rm, rv, training), r); }, {{"x", x}, {"g", g}, {"b", b}});
      INFO(res.worst);
      CHECK(res.max_rel_err < kLayerTol);
    }
  }
  auto x = random_tensor({3, 4, 5}, rng), g = random_tensor({4, 5}, rng), b = random_tensor({4, 5}, rng);
  const auto r = random_tensor({3, 4, 5}, rng, false);
  const auto res = gradcheck::check([&] { return gradcheck::dot(layer_norm(x, g, b), r); },
                                    {{"x", x}, {"g", g}, {"b", b}});
  INFO(res.worst);
  CHECK(res.max_rel_err < kLayerTol);
}

TEST_CASE("layer norm normalizes each sample") {
  const auto y = layer_norm(Tensor::from({2, 2}, {1, 3, 10, 10}), Tensor::full({2}, 1.0), Tensor::zeros({2}));
  CHECK(y.at(0) == doctest::Approx(-1.0));
  CHECK(y.at(1) == doctest::Approx(1.0));
  CHECK(y.at(2) == 0.0);
  CHECK(y.at(3) == 0.0);
}

TEST_CASE("elementwise and structural op gradients match finite differences") {
  Rng rng(17);
  auto a = random_tensor({3, 4}, rng), b = random_tensor({3, 4}, rng), c = random_tensor({3, 2}, rng);
  const auto r4 = random_tensor({3, 4}, rng, false);
  const auto r6 = random_tensor({3, 6}, rng, false);
  const auto r12 = random_tensor({6, 4}, rng, false);
  const auto r2 = random_tensor({3, 2}, rng, false);
  const std::vector<std::pair<const char*, std::function<Tensor()>>> cases = {
      {"leaky_relu", [&] { return gradcheck::dot(leaky_relu(a), r4); }},
      {"relu", [&] { return gradcheck::dot(relu(a), r4); }},
      {"tanh", [&] { return gradcheck::dot(tanh(a), r4); }},
      {"sigmoid", [&] { return gradcheck::dot(sigmoid(a), r4); }},
      {"add", [&] { return gradcheck::dot(add(a, b), r4); }},
      {"sub", [&] { return gradcheck::dot(sub(a, b), r4); }},
      {"mul", [&] { return gradcheck::dot(mul(a, b), r4); }},
      {"scale", [&] { return gradcheck::dot(scale(a, 2.5), r4); }},
      {"add_scalar", [&] { return gradcheck::dot(add_scalar(a, -0.7), r4); }},
      {"concat", [&] { return gradcheck::dot(concat({a, c}), r6); }},
      {"reshape", [&] { return gradcheck::dot(reshape(a, {4, 3}), reshape(r4, {4, 3})); }},
      {"repeat_rows", [&] { return gradcheck::dot(repeat_rows(a, 2), r12); }},
      {"slice_cols", [&] { return gradcheck::dot(slice_cols(a, 1, 3), r2); }},
      {"mean", [&] { return mean(mul(a, b)); }},
  };
  for (const auto& [name, f] : cases) {
    const auto res = gradcheck::check(f, {{"a", a}, {"b", b}, {"c", c}});
    INFO(name << ": " << res.worst);
    CHECK(res.max_rel_err < kLayerTol);
  }
}

TEST_CASE("backward basics") {
  auto w = Tensor::from({3}, {0.5, -1, 2}, true);
  backward(sum(w));
  CHECK(w.grad() == std::vector<double>{1, 1, 1});

  auto v = Tensor::from({1, 3}, {1, 2, 3}, true);
  const auto x = Tensor::from({1, 3}, {4, -5, 6});
  auto unreachable = Tensor::from({2}, {1, 1}, true);
  backward(sum(mul(v, x)));
  CHECK(v.grad() == std::vector<double>{4, -5, 6});
  CHECK(unreachable.grad() == std::vector<double>{0, 0});

  CHECK_THROWS_AS(backward(mul(v, x)), ShapeError);
}

TEST_CASE("gradients accumulate across uses and no-grad mode records nothing") {
  auto w = Tensor::from({2}, {1, 2}, true);
  backward(sum(add(w, w)));
  CHECK(w.grad() == std::vector<double>{2, 2});
  NoGradGuard guard;
  const auto y = mul(w, w);
  CHECK_FALSE(y.requires_grad());
}

TEST_CASE("spectral normalization examples") {
  Rng rng(1);
  auto eye = Tensor::from({2, 2}, {1, 0, 0, 1});
  auto s = SpectralNormState::random(2, 2, rng);
  const auto y = spectral_normalize(eye, s, 50);
  for (int i = 0; i < 4; ++i) CHECK(y.at(i) == doctest::Approx(eye.at(i)).epsilon(1e-9));

  auto diag = Tensor::from({2, 2}, {2, 0, 0, 1});
  auto s2 = SpectralNormState::random(2, 2, rng);
  const auto d = spectral_normalize(diag, s2, 50);
  CHECK(d.at(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(d.at(1) == doctest::Approx(0.0));
  CHECK(d.at(3) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("spectral normalization converges to unit largest singular value") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto w = random_tensor({8, 8}, rng, false);
    auto s = SpectralNormState::random(8, 8, rng);
    const auto y = spectral_normalize(w, s, kConvergedIterations);
    CHECK(std::fabs(largest_singular_value(y) - 1.0) < 1e-3);
    double nu = 0, nv = 0;
    for (double v : s.u.data()) nu += v * v;
    for (double v : s.v.data()) nv += v * v;
    CHECK(nu == doctest::Approx(1.0));
    CHECK(nv == doctest::Approx(1.0));
  }
}

TEST_CASE("spectral normalization of a conv weight flattens to [out, in*k]") {
  Rng rng(4);
  const auto w = random_tensor({4, 3, 3}, rng, false);
  auto s = SpectralNormState::random(4, 9, rng);
  const auto y = spectral_normalize(w, s, kConvergedIterations);
  CHECK(std::fabs(largest_singular_value(y) - 1.0) < 1e-3);
  auto bad = SpectralNormState::random(4, 3, rng);
  CHECK_THROWS_AS(spectral_normalize(w, bad, 1), ShapeError);
}

TEST_CASE("spectral normalization of a zero weight stays finite") {
  Rng rng(6);
  const auto w = Tensor::zeros({3, 2}, true);
  auto s = SpectralNormState::random(3, 2, rng);
  const auto y = spectral_normalize(w, s, 1);
  for (double v : y.data()) CHECK(v == 0.0);
  backward(sum(y));
  for (double g : w.grad()) CHECK(std::isfinite(g));
}

TEST_CASE("spectral normalization gradient with frozen vectors matches finite differences") {
  Rng rng(8);
  auto w = random_tensor({5, 4}, rng);
  auto s = SpectralNormState::random(5, 4, rng);
  power_iteration(w, s, 3);
  const auto r = random_tensor({5, 4}, rng, false);
  const auto res = gradcheck::check([&] { return gradcheck::dot(spectral_normalize(w, s, 0), r); }, {{"w", w}});
  INFO(res.worst);
  CHECK(res.max_rel_err < kLayerTol);
}

TEST_CASE("spectral layers advance the power iteration only in train phase") {
  ParamStore store;
  Rng rng(9);
  Linear lin(store, "l", 4, 3, rng);
  const auto u0 = values(store.get("l.sn_u"));
  lin(Tensor::zeros({2, 4}), Phase::eval);
  CHECK(values(store.get("l.sn_u")) == u0);
  lin(Tensor::zeros({2, 4}), Phase::train);
  CHECK(values(store.get("l.sn_u")) != u0);
  CHECK_FALSE(store.is_trainable("l.sn_u"));
  CHECK(store.is_trainable("l.weight"));
}

TEST_CASE("layer initialization is uniform within 1/sqrt(fan_in)") {
  ParamStore store;
  Rng rng(10);
  Conv1d conv(store, "c", 3, 5, 3, Conv1dSpec{}, rng);
  const double bound = 1.0 / std::sqrt(9.0);
  for (double v : store.get("c.weight").data()) CHECK(std::fabs(v) <= bound);
  CHECK(store.get("c.weight").shape() == Shape{5, 3, 3});
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  ParamStore store;
  store.add("p", {3}, {1, -2, 3}, true);
  Adam adam(AdamConfig{0.1});
  adam.step(store);
  CHECK(values(store.get("p")) == std::vector<double>{1, -2, 3});
  CHECK(adam.step_count() == 1);
}

TEST_CASE("adam: first step moves each parameter by about -lr * sign(g)") {
  ParamStore store;
  auto p = store.add("p", {3}, {0, 0, 0}, true);
  backward(sum(mul(p, Tensor::from({3}, {0.3, -4, 1e-3}))));
  Adam adam(AdamConfig{0.01});
  adam.step(store);
  // bias-corrected m/sqrt(v) = g/|g| exactly, up to epsilon
  CHECK(p.at(0) == doctest::Approx(-0.01).epsilon(1e-6));
  CHECK(p.at(1) == doctest::Approx(0.01).epsilon(1e-6));
  CHECK(p.at(2) == doctest::Approx(-0.01).epsilon(1e-4));
}

TEST_CASE("adam minimizes p^2") {
  ParamStore store;
  auto p = store.add("p", {1}, {1.0}, true);
  Adam adam(AdamConfig{0.1});
  for (int i = 0; i < 200; ++i) {
    store.zero_grad();
    backward(sum(mul(p, p)));
    adam.step(store);
  }
  CHECK(std::fabs(p.at(0)) < 0.05);
  CHECK(adam.step_count() == 200);
}

TEST_CASE("adam rejects non-finite gradients before touching parameters") {
  ParamStore store;
  auto a = store.add("a", {1}, {1.0}, true);
  auto b = store.add("b", {1}, {2.0}, true);
  backward(sum(mul(a, Tensor::from({1}, {1.0}))));
  backward(sum(mul(b, Tensor::from({1}, {std::nan("")}))));
  Adam adam;
  CHECK_THROWS_AS(adam.step(store), NumericalError);
  CHECK(a.at(0) == 1.0);
  CHECK(b.at(0) == 2.0);
  CHECK(adam.step_count() == 0);
}

TEST_CASE("adam moments round-trip through records") {
  ParamStore store;
  auto p = store.add("p", {2}, {1.0, -1.0}, true);
  Adam a(AdamConfig{0.05}), b(AdamConfig{0.05});
  for (int i = 0; i < 3; ++i) {
    store.zero_grad();
    backward(sum(mul(p, p)));
    a.step(store);
  }
  b.load_records(a.to_records("opt/"), "opt/", store, a.step_count());
  ParamStore copy;
  auto q = copy.add("p", {2}, values(p), true);
  store.zero_grad();
  backward(sum(mul(p, p)));
  backward(sum(mul(q, q)));
  a.step(store);
  b.step(copy);
  CHECK(values(p) == values(q));
}

TEST_CASE("param store: unique names, bit-exact round trip, shape checks") {
  namespace fs = std::filesystem;
  ParamStore store;
  Rng rng(12);
  Linear lin(store, "lin", 3, 2, rng);
  BatchNorm bn(store, "bn", 2);
  CHECK_THROWS_AS(store.add("lin.weight", {1}, {0}, true), std::invalid_argument);
  CHECK(store.names().front() == "lin.weight");

  const auto x = random_tensor({4, 3}, rng, false);
  bn(lin(x, Phase::train), Phase::train);
  const auto path = fs::temp_directory_path() / "pgsgan_numcore_store.pgsg";
  store.save(path);

  ParamStore other;
  Rng rng2(99);
  Linear lin2(other, "lin", 3, 2, rng2);
  BatchNorm bn2(other, "bn", 2);
  other.load(path);
  CHECK(values(bn2(lin2(x, Phase::eval), Phase::eval)) == values(bn(lin(x, Phase::eval), Phase::eval)));

  ParamStore wrong;
  Linear lin3(wrong, "lin", 4, 2, rng2);
  BatchNorm bn3(wrong, "bn", 2);
  CHECK_THROWS_AS(wrong.load(path), DataError);

  // flip one payload byte: CRC must catch it
  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  bytes[bytes.size() / 2] ^= 0x40;
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << bytes;
  }
  CHECK_THROWS_AS(other.load(path), DataError);
  fs::remove(path);
}

TEST_CASE("identical seeds give bit-identical outputs and gradients") {
  auto run = [] {
    ParamStore store;
    Rng rng(21);
    Conv1d conv(store, "c", 2, 3, 3, Conv1dSpec{1, 2, 2, PadMode::circular}, rng);
    Linear lin(store, "l", 3 * 6, 2, rng);
    const auto x = random_tensor({4, 2, 6}, rng, false);
    const auto y = lin(reshape(leaky_relu(conv(x, Phase::train)), {4, 18}), Phase::train);
    backward(sum(mul(y, y)));
    auto out = values(y);
    for (const auto& n : store.trainable_names()) {
      const auto g = store.get(n).grad();
      out.insert(out.end(), g.begin(), g.end());
    }
    return out;
  };
  CHECK(run() == run());
}
