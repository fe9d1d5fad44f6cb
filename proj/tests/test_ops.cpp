#include "doctest.h"

#include <cmath>

#include "dscjscc/error.hpp"
#include "dscjscc/ops.hpp"
#include "support.hpp"

using namespace dscjscc;
using testsupport::block_diagonal;
using testsupport::naive_conv2d;

namespace {

Tensor4 ones(Shape4 s) { return Tensor4(s, 1.0); }

}  // namespace

TEST_CASE("conv2d of ones sums the window") {
  const Tensor4 y = conv2d(ones({1, 1, 3, 3}), {ones({1, 1, 3, 3}), std::nullopt}, 1, 0);
  CHECK(y.shape() == Shape4{1, 1, 1, 1});
  CHECK(y[0] == 9.0);
}

TEST_CASE("conv2d with a unit 1x1 kernel is the identity") {
  Rng rng(3);
  const Tensor4 x = Tensor4::uniform({2, 1, 5, 4}, rng, -3, 3);
  CHECK(conv2d(x, {ones({1, 1, 1, 1}), std::nullopt}, 1, 0) == x);
}

TEST_CASE("conv2d matches the direct loop") {
  Rng rng(11);
  const Tensor4 x = Tensor4::uniform({2, 3, 8, 8}, rng, -1, 1);
  const Tensor4 w = Tensor4::uniform({4, 3, 5, 5}, rng, -1, 1);
  const std::vector<double> b{0.1, -0.2, 0.3, 0.0};
  const Tensor4 y = conv2d(x, {w, b}, 2, 2);
  CHECK(y.shape() == Shape4{2, 4, 4, 4});
  CHECK(max_abs_diff(y, naive_conv2d(x, w, b, 2, 2)) < 1e-12);

  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t k = 1 + rng.below(5);
    const int stride = 1 + static_cast<int>(rng.below(3));
    const int pad = static_cast<int>(rng.below(k));
    const Tensor4 xi = Tensor4::uniform({1 + rng.below(2), 1 + rng.below(3), k + rng.below(6), k + rng.below(6)},
                                        rng, -1, 1);
    const Tensor4 wi = Tensor4::uniform({1 + rng.below(3), xi.shape().c, k, k}, rng, -1, 1);
    CHECK(max_abs_diff(conv2d(xi, {wi, std::nullopt}, stride, pad), naive_conv2d(xi, wi, {}, stride, pad)) < 1e-12);
  }
}

TEST_CASE("conv2d rejects mismatched channels and names the dimension") {
  const Tensor4 x({1, 3, 4, 4});
  try {
    conv2d(x, {Tensor4({2, 2, 3, 3}), std::nullopt}, 1, 1);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    CHECK(e.dimension() == "input channels");
  }
  CHECK_THROWS_AS(conv2d(x, {Tensor4({2, 3, 3, 3}), std::vector<double>{1.0}}, 1, 1), ShapeError);
  CHECK_THROWS_AS(conv2d(x, {Tensor4({2, 3, 7, 7}), std::nullopt}, 1, 0), ShapeError);
}

TEST_CASE("depthwise selector kernels") {
  Rng rng(5);
  const Tensor4 x = Tensor4::uniform({1, 2, 4, 4}, rng, -1, 1);
  Tensor4 w({2, 1, 1, 1});
  w[0] = 1.0;
  const Tensor4 y = depthwise_conv2d(x, {w, std::nullopt}, 1, 0);
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(y.plane(0, 0)[i] == x.plane(0, 0)[i]);
    CHECK(y.plane(0, 1)[i] == 0.0);
  }
}

TEST_CASE("depthwise conv of ones gives 9 per channel") {
  const Tensor4 y = depthwise_conv2d(ones({1, 3, 3, 3}), {ones({3, 1, 3, 3}), std::nullopt}, 1, 0);
  CHECK(y.shape() == Shape4{1, 3, 1, 1});
  for (double v : y.values()) CHECK(v == 9.0);
}

TEST_CASE("depthwise conv equals a block-diagonal grouped conv") {
  Rng rng(8);
  const Tensor4 x = Tensor4::uniform({1, 4, 6, 6}, rng, -1, 1);
  const Tensor4 w = Tensor4::uniform({4, 1, 3, 3}, rng, -1, 1);
  CHECK(max_abs_diff(depthwise_conv2d(x, {w, std::nullopt}, 1, 1), conv2d(x, {block_diagonal(w), std::nullopt}, 1, 1)) <
        1e-12);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t c = 1 + rng.below(5), k = 1 + rng.below(5);
    const int stride = 1 + static_cast<int>(rng.below(2));
    const int pad = static_cast<int>(rng.below(k));
    const Tensor4 xi = Tensor4::uniform({2, c, k + 4, k + 3}, rng, -1, 1);
    const Tensor4 wi = Tensor4::uniform({c, 1, k, k}, rng, -1, 1);
    CHECK(max_abs_diff(depthwise_conv2d(xi, {wi, std::nullopt}, stride, pad),
                       conv2d(xi, {block_diagonal(wi), std::nullopt}, stride, pad)) < 1e-12);
  }
}

TEST_CASE("pointwise conv") {
  Rng rng(2);
  const Tensor4 x = Tensor4::uniform({2, 3, 4, 5}, rng, -1, 1);

  Tensor4 eye({3, 3, 1, 1});
  for (std::size_t i = 0; i < 3; ++i) eye(i, i, 0, 0) = 1.0;
  CHECK(pointwise_conv2d(x, {eye, std::nullopt}) == x);

  const double v = 1.5;
  const Tensor4 row({1, 3, 1, 1}, std::vector<double>{2.0, -0.5, 0.25});
  const Tensor4 y = pointwise_conv2d(Tensor4({1, 3, 2, 2}, v), {row, std::vector<double>{0.0}});
  for (double out : y.values()) CHECK(out == doctest::Approx(v * (2.0 - 0.5 + 0.25)).epsilon(1e-15));

  const Tensor4 w = Tensor4::uniform({4, 3, 1, 1}, rng, -1, 1);
  const std::vector<double> b{1, 2, 3, 4};
  CHECK(pointwise_conv2d(x, {w, b}) == conv2d(x, {w, b}, 1, 0));
  CHECK_THROWS_AS(pointwise_conv2d(x, {Tensor4({4, 3, 3, 3}), std::nullopt}), ShapeError);
}

TEST_CASE("tconv2d single pixel broadcasts the kernel") {
  Rng rng(4);
  const Tensor4 w = Tensor4::uniform({1, 1, 3, 3}, rng, -1, 1);
  const Tensor4 y = tconv2d(Tensor4({1, 1, 1, 1}, 2.5), {w, std::nullopt}, 1, 0, 0);
  REQUIRE(y.shape() == Shape4{1, 1, 3, 3});
  for (std::size_t i = 0; i < 9; ++i) CHECK(y[i] == doctest::Approx(2.5 * w[i]).epsilon(1e-15));
}

TEST_CASE("tconv2d shape for stride 2 upsampling") {
  const Tensor4 y = tconv2d(Tensor4({1, 1, 4, 4}, 1.0), {Tensor4({1, 6, 5, 5}, 1.0), std::nullopt}, 2, 2, 1);
  CHECK(y.shape() == Shape4{1, 6, 8, 8});
  CHECK_THROWS_AS(tconv2d(Tensor4({1, 1, 4, 4}), {Tensor4({1, 1, 5, 5}), std::nullopt}, 2, 2, 2), ShapeError);
  CHECK_THROWS_AS(depthwise_tconv2d(Tensor4({1, 1, 4, 4}), {Tensor4({1, 1, 5, 5}), std::nullopt}, 1, 2, 1),
                  ShapeError);
}

TEST_CASE("tconv2d is the adjoint of conv2d") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 1 + rng.below(5);
    const int stride = 1 + static_cast<int>(rng.below(3));
    const int pad = static_cast<int>(rng.below(k));
    const Shape4 xs{1 + rng.below(2), 1 + rng.below(3), k + rng.below(7), k + rng.below(7)};
    const Tensor4 x = Tensor4::uniform(xs, rng, -1, 1);
    const Tensor4 w = Tensor4::uniform({1 + rng.below(3), xs.c, k, k}, rng, -1, 1);
    const Tensor4 cx = conv2d(x, {w, std::nullopt}, stride, pad);
    const Tensor4 y = Tensor4::uniform(cx.shape(), rng, -1, 1);
    // Pick output_padding so tconv lands back on the input size.
    const int op = static_cast<int>(xs.h - ((cx.shape().h - 1) * stride - 2 * pad + k));
    const int opw = static_cast<int>(xs.w - ((cx.shape().w - 1) * stride - 2 * pad + k));
    if (op != opw || op >= stride) continue;
    // Transposed kernels are (Cin, Cout, K, K); conv weights (Cout, Cin, K, K) already match with roles swapped.
    const Tensor4 ty = tconv2d(y, {w, std::nullopt}, stride, pad, op);
    REQUIRE(ty.shape() == xs);
    const double lhs = dot(cx, y), rhs = dot(x, ty);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("depthwise tconv matches block-diagonal tconv and broadcasts per channel") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t c = 1 + rng.below(4), k = 1 + rng.below(5);
    const int stride = 1 + static_cast<int>(rng.below(3));
    const int pad = static_cast<int>(rng.below(k));
    const int op = static_cast<int>(rng.below(static_cast<std::uint64_t>(stride)));
    const Tensor4 x = Tensor4::uniform({2, c, 2 + rng.below(4), 2 + rng.below(4)}, rng, -1, 1);
    const Tensor4 w = Tensor4::uniform({c, 1, k, k}, rng, -1, 1);
    if (static_cast<long>((x.shape().h - 1) * stride + k) - 2 * pad + op <= 0) continue;
    const Tensor4 a = depthwise_tconv2d(x, {w, std::nullopt}, stride, pad, op);
    const Tensor4 b = tconv2d(x, {block_diagonal(w), std::nullopt}, stride, pad, op);
    CHECK(a.shape() == b.shape());
    CHECK(max_abs_diff(a, b) < 1e-12);
  }
  const Tensor4 w = Tensor4::uniform({2, 1, 3, 3}, rng, -1, 1);
  const Tensor4 y = depthwise_tconv2d(Tensor4({1, 2, 1, 1}, std::vector<double>{2.0, -1.0}), {w, std::nullopt}, 1, 0, 0);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < 9; ++i) CHECK(y.plane(0, c)[i] == doctest::Approx((c ? -1.0 : 2.0) * w.plane(c, 0)[i]));
}

TEST_CASE("shape formulas hold over random configurations") {
  Rng rng(33);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t k = 1 + rng.below(6);
    const int stride = 1 + static_cast<int>(rng.below(3));
    const int pad = static_cast<int>(rng.below(k));
    const int op = static_cast<int>(rng.below(static_cast<std::uint64_t>(stride)));
    const std::size_t h = k + rng.below(8);
    const Tensor4 x({1, 1, h, h + 1});
    const Tensor4 w({1, 1, k, k}, 1.0);
    const Tensor4 c = conv2d(x, {w, std::nullopt}, stride, pad);
    CHECK(c.shape().h == (h + 2 * pad - k) / stride + 1);
    CHECK(c.shape().h == conv_output_size(h, k, stride, pad));
    const long th = static_cast<long>((h - 1) * stride) - 2 * pad + static_cast<long>(k) + op;
    if (th <= 0) {
      CHECK_THROWS_AS(tconv2d(x, {w, std::nullopt}, stride, pad, op), ShapeError);
      continue;
    }
    const Tensor4 t = tconv2d(x, {w, std::nullopt}, stride, pad, op);
    CHECK(t.shape().h == static_cast<std::size_t>(th));
    CHECK(t.shape().w == tconv_output_size(h + 1, k, stride, pad, op));
    CHECK(depthwise_tconv2d(x, {w, std::nullopt}, stride, pad, op).shape() == t.shape());
  }
}

TEST_CASE("prelu") {
  const Tensor4 pos({1, 2, 1, 2}, std::vector<double>{0.0, 1.0, 2.0, 3.5});
  const std::vector<double> slopes{0.25, 0.5};
  CHECK(prelu(pos, slopes) == pos);
  const Tensor4 mixed({1, 1, 1, 3}, std::vector<double>{-2.0, 0.0, 4.0});
  const std::vector<double> relu{0.0};
  CHECK(prelu(mixed, relu).values() == std::vector<double>{0.0, 0.0, 4.0});
  const std::vector<double> quarter{0.25};
  CHECK(prelu(mixed, quarter)[0] == -0.5);
  CHECK_THROWS_AS(prelu(mixed, slopes), ShapeError);
}

TEST_CASE("sigmoid") {
  const Tensor4 y = sigmoid(Tensor4({1, 1, 1, 4}, std::vector<double>{0.0, 50.0, -50.0, 800.0}));
  CHECK(y[0] == 0.5);
  CHECK(y[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(y[2] > 0.0);
  CHECK(y[2] < 1e-20);
  CHECK(y[3] == 1.0);
  CHECK(std::isfinite(sigmoid(Tensor4({1, 1, 1, 1}, -800.0))[0]));
}
