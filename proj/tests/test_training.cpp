#include "doctest.h"

#include <cmath>

#include "dscjscc/checkpoint.hpp"
#include "dscjscc/complexity.hpp"
#include "dscjscc/dataset.hpp"
#include "dscjscc/error.hpp"
#include "dscjscc/metrics.hpp"
#include "dscjscc/optim.hpp"
#include "dscjscc/train.hpp"
#include "support.hpp"

using namespace dscjscc;
using testsupport::TempDir;

TEST_CASE("mse loss") {
  Rng rng(1);
  const Tensor4 x = Tensor4::uniform({3, 2, 4, 5}, rng, -2, 2);
  CHECK(mse_loss(x, x) == 0.0);
  CHECK(mse_loss(Tensor4({1, 1, 1, 1}, 5.0), Tensor4({1, 1, 1, 1}, 2.0)) == 9.0);

  const Tensor4 y = Tensor4::uniform(x.shape(), rng, -2, 2);
  double ref = 0.0;
  for (std::size_t n = 0; n < 3; ++n) {
    double item = 0.0;
    for (std::size_t i = 0; i < 40; ++i) {
      const double d = x[n * 40 + i] - y[n * 40 + i];
      item += d * d;
    }
    ref += item;
  }
  ref /= 3.0;
  CHECK(std::abs(mse_loss(x, y) - ref) < 1e-12);
  CHECK_THROWS_AS(mse_loss(x, Tensor4({3, 2, 4, 4})), ShapeError);
}

TEST_CASE("psnr") {
  const Tensor4 a({1, 3, 2, 2}, 100.0);
  CHECK(psnr(a, a) == kPsnrCap);
  CHECK(psnr(a, Tensor4({1, 3, 2, 2}, 101.0)) == doctest::Approx(10 * std::log10(65025.0)).epsilon(1e-12));
  CHECK(psnr(a, Tensor4({1, 3, 2, 2}, 101.0)) == doctest::Approx(48.1308).epsilon(1e-5));
  CHECK(psnr_from_mse(65025.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(psnr(a, Tensor4({1, 3, 2, 2}, 99.0)) == psnr(Tensor4({1, 3, 2, 2}, 99.0), a));
  double prev = psnr_from_mse(1e-6);
  for (double m = 1e-5; m < 1e5; m *= 3.7) {
    const double cur = psnr_from_mse(m);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("adam") {
  std::vector<Tensor4> p{Tensor4({1, 1, 1, 1}, 0.0)};
  AdamState s;
  adam_step(p, {Tensor4({1, 1, 1, 1}, 1.0)}, s, 0.001);
  CHECK(p[0][0] == doctest::Approx(-0.001).epsilon(1e-6));
  CHECK(s.step == 1);

  Rng rng(5);
  std::vector<Tensor4> q{Tensor4::uniform({2, 3, 2, 2}, rng, -1, 1)};
  const auto before = q;
  AdamState z;
  adam_step(q, {Tensor4({2, 3, 2, 2})}, z, 0.01);
  CHECK(q == before);

  std::vector<Tensor4> r1 = before, r2 = before;
  AdamState a1, a2;
  const std::vector<Tensor4> g{Tensor4::uniform({2, 3, 2, 2}, rng, -1, 1)};
  for (int i = 0; i < 3; ++i) {
    adam_step(r1, g, a1, 0.01);
    adam_step(r2, g, a2, 0.01);
  }
  CHECK(r1 == r2);
  CHECK_THROWS_AS(adam_step(r1, {Tensor4({1, 1, 1, 1})}, a1, 0.01), ShapeError);
}

TEST_CASE("ppm io and cropping") {
  TempDir dir("ppm");
  Image img{300, 280, std::vector<std::uint8_t>(300 * 280 * 3)};
  for (std::size_t i = 0; i < img.rgb.size(); ++i) img.rgb[i] = static_cast<std::uint8_t>(i * 7);
  write_ppm(dir / "a.ppm", img);
  CHECK(read_ppm(dir / "a.ppm") == img);

  CHECK(center_crop_offset(300, 280, 256) == CropOffset{22, 12});
  const Image c = center_crop(img, 256);
  CHECK(c.width == 256);
  CHECK(c.height == 256);
  CHECK(c.rgb[0] == img.rgb[(12 * 300 + 22) * 3]);
  CHECK_THROWS_AS(center_crop_offset(100, 300, 256), ShapeError);
}

TEST_CASE("malformed ppm files are rejected") {
  TempDir dir("badppm");
  {
    std::ofstream(dir / "p3.ppm") << "P3\n1 1\n255\n0 0 0\n";
    std::ofstream(dir / "short.ppm", std::ios::binary) << "P6\n4 4\n255\n" << std::string(10, 'x');
    std::ofstream(dir / "deep.ppm", std::ios::binary) << "P6\n1 1\n65535\n" << std::string(6, 'x');
  }
  CHECK_THROWS_AS(read_ppm(dir / "p3.ppm"), FormatError);
  CHECK_THROWS_AS(read_ppm(dir / "short.ppm"), FormatError);
  CHECK_THROWS_AS(read_ppm(dir / "deep.ppm"), FormatError);
  CHECK_THROWS_AS(read_ppm(dir / "missing.ppm"), FormatError);
  try {
    load_dataset(dir.path());
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("p3.ppm") != std::string::npos);
    CHECK(msg.find("short.ppm") != std::string::npos);
  }
}

TEST_CASE("dataset loading") {
  TempDir empty("empty");
  CHECK_THROWS_AS(load_dataset(empty.path()), Error);
  CHECK_THROWS_AS(load_dataset(empty / "nope"), Error);

  TempDir dir("ds");
  Image a{256, 256, std::vector<std::uint8_t>(256 * 256 * 3, 10)};
  Image b{256, 256, std::vector<std::uint8_t>(256 * 256 * 3, 20)};
  write_ppm(dir / "b.ppm", b);
  write_ppm(dir / "a.ppm", a);
  const Dataset d = load_dataset(dir.path());
  CHECK(d.size() == 2);
  CHECK(d.names == std::vector<std::string>{"a.ppm", "b.ppm"});
  const Tensor4 t = d.all();
  CHECK(t.shape() == Shape4{2, 3, 256, 256});
  CHECK(t(0, 0, 0, 0) == 10.0);
  CHECK(t(1, 2, 255, 255) == 20.0);

  write_ppm(dir / "c.ppm", Image{300, 280, std::vector<std::uint8_t>(300 * 280 * 3)});
  CHECK_THROWS_AS(load_dataset(dir.path()), FormatError);
  CHECK(load_dataset(dir.path(), 256).size() == 3);
}

TEST_CASE("synthetic dataset is deterministic") {
  const Dataset a = synthetic_dataset(4, 16, 3), b = synthetic_dataset(4, 16, 3);
  CHECK(a.images == b.images);
  CHECK(a.images != synthetic_dataset(4, 16, 4).images);
  TempDir dir("synth");
  write_dataset(dir.path(), a);
  CHECK(load_dataset(dir.path()).images == a.images);
}

TEST_CASE("checkpoint round trip") {
  TempDir dir("ckpt");
  const CodecModel m(build_variant(VariantId::R60E2D2, default_base_architecture({32, 32, 3}, 8)), 3, 1.5,
                     VariantId::R60E2D2);
  save_checkpoint(m, dir / "a.dscj");
  const CodecModel back = load_checkpoint(dir / "a.dscj");
  save_checkpoint(back, dir / "b.dscj");
  CHECK(testsupport::slurp(dir / "a.dscj") == testsupport::slurp(dir / "b.dscj"));
  CHECK(back.architecture() == m.architecture());
  CHECK(back.variant() == m.variant());
  CHECK(back.transmit_power() == 1.5);
  for (std::size_t i = 0; i < m.parameters().size(); ++i) {
    CHECK(max_abs_diff(back.parameters()[i].value, m.parameters()[i].value) < 1e-6);
  }
}

TEST_CASE("checkpoint of the baseline stores exactly its parameter count") {
  const CodecModel m(default_base_architecture(kReferenceInput, 8), 1, 1.0, VariantId::Baseline);
  const CodecModel back = deserialize_checkpoint(serialize_checkpoint(m));
  std::uint64_t scalars = 0;
  for (const auto& p : back.parameters()) scalars += p.value.size();
  CHECK(scalars == 143659);
}

TEST_CASE("tampered checkpoints are rejected") {
  const CodecModel m(default_base_architecture({16, 16, 3}, 4), 2);
  const std::string good = serialize_checkpoint(m);
  std::string bad = good;
  bad[0] = 'X';
  CHECK_THROWS_AS(deserialize_checkpoint(bad), FormatError);
  CHECK_THROWS_AS(deserialize_checkpoint(good.substr(0, good.size() - 3)), FormatError);
  CHECK_THROWS_AS(deserialize_checkpoint(good + "x"), FormatError);
  bad = good;
  bad[4] = 9;
  CHECK_THROWS_AS(deserialize_checkpoint(bad), FormatError);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/dir/x.dscj"), FormatError);
}

TEST_CASE("training is reproducible and lr 0 leaves parameters alone") {
  const Dataset data = synthetic_dataset(8, 16, 5);
  const ArchitectureSpec arch = build_variant(VariantId::R60E2D2, default_base_architecture({16, 16, 3}, 4));
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.epochs = 2;
  cfg.seed = 11;

  CodecModel a(arch, 1), b(arch, 1);
  const auto ha = train(a, data, cfg).history;
  const auto hb = train(b, data, cfg).history;
  CHECK(ha.size() == 4);
  CHECK(loss_history_csv(ha) == loss_history_csv(hb));
  for (std::size_t i = 0; i < a.parameters().size(); ++i) CHECK(a.parameters()[i].value == b.parameters()[i].value);

  cfg.learning_rate = 0.0;
  cfg.epochs = 1;
  cfg.batch_size = 8;
  CodecModel c(arch, 1);
  const auto before = c.parameters();
  const auto hc = train(c, data, cfg, ChannelConfig::noise_free()).history;
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(c.parameters()[i].value == before[i].value);
  cfg.epochs = 3;
  const auto hd = train(c, data, cfg, ChannelConfig::noise_free()).history;
  for (const auto& r : hd) CHECK(r.loss == doctest::Approx(hc[0].loss).epsilon(1e-12));

  cfg.max_steps = 2;
  CHECK(train(c, data, cfg).history.size() == 2);
  CHECK_THROWS_AS(train(c, synthetic_dataset(2, 32, 1), cfg), ShapeError);
  cfg.batch_size = 0;
  CHECK_THROWS_AS(train(c, data, cfg), ConfigError);
}

TEST_CASE("sweep evaluation") {
  const Dataset data = synthetic_dataset(4, 16, 8);
  const CodecModel m(default_base_architecture({16, 16, 3}, 4), 4);
  const auto a = evaluate_sweep(m, data, {INFINITY}, 2, 1);
  const auto b = evaluate_sweep(m, data, {INFINITY}, 2, 1);
  CHECK(sweep_csv(a) == sweep_csv(b));
  CHECK(a[0].std_psnr_db > 0.0);
  const auto five = evaluate_sweep(m, data, {0, 5, 10, 15, 19}, 3, 1);
  CHECK(five.size() == 5);
  CHECK(sweep_csv(five).starts_with("snr_db,mean_psnr_db,std_psnr_db,n_images,n_draws\n0,"));
  CHECK_THROWS_AS(evaluate_sweep(m, data, {}, 3, 1), ConfigError);
}

TEST_CASE("smoothed losses") {
  std::vector<LossRecord> h;
  for (std::size_t i = 0; i < 30; ++i) h.push_back({i, 0, static_cast<double>(i), 0});
  CHECK(initial_smoothed_loss(h) == 4.5);
  CHECK(final_smoothed_loss(h) == 24.5);
  CHECK_THROWS_AS(initial_smoothed_loss({}), Error);
}
