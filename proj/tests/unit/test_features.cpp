#include <doctest.h>

#include <cmath>

#include "cloudvision/error.hpp"
#include "cloudvision/features.hpp"
#include "support.hpp"

using namespace cloudvision;

namespace {

ImageF smooth_random_image(std::uint64_t seed, int w, int h) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double a[6];
  for (double& v : a) v = u(rng);
  ImageF img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      img(x, y) = static_cast<float>(120.0 + 60.0 * std::sin(0.11 * x + 6 * a[0]) * std::cos(0.07 * y + 6 * a[1]) +
                                     40.0 * std::sin(0.23 * (x + y) * a[2] + 6 * a[3]) + 20.0 * (u(rng) - 0.5));
    }
  }
  return img;
}

// Fractional parts away from pixel lines, where the bilinear surface is smooth.
Vector2 interior_uv(std::mt19937_64& rng, const FeatureLevel& level) {
  std::uniform_real_distribution<double> ux(1.0, level.width - 2.0), uy(1.0, level.height - 2.0);
  for (;;) {
    const Vector2 uv(ux(rng), uy(rng));
    const double fx = uv.x() - std::floor(uv.x()), fy = uv.y() - std::floor(uv.y());
    if (fx > 1e-3 && fx < 1 - 1e-3 && fy > 1e-3 && fy < 1 - 1e-3) return uv;
  }
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("level dimensions halve with ceiling") {
  const FeaturePyramid p = build_pyramid(smooth_random_image(1, 321, 241), {3, 1.0, true});
  REQUIRE(p.levels.size() == 3);
  CHECK(p.levels[2].width == 321);
  CHECK(p.levels[2].height == 241);
  CHECK(p.levels[1].width == 161);
  CHECK(p.levels[1].height == 121);
  CHECK(p.levels[0].width == 81);
  CHECK(p.levels[0].height == 61);
  CHECK(p.levels[0].scale == 4);
  CHECK(p.levels[2].scale == 1);
}

TEST_CASE("channels are standardized per level") {
  const FeaturePyramid p = build_pyramid(smooth_random_image(2, 320, 240));
  for (const auto& level : p.levels) {
    const std::size_t n = static_cast<std::size_t>(level.width) * level.height;
    for (int c = 0; c < kFeatureChannels; ++c) {
      double s = 0.0, sq = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += level.data[i * kFeatureChannels + c];
      const double mean = s / n;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = level.data[i * kFeatureChannels + c] - mean;
        sq += d * d;
      }
      CHECK(std::abs(mean) < 1e-3);
      CHECK(std::abs(std::sqrt(sq / n) - 1.0) < 1e-3);
    }
  }
}

TEST_CASE("constant image has zero gradients at every level") {
  for (bool standardize : {true, false}) {
    const FeaturePyramid p = build_pyramid(ImageF(64, 48, 93.0f), {3, 1.0, standardize});
    for (const auto& level : p.levels) {
      for (int y = 0; y < level.height; ++y) {
        for (int x = 0; x < level.width; ++x) {
          REQUIRE(level.value(1, x, y) == 0.0f);
          REQUIRE(level.value(2, x, y) == 0.0f);
        }
      }
    }
  }
}

TEST_CASE("horizontal ramp has a constant x-gradient") {
  ImageF ramp(64, 40);
  for (int y = 0; y < ramp.height; ++y)
    for (int x = 0; x < ramp.width; ++x) ramp(x, y) = static_cast<float>(x);
  const FeaturePyramid p = build_pyramid(ramp, {1, 1.0, false});
  const FeatureLevel& l = p.levels[0];
  // Away from the reflected borders the blurred ramp is still linear.
  for (int y = 0; y < l.height; ++y) {
    for (int x = 5; x < l.width - 5; ++x) {
      CHECK(l.value(1, x, y) == doctest::Approx(1.0).epsilon(1e-4));
      CHECK(l.value(2, x, y) == 0.0f);
    }
  }
}

TEST_CASE("pyramid build is deterministic") {
  const ImageF img = smooth_random_image(3, 200, 150);
  const FeaturePyramid a = build_pyramid(img), b = build_pyramid(img);
  for (std::size_t l = 0; l < a.levels.size(); ++l) CHECK(a.levels[l].data == b.levels[l].data);
}

TEST_CASE("pyramid argument checks") {
  CHECK_THROWS_AS((void)build_pyramid(ImageF(3, 100), {3, 1.0, true}), Error);
  CHECK_NOTHROW((void)build_pyramid(ImageF(4, 4), {3, 1.0, true}));
  CHECK_THROWS_AS((void)build_pyramid(ImageF(10, 10), {0, 1.0, true}), Error);
  CHECK_THROWS_AS((void)build_pyramid(ImageF(10, 10), {1, 0.0, true}), Error);
}

TEST_CASE("sampling at integer pixels returns stored values") {
  const FeaturePyramid p = build_pyramid(smooth_random_image(4, 80, 60));
  const FeatureLevel& l = p.levels.back();
  for (int y = 1; y <= l.height - 2; y += 7) {
    for (int x = 1; x <= l.width - 2; x += 5) {
      const auto s = sample(l, Vector2(x, y));
      REQUIRE(s.has_value());
      for (int c = 0; c < kFeatureChannels; ++c) CHECK(s->f[c] == static_cast<double>(l.value(c, x, y)));
    }
  }
}

TEST_CASE("bilinear midpoint") {
  FeatureLevel l;
  l.width = 4;
  l.height = 4;
  l.data.assign(4 * 4 * kFeatureChannels, 0.0f);
  for (int y = 0; y < 4; ++y) {
    l.value(0, 1, y) = 2.0f;
    l.value(0, 2, y) = 5.0f;
  }
  const auto s = sample(l, Vector2(1.5, 1.25));
  REQUIRE(s.has_value());
  CHECK(s->f[0] == 3.5);
  CHECK(s->grad(0, 0) == 3.0);
  CHECK(s->grad(0, 1) == 0.0);
}

TEST_CASE("samples outside the 1 px margin are rejected") {
  const FeaturePyramid p = build_pyramid(smooth_random_image(5, 40, 30), {1, 1.0, true});
  const FeatureLevel& l = p.levels[0];
  CHECK_FALSE(sample(l, Vector2(0.99, 5)).has_value());
  CHECK_FALSE(sample(l, Vector2(5, l.height - 1.5)).has_value());
  CHECK(sample(l, Vector2(1, 1)).has_value());
  CHECK(sample(l, Vector2(l.width - 2, l.height - 2)).has_value());
  CHECK_FALSE(sample_value(l, Vector2(-3, 4)).has_value());
}

TEST_CASE("sample gradient matches central differences") {
  const FeaturePyramid p = build_pyramid(smooth_random_image(6, 160, 120));
  std::mt19937_64 rng(7);
  const double h = 1e-4;
  for (const auto& l : p.levels) {
    for (int i = 0; i < 300; ++i) {
      const Vector2 uv = interior_uv(rng, l);
      const auto s = sample(l, uv);
      REQUIRE(s.has_value());
      FeatureGrad fd;
      fd.col(0) = (*sample_value(l, uv + Vector2(h, 0)) - *sample_value(l, uv - Vector2(h, 0))) / (2 * h);
      fd.col(1) = (*sample_value(l, uv + Vector2(0, h)) - *sample_value(l, uv - Vector2(0, h))) / (2 * h);
      CHECK((fd - s->grad).norm() / std::max(s->grad.norm(), 1e-12) < 1e-5);
      CHECK((*sample_value(l, uv) - s->f).norm() < 1e-12);
    }
  }
}

TEST_CASE("sampling is Lipschitz in the adjacent-pixel differences") {
  const FeaturePyramid p = build_pyramid(smooth_random_image(8, 90, 70));
  const FeatureLevel& l = p.levels.back();
  FeatureVec lip = FeatureVec::Zero();
  for (int c = 0; c < kFeatureChannels; ++c) {
    for (int y = 0; y < l.height; ++y) {
      for (int x = 0; x < l.width; ++x) {
        if (x + 1 < l.width) lip[c] = std::max(lip[c], double(std::abs(l.value(c, x + 1, y) - l.value(c, x, y))));
        if (y + 1 < l.height) lip[c] = std::max(lip[c], double(std::abs(l.value(c, x, y + 1) - l.value(c, x, y))));
      }
    }
  }
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(-0.7, 0.7);
  std::uniform_real_distribution<double> ux(2.0, l.width - 3.0), uy(2.0, l.height - 3.0);
  for (int i = 0; i < 2000; ++i) {
    const Vector2 a(ux(rng), uy(rng));
    const Vector2 delta(d(rng), d(rng));
    const FeatureVec fa = *sample_value(l, a), fb = *sample_value(l, a + delta);
    // Per-axis slopes are bounded by the adjacent differences, so the bound
    // holds with the L1 length of the step.
    for (int c = 0; c < kFeatureChannels; ++c) {
      CHECK(std::abs(fa[c] - fb[c]) <= lip[c] * delta.lpNorm<1>() + 1e-9);
    }
  }
}

}  // TEST_SUITE
