// Serial reference vs OpenMP kernels. Each pair runs on identical inputs;
// compare the "serial" and "omp" rows of the same kernel.

#include <benchmark/benchmark.h>

#include <random>

#include "cloudvision/features.hpp"
#include "cloudvision/kernels.hpp"
#include "cloudvision/synth.hpp"

using namespace cloudvision;

namespace {

ImageF noise_image(int w, int h) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(0.0f, 255.0f);
  ImageF img(w, h);
  for (auto& v : img.data) v = u(rng);
  return img;
}

const synth::Scene& scene() {
  static const synth::Scene s = synth::generate_scene(synth::SceneSpec{}, 0);
  return s;
}

std::vector<kernels::Ray> camera_rays(int n) {
  const synth::FilletPath path = synth::loop_centerline(scene().spec, 1.2);
  const synth::PathSample at = path.at(3.0);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<kernels::Ray> rays(static_cast<std::size_t>(n));
  for (auto& r : rays) {
    r.origin = at.position;
    r.direction = Vector3(g(rng), g(rng), g(rng)).normalized();
  }
  return rays;
}

std::vector<Vector3> cloud(int n) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  std::vector<Vector3> pts(static_cast<std::size_t>(n));
  for (auto& p : pts) p = Vector3(u(rng), u(rng), u(rng));
  return pts;
}

struct LinearizeSetup {
  FeaturePyramid pyramid;
  std::vector<Vector3> points;
  std::vector<FeatureVec> refs;
  kernels::LinearizeInput input;

  LinearizeSetup() {
    const synth::DatasetSpec spec;
    const synth::FilletPath path = synth::loop_centerline(scene().spec, 1.2);
    const synth::PathSample at = path.at(5.0);
    const Pose pose(synth::camera_orientation(at.yaw), at.position);
    const synth::Render r = synth::render(scene(), pose, spec.camera);
    pyramid = build_pyramid(to_float(r.image));
    const FeatureLevel& level = pyramid.levels.back();
    const CameraIntrinsics& k = spec.camera;
    for (int v = 0; v < k.height; v += 2) {
      for (int u = 0; u < k.width; u += 2) {
        const double d = r.depth(u, v);
        if (!(d > 0.0)) continue;
        points.push_back(pose * (Vector3((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0).normalized() * d));
        refs.push_back(FeatureVec::Zero());
      }
    }
    input.points = points;
    input.refs = refs;
    input.level = &level;
    input.k_level = k;
    input.world_from_camera = pose;
  }
};

const LinearizeSetup& linearize_setup() {
  static const LinearizeSetup s;
  return s;
}

template <bool Omp>
void BM_GaussianBlur(benchmark::State& state) {
  const ImageF img = noise_image(640, 480);
  for (auto _ : state) {
    ImageF out = Omp ? kernels::gaussian_blur(img, 1.0) : kernels::serial::gaussian_blur(img, 1.0);
    benchmark::DoNotOptimize(out.data.data());
  }
  state.SetItemsProcessed(state.iterations() * img.width * img.height);
}

template <bool Omp>
void BM_CastRays(benchmark::State& state) {
  const synth::RayCaster caster(scene());
  const auto rays = camera_rays(20000);
  std::vector<kernels::RayHit> hits(rays.size());
  for (auto _ : state) {
    if (Omp) {
      kernels::cast_rays(caster.intersectors(), rays, hits);
    } else {
      kernels::serial::cast_rays(caster.intersectors(), rays, hits);
    }
    benchmark::DoNotOptimize(hits.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rays.size()));
}

template <bool Omp>
void BM_CovisibilityFlags(benchmark::State& state) {
  const auto pts = cloud(1000000);
  const CameraIntrinsics k = synth::DatasetSpec{}.camera;
  std::vector<std::uint8_t> flags(pts.size());
  for (auto _ : state) {
    if (Omp) {
      kernels::covisibility_flags(pts, Pose::identity(), k, 0.05, 30.0, flags);
    } else {
      kernels::serial::covisibility_flags(pts, Pose::identity(), k, 0.05, 30.0, flags);
    }
    benchmark::DoNotOptimize(flags.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pts.size()));
}

template <bool Omp>
void BM_DotProducts(benchmark::State& state) {
  const std::size_t dim = 1024, m = 3000;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> db(dim * m), q(dim);
  for (auto& v : db) v = u(rng);
  for (auto& v : q) v = u(rng);
  std::vector<double> sims(m);
  for (auto _ : state) {
    if (Omp) {
      kernels::dot_products(db, q, dim, sims);
    } else {
      kernels::serial::dot_products(db, q, dim, sims);
    }
    benchmark::DoNotOptimize(sims.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m));
}

template <bool Omp>
void BM_Linearize(benchmark::State& state) {
  const LinearizeSetup& s = linearize_setup();
  for (auto _ : state) {
    const kernels::NormalEquations ne = Omp ? kernels::linearize(s.input) : kernels::serial::linearize(s.input);
    benchmark::DoNotOptimize(ne.cost);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.points.size()));
}

}  // namespace

BENCHMARK(BM_GaussianBlur<false>)->Name("gaussian_blur/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GaussianBlur<true>)->Name("gaussian_blur/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CastRays<false>)->Name("cast_rays/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CastRays<true>)->Name("cast_rays/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CovisibilityFlags<false>)->Name("covisibility_flags/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CovisibilityFlags<true>)->Name("covisibility_flags/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DotProducts<false>)->Name("dot_products/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DotProducts<true>)->Name("dot_products/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Linearize<false>)->Name("linearize/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Linearize<true>)->Name("linearize/omp")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
