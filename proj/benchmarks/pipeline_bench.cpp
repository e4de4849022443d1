#include <benchmark/benchmark.h>

#include <random>

#include "tgrip/detector.hpp"
#include "tgrip/sim.hpp"

namespace {

using namespace tgrip;

ImageRgb random_image(int h, int w, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  ImageRgb img(static_cast<std::uint16_t>(h), static_cast<std::uint16_t>(w));
  for (double& v : img.data()) {
    v = dist(rng);
  }
  return img;
}

void BM_pixel_pipeline(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ImageRgb frame = random_image(n, n, 1);
  const ImageRgb ref = random_image(n, n, 2);
  ImageBinary prev = binarize(channel_mean(abs_diff(frame, ref)), 0.3);
  for (auto _ : state) {
    ImageBinary curr = binarize(channel_mean(abs_diff(frame, ref)), 0.3);
    benchmark::DoNotOptimize(change_ratio(change_image(prev, curr)));
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_pixel_pipeline)->Arg(32)->Arg(64)->Arg(128);

void BM_detect_step(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  DetectorConfig cfg;
  cfg.ref_frames = 2;
  ChangeDetector det(SensorId::S1, cfg);
  det.set_noise_threshold(0.05);
  TactileFrame frame{SensorId::S1, 0,
                     ImageRgb(static_cast<std::uint16_t>(n),
                              static_cast<std::uint16_t>(n), 0.4)};
  det.reference_step(frame);
  det.reference_step(frame);
  for (auto _ : state) {
    benchmark::DoNotOptimize(det.detect_step(frame, 0.01));
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_detect_step)->Arg(64)->Arg(128);

void BM_sim_render(benchmark::State& state) {
  Simulator sim(scenario_preset("rough_connector"), 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sim.render_frames());
  }
}
BENCHMARK(BM_sim_render);

void BM_sim_step(benchmark::State& state) {
  Simulator sim(scenario_preset("rough_connector"), 7);
  const auto grip = GripperCommand::close(0.0015);
  const auto motion = MotionCommand::idle();
  for (auto _ : state) {
    sim.apply(grip, motion);
    benchmark::DoNotOptimize(sim.feedback());
  }
}
BENCHMARK(BM_sim_step);

}  // namespace

BENCHMARK_MAIN();
