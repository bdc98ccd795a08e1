#include "facesig/classify.hpp"
#include "facesig/functionals.hpp"
#include "facesig/postproc.hpp"
#include "facesig/signals.hpp"
#include "facesig/synth.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace facesig;

namespace {

Segment random_segment(int n_frames, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Segment seg;
    seg.subject_id = "S";
    for (int c = 0; c < 7; ++c) {
        ChannelSeries ch;
        ch.name = "ch" + std::to_string(c);
        for (int i = 0; i < n_frames; ++i) {
            ch.values.push_back(u(rng));
            ch.valid.push_back(u(rng) > 0.05);
        }
        seg.channels.push_back(std::move(ch));
    }
    return seg;
}

void bm_featurize(benchmark::State& state) {
    auto seg = random_segment(static_cast<int>(state.range(0)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(featurize(seg));
}
BENCHMARK(bm_featurize)->Arg(1200)->Arg(7200);

void bm_pose_fit(benchmark::State& state) {
    FaceModel3D model;
    auto pts = project_model(model, 0.2, -0.3, 0.1, 240.0, 320.0, 240.0);
    for (auto _ : state) benchmark::DoNotOptimize(fit_head_pose(pts, model));
}
BENCHMARK(bm_pose_fit);

void bm_ear(benchmark::State& state) {
    std::array<Point2, 6> eye = {{{0, 0}, {0.6, -0.3}, {1.4, -0.3}, {2, 0},
                                  {1.4, 0.3}, {0.6, 0.3}}};
    for (auto _ : state) benchmark::DoNotOptimize(compute_ear(eye));
}
BENCHMARK(bm_ear);

void bm_smooth(benchmark::State& state) {
    auto seg = random_segment(9000, 2);
    for (auto _ : state) benchmark::DoNotOptimize(moving_average(seg.channels[0], 7));
}
BENCHMARK(bm_smooth);

void bm_svm_train(benchmark::State& state) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0.0, 0.5);
    const int n = static_cast<int>(state.range(0));
    Eigen::MatrixXd x(n, 20);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
        const int cls = i % 2 ? 1 : -1;
        y[i] = cls;
        for (int j = 0; j < 20; ++j) x(i, j) = cls * (j % 3 == 0 ? 1.0 : 0.0) + noise(rng);
    }
    SvmParams params;
    for (auto _ : state) {
        BinarySvm svm;
        svm.fit(x, y, params);
        benchmark::DoNotOptimize(svm.bias());
    }
}
BENCHMARK(bm_svm_train)->Arg(100)->Arg(300);

void bm_synth_recording(benchmark::State& state) {
    CohortSpec spec = CohortSpec::default_spec();
    spec.minutes_per_level_subject = {1.0, 1.0, 1.0};
    for (auto _ : state) benchmark::DoNotOptimize(generate_recording(spec, 0, 0, 7));
}
BENCHMARK(bm_synth_recording);

} // namespace

BENCHMARK_MAIN();
