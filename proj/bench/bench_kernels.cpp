// Serial reference vs OpenMP kernels, and the per-video jobs fan-out of the
// tracker and evaluator. Run with --benchmark_filter to pick a group.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "ovtk/association.hpp"
#include "ovtk/kernels.hpp"
#include "ovtk/synth.hpp"
#include "ovtk/teta.hpp"

using namespace ovtk;
using kernels::Execution;

namespace {

std::vector<BBox> random_boxes(std::size_t n, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pos(0.0, 1800.0), size(8.0, 200.0);
    std::vector<BBox> out(n);
    for (auto& b : out) b = {pos(rng), pos(rng), size(rng), size(rng)};
    return out;
}

EmbeddingMatrix random_embeddings(Eigen::Index n, Eigen::Index dim, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    EmbeddingMatrix m(n, dim);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
    return m;
}

template <Execution E>
void BM_IouMatrix(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = random_boxes(n, 1), b = random_boxes(n, 2);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::iou_matrix(a, b, E));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n));
}

template <Execution E>
void BM_AppearanceScores(benchmark::State& state)
{
    const auto n = state.range(0);
    const auto t = random_embeddings(n, 128, 3), d = random_embeddings(n, 128, 4);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::appearance_scores(t, d, E));
    state.SetItemsProcessed(state.iterations() * n * n);
}

struct Workload {
    std::vector<AnnotationSet> gt_parts;
    AnnotationSet gt;
    std::vector<DetectionSequence> dets;
};

const Workload& workload()
{
    static const Workload w = [] {
        Workload out;
        for (int v = 0; v < 8; ++v) {
            SynthConfig cfg;
            cfg.video_id = v + 1;
            cfg.seed = 100 + static_cast<std::uint64_t>(v);
            cfg.n_tracks = 20;
            cfg.n_frames = 120;
            cfg.box_noise_std = 2.0;
            cfg.embedding_noise_std = 0.05;
            cfg.clutter_rate = 0.5;
            auto s = generate_scenario(cfg);
            out.dets.push_back(std::move(s.detections));
            auto& a = s.annotations;
            out.gt.videos.insert(out.gt.videos.end(), a.videos.begin(), a.videos.end());
            out.gt.annotations.insert(out.gt.annotations.end(), a.annotations.begin(), a.annotations.end());
            if (out.gt.categories.empty()) out.gt.categories = a.categories;
        }
        return out;
    }();
    return w;
}

void BM_RunTracker(benchmark::State& state)
{
    const auto& w = workload();
    const int jobs = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(run_tracker(w.dets, TrackerConfig{}, jobs));
}

void BM_ComputeTeta(benchmark::State& state)
{
    const auto& w = workload();
    const auto pred = run_tracker(w.dets, TrackerConfig{}, 1);
    TetaOptions opt;
    opt.iou_thresholds = {0.5, 0.75};
    opt.jobs = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(compute_teta(w.gt, pred, opt));
}

}  // namespace

BENCHMARK(BM_IouMatrix<Execution::Serial>)->Name("IouMatrix/Serial")->RangeMultiplier(4)->Range(16, 1024);
BENCHMARK(BM_IouMatrix<Execution::Parallel>)->Name("IouMatrix/Parallel")->RangeMultiplier(4)->Range(16, 1024);
BENCHMARK(BM_AppearanceScores<Execution::Serial>)->Name("AppearanceScores/Serial")->RangeMultiplier(4)->Range(16, 512);
BENCHMARK(BM_AppearanceScores<Execution::Parallel>)->Name("AppearanceScores/Parallel")->RangeMultiplier(4)->Range(16, 512);
BENCHMARK(BM_RunTracker)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ComputeTeta)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
