#include <benchmark/benchmark.h>

#include <numbers>

#include "bloch/lattice_green.hpp"
#include "bloch/np_spectrum.hpp"
#include "bloch/oracle.hpp"
#include "bloch/series_engine.hpp"

using namespace bloch;

namespace {

constexpr double kPi = std::numbers::pi;

const InclusionSet& disk() {
    static const InclusionSet s({Inclusion::disk({0.5, 0.5}, 0.3)});
    return s;
}

struct Chain {
    DirichletSpectrum spec = disk_dirichlet(0.3, 6, 6);
    QuasiMomentum alpha{kPi, 0.0};
    LimitSpectrum limit = limit_spectrum(alpha, spec, 3);
    OperatorChain chain = OperatorChain::build(disk(), alpha, spec, limit, 0);
};

const Chain& chain() {
    static const Chain c;
    return c;
}

}  // namespace

static void BM_GreenEwald(benchmark::State& state) {
    const GreenEvaluator ev(QuasiMomentum(kPi, 0.0));
    Vec2 r(0.21, -0.13);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ev.green(r));
        r.x() += 1e-9;
    }
}
BENCHMARK(BM_GreenEwald);

static void BM_AssembleLayers(benchmark::State& state) {
    const BoundaryMesh mesh = build_mesh(disk(), static_cast<int>(state.range(0)));
    const GreenEvaluator ev(QuasiMomentum(kPi, 0.0));
    for (auto _ : state) benchmark::DoNotOptimize(assemble(mesh, ev));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AssembleLayers)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond)->Complexity();

static void BM_ResonanceSpectrum(benchmark::State& state) {
    const LayerOperators ops =
        assemble(build_mesh(disk(), static_cast<int>(state.range(0))), GreenEvaluator(QuasiMomentum(kPi, 0.0)));
    for (auto _ : state) benchmark::DoNotOptimize(resonance_spectrum(ops));
}
BENCHMARK(BM_ResonanceSpectrum)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_ChainBuild(benchmark::State& state) {
    const Chain& c = chain();
    for (auto _ : state) benchmark::DoNotOptimize(OperatorChain::build(disk(), c.alpha, c.spec, c.limit, 0));
}
BENCHMARK(BM_ChainBuild)->Unit(benchmark::kMillisecond)->Iterations(3);

static void BM_LayerSeries(benchmark::State& state) {
    const OperatorChain& ch = chain().chain;
    for (auto _ : state) benchmark::DoNotOptimize(coefficients_layer_rs(ch, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_LayerSeries)->DenseRange(1, 6, 1)->Unit(benchmark::kMillisecond);

static void BM_ContourSeries(benchmark::State& state) {
    const OperatorChain& ch = chain().chain;
    for (auto _ : state)
        benchmark::DoNotOptimize(coefficients_contour(ch, 6, static_cast<int>(state.range(0)), 0.0, false));
}
BENCHMARK(BM_ContourSeries)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_OracleSolve(benchmark::State& state) {
    OracleOptions opt;
    opt.cutoff = static_cast<int>(state.range(0));
    opt.refine = false;
    for (auto _ : state) benchmark::DoNotOptimize(bloch_solve(disk(), {kPi, 0.0}, 200.0, 1, opt));
}
BENCHMARK(BM_OracleSolve)->Arg(8)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond)->Iterations(2);

BENCHMARK_MAIN();
