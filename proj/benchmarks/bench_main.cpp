#include <benchmark/benchmark.h>

#include "okid/experiment.hpp"
#include "okid/rng.hpp"

namespace {

okid::OccupationBasis make_basis(int num_trajectories, int samples) {
    okid::PlantSpec plant = okid::make_duffing_plant();
    okid::ExcitationSpec exc;
    okid::OccupationBasis basis;
    basis.order = 2;
    basis.kernel = {okid::KernelFamily::ExponentialDotProduct, 25.0};
    const double dt = 1e-3;
    okid::Rng rng(42);
    for (int i = 0; i < num_trajectories; ++i) {
        Eigen::VectorXd x0(2);
        x0 << rng.uniform(-2, 2), rng.uniform(-2, 2);
        const auto u = okid::excitation_signal(exc, 1, okid::mix_seed(42, i));
        basis.trajectories.push_back(
            okid::rk4_simulate(plant, u, x0, dt * (samples - 1), dt));
    }
    return basis;
}

void BM_GramAssembly(benchmark::State& state) {
    const auto basis = make_basis(static_cast<int>(state.range(0)),
                                  static_cast<int>(state.range(1)));
    for (auto _ : state) {
        auto gram = okid::gram_matrix(basis);
        benchmark::DoNotOptimize(gram.entries.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_GramAssembly)
    ->Args({32, 101})
    ->Args({64, 101})
    ->Args({128, 101})
    ->Unit(benchmark::kMillisecond);

void BM_PredictBatch(benchmark::State& state) {
    const auto basis = make_basis(128, 101);
    auto model = okid::fit(basis, 1e-8);
    Eigen::MatrixXd probes(state.range(0), 1);
    for (Eigen::Index i = 0; i < probes.rows(); ++i)
        probes(i, 0) = -3.0 + 6.0 * double(i) / double(probes.rows() - 1);
    for (auto _ : state) {
        auto preds = okid::predict_batch(model, probes);
        benchmark::DoNotOptimize(preds.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PredictBatch)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
