// Serial vs OpenMP kernel throughput on shapes typical for a dense page:
// a few hundred lines, a few thousand edges, hidden widths 16-64.

#include <benchmark/benchmark.h>

#include <vector>

#include "tablegraph/kernels.hpp"
#include "tablegraph/matrix.hpp"
#include "tablegraph/rng.hpp"

namespace tg = tablegraph;

namespace {

tg::Matrix random_matrix(int rows, int cols, tg::Rng& rng) {
    tg::Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.uniform(-1.0, 1.0);
    return m;
}

// Random graph with roughly `degree` incident edges per node, indexed by
// receiver the way the learners consume it.
struct BenchGraph {
    int n, m;
    tg::EdgeIndex index;
    tg::SparseRows adj;
    std::vector<double> scale;
};

BenchGraph make_graph(int n, int degree, tg::Rng& rng) {
    BenchGraph g;
    g.n = n;
    g.m = n * degree;
    std::vector<int> recv(g.m), other(g.m);
    for (int j = 0; j < g.m; ++j) {
        recv[j] = static_cast<int>(rng.below(n));
        other[j] = static_cast<int>(rng.below(n));
    }
    g.index.offsets.assign(n + 1, 0);
    for (int r : recv) ++g.index.offsets[r + 1];
    for (int i = 0; i < n; ++i) g.index.offsets[i + 1] += g.index.offsets[i];
    std::vector<int> cursor = g.index.offsets;
    g.index.edge_ids.resize(g.m);
    g.index.other.resize(g.m);
    for (int j = 0; j < g.m; ++j) {
        const int slot = cursor[recv[j]]++;
        g.index.edge_ids[slot] = j;
        g.index.other[slot] = other[j];
    }
    // reuse the receiver index as a CSR adjacency with random weights
    g.adj.n = n;
    g.adj.offsets = g.index.offsets;
    g.adj.cols = g.index.other;
    g.adj.values.resize(g.m);
    for (double& v : g.adj.values) v = rng.uniform(0.0, 1.0);
    g.scale.resize(g.m);
    for (double& v : g.scale) v = rng.uniform(0.0, 1.0);
    return g;
}

template <bool Parallel>
void bench_matmul(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int w = static_cast<int>(state.range(1));
    tg::Rng rng(1);
    const tg::Matrix a = random_matrix(n, w, rng);
    const tg::Matrix b = random_matrix(w, w, rng);
    tg::Matrix out(n, w);
    for (auto _ : state) {
        if constexpr (Parallel)
            tg::kernels::matmul(a, b, out);
        else
            tg::kernels::serial::matmul(a, b, out);
        benchmark::DoNotOptimize(out.data().data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n) * w * w);
}

template <bool Parallel>
void bench_spmm(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int w = static_cast<int>(state.range(1));
    tg::Rng rng(2);
    const BenchGraph g = make_graph(n, 8, rng);
    const tg::Matrix h = random_matrix(n, w, rng);
    tg::Matrix out(n, w);
    for (auto _ : state) {
        if constexpr (Parallel)
            tg::kernels::spmm(g.adj, h, out);
        else
            tg::kernels::serial::spmm(g.adj, h, out);
        benchmark::DoNotOptimize(out.data().data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.m) * w);
}

template <bool Parallel>
void bench_gated_accumulate(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int w = static_cast<int>(state.range(1));
    tg::Rng rng(3);
    const BenchGraph g = make_graph(n, 8, rng);
    const tg::Matrix h = random_matrix(n, w, rng);
    tg::Matrix out(n, w);
    for (auto _ : state) {
        out.fill(0.0);
        if constexpr (Parallel)
            tg::kernels::gated_accumulate(g.index, g.scale, h, out);
        else
            tg::kernels::serial::gated_accumulate(g.index, g.scale, h, out);
        benchmark::DoNotOptimize(out.data().data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.m) * w);
}

template <bool Parallel>
void bench_edge_dots(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int w = static_cast<int>(state.range(1));
    tg::Rng rng(4);
    const BenchGraph g = make_graph(n, 8, rng);
    const tg::Matrix gm = random_matrix(n, w, rng);
    const tg::Matrix h = random_matrix(n, w, rng);
    std::vector<double> out(g.m);
    for (auto _ : state) {
        if constexpr (Parallel)
            tg::kernels::edge_dots(g.index, gm, h, out);
        else
            tg::kernels::serial::edge_dots(g.index, gm, h, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.m) * w);
}

void shapes(benchmark::internal::Benchmark* b) {
    b->Args({256, 16})->Args({256, 64})->Args({1024, 64});
}

}  // namespace

BENCHMARK(bench_matmul<false>)->Name("matmul/serial")->Apply(shapes);
BENCHMARK(bench_matmul<true>)->Name("matmul/omp")->Apply(shapes);
BENCHMARK(bench_spmm<false>)->Name("spmm/serial")->Apply(shapes);
BENCHMARK(bench_spmm<true>)->Name("spmm/omp")->Apply(shapes);
BENCHMARK(bench_gated_accumulate<false>)->Name("gated_accumulate/serial")->Apply(shapes);
BENCHMARK(bench_gated_accumulate<true>)->Name("gated_accumulate/omp")->Apply(shapes);
BENCHMARK(bench_edge_dots<false>)->Name("edge_dots/serial")->Apply(shapes);
BENCHMARK(bench_edge_dots<true>)->Name("edge_dots/omp")->Apply(shapes);

BENCHMARK_MAIN();
