// Compares the OpenMP kernels against their serial references on a dense
// synthetic workload and checks that both produce identical bits.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <limits>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "masmon/contribution.hpp"
#include "masmon/graph.hpp"
#include "masmon/judge.hpp"
#include "masmon/rng.hpp"

using namespace masmon;

namespace {

// Dense temporal graph: `agents` x `rounds` nodes, all-to-all edges between
// consecutive rounds. Built directly, bypassing transcripts.
MasGraph dense_graph(std::uint32_t agents, int rounds) {
    MasGraph g;
    g.agent_count = agents;
    g.round_count = rounds;
    for (int r = 1; r <= rounds; ++r)
        for (AgentId a = 0; a < agents; ++a) g.nodes.push_back({a, r});
    g.output_stance.assign(g.nodes.size(), Stance{"A"});
    g.output_content.assign(g.nodes.size(), "I think the answer is A.");
    g.out_edges.resize(g.nodes.size());
    for (int r = 1; r < rounds; ++r) {
        const std::uint32_t from_base = static_cast<std::uint32_t>((r - 1) * agents);
        const std::uint32_t to_base = static_cast<std::uint32_t>(r * agents);
        for (std::uint32_t i = 0; i < agents; ++i)
            for (std::uint32_t j = 0; j < agents; ++j) {
                std::uint32_t e = static_cast<std::uint32_t>(g.edges.size());
                g.edges.push_back({from_base + i, to_base + j, 0});
                g.out_edges[from_base + i].push_back(e);
            }
    }
    return g;
}

SignedGraph random_signs(const MasGraph& g, std::uint64_t seed) {
    SignedGraph sg;
    sg.graph = &g;
    sg.signs.resize(g.edge_count());
    Rng rng(seed);
    for (auto& s : sg.signs) s = static_cast<Sign>(static_cast<int>(rng.uniform_u32(3)) - 1);
    return sg;
}

NodeScores random_init(const MasGraph& g, std::uint64_t seed) {
    NodeScores init(g.node_count(), std::numeric_limits<double>::quiet_NaN());
    Rng rng(seed);
    for (std::size_t i = 0; i < g.node_count(); ++i)
        if (g.nodes[i].round == g.round_count) init[i] = rng.bernoulli(0.5) ? 1.0 : -1.0;
    return init;
}

template <typename F>
double time_best_of(int repeats, F&& fn) {
    double best = 1e300;
    for (int i = 0; i < repeats; ++i) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    std::uint32_t agents = 192;
    int rounds = 12;
    int repeats = 5;
    if (argc > 1) agents = static_cast<std::uint32_t>(std::stoul(argv[1]));
    if (argc > 2) rounds = std::stoi(argv[2]);
    if (argc > 3) repeats = std::stoi(argv[3]);

#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("openmp: disabled (serial build)\n");
#endif

    MasGraph g = dense_graph(agents, rounds);
    std::printf("graph: %u agents x %d rounds = %zu nodes, %zu edges\n", agents, rounds,
                g.node_count(), g.edge_count());

    SignedGraph sg = random_signs(g, 7);
    NodeScores init = random_init(g, 11);

    NodeScores serial_scores, parallel_scores;
    double t_serial = time_best_of(repeats, [&] { serial_scores = backpropagate_serial(sg, init); });
    double t_parallel = time_best_of(repeats, [&] { parallel_scores = backpropagate(sg, init); });
    bool same = serial_scores == parallel_scores;
    std::printf("backpropagate      serial %8.3f ms   parallel %8.3f ms   speedup %5.2fx   %s\n",
                t_serial * 1e3, t_parallel * 1e3, t_serial / t_parallel,
                same ? "bit-identical" : "MISMATCH");

    JudgeConfig judge;
    judge.noise_rate = 0.1;
    judge.rng_seed = 42;
    SignedGraph judged_serial, judged_parallel;
    double t_jserial =
        time_best_of(repeats, [&] { judged_serial = score_all_edges_serial(g, judge); });
    double t_jparallel = time_best_of(repeats, [&] { judged_parallel = score_all_edges(g, judge); });
    bool jsame = judged_serial.signs == judged_parallel.signs;
    std::printf("score_all_edges    serial %8.3f ms   parallel %8.3f ms   speedup %5.2fx   %s\n",
                t_jserial * 1e3, t_jparallel * 1e3, t_jserial / t_jparallel,
                jsame ? "bit-identical" : "MISMATCH");

    return same && jsame ? 0 : 1;
}
