#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "revses/analysis.hpp"
#include "revses/respi.hpp"
#include "revses/session.hpp"
#include "revses/syntax.hpp"

using namespace revses;

namespace {

std::vector<P> corpus(const std::string &name) {
    std::ifstream f(std::string(REVSES_CORPUS_DIR) + "/" + name);
    std::stringstream ss;
    ss << f.rdbuf();
    return parComponents(parseProcess(ss.str()));
}

void BM_Canonicalize(benchmark::State &st) {
    auto p = parOf(corpus("providers.rsp"));
    for (auto _ : st) benchmark::DoNotOptimize(canonicalize(p));
}
BENCHMARK(BM_Canonicalize);

void BM_Typecheck(benchmark::State &st) {
    auto p = parOf(corpus("buyer_seller.rsp"));
    for (auto _ : st) benchmark::DoNotOptimize(typecheckProcess({}, {}, p));
}
BENCHMARK(BM_Typecheck);

// forward to the end of a session of length n, then revert it
void BM_SessionRoundTrip(benchmark::State &st) {
    Mode m = modeFromCase(static_cast<int>(st.range(0)));
    int n = static_cast<int>(st.range(1));
    auto prims = PrimitiveTable::defaults();
    auto start = initConfig(m, sessionOfLength(m, n), &prims);
    for (auto _ : st) {
        auto c = start;
        for (int i = 0; i < n; ++i) c = applyForward(c, enabledForward(c, m, prims).at(0), m, prims);
        while (true) {
            auto bw = enabledBackward(c, m);
            if (bw.empty()) break;
            c = applyBackward(c, bw[0], m);
        }
        benchmark::DoNotOptimize(c);
    }
}
BENCHMARK(BM_SessionRoundTrip)->ArgsProduct({{1, 2, 3}, {10, 50}});

void BM_RespiForward(benchmark::State &st) {
    auto prims = PrimitiveTable::defaults();
    auto start = liftInitial(corpus("buyer_seller.rsp"));
    for (auto _ : st) {
        auto c = start;
        for (int i = 0; i < 6; ++i) c = applyForwardR(c, enabledForwardR(c, prims).at(0), prims);
        benchmark::DoNotOptimize(c);
    }
}
BENCHMARK(BM_RespiForward);

void BM_BuildLts(benchmark::State &st) {
    auto prims = PrimitiveTable::defaults();
    auto conf = liftInitial(corpus("two_sessions.rsp"));
    LtsOptions o;
    o.depth = static_cast<int>(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(buildLTS(conf, prims, o));
}
BENCHMARK(BM_BuildLts)->Arg(2)->Arg(4)->Arg(6);

void BM_CausalCheck(benchmark::State &st) {
    auto prims = PrimitiveTable::defaults();
    auto conf = liftInitial(corpus("two_sessions.rsp"));
    for (auto _ : st) benchmark::DoNotOptimize(causalConsistencyCheck(conf, 4, prims));
}
BENCHMARK(BM_CausalCheck)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
