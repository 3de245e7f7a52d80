#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "revses/prims.hpp"
#include "revses/respi.hpp"
#include "revses/session.hpp"

namespace revses {

// ---------------------------------------------------------------------------
// Transitions of the tagged calculus

struct TransitionLabel {
    std::string memoryId;
    std::set<std::string> forkMemoryIds;
    bool forward = true;

    bool sameStep(const TransitionLabel &o) const { return memoryId == o.memoryId && forward == o.forward; }
    bool inverseOf(const TransitionLabel &o) const { return memoryId == o.memoryId && forward != o.forward; }
};
std::string showLabel(const TransitionLabel &l);

// Label of the step src -> dst taken with redex r.
TransitionLabel labelOf(const RConfig &src, const RRedex &r, const RConfig &dst);

// Tags of the memory (looked up in conf) closed under the fork memories of
// the label. Throws UnresolvableMemory.
std::set<Tag> stamp(const TransitionLabel &l, const RConfig &conf);
// conf1/conf2: configurations where each label's memories live (the target
// for forward steps, the source for backward ones).
bool concurrent(const TransitionLabel &l1, const RConfig &conf1, const TransitionLabel &l2, const RConfig &conf2);

struct LtsEdge {
    size_t from = 0, to = 0;
    TransitionLabel label;
    RRedex redex;
};

struct Lts {
    std::vector<RConfig> states;
    std::vector<std::string> keys;
    std::vector<int> depth;  // BFS distance from state 0
    std::vector<LtsEdge> edges;
    std::vector<std::vector<size_t>> out;  // edge indices per state
    bool truncated = false;
    int depthBound = 0;

    bool expanded(size_t s) const { return depth[s] < depthBound; }
};

struct LtsOptions {
    int depth = 4;
    size_t maxStates = 100000;
    bool backward = true;
    bool commits = true;
};
Lts buildLTS(const RConfig &conf, const PrimitiveTable &prims, const LtsOptions &opts = {});

// Memory of the step in the configuration where it lives.
const RConfig &memoryHome(const Lts &g, const LtsEdge &e);
bool edgesConcurrent(const Lts &g, const LtsEdge &a, const LtsEdge &b);

struct CheckReport {
    std::string checkName;
    size_t statesVisited = 0;
    size_t checked = 0;
    size_t unknown = 0;
    std::vector<std::string> violations;
    bool truncated = false;
};
std::string reportLine(const CheckReport &r);

CheckReport squareCheck(const Lts &g);
CheckReport squareCheck(const RConfig &conf, int depth, const PrimitiveTable &prims);

// A trace is a path in g: a start state and a sequence of edge indices.
struct LtsTrace {
    size_t source = 0;
    std::vector<size_t> edges;
};
size_t traceTarget(const Lts &g, const LtsTrace &t);

enum class Verdict { False, True, Unknown };
// Searches the swap/cancellation rewrites from both traces.
Verdict causallyEquivalent(const Lts &g, const LtsTrace &a, const LtsTrace &b, size_t budget = 20000);

CheckReport causalConsistencyCheck(const RConfig &conf, int maxLen, const PrimitiveTable &prims);

// ---------------------------------------------------------------------------
// Loop lemma probes

enum class EngineKind { Case1 = 1, Case2, Case3, Case4, Case5, Case6, Respi };
std::optional<EngineKind> engineFromName(const std::string &s);
std::string engineName(EngineKind k);

// Each probe walks to a random reachable state, then checks that a forward
// step is undone by a backward one and a backward step by forward steps.
CheckReport loopLemmaSuite(EngineKind kind, const std::vector<std::vector<P>> &configs, size_t trials,
                           uint64_t seed, const PrimitiveTable &prims);

// ---------------------------------------------------------------------------
// Costs of reverting a single session

struct CostRow {
    int caseNo = 0;
    int n = 0;
    Costs measured;
    Costs expected;
    bool match() const { return measured.br == expected.br && measured.mo == expected.mo; }
};
Costs expectedCosts(Mode m, int n);
// A session of n interactions (the initiation included) between two or,
// for the multiparty cases, two role-annotated parties.
std::vector<P> sessionOfLength(Mode m, int n);
std::vector<CostRow> costReport(const std::vector<Mode> &modes, int nMin, int nMax, const PrimitiveTable &prims);

// ---------------------------------------------------------------------------
// Export

std::string exportLines(const Lts &g);
std::string exportDot(const Lts &g);

}  // namespace revses
