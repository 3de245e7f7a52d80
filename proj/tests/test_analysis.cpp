#include <algorithm>

#include "doctest.h"

#include "revses/analysis.hpp"
#include "revses/syntax.hpp"
#include "support.hpp"

using namespace revses;

namespace {

RConfig twoSessions() { return liftInitial(tsupport::corpus("two_sessions.rsp")); }

RConfig comPair() { return liftInitial({parseProcess("snd ~s<1>.0"), parseProcess("rcv s(x).0")}); }

std::vector<size_t> forwardOut(const Lts &g, size_t s) {
    std::vector<size_t> out;
    for (size_t e : g.out[s])
        if (g.edges[e].label.forward) out.push_back(e);
    return out;
}

}  // namespace

TEST_CASE("stamps") {
    auto prims = PrimitiveTable::defaults();
    auto c = comPair();
    auto fw = enabledForwardR(c, prims);
    REQUIRE(fw.size() == 1);
    auto d = applyForwardR(c, fw[0], prims);
    auto l = labelOf(c, fw[0], d);
    CHECK(l.forward);
    CHECK(stamp(l, d) == std::set<Tag>{"t1", "t2", "t1c", "t2c"});

    auto ifc = liftInitial({parseProcess("if true then 0 else 0")});
    auto ir = enabledForwardR(ifc, prims);
    auto id = applyForwardR(ifc, ir[0], prims);
    CHECK(stamp(labelOf(ifc, ir[0], id), id) == std::set<Tag>{"t1", "t1c"});

    // the sender's continuation forks, so the step creates a fork memory
    auto forked = liftInitial({parseProcess("snd ~s<1>.(snd r<1>.0 | snd q<1>.0)"), parseProcess("rcv s(x).0")});
    auto ffw = enabledForwardR(forked, prims);
    REQUIRE(ffw.size() == 1);
    auto fd = applyForwardR(forked, ffw[0], prims);
    auto fl = labelOf(forked, ffw[0], fd);
    CHECK(fl.forkMemoryIds == std::set<std::string>{"fork:t1c"});
    CHECK(stamp(fl, fd) == std::set<Tag>{"t1", "t2", "t1c", "t2c", "t1cL", "t1cR"});

    TransitionLabel ghost{"com:nowhere", {}, true};
    CHECK_THROWS_AS(stamp(ghost, fd), Error);
}

TEST_CASE("concurrency") {
    auto prims = PrimitiveTable::defaults();
    LtsOptions o;
    o.depth = 3;
    auto g = buildLTS(twoSessions(), prims, o);
    auto init = forwardOut(g, 0);
    REQUIRE(init.size() == 2);
    auto &a = g.edges[init[0]], &b = g.edges[init[1]];
    CHECK(edgesConcurrent(g, a, b));
    CHECK(edgesConcurrent(g, b, a));
    CHECK_FALSE(edgesConcurrent(g, a, a));

    // a forward step and the backward step undoing its parent conflict
    size_t mid = a.to;
    const LtsEdge *fw = nullptr, *bw = nullptr;
    for (size_t e : g.out[mid]) {
        auto &ed = g.edges[e];
        if (!ed.label.forward && ed.label.memoryId == a.label.memoryId) bw = &ed;
        if (ed.label.forward && ed.to != mid && stamp(ed.label, g.states[ed.to]).count(a.redex.tags[0] + "c"))
            fw = &ed;
    }
    REQUIRE(bw);
    REQUIRE(fw);
    CHECK_FALSE(edgesConcurrent(g, *fw, *bw));

    // symmetry and irreflexivity over every coinitial pair
    for (size_t s = 0; s < g.states.size(); ++s)
        for (size_t i : g.out[s]) {
            CHECK_FALSE(edgesConcurrent(g, g.edges[i], g.edges[i]));
            for (size_t j : g.out[s])
                CHECK(edgesConcurrent(g, g.edges[i], g.edges[j]) == edgesConcurrent(g, g.edges[j], g.edges[i]));
        }
}

TEST_CASE("buildLTS") {
    auto prims = PrimitiveTable::defaults();
    auto empty = buildLTS(RConfig{}, prims);
    CHECK(empty.states.size() == 1);
    CHECK(empty.edges.empty());
    CHECK_FALSE(empty.truncated);

    LtsOptions o;
    o.depth = 2;
    auto loop = buildLTS(comPair(), prims, o);
    CHECK(loop.states.size() == 2);
    CHECK(loop.edges.size() == 2);
    CHECK_FALSE(loop.truncated);

    o.depth = 6;
    auto bs = buildLTS(liftInitial(tsupport::corpus("buyer_seller.rsp")), prims, o);
    // forward-only paths of the host run: one linear conversation plus the branch taken
    size_t fwEdges = 0;
    for (auto &e : bs.edges) fwEdges += e.label.forward;
    CHECK(fwEdges == 6);
    CHECK(bs.states.size() == 7);

    o.depth = 1;
    auto cut = buildLTS(liftInitial(tsupport::corpus("buyer_seller.rsp")), prims, o);
    CHECK(cut.truncated);
    o.depth = 6;
    o.maxStates = 3;
    CHECK(buildLTS(liftInitial(tsupport::corpus("buyer_seller.rsp")), prims, o).truncated);
}

TEST_CASE("squareCheck") {
    auto prims = PrimitiveTable::defaults();
    auto rep = squareCheck(twoSessions(), 6, prims);
    CHECK(rep.violations.empty());
    CHECK(rep.checked > 0);

    LtsOptions o;
    o.depth = 4;
    auto g = buildLTS(twoSessions(), prims, o);
    auto init = forwardOut(g, 0);
    REQUIRE(init.size() == 2);
    auto a = g.edges[init[0]], b = g.edges[init[1]];
    auto &outs = g.out[a.to];
    outs.erase(std::remove_if(outs.begin(), outs.end(),
                              [&](size_t e) { return g.edges[e].label.sameStep(b.label); }),
               outs.end());
    CHECK_FALSE(squareCheck(g).violations.empty());

    for (auto f : {"buyer_seller.rsp", "providers.rsp", "providers_commit.rsp"}) {
        CAPTURE(f);
        CHECK(squareCheck(liftInitial(tsupport::corpus(f)), 6, tsupport::corpusPrims()).violations.empty());
    }
}

TEST_CASE("causallyEquivalent") {
    auto prims = PrimitiveTable::defaults();
    LtsOptions o;
    o.depth = 4;
    auto g = buildLTS(twoSessions(), prims, o);
    auto init = forwardOut(g, 0);
    REQUIRE(init.size() == 2);
    size_t e0 = init[0], e1 = init[1];

    size_t back = 0;
    bool found = false;
    for (size_t e : g.out[g.edges[e0].to])
        if (g.edges[e].label.inverseOf(g.edges[e0].label)) {
            back = e;
            found = true;
        }
    REQUIRE(found);
    CHECK(causallyEquivalent(g, LtsTrace{0, {e0, back}}, LtsTrace{0, {}}) == Verdict::True);
    CHECK(causallyEquivalent(g, LtsTrace{0, {e0}}, LtsTrace{0, {e0}}) == Verdict::True);

    auto follow = [&](size_t from, const TransitionLabel &l) {
        for (size_t e : g.out[from])
            if (g.edges[e].label.sameStep(l)) return e;
        FAIL("missing residual");
        return size_t(0);
    };
    LtsTrace ab{0, {e0, follow(g.edges[e0].to, g.edges[e1].label)}};
    LtsTrace ba{0, {e1, follow(g.edges[e1].to, g.edges[e0].label)}};
    CHECK(traceTarget(g, ab) == traceTarget(g, ba));
    CHECK(causallyEquivalent(g, ab, ba) == Verdict::True);
    CHECK(causallyEquivalent(g, LtsTrace{0, {e0}}, LtsTrace{0, {e1}}) == Verdict::False);
}

TEST_CASE("causalConsistencyCheck") {
    auto prims = tsupport::corpusPrims();
    auto two = causalConsistencyCheck(twoSessions(), 4, prims);
    CHECK(two.violations.empty());
    CHECK(two.unknown == 0);
    CHECK(two.checked > 0);
    auto seq = causalConsistencyCheck(liftInitial(tsupport::corpus("buyer_seller.rsp")), 4, prims);
    CHECK(seq.violations.empty());
    CHECK(seq.unknown == 0);
    auto trivial = causalConsistencyCheck(RConfig{}, 4, prims);
    CHECK(trivial.violations.empty());
}

TEST_CASE("loopLemmaSuite") {
    auto prims = tsupport::corpusPrims();
    std::vector<std::vector<P>> bin{tsupport::corpus("buyer_seller.rsp")};
    CHECK(loopLemmaSuite(EngineKind::Case2, bin, 100, 1, prims).violations.empty());
    CHECK(loopLemmaSuite(EngineKind::Respi, {tsupport::corpus("providers.rsp")}, 100, 1, prims).violations.empty());
    try {
        loopLemmaSuite(EngineKind::Case1, bin, 10, 1, prims);
        FAIL("case1 must be refused");
    } catch (const Error &e) {
        CHECK(e.code() == "LoopLemmaUnavailable");
    }
    CHECK_THROWS_AS(loopLemmaSuite(EngineKind::Case4, bin, 10, 1, prims), Error);
    CHECK(engineFromName("respi") == EngineKind::Respi);
    CHECK(engineFromName("case6") == EngineKind::Case6);
    CHECK_FALSE(engineFromName("case7"));
}

TEST_CASE("costReport") {
    auto prims = PrimitiveTable::defaults();
    std::vector<Mode> all;
    for (int k = 1; k <= 6; ++k) all.push_back(modeFromCase(k));
    for (auto &r : costReport(all, 1, 1, prims)) {
        CHECK(r.measured.br == 1);
        CHECK(r.measured.mo == 1);
    }
    auto c5 = costReport({Mode::Case5, Mode::Case6}, 50, 50, prims);
    REQUIRE(c5.size() == 2);
    CHECK(c5[0].measured.br == 50);
    CHECK(c5[0].measured.mo == 50);
    CHECK(c5[1].measured.br == 1);
    CHECK(c5[1].measured.mo == 50);
    for (auto &r : costReport(all, 1, 12, prims)) {
        CAPTURE(r.caseNo);
        CAPTURE(r.n);
        CHECK(r.match());
    }
}

TEST_CASE("exports") {
    auto prims = PrimitiveTable::defaults();
    LtsOptions o;
    o.depth = 2;
    auto g = buildLTS(comPair(), prims, o);
    auto lines = exportLines(g);
    CHECK(std::count(lines.begin(), lines.end(), '\n') == 4);
    CHECK(lines.find("\"record\":\"node\"") != std::string::npos);
    CHECK(lines.find("\"record\":\"edge\"") != std::string::npos);
    auto dot = exportDot(g);
    CHECK(dot.rfind("digraph", 0) == 0);
    CHECK(exportLines(buildLTS(comPair(), prims, o)) == lines);
}
