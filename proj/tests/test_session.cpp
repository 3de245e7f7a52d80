#include <random>

#include "doctest.h"

#include "revses/analysis.hpp"
#include "revses/session.hpp"
#include "revses/syntax.hpp"
#include "support.hpp"

using namespace revses;

namespace {

std::vector<P> example3() {
    return {parseProcess(tsupport::kSeller), parseProcess(tsupport::kSeller), parseProcess(tsupport::kBuyer)};
}

SConfig forwardN(SConfig c, Mode m, int n, const PrimitiveTable &prims) {
    for (int i = 0; i < n; ++i) {
        auto fw = enabledForward(c, m, prims);
        REQUIRE_FALSE(fw.empty());
        c = applyForward(c, fw[0], m, prims);
    }
    return c;
}

size_t countRule(const std::vector<SRedex> &rs, const std::string &rule) {
    size_t n = 0;
    for (auto &r : rs) n += r.rule == rule;
    return n;
}

const SessionBox &firstBox(const SConfig &c) {
    for (auto &it : c.items)
        if (it.isBox) return it.box;
    FAIL("no box");
    throw 0;
}

}  // namespace

TEST_CASE("initConfig") {
    auto prims = PrimitiveTable::defaults();
    CHECK(initConfig(Mode::Case1, example3(), &prims).items.size() == 3);
    CHECK(initConfig(Mode::Case2, {}, &prims).items.empty());
    try {
        initConfig(Mode::Case2, {parseProcess("snd ~s<r>.0 | snd r<1>.0")}, &prims);
        FAIL("expected NotSimple");
    } catch (const Error &e) {
        CHECK(e.code() == "NotSimple");
    }
}

TEST_CASE("enabledForward") {
    auto prims = PrimitiveTable::defaults();
    auto bs = initConfig(Mode::Case1, {parseProcess(tsupport::kBuyer), parseProcess(tsupport::kSeller)}, &prims);
    auto fw = enabledForward(bs, Mode::Case1, prims);
    REQUIRE(fw.size() == 1);
    CHECK(fw[0].rule == "Con");
    CHECK(enabledForward(initConfig(Mode::Case2, {mkInact()}, &prims), Mode::Case2, prims).empty());

    auto tb = initConfig(Mode::Case4, tsupport::corpus("two_buyers_seller.rsp"), &prims);
    auto mfw = enabledForward(tb, Mode::Case4, prims);
    REQUIRE(mfw.size() == 1);
    CHECK(mfw[0].rule == "M-Con");
    CHECK(mfw[0].locus.size() == 3);
}

TEST_CASE("Example 3 forward run and stack contents") {
    auto prims = PrimitiveTable::defaults();
    auto c0 = initConfig(Mode::Case2, example3(), &prims);
    auto c1 = forwardN(c0, Mode::Case2, 1, prims);
    REQUIRE(boxCount(c1) == 1);
    auto &b1 = firstBox(c1);
    REQUIRE(b1.stack.size() == 1);
    CHECK(parComponents(b1.stack[0]).size() == 2);
    CHECK(c1.items.size() == 2);  // the other seller stays outside

    auto c6 = forwardN(c1, Mode::Case2, 5, prims);
    auto &b6 = firstBox(c6);
    CHECK(b6.stack.size() == 6);
    CHECK(procEqual(b6.stack.back(), b1.stack[0]));
    // the top of the stack is the body right before the date was sent
    CHECK(printProcess(b6.stack[0]).find("date()") != std::string::npos);
}

TEST_CASE("Fw-If inside a box pushes once") {
    auto prims = PrimitiveTable::defaults();
    auto c = initConfig(Mode::Case2,
                        {parseProcess("req a(x). if true then snd x<1>.0 else snd x<2>.0"),
                         parseProcess("acc a(y). rcv y(v).0")},
                        &prims);
    c = forwardN(c, Mode::Case2, 1, prims);
    auto fw = enabledForward(c, Mode::Case2, prims);
    REQUIRE(fw.size() == 1);
    CHECK(fw[0].rule == "If");
    c = applyForward(c, fw[0], Mode::Case2, prims);
    auto &b = firstBox(c);
    CHECK(b.stack.size() == 2);
    CHECK(printProcess(b.body).find("snd ~") != std::string::npos);
    CHECK(printProcess(b.body).find("<1>") != std::string::npos);
}

TEST_CASE("enabledBackward per case") {
    auto prims = PrimitiveTable::defaults();
    auto one = forwardN(initConfig(Mode::Case2, example3(), &prims), Mode::Case2, 1, prims);
    auto bw = enabledBackward(one, Mode::Case2);
    REQUIRE(bw.size() == 1);
    CHECK(bw[0].rule == "Bw(2)-1");

    auto r3 = forwardN(initConfig(Mode::Case3, example3(), &prims), Mode::Case3, 6, prims);
    auto bw3 = enabledBackward(r3, Mode::Case3);
    CHECK(bw3.size() == 6);
    CHECK(countRule(bw3, "Bw(3)-2") == 1);
    CHECK(countRule(bw3, "Bw(3)-3") == 1);
    CHECK(countRule(bw3, "Bw(3)-4") == 4);

    CHECK(enabledBackward(initConfig(Mode::Case3, example3(), &prims), Mode::Case3).empty());
}

TEST_CASE("Example 3 backward steps") {
    auto prims = PrimitiveTable::defaults();
    auto c0 = initConfig(Mode::Case1, example3(), &prims);

    // case 1: one step back from anywhere restores the three parties
    auto r1 = forwardN(c0, Mode::Case1, 6, prims);
    auto bw1 = enabledBackward(r1, Mode::Case1);
    REQUIRE(bw1.size() == 1);
    CHECK(configCongruent(applyBackward(r1, bw1[0], Mode::Case1), c0));

    // case 2: R' is reached after the date exchange; two steps back the
    // body is the term about to send the address
    auto c2 = initConfig(Mode::Case2, example3(), &prims);
    auto r2 = forwardN(c2, Mode::Case2, 7, prims);
    CHECK(firstBox(r2).stack.size() == 7);  // six interactions plus the initiating term
    auto addr = forwardN(c2, Mode::Case2, 5, prims);
    auto back2 = r2;
    for (int i = 0; i < 2; ++i) {
        auto bw = enabledBackward(back2, Mode::Case2);
        REQUIRE(bw.size() == 1);
        CHECK(bw[0].rule == "Bw(2)-2");
        back2 = applyBackward(back2, bw[0], Mode::Case2);
    }
    CHECK(configCongruent(back2, addr));
    CHECK(firstBox(back2).stack.size() == 5);
    CHECK(printProcess(firstBox(back2).body).find("addr()") != std::string::npos);

    // case 3: the same state in a single step
    auto r3 = forwardN(initConfig(Mode::Case3, example3(), &prims), Mode::Case3, 7, prims);
    auto addr3 = forwardN(initConfig(Mode::Case3, example3(), &prims), Mode::Case3, 5, prims);
    size_t hits = 0;
    for (auto &r : enabledBackward(r3, Mode::Case3))
        if (configCongruent(applyBackward(r3, r, Mode::Case3), addr3)) ++hits;
    CHECK(hits == 1);
}

TEST_CASE("stale redexes are rejected") {
    auto prims = PrimitiveTable::defaults();
    auto c = initConfig(Mode::Case2, example3(), &prims);
    auto fw = enabledForward(c, Mode::Case2, prims);
    auto c1 = applyForward(c, fw[0], Mode::Case2, prims);
    try {
        applyForward(c1, fw[0], Mode::Case2, prims);
        FAIL("expected StaleRedex");
    } catch (const Error &e) {
        CHECK(e.code() == "StaleRedex");
    }
}

TEST_CASE("measureCosts") {
    auto prims = PrimitiveTable::defaults();
    for (int k = 1; k <= 6; ++k) {
        Mode m = modeFromCase(k);
        auto c = initConfig(m, sessionOfLength(m, 1), &prims);
        c = forwardN(c, m, 1, prims);
        auto cost = measureCosts(c, 0, m);
        CHECK(cost.br == 1);
        CHECK(cost.mo == 1);
    }
    auto c2 = forwardN(initConfig(Mode::Case2, example3(), &prims), Mode::Case2, 6, prims);
    CHECK(measureCosts(c2, 0, Mode::Case2).br == 6);
    CHECK(measureCosts(c2, 0, Mode::Case2).mo == 6);
    auto c6 = initConfig(Mode::Case6, sessionOfLength(Mode::Case6, 6), &prims);
    c6 = forwardN(c6, Mode::Case6, 6, prims);
    CHECK(measureCosts(c6, 0, Mode::Case6).br == 1);
    CHECK(measureCosts(c6, 0, Mode::Case6).mo == 6);
    CHECK_THROWS_AS(measureCosts(c6, 3, Mode::Case6), Error);
}

TEST_CASE("stack length law on random walks") {
    auto prims = PrimitiveTable::defaults();
    std::mt19937_64 rng(5);
    for (int k = 1; k <= 6; ++k) {
        Mode m = modeFromCase(k);
        auto start =
            isMultipartyMode(m) ? tsupport::corpus("two_buyers_seller.rsp") : example3();
        for (int walk = 0; walk < 30; ++walk) {
            auto c = initConfig(m, start, &prims);
            int inBox = 0;
            for (int step = 0; step < 12; ++step) {
                auto fw = enabledForward(c, m, prims);
                if (fw.empty()) break;
                auto r = fw[rng() % fw.size()];
                c = applyForward(c, r, m, prims);
                if (r.inner) ++inBox;
                if (!boxCount(c)) continue;
                auto &b = firstBox(c);
                if (rollbackStyle(m) == 1)
                    CHECK(b.stack.size() == 1);
                else
                    CHECK(b.stack.size() == static_cast<size_t>(inBox) + 1);
            }
            if (rollbackStyle(m) == 1 && boxCount(c)) {
                auto bw = enabledBackward(c, m);
                REQUIRE(bw.size() == 1);
                CHECK(configCongruent(applyBackward(c, bw[0], m), initConfig(m, start, &prims)));
            }
        }
    }
}

TEST_CASE("trace records") {
    auto prims = PrimitiveTable::defaults();
    auto c = initConfig(Mode::Case2, example3(), &prims);
    TraceRecord rec;
    auto fw = enabledForward(c, Mode::Case2, prims);
    c = stepWithTrace(c, fw[0], Mode::Case2, prims, 0, rec);
    auto line = traceLine(rec);
    CHECK(line.rfind("{\"stepIndex\":0,\"direction\":\"fw\",\"ruleName\":\"Con\"", 0) == 0);
    CHECK(rec.stackLenBefore == 0);
    CHECK(rec.stackLenAfter == 1);
    CHECK(rec.confHash == configHash(c));
}
