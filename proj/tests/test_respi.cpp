#include <random>

#include "doctest.h"

#include "revses/respi.hpp"
#include "revses/syntax.hpp"
#include "support.hpp"

using namespace revses;

namespace {

RConfig forwardFirst(RConfig c, int n, const PrimitiveTable &prims, bool commits = true) {
    for (int i = 0; i < n; ++i) {
        auto fw = enabledForwardR(c, prims, commits);
        REQUIRE_FALSE(fw.empty());
        c = applyForwardR(c, fw[0], prims);
    }
    return c;
}

size_t countKind(const RConfig &c, MemKind k) {
    size_t n = 0;
    for (auto &m : c.mems) n += m.kind == k;
    return n;
}

bool tagsUnique(const RConfig &c) {
    std::set<Tag> seen;
    for (auto &t : c.threads)
        if (!seen.insert(t.tag).second) return false;
    return true;
}

RConfig corruptCom(const RConfig &c) {
    RConfig n = c;
    for (auto &m : n.mems)
        if (m.kind == MemKind::Com) {
            m.p1 = mkInact();
            break;
        }
    return n;
}

}  // namespace

TEST_CASE("tags") {
    CHECK(rootTag(1) == "t1");
    CHECK(forkLeft("t1") == "t1L");
    CHECK(forkRight("t1") == "t1R");
    CHECK(contTag("t1") == "t1c");
    CHECK(forkLeft("t1") != contTag("t1"));
}

TEST_CASE("liftInitial and splitForks") {
    auto lifted = liftInitial(tsupport::corpus("providers.rsp"));
    CHECK(lifted.threads.size() == 3);
    CHECK(lifted.threads[0].tag == "t1");
    CHECK(lifted.threads[2].tag == "t3");
    CHECK(lifted.mems.empty());
    CHECK(liftInitial({}).threads.empty());

    RConfig one;
    one.threads = {{"t1", parseProcess("(snd s<1>.0 | rcv r(x).0)")}};
    CHECK(one.threads.size() == 1);
    auto split = splitForks(one);
    CHECK(split.threads.size() == 2);
    REQUIRE(split.mems.size() == 1);
    CHECK(split.mems[0].kind == MemKind::Fork);
    CHECK(memHead(split.mems[0]) == std::vector<Tag>{"t1"});
    CHECK(memTail(split.mems[0]) == std::vector<Tag>{"t1L", "t1R"});

    RConfig plain;
    plain.threads = {{"t1", parseProcess("snd s<1>.0")}};
    CHECK(rconfigKey(splitForks(plain)) == rconfigKey(plain));

    RConfig three;
    three.threads = {{"t1", mkPar(mkPar(parseProcess("snd s<1>.0"), parseProcess("snd r<1>.0")),
                                  parseProcess("snd q<1>.0"))}};
    auto s3 = splitForks(three);
    CHECK(s3.threads.size() == 3);
    CHECK(countKind(s3, MemKind::Fork) == 2);
    CHECK(rconfigKey(splitForks(s3)) == rconfigKey(s3));
}

TEST_CASE("forward redexes") {
    auto prims = tsupport::corpusPrims();
    auto c = liftInitial(tsupport::corpus("providers.rsp"));
    auto fw = enabledForwardR(c, prims);
    CHECK(fw.size() == 2);
    for (auto &r : fw) CHECK(r.rule == "fwCon");

    RConfig idle;
    idle.threads = {{"t1", mkInact()}};
    CHECK(enabledForwardR(idle, prims).empty());

    auto com = liftInitial({parseProcess("snd ~s<1+1>.0"), parseProcess("rcv s(x).0")});
    auto cfw = enabledForwardR(com, prims);
    REQUIRE(cfw.size() == 1);
    CHECK(cfw[0].rule == "fwCom");
    auto after = applyForwardR(com, cfw[0], prims);
    REQUIRE(after.mems.size() == 1);
    CHECK(after.mems[0].kind == MemKind::Com);
    CHECK(after.mems[0].k == Endpoint{"s", Pol::Plain, 0});
    CHECK(printExpr(after.mems[0].e) == "1 + 1");
}

TEST_CASE("fwCon and fwIf memories") {
    auto prims = PrimitiveTable::defaults();
    auto c = liftInitial({parseProcess("req a(x). snd x<1>.0"), parseProcess("acc a(y). rcv y(v).0")});
    auto fw = enabledForwardR(c, prims);
    REQUIRE(fw.size() == 1);
    auto c1 = applyForwardR(c, fw[0], prims);
    REQUIRE(c1.mems.size() == 1);
    auto &m = c1.mems[0];
    CHECK(m.kind == MemKind::Init);
    CHECK(m.shared == "a");
    CHECK(m.x == "x");
    CHECK(m.y == "y");
    CHECK(m.t1 == "t1");
    CHECK(m.t2 == "t2");
    CHECK(c1.restricted.count(m.chan));
    REQUIRE(c1.threads.size() == 2);
    CHECK(printProcess(c1.threads[0].body) == "snd ~" + m.chan + "<1>.0");

    auto ifc = liftInitial({parseProcess("if 1 <= 2 then snd s<1>.0 else snd s<2>.0")});
    auto ifw = enabledForwardR(ifc, prims);
    REQUIRE(ifw.size() == 1);
    CHECK(ifw[0].rule == "fwIf1");
    auto i1 = applyForwardR(ifc, ifw[0], prims);
    REQUIRE(i1.mems.size() == 1);
    CHECK(i1.mems[0].kind == MemKind::Choice);
    CHECK(i1.threads[0].tag == "t1c");
    CHECK(printProcess(i1.threads[0].body) == "snd s<1>.0");

    auto bw = enabledBackwardR(i1);
    REQUIRE(bw.size() == 1);
    auto back = applyBackwardR(i1, bw[0], prims);
    CHECK(printProcess(back.threads[0].body) == "if 1 <= 2 then snd s<1>.0 else snd s<2>.0");
    CHECK(back.threads[0].tag == "t1");
}

TEST_CASE("multiple providers run") {
    auto prims = tsupport::corpusPrims();
    auto c0 = liftInitial(tsupport::corpus("providers.rsp"));
    auto m = forwardFirst(c0, 5, prims);
    CHECK(countKind(m, MemKind::Choice) == 1);
    CHECK(countKind(m, MemKind::Init) + countKind(m, MemKind::Com) + countKind(m, MemKind::Sel) == 4);
    auto bw = enabledBackwardR(m);
    REQUIRE(bw.size() == 1);
    CHECK(bw[0].rule == "bwLab");

    auto back = m;
    for (int i = 0; i < 5; ++i) {
        auto b = enabledBackwardR(back);
        REQUIRE(b.size() == 1);
        back = applyBackwardR(back, b[0], prims);
        CHECK(tagsUnique(back));
    }
    CHECK(rconfigCongruent(back, c0));
    CHECK(rconfigHash(back) == rconfigHash(c0));
    CHECK(enabledBackwardR(c0).empty());
}

TEST_CASE("independent memories are revertible together") {
    auto prims = PrimitiveTable::defaults();
    auto c = liftInitial({parseProcess("snd ~s<1>.0"), parseProcess("rcv s(x).0"),
                          parseProcess("if true then 0 else snd r<1>.0")});
    c = forwardFirst(c, 2, prims);
    CHECK(c.mems.size() == 2);
    CHECK(enabledBackwardR(c).size() == 2);
}

TEST_CASE("forgetfulMap") {
    RConfig c;
    c.threads = {{"t1", parseProcess("snd s<1>.0")}};
    CHECK(printProcess(forgetfulMap(c)) == "snd s<1>.0");
    auto prims = PrimitiveTable::defaults();
    auto d = forwardFirst(liftInitial({parseProcess("req a(x). rcv x(v).0"), parseProcess("acc a(y).0")}), 1,
                          prims);
    auto phi = forgetfulMap(d);
    CHECK(printProcess(phi).find("new ") == 0);
    CHECK(printProcess(phi).find("rcv ~") != std::string::npos);
    CHECK(printProcess(forgetfulMap(RConfig{})) == "0");
}

TEST_CASE("loop lemma on random walks") {
    auto prims = tsupport::corpusPrims();
    std::mt19937_64 rng(9);
    for (auto f : {"buyer_seller.rsp", "providers.rsp", "two_sessions.rsp"}) {
        CAPTURE(f);
        for (int walk = 0; walk < 20; ++walk) {
            auto c = liftInitial(tsupport::corpus(f));
            for (int step = 0; step < 10; ++step) {
                auto fw = enabledForwardR(c, prims);
                if (fw.empty()) break;
                auto r = fw[rng() % fw.size()];
                auto n = applyForwardR(c, r, prims);
                CHECK(tagsUnique(n));
                bool undone = false;
                for (auto &b : enabledBackwardR(n))
                    if (rconfigCongruent(applyBackwardR(n, b, prims), c)) undone = true;
                CHECK(undone);
                // phi follows the host calculus
                CHECK(congruent(forgetfulMap(c), forgetfulMap(c), 0));
                c = n;
            }
        }
    }
}

TEST_CASE("checkCorrespondence") {
    auto prims = tsupport::corpusPrims();
    auto bs = liftInitial(tsupport::corpus("buyer_seller.rsp"));
    auto rep = checkCorrespondence(bs, 6, prims);
    CHECK(rep.violations.empty());
    CHECK(rep.edgesChecked > 0);

    auto empty = checkCorrespondence(RConfig{}, 3, prims);
    CHECK(empty.violations.empty());

    auto bad = checkCorrespondence(bs, 4, prims, corruptCom);
    CHECK_FALSE(bad.violations.empty());
}

TEST_CASE("typecheckRespi") {
    auto prims = PrimitiveTable::defaults();
    auto init = forwardFirst(liftInitial({parseProcess("req a(x).0"), parseProcess("acc a(y).0")}), 1, prims);
    CHECK(typecheckRespi({}, {}, init, prims).empty());

    RConfig nil;
    nil.threads = {{"t1", mkInact()}};
    CHECK(typecheckRespi({}, {}, nil, prims).empty());

    // a Com memory whose generating sender would duplicate a live sender on s
    RConfig n1;
    n1.restricted = {"s"};
    n1.threads = {{"t1", parseProcess("snd ~s<1>.0")}, {"t2c", mkInact()},
                  {"t3", parseProcess("rcv s(x).0")}, {"t4c", mkInact()}};
    RMemory m;
    m.kind = MemKind::Com;
    m.t1 = "t2";
    m.t2 = "t4";
    m.t1c = "t2c";
    m.t2c = "t4c";
    m.k = Endpoint{"s", Pol::Plain, 0};
    m.e = mkVal(Value::integer(2));
    m.x = "y";
    m.p1 = mkInact();
    m.p2 = mkInact();
    n1.mems = {m};
    try {
        typecheckRespi({}, {}, n1, prims);
        FAIL("N1 must be rejected");
    } catch (const TypeError &e) {
        CHECK(e.diagnostic().rule == "NonDisjointParallel");
    }
    // yet it can go backwards
    CHECK(enabledBackwardR(n1).size() == 1);
}

TEST_CASE("typed configurations map to typed processes") {
    auto prims = tsupport::corpusPrims();
    TypecheckOptions opts;
    opts.prims = &prims;
    std::mt19937_64 rng(21);
    for (int walk = 0; walk < 30; ++walk) {
        auto c = liftInitial(tsupport::corpus(walk % 2 ? "providers.rsp" : "buyer_seller.rsp"));
        for (int step = 0; step < 10; ++step) {
            CHECK_NOTHROW(typecheckRespi({}, {}, c, prims));
            CHECK_NOTHROW(typecheckProcess({}, {}, forgetfulMap(c), opts));
            auto fw = enabledForwardR(c, prims);
            auto bw = enabledBackwardR(c);
            if (fw.empty() && bw.empty()) break;
            size_t pick = rng() % (fw.size() + bw.size());
            c = pick < fw.size() ? applyForwardR(c, fw[pick], prims)
                                 : applyBackwardR(c, bw[pick - fw.size()], prims);
        }
    }
}

TEST_CASE("stale backward redex") {
    auto prims = PrimitiveTable::defaults();
    auto c = forwardFirst(liftInitial({parseProcess("snd ~s<1>.0"), parseProcess("rcv s(x).0")}), 1, prims);
    auto bw = enabledBackwardR(c);
    REQUIRE(bw.size() == 1);
    auto back = applyBackwardR(c, bw[0], prims);
    CHECK_THROWS_AS(applyBackwardR(back, bw[0], prims), Error);
}
