#include <random>

#include "doctest.h"

#include "revses/respi.hpp"
#include "revses/syntax.hpp"
#include "support.hpp"

using namespace revses;

namespace {

RConfig forwardFirst(RConfig c, int n, const PrimitiveTable &prims) {
    for (int i = 0; i < n; ++i) {
        auto fw = enabledForwardR(c, prims);
        REQUIRE_FALSE(fw.empty());
        c = applyForwardR(c, fw[0], prims);
    }
    return c;
}

std::string chainSide(const char *subj, const char *verb, int k) {
    std::string out;
    for (int i = 0; i < k; ++i) out += std::string(verb) + " " + subj + (verb[0] == 's' ? "<1>. " : "(v" + std::to_string(i) + "). ");
    return out + "commit " + subj + ". 0";
}

}  // namespace

TEST_CASE("head and tail") {
    RMemory a;
    a.kind = MemKind::Com;
    a.t1 = "t1";
    a.t2 = "t2";
    a.t1c = "t1c";
    a.t2c = "t2c";
    CHECK(memHead(a) == std::vector<Tag>{"t1", "t2"});
    CHECK(memTail(a) == std::vector<Tag>{"t1c", "t2c"});

    RMemory c;
    c.kind = MemKind::Commit;
    c.t1 = "t1";
    c.t2 = "t2";
    CHECK(memHead(c) == std::vector<Tag>{"t1", "t2"});
    CHECK(memTail(c).empty());

    RMemory f;
    f.kind = MemKind::Fork;
    f.t1 = "t";
    f.t1c = "tL";
    f.t2c = "tR";
    CHECK(memHead(f) == std::vector<Tag>{"t"});
    CHECK(memTail(f) == std::vector<Tag>{"tL", "tR"});
}

TEST_CASE("commit locks the whole session") {
    auto prims = tsupport::corpusPrims();
    auto c0 = liftInitial(tsupport::corpus("providers_commit.rsp"));
    auto before = forwardFirst(c0, 5, prims);
    CHECK(lockedMemories(before).empty());

    auto fw = enabledForwardR(before, prims);
    REQUIRE(fw.size() == 1);
    CHECK(fw[0].rule == "commit");
    RTraceRecord rec;
    auto after = stepWithTraceR(before, fw[0], prims, 5, rec);
    CHECK(rec.rule == "commit");
    CHECK(rec.lockedCount == after.mems.size());
    CHECK(lockedMemories(after).size() == after.mems.size());
    CHECK(enabledBackwardR(after).empty());
    const RMemory *cm = nullptr;
    for (auto &m : after.mems)
        if (m.kind == MemKind::Commit) cm = &m;
    REQUIRE(cm);
    CHECK(memTail(*cm).empty());

    // without the commit the session still goes all the way back
    auto back = before;
    for (int i = 0; i < 5; ++i) {
        auto bw = enabledBackwardR(back);
        REQUIRE(bw.size() == 1);
        back = applyBackwardR(back, bw[0], prims);
    }
    CHECK(rconfigCongruent(back, c0));
}

TEST_CASE("commit needs both sides on the same session") {
    auto prims = PrimitiveTable::defaults();
    auto c = liftInitial({parseProcess("commit ~s.0"), parseProcess("commit r.0")});
    CHECK(enabledForwardR(c, prims).empty());
    auto ok = liftInitial({parseProcess("commit ~s.0"), parseProcess("commit s.0")});
    CHECK(enabledForwardR(ok, prims).size() == 1);
    CHECK(enabledForwardR(ok, prims, false).empty());
}

TEST_CASE("locking propagates along a chain") {
    auto prims = PrimitiveTable::defaults();
    for (int k = 0; k <= 5; ++k) {
        CAPTURE(k);
        auto c = liftInitial({parseProcess("req a(x). " + chainSide("x", "snd", k)),
                              parseProcess("acc a(y). " + chainSide("y", "rcv", k))});
        for (int i = 0; i < k + 2; ++i) {
            auto fw = enabledForwardR(c, prims);
            REQUIRE(fw.size() == 1);
            c = applyForwardR(c, fw[0], prims);
        }
        CHECK(c.mems.size() == static_cast<size_t>(k + 2));
        CHECK(lockedMemories(c).size() == c.mems.size());
        CHECK(enabledBackwardR(c).empty());
    }
}

TEST_CASE("locked set is monotone and never revertible") {
    auto prims = tsupport::corpusPrims();
    std::mt19937_64 rng(4);
    for (int walk = 0; walk < 60; ++walk) {
        auto c = liftInitial(tsupport::corpus("providers_commit.rsp"));
        std::set<std::string> locked;
        for (int step = 0; step < 14; ++step) {
            auto now = lockedMemories(c);
            std::set<std::string> ids;
            for (auto &m : c.mems) ids.insert(m.id());
            for (auto &l : now) CHECK(ids.count(l));
            for (auto &b : enabledBackwardR(c)) CHECK_FALSE(now.count(b.memoryId));
            auto fw = enabledForwardR(c, prims);
            auto bw = enabledBackwardR(c);
            if (fw.empty() && bw.empty()) break;
            size_t pick = rng() % (fw.size() + bw.size());
            bool forward = pick < fw.size();
            auto next = forward ? applyForwardR(c, fw[pick], prims) : applyBackwardR(c, bw[pick - fw.size()], prims);
            if (forward) {
                auto after = lockedMemories(next);
                for (auto &l : now) CHECK(after.count(l));
            }
            c = next;
        }
    }
}

TEST_CASE("subordinate commit lint") {
    auto p = tsupport::corpusTerm("subordinate_commit.rsp");
    CHECK_FALSE(subordinateCommitWarnings(p).empty());
    CHECK(subordinateCommitWarnings(tsupport::corpusTerm("providers_commit.rsp")).empty());
}
