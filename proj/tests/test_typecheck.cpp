#include "doctest.h"

#include "revses/host.hpp"
#include "revses/syntax.hpp"
#include "revses/typecheck.hpp"
#include "support.hpp"

using namespace revses;

namespace {

std::string rejection(const std::string &src, const TypecheckOptions &opts = {}) {
    try {
        typecheckProcess({}, {}, parseProcess(src), opts);
    } catch (const TypeError &e) {
        return e.diagnostic().rule;
    }
    return "";
}

}  // namespace

TEST_CASE("dualType") {
    CHECK(printType(dualType(parseType("!int.end"))) == "?int.end");
    auto sel = parseType("+{l: !bool.end}");
    CHECK(typeEqual(dualType(dualType(sel)), sel));
    CHECK(printType(dualType(parseType("rec t.!int.t"))) == "rec t.?int.t");
    CHECK(printType(dualType(tEnd())) == "end");
    CHECK(printType(dualType(tCommit())) == "commit");
}

TEST_CASE("typeEqual") {
    CHECK(typeEqual(parseType("rec t.!int.t"), parseType("!int.rec t.!int.t")));
    CHECK(typeEqual(tEnd(), tEnd()));
    CHECK_FALSE(typeEqual(parseType("!int.end"), parseType("?int.end")));
    CHECK(typeEqual(parseType("rec t.!int.t"), parseType("rec u.!int.!int.u")));
}

TEST_CASE("dualType is an involution on generated types") {
    tsupport::TermGen gen(17);
    for (int i = 0; i < 300; ++i) {
        auto t = gen.type(4);
        CAPTURE(printType(t));
        CHECK(typeEqual(dualType(dualType(t)), t));
    }
}

TEST_CASE("typecheckExpr") {
    auto prims = PrimitiveTable::defaults();
    CHECK(typecheckExpr({}, parseExpr("1+1"), prims).kind == Sort::Int);
    CHECK(typecheckExpr({}, parseExpr("true"), prims).kind == Sort::Bool);
    CHECK(typecheckExpr({{"x", Sort::integer()}}, parseExpr("x"), prims).kind == Sort::Int);
    CHECK_THROWS_AS(typecheckExpr({}, parseExpr("1 + true"), prims), Error);
}

TEST_CASE("typecheckProcess") {
    CHECK(typecheckProcess({}, {}, mkInact()).delta.empty());
    auto r = typecheckProcess({}, {}, parseProcess("new s.( rcv ~s(x).0 | snd s<1+1>.0 )"));
    CHECK(r.delta.empty());
    CHECK(rejection("if (y > 0) then snd s<y+1>.0 else snd s<false>.0") == "BranchTypingMismatch");
    CHECK(rejection("snd s<1>.0 | snd s<2>.0") == "NonDisjointParallel");
    CHECK(rejection("new s. (snd s<1>.0 | rcv ~s(x). rcv ~s(y).0)") == "UnbalancedRestriction");

    auto bs = typecheckProcess({}, {}, tsupport::corpusTerm("buyer_seller.rsp"));
    CHECK(bs.delta.empty());
    REQUIRE(bs.inferred.count("a"));
    CHECK(printSort(bs.inferred.at("a")) == "<?str.!int.&{lok: ?str.!str.end, lquit: end}>");
}

TEST_CASE("commit typing") {
    auto r = typecheckProcess({}, {}, parseProcess("commit s.0"));
    REQUIRE(r.delta.count("s"));
    CHECK(printType(r.delta.at("s")) == "commit");
    CHECK(rejection("commit s. snd s<1>.0") == "SessionUsedAfterCommit");
    CHECK(typecheckProcess({}, {}, parseProcess("new s.(commit ~s.0 | commit s.0)")).delta.empty());
    TypecheckOptions plain;
    plain.allowCommit = false;
    CHECK(rejection("commit s.0", plain) == "CommitNotEnabled");
}

TEST_CASE("isSimple") {
    CHECK(isSimple(parseProcess(tsupport::kBuyer + " | " + tsupport::kSeller)).simple);
    auto prims = tsupport::corpusPrims();
    for (auto f : {"buyer_seller.rsp", "providers.rsp", "providers_commit.rsp"}) {
        CAPTURE(f);
        CHECK(isSimple(tsupport::corpusTerm(f), &prims).simple);
    }
    auto sub = isSimple(tsupport::corpusTerm("subordinate.rsp"));
    CHECK_FALSE(sub.simple);
    REQUIRE(sub.diagnosis);
    auto del = isSimple(tsupport::corpusTerm("delegation.rsp"));
    CHECK_FALSE(del.simple);
    REQUIRE(del.diagnosis);
    CHECK(del.diagnosis->rule == "DelegationUsed");
    CHECK_FALSE(isSimple(parseProcess("snd ~s<r>.0 | rcv r(x).0")).simple);
    CHECK(syntacticSimpleMulti(tsupport::corpusTerm("two_buyers_seller.rsp")).simple);
}

TEST_CASE("simple processes type check") {
    tsupport::TermGen gen(23);
    int simple = 0;
    for (int i = 0; i < 400; ++i) {
        P p = gen.process(4);
        if (isMultiparty(p)) continue;
        auto v = isSimple(p);
        if (!v.simple) continue;
        ++simple;
        CAPTURE(printProcess(p));
        CHECK_NOTHROW(typecheckProcess({}, {}, p));
    }
    CHECK(simple > 0);
}

TEST_CASE("subject reduction on the corpus") {
    auto prims = tsupport::corpusPrims();
    TypecheckOptions opts;
    opts.prims = &prims;
    for (auto f : {"buyer_seller.rsp", "providers.rsp", "providers_commit.rsp", "two_sessions.rsp"}) {
        CAPTURE(f);
        std::vector<P> frontier{tsupport::corpusTerm(f)};
        for (int depth = 0; depth < 8 && !frontier.empty(); ++depth) {
            std::vector<P> next;
            for (auto &p : frontier) {
                REQUIRE_NOTHROW(typecheckProcess({}, {}, p, opts));
                for (auto &s : hostSuccessors(p, prims)) {
                    CAPTURE(printProcess(s.result));
                    CHECK_NOTHROW(typecheckProcess({}, {}, s.result, opts));
                    next.push_back(s.result);
                }
            }
            if (next.size() > 64) next.resize(64);
            frontier = std::move(next);
        }
    }
}
