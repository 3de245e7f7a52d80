#include <filesystem>

#include "doctest.h"

#include "revses/syntax.hpp"
#include "support.hpp"

using namespace revses;

TEST_CASE("parseProcess basics") {
    auto p = parseProcess("snd ~s<1>.0 | rcv s(x).0");
    REQUIRE(p->kind == PK::Par);
    CHECK(p->p->kind == PK::Send);
    CHECK(p->p->k.ep == Endpoint{"s", Pol::Dual, 0});
    CHECK(p->q->kind == PK::Receive);
    CHECK(p->q->k.ep == Endpoint{"s", Pol::Plain, 0});
    CHECK(p->q->x == "x");

    auto buyer = parseProcess(tsupport::kBuyer);
    CHECK(buyer->kind == PK::Request);
    CHECK(buyer->u.name == "a");
    CHECK(buyer->x == "x");

    CHECK(printProcess(mkInact()) == "0");
    CHECK(printProcess(mkPar(mkInact(), mkInact())) == "0 | 0");
}

TEST_CASE("parse errors") {
    auto code = [](const std::string &src) {
        try {
            parseProcess(src);
        } catch (const Error &e) {
            return e.code();
        }
        return std::string();
    };
    CHECK(code("bra k { l: 0, l: 0 }") == "DuplicateLabel");
    CHECK(code("") == "ParseError");
    CHECK(code("snd s<1>") == "ParseError");
    try {
        parseProcess("snd s<1>. |");
        FAIL("expected a parse error");
    } catch (const ParseError &e) {
        CHECK(e.span().line == 1);
        CHECK(e.span().byteStart <= e.span().byteEnd);
        CHECK_FALSE(e.expected().empty());
    }
}

TEST_CASE("comments and whitespace") {
    auto a = parseProcess("-- a comment\nsnd s<1>.   -- trailing\n 0");
    CHECK(procEqual(a, parseProcess("snd s<1>.0")));
}

TEST_CASE("multiparty syntax") {
    auto p = parseProcess("mreq a[3](x). snd x[2]<1>. 0 | macc a[2](y). rcv y[1](v). 0");
    REQUIRE(p->kind == PK::Par);
    CHECK(p->p->kind == PK::MRequest);
    CHECK(p->p->role == 3);
    CHECK(p->p->p->kind == PK::MSend);
    CHECK(p->p->p->role == 2);
    auto q = parseProcess("sel s[1][2] l. 0");
    CHECK(q->kind == PK::MSelect);
    CHECK(q->k.ep == Endpoint{"s", Pol::Role, 1});
}

TEST_CASE("parseType") {
    CHECK(printType(parseType("!int.end")) == "!int.end");
    auto sh = parseSort("<?int.!int.end>");
    CHECK(sh.kind == Sort::Chan);
    CHECK(printSort(sh) == "<?int.!int.end>");
    CHECK(parseSort("bool").kind == Sort::Bool);
    try {
        parseType("rec t.t");
        FAIL("expected NonContractiveType");
    } catch (const Error &e) {
        CHECK(e.code() == "NonContractiveType");
    }
    CHECK(printType(parseType("&{l1: ?bool.end, l2: commit}")) == "&{l1: ?bool.end, l2: commit}");
}

TEST_CASE("round trip of generated processes") {
    tsupport::TermGen gen(3);
    for (int i = 0; i < 500; ++i) {
        P p = gen.process(6);
        auto text = printProcess(p);
        CAPTURE(text);
        P q = parseProcess(text);
        CHECK(procEqual(p, q));
        CHECK(printProcess(q) == text);
    }
}

TEST_CASE("round trip of generated types") {
    tsupport::TermGen gen(5);
    for (int i = 0; i < 300; ++i) {
        auto t = gen.type(4);
        auto text = printType(t);
        CAPTURE(text);
        CHECK(printType(parseType(text)) == text);
    }
}

TEST_CASE("corpus files parse and round trip") {
    size_t n = 0;
    for (auto &entry : std::filesystem::directory_iterator(REVSES_CORPUS_DIR)) {
        if (entry.path().extension() != ".rsp") continue;
        ++n;
        CAPTURE(entry.path().string());
        P p = parseProcess(tsupport::readFile(entry.path().string()));
        auto once = printProcess(p);
        P q = parseProcess(once);
        CHECK(procEqual(p, q));
        CHECK(printProcess(q) == once);
    }
    CHECK(n >= 8);
}
