#include "revses/stype.hpp"

namespace revses {

namespace {

std::shared_ptr<STypeNode> tnode(TK k) {
    auto n = std::make_shared<STypeNode>();
    n->kind = k;
    return n;
}

}  // namespace

SType tOut(Sort s, SType t) {
    auto n = tnode(TK::Out);
    n->sort = std::move(s);
    n->b = std::move(t);
    return n;
}

SType tIn(Sort s, SType t) {
    auto n = tnode(TK::In);
    n->sort = std::move(s);
    n->b = std::move(t);
    return n;
}

SType tThr(SType a, SType t) {
    auto n = tnode(TK::Thr);
    n->a = std::move(a);
    n->b = std::move(t);
    return n;
}

SType tCat(SType a, SType t) {
    auto n = tnode(TK::Cat);
    n->a = std::move(a);
    n->b = std::move(t);
    return n;
}

SType tSel(TArms arms) {
    auto n = tnode(TK::Sel);
    n->arms = std::move(arms);
    return n;
}

SType tBra(TArms arms) {
    auto n = tnode(TK::Bra);
    n->arms = std::move(arms);
    return n;
}

SType tEnd() {
    static const SType e = tnode(TK::End);
    return e;
}

SType tCommit() {
    static const SType c = tnode(TK::Commit);
    return c;
}

SType tVar(std::string t) {
    auto n = tnode(TK::Var);
    n->var = std::move(t);
    return n;
}

SType tRec(std::string t, SType body) {
    auto n = tnode(TK::Rec);
    n->var = std::move(t);
    n->b = std::move(body);
    return n;
}

SType tMeta(int m) {
    auto n = tnode(TK::Meta);
    n->meta = m;
    return n;
}

}  // namespace revses
