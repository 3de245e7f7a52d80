#include "revses/typecheck.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "revses/syntax.hpp"

namespace revses {

// ============================================================================
// Duality, unfolding, equality
// ============================================================================

namespace {

SType substTVar(const SType &t, const std::string &v, const SType &r) {
    switch (t->kind) {
    case TK::Var: return t->var == v ? r : t;
    case TK::Rec:
        if (t->var == v) return t;
        return tRec(t->var, substTVar(t->b, v, r));
    case TK::Out: return tOut(t->sort, substTVar(t->b, v, r));
    case TK::In: return tIn(t->sort, substTVar(t->b, v, r));
    case TK::Thr: return tThr(substTVar(t->a, v, r), substTVar(t->b, v, r));
    case TK::Cat: return tCat(substTVar(t->a, v, r), substTVar(t->b, v, r));
    case TK::Sel:
    case TK::Bra: {
        TArms as;
        for (auto &a : t->arms) as.emplace_back(a.first, substTVar(a.second, v, r));
        return t->kind == TK::Sel ? tSel(as) : tBra(as);
    }
    default: return t;
    }
}

bool occursTVar(const SType &t, const std::string &v) {
    switch (t->kind) {
    case TK::Var: return t->var == v;
    case TK::Rec: return t->var != v && occursTVar(t->b, v);
    case TK::Out: case TK::In: return occursTVar(t->b, v);
    case TK::Thr: case TK::Cat: return occursTVar(t->a, v) || occursTVar(t->b, v);
    case TK::Sel: case TK::Bra:
        for (auto &a : t->arms)
            if (occursTVar(a.second, v)) return true;
        return false;
    default: return false;
    }
}

}  // namespace

SType unfoldType(const SType &rec) {
    if (rec->kind != TK::Rec) return rec;
    return substTVar(rec->b, rec->var, rec);
}

SType dualType(const SType &t) {
    switch (t->kind) {
    case TK::Out: return tIn(t->sort, dualType(t->b));
    case TK::In: return tOut(t->sort, dualType(t->b));
    case TK::Thr: return tCat(t->a, dualType(t->b));
    case TK::Cat: return tThr(t->a, dualType(t->b));
    case TK::Sel:
    case TK::Bra: {
        TArms as;
        for (auto &a : t->arms) as.emplace_back(a.first, dualType(a.second));
        return t->kind == TK::Sel ? tBra(as) : tSel(as);
    }
    case TK::Rec: return tRec(t->var, dualType(t->b));
    default: return t;  // end, commit (self-dual), variables
    }
}

namespace {

// Unification state for sort and type metavariables.
struct Subst {
    std::vector<std::optional<Sort>> sorts;
    std::vector<SType> types;

    Sort derefSort(Sort s) const {
        while (s.kind == Sort::Meta && sorts[s.meta]) s = *sorts[s.meta];
        return s;
    }
    SType derefType(SType t) const {
        while (t->kind == TK::Meta && types[t->meta]) t = types[t->meta];
        return t;
    }
    Sort freshSort() {
        sorts.emplace_back();
        return Sort::metaVar(static_cast<int>(sorts.size() - 1));
    }
    SType freshType() {
        types.emplace_back();
        return tMeta(static_cast<int>(types.size() - 1));
    }

    SType zonk(const SType &t0) const {
        SType t = derefType(t0);
        switch (t->kind) {
        case TK::Out: return tOut(zonkSort(t->sort), zonk(t->b));
        case TK::In: return tIn(zonkSort(t->sort), zonk(t->b));
        case TK::Thr: return tThr(zonk(t->a), zonk(t->b));
        case TK::Cat: return tCat(zonk(t->a), zonk(t->b));
        case TK::Sel:
        case TK::Bra: {
            TArms as;
            for (auto &a : t->arms) as.emplace_back(a.first, zonk(a.second));
            return t->kind == TK::Sel ? tSel(as) : tBra(as);
        }
        case TK::Rec: return tRec(t->var, zonk(t->b));
        default: return t;
        }
    }
    Sort zonkSort(const Sort &s0) const {
        Sort s = derefSort(s0);
        if (s.kind == Sort::Chan) return Sort::chan(zonk(s.t));
        return s;
    }

    // mode Sub: `a` is the declared type, `b` a synthesized one whose
    // selections may offer fewer labels.
    enum class Mode { Eq, Sub };

    bool unify(const SType &a, const SType &b, Mode mode = Mode::Eq) {
        std::set<std::pair<const STypeNode *, const STypeNode *>> seen;
        return go(a, b, mode, seen);
    }

    bool unifySort(const Sort &a0, const Sort &b0) {
        Sort a = derefSort(a0), b = derefSort(b0);
        if (a.kind == Sort::Meta && b.kind == Sort::Meta && a.meta == b.meta) return true;
        if (a.kind == Sort::Meta) {
            sorts[a.meta] = b;
            return true;
        }
        if (b.kind == Sort::Meta) {
            sorts[b.meta] = a;
            return true;
        }
        if (a.kind != b.kind) return false;
        if (a.kind == Sort::Chan) return unify(a.t, b.t);
        return true;
    }

    // a and b are the two ends of one session. Synthesized selections only
    // list the labels actually chosen, so they may be narrower than the
    // branching they face.
    bool compatible(const SType &a, const SType &b) {
        std::set<std::pair<const STypeNode *, const STypeNode *>> seen;
        return compat(a, b, seen);
    }

private:
    bool compat(SType a, SType b, std::set<std::pair<const STypeNode *, const STypeNode *>> &seen) {
        a = derefType(a);
        b = derefType(b);
        if (a->kind == TK::Meta) return unify(a, dualType(zonk(b)));
        if (b->kind == TK::Meta) return unify(b, dualType(zonk(a)));
        if (a->kind == TK::Rec || b->kind == TK::Rec) {
            if (!seen.insert({a.get(), b.get()}).second) return true;
            return compat(unfoldType(a), unfoldType(b), seen);
        }
        auto pair = [&](TK x, TK y) { return (a->kind == x && b->kind == y) || (a->kind == y && b->kind == x); };
        if (a->kind == b->kind && (a->kind == TK::End || a->kind == TK::Commit)) return true;
        if (a->kind == TK::Var && b->kind == TK::Var) return a->var == b->var;
        if (pair(TK::Out, TK::In)) return unifySort(a->sort, b->sort) && compat(a->b, b->b, seen);
        if (pair(TK::Thr, TK::Cat)) return unify(a->a, b->a) && compat(a->b, b->b, seen);
        if (pair(TK::Sel, TK::Bra)) {
            const SType &sel = a->kind == TK::Sel ? a : b;
            const SType &bra = a->kind == TK::Sel ? b : a;
            for (auto &s : sel->arms) {
                auto it = std::find_if(bra->arms.begin(), bra->arms.end(),
                                       [&](auto &x) { return x.first == s.first; });
                if (it == bra->arms.end() || !compat(s.second, it->second, seen)) return false;
            }
            return true;
        }
        return false;
    }

    bool go(SType a, SType b, Mode mode, std::set<std::pair<const STypeNode *, const STypeNode *>> &seen) {
        a = derefType(a);
        b = derefType(b);
        if (a == b) return true;
        if (a->kind == TK::Meta) {
            types[a->meta] = b;
            return true;
        }
        if (b->kind == TK::Meta) {
            types[b->meta] = a;
            return true;
        }
        if (a->kind == TK::Rec || b->kind == TK::Rec) {
            if (!seen.insert({a.get(), b.get()}).second) return true;
            return go(unfoldType(a), unfoldType(b), mode, seen);
        }
        if (a->kind != b->kind) return false;
        switch (a->kind) {
        case TK::End:
        case TK::Commit: return true;
        case TK::Var: return a->var == b->var;
        case TK::Out:
        case TK::In: return unifySort(a->sort, b->sort) && go(a->b, b->b, mode, seen);
        case TK::Thr:
        case TK::Cat: return go(a->a, b->a, Mode::Eq, seen) && go(a->b, b->b, mode, seen);
        case TK::Sel:
        case TK::Bra: {
            bool subset = mode == Mode::Sub && a->kind == TK::Sel;
            if (!subset && a->arms.size() != b->arms.size()) return false;
            for (auto &bb : b->arms) {
                auto it = std::find_if(a->arms.begin(), a->arms.end(),
                                       [&](auto &x) { return x.first == bb.first; });
                if (it == a->arms.end()) return false;
                if (!go(it->second, bb.second, mode, seen)) return false;
            }
            return true;
        }
        default: return false;
        }
    }
};

}  // namespace

bool typeEqual(const SType &a, const SType &b) {
    Subst s;
    return s.unify(a, b);
}

std::string printTyping(const Typing &d) {
    if (d.empty()) return "{}";
    std::string out = "{";
    bool first = true;
    for (auto &kv : d) {
        out += (first ? "" : ", ") + kv.first + ": " + printType(kv.second);
        first = false;
    }
    return out + "}";
}

// ============================================================================
// Checker
// ============================================================================

namespace {

std::string chanKey(const Chan &k) { return k.isVar ? k.var : showEndpoint(k.ep); }

void freeSubjectKeys(const P &p, std::set<std::string> bound, std::set<std::string> &out) {
    switch (p->kind) {
    case PK::Send: case PK::Receive: case PK::Select: case PK::Branch: case PK::Commit:
    case PK::MSend: case PK::MReceive: case PK::MSelect: case PK::MBranch:
        if (!p->k.isVar || !bound.count(p->k.var)) out.insert(chanKey(p->k));
        break;
    default:
        break;
    }
    switch (p->kind) {
    case PK::Request: case PK::Accept: case PK::Receive:
    case PK::MRequest: case PK::MAccept: case PK::MReceive:
        bound.insert(p->x);
        break;
    default:
        break;
    }
    if (p->p) freeSubjectKeys(p->p, bound, out);
    if (p->q) freeSubjectKeys(p->q, bound, out);
    for (auto &a : p->arms) freeSubjectKeys(a.second, bound, out);
}

bool usedAsSubject(const P &p, const std::string &x) {
    std::set<std::string> keys;
    freeSubjectKeys(p, {}, keys);
    return keys.count(x) > 0;
}

struct Syn {
    Typing delta;
    bool open = true;                 // any key may be added with type end
    std::set<std::string> forbidden;  // when !open: keys that may not be added

    bool allows(const std::string &k) const { return open || !forbidden.count(k); }
};

struct Env {
    Sorting gamma;
    std::set<std::string> sessVars;
};

class Checker {
public:
    Checker(const PrimitiveTable &prims, TypecheckOptions opts) : prims_(prims), opts_(opts) {}

    bool implicitFree_ = false;

    TypecheckResult run(const Basis &theta, const Sorting &gamma, const P &p) {
        theta_ = theta;
        Env env;
        env.gamma = gamma;
        declared_ = gamma;
        Syn s = check(p, env);
        std::set<std::string> names;
        for (auto &kv : sharedUses_) names.insert(kv.first);
        for (auto &kv : sharedValues_) names.insert(kv.first);
        for (auto &n : names) resolveShared(n, env, p->span, true);
        TypecheckResult r;
        for (auto &kv : s.delta) r.delta[kv.first] = sub_.zonk(kv.second);
        for (auto &kv : inferred_) r.inferred[kv.first] = sub_.zonkSort(kv.second);
        for (auto &kv : freeVars_) r.inferred[kv.first] = sub_.zonkSort(kv.second);
        return r;
    }

private:
    const PrimitiveTable &prims_;
    TypecheckOptions opts_;
    Basis theta_;
    Sorting declared_;
    Subst sub_;
    int tvCounter_ = 0;

    struct SharedUse {
        bool req;
        SType t;
        Span span;
    };
    std::map<std::string, std::vector<SharedUse>> sharedUses_;
    std::map<std::string, std::vector<Sort>> sharedValues_;
    std::vector<std::pair<std::string, std::set<std::string>>> activeRecs_;
    Sorting inferred_;
    Sorting freeVars_;

    [[noreturn]] void fail(const std::string &rule, const Span &span, const std::string &msg) const {
        throw TypeError(Diagnostic{rule, span, msg});
    }

    // ---- expressions -------------------------------------------------------

    Sort sortOfPrim(const std::string &s) {
        if (s == "bool") return Sort::boolean();
        if (s == "int") return Sort::integer();
        if (s == "str") return Sort::str();
        return sub_.freshSort();
    }

public:
    Sort expr(const Env &env, const Expr &e, const Span &span) {
        switch (e->kind) {
        case EK::Val:
            switch (e->val.kind) {
            case VK::Bool: return Sort::boolean();
            case VK::Int: return Sort::integer();
            case VK::Str: return Sort::str();
            case VK::SharedCh: {
                auto it = env.gamma.find(e->val.s);
                if (it != env.gamma.end()) return it->second;
                Sort m = sub_.freshSort();
                sharedValues_[e->val.s].push_back(m);
                return m;
            }
            case VK::Ep:
                fail("SortMismatch", span, "session endpoint " + showEndpoint(e->val.ep) +
                                               " used as a value");
            }
            break;
        case EK::Var: {
            auto it = env.gamma.find(e->name);
            if (it == env.gamma.end()) {
                if (env.sessVars.count(e->name))
                    fail("SortMismatch", span, "session variable '" + e->name + "' used as a value");
                // free variables of a process get an inferred sort
                if (implicitFree_) {
                    auto f = freeVars_.find(e->name);
                    if (f == freeVars_.end()) f = freeVars_.emplace(e->name, sub_.freshSort()).first;
                    return f->second;
                }
                fail("UnknownIdentifier", span, "unknown identifier '" + e->name + "'");
            }
            return it->second;
        }
        case EK::Op: {
            const Primitive *p = prims_.find(e->name);
            if (!p) fail("UnknownPrimitive", span, "unknown primitive '" + e->name + "'");
            if (p->arity != static_cast<int>(e->args.size()))
                fail("PrimitiveArityMismatch", span, e->name + " expects " + std::to_string(p->arity) +
                                                         " arguments");
            Sort any = sub_.freshSort();
            for (size_t i = 0; i < e->args.size(); ++i) {
                Sort got = expr(env, e->args[i], span);
                Sort want = p->argSorts[i] == "any" ? any : sortOfPrim(p->argSorts[i]);
                if (!sub_.unifySort(want, got))
                    fail("SortMismatch", span, "argument " + std::to_string(i + 1) + " of " + e->name +
                                                   ": expected " + printSort(sub_.zonkSort(want)) + ", got " +
                                                   printSort(sub_.zonkSort(got)));
            }
            return p->retSort == "any" ? any : sortOfPrim(p->retSort);
        }
        }
        fail("SortMismatch", span, "ill-formed expression");
    }

private:
    // ---- helpers -----------------------------------------------------------

    SType take(Syn &s, const std::string &k, const Span &span) {
        auto it = s.delta.find(k);
        if (it != s.delta.end()) {
            SType t = it->second;
            s.delta.erase(it);
            return t;
        }
        if (s.allows(k)) return tEnd();
        fail("RecursionTypingMismatch", span,
             "the typing of the recursion variable cannot be extended with " + k + ":end");
    }

    void dropKey(Syn &s, const std::string &k) {
        s.delta.erase(k);
        s.forbidden.erase(k);
    }

    void guardSingle(const Syn &s, const Span &span, const std::string &rule) {
        if (!opts_.simple || s.delta.empty()) return;
        std::string keys;
        for (auto &kv : s.delta) keys += (keys.empty() ? "" : ", ") + kv.first;
        fail("NotSimple", span, "rule " + rule + " needs a typing with more than one session (" + keys + ")");
    }

    void bindVar(const std::string &x) {
        for (auto &r : activeRecs_) r.second.insert(x);
    }

    bool isEnd(const SType &t) {
        Subst::Mode m = Subst::Mode::Eq;
        return sub_.unify(tEnd(), t, m);
    }

    std::optional<SType> join(const SType &a0, const SType &b0) {
        Subst saved = sub_;
        if (sub_.unify(a0, b0)) return a0;
        sub_ = saved;
        SType a = sub_.derefType(a0), b = sub_.derefType(b0);
        if (a->kind != b->kind) return std::nullopt;
        switch (a->kind) {
        case TK::Sel: {
            TArms as = a->arms;
            for (auto &bb : b->arms) {
                auto it = std::find_if(as.begin(), as.end(), [&](auto &x) { return x.first == bb.first; });
                if (it == as.end()) {
                    as.push_back(bb);
                } else {
                    auto j = join(it->second, bb.second);
                    if (!j) return std::nullopt;
                    it->second = *j;
                }
            }
            return tSel(as);
        }
        case TK::Bra: {
            if (a->arms.size() != b->arms.size()) return std::nullopt;
            TArms as;
            for (auto &aa : a->arms) {
                auto it = std::find_if(b->arms.begin(), b->arms.end(),
                                       [&](auto &x) { return x.first == aa.first; });
                if (it == b->arms.end()) return std::nullopt;
                auto j = join(aa.second, it->second);
                if (!j) return std::nullopt;
                as.emplace_back(aa.first, *j);
            }
            return tBra(as);
        }
        case TK::Out:
        case TK::In: {
            if (!sub_.unifySort(a->sort, b->sort)) return std::nullopt;
            auto j = join(a->b, b->b);
            if (!j) return std::nullopt;
            return a->kind == TK::Out ? tOut(a->sort, *j) : tIn(a->sort, *j);
        }
        case TK::Thr:
        case TK::Cat: {
            if (!sub_.unify(a->a, b->a)) return std::nullopt;
            auto j = join(a->b, b->b);
            if (!j) return std::nullopt;
            return a->kind == TK::Thr ? tThr(a->a, *j) : tCat(a->a, *j);
        }
        default:
            return std::nullopt;
        }
    }

    // Merge the typings of two alternatives (If branches, Br arms minus k).
    Syn mergeAlternatives(Syn a, Syn b, const Span &span, const std::string &what) {
        Syn out;
        std::set<std::string> keys;
        for (auto &kv : a.delta) keys.insert(kv.first);
        for (auto &kv : b.delta) keys.insert(kv.first);
        for (auto &k : keys) {
            auto ia = a.delta.find(k), ib = b.delta.find(k);
            if (ia != a.delta.end() && ib != b.delta.end()) {
                auto j = join(ia->second, ib->second);
                if (!j)
                    fail("BranchTypingMismatch", span,
                         what + " disagree on " + k + ": " + printType(sub_.zonk(ia->second)) + " vs " +
                             printType(sub_.zonk(ib->second)));
                out.delta[k] = *j;
                continue;
            }
            const Syn &has = ia != a.delta.end() ? a : b;
            const Syn &lacks = ia != a.delta.end() ? b : a;
            const SType &t = has.delta.at(k);
            if (!lacks.allows(k) || !isEnd(t))
                fail("BranchTypingMismatch", span,
                     what + " disagree on " + k + ": " + printType(sub_.zonk(t)) + " vs nothing");
            out.delta[k] = tEnd();
        }
        out.open = a.open && b.open;
        if (!a.open) out.forbidden.insert(a.forbidden.begin(), a.forbidden.end());
        if (!b.open) out.forbidden.insert(b.forbidden.begin(), b.forbidden.end());
        return out;
    }

    void resolveShared(const std::string &name, const Env &env, const Span &span, bool topLevel) {
        auto uses = sharedUses_[name];
        auto values = sharedValues_[name];
        sharedUses_.erase(name);
        sharedValues_.erase(name);
        auto dit = env.gamma.find(name);
        std::optional<Sort> declared;
        if (dit != env.gamma.end()) declared = sub_.derefSort(dit->second);

        SType alpha;
        if (declared && declared->kind == Sort::Chan) {
            alpha = declared->t;
        } else if (declared && declared->kind != Sort::Meta) {
            if (!uses.empty())
                fail("SortMismatch", uses.front().span, "'" + name + "' has sort " + printSort(*declared) +
                                                            ", not a shared channel sort");
            return;
        } else {
            for (auto &u : uses) {
                SType cand = u.req ? dualType(sub_.zonk(u.t)) : u.t;
                if (!alpha) {
                    alpha = cand;
                    continue;
                }
                auto j = join(alpha, cand);
                if (!j)
                    fail(u.req ? "Req" : "Acc", u.span,
                         "session types at shared channel '" + name + "' are incompatible: " +
                             printType(sub_.zonk(alpha)) + " vs " + printType(sub_.zonk(cand)));
                alpha = *j;
            }
            if (!alpha) alpha = sub_.freshType();
            if (declared && !sub_.unifySort(*declared, Sort::chan(alpha)))
                fail("SortMismatch", span, "'" + name + "' is not a shared channel");
        }
        for (auto &u : uses) {
            SType want = u.req ? dualType(sub_.zonk(alpha)) : alpha;
            if (!sub_.unify(want, u.t, Subst::Mode::Sub))
                fail(u.req ? "Req" : "Acc", u.span,
                     "session on '" + name + "' used as " + printType(sub_.zonk(u.t)) + " but '" + name +
                         "' carries " + printType(sub_.zonk(alpha)));
        }
        for (auto &v : values)
            if (!sub_.unifySort(v, Sort::chan(alpha)))
                fail("SortMismatch", span, "'" + name + "' used with incompatible sorts");
        if (topLevel && !declared_.count(name)) inferred_[name] = Sort::chan(alpha);
    }

    // ---- processes ---------------------------------------------------------

    Syn check(const P &p, Env &env) {
        switch (p->kind) {
        case PK::Inact:
            return Syn{};

        case PK::RecVar: {
            auto it = theta_.find(p->x);
            if (it == theta_.end())
                fail("RecursionTypingMismatch", p->span, "unbound process variable '" + p->x + "'");
            Syn s;
            s.delta = it->second;
            s.open = false;
            for (auto r = activeRecs_.rbegin(); r != activeRecs_.rend(); ++r)
                if (r->first == p->x) {
                    s.forbidden = r->second;
                    break;
                }
            return s;
        }

        case PK::Rec: {
            std::set<std::string> keys;
            freeSubjectKeys(p->p, {}, keys);
            Typing xTyping;
            std::map<std::string, std::string> tv;
            for (auto &k : keys) {
                tv[k] = "t" + std::to_string(++tvCounter_);
                xTyping[k] = tVar(tv[k]);
            }
            auto savedTheta = theta_;
            theta_[p->x] = xTyping;
            activeRecs_.emplace_back(p->x, std::set<std::string>{});
            Syn b = check(p->p, env);
            activeRecs_.pop_back();
            theta_ = savedTheta;
            for (auto &k : keys) {
                auto it = b.delta.find(k);
                if (it == b.delta.end()) continue;
                SType t = sub_.zonk(it->second);
                if (t->kind == TK::Var && t->var == tv[k])
                    fail("RecursionTypingMismatch", p->span, "recursion " + p->x + " never acts on " + k);
                SType r = occursTVar(t, tv[k]) ? tRec(tv[k], t) : t;
                try {
                    checkContractive(r);
                } catch (const Error &e) {
                    fail("RecursionTypingMismatch", p->span, e.detail());
                }
                it->second = r;
            }
            return b;
        }

        case PK::Request:
        case PK::Accept: {
            bindVar(p->x);
            Env inner = env;
            inner.sessVars.insert(p->x);
            inner.gamma.erase(p->x);
            Syn b = check(p->p, inner);
            SType tx = take(b, p->x, p->span);
            dropKey(b, p->x);
            const char *rule = p->kind == PK::Request ? "Req" : "Acc";
            guardSingle(b, p->span, rule);
            bool req = p->kind == PK::Request;
            auto git = env.gamma.find(p->u.name);
            if (git != env.gamma.end() && sub_.derefSort(git->second).kind == Sort::Chan) {
                SType alpha = sub_.derefSort(git->second).t;
                SType want = req ? dualType(sub_.zonk(alpha)) : alpha;
                if (!sub_.unify(want, tx, Subst::Mode::Sub))
                    fail(rule, p->span, "session on '" + p->u.name + "' used as " + printType(sub_.zonk(tx)) +
                                            " but expected " + printType(sub_.zonk(want)));
            } else {
                sharedUses_[p->u.name].push_back(SharedUse{req, tx, p->span});
            }
            return b;
        }

        case PK::Send: {
            Syn b = check(p->p, env);
            std::string k = chanKey(p->k);
            SType beta = take(b, k, p->span);
            std::optional<std::string> delegated;
            if (p->e->kind == EK::Val && p->e->val.kind == VK::Ep) delegated = showEndpoint(p->e->val.ep);
            if (p->e->kind == EK::Var && env.sessVars.count(p->e->name)) delegated = p->e->name;
            if (delegated) {
                if (opts_.simple) fail("DelegationUsed", p->span, "rule Thr: " + *delegated + " is sent on " + k);
                if (b.delta.count(*delegated))
                    fail("NonDisjointParallel", p->span, *delegated + " is used after being delegated");
                SType alpha = sub_.freshType();
                guardSingle(b, p->span, "Thr");
                b.delta[k] = tThr(alpha, beta);
                b.delta[*delegated] = alpha;
                return b;
            }
            Sort s = expr(env, p->e, p->span);
            guardSingle(b, p->span, "Send");
            if (b.delta.count(k)) fail("NonDisjointParallel", p->span, k + " appears twice");
            b.delta[k] = tOut(s, beta);
            return b;
        }

        case PK::Receive: {
            bindVar(p->x);
            Env inner = env;
            bool session = usedAsSubject(p->p, p->x);
            Sort sigma = sub_.freshSort();
            if (session) {
                inner.sessVars.insert(p->x);
                inner.gamma.erase(p->x);
            } else {
                inner.sessVars.erase(p->x);
                inner.gamma[p->x] = sigma;
            }
            Syn b = check(p->p, inner);
            std::string k = chanKey(p->k);
            SType beta = take(b, k, p->span);
            if (session) {
                if (opts_.simple) fail("DelegationUsed", p->span, "rule Cat: a session is received on " + k);
                SType alpha = take(b, p->x, p->span);
                dropKey(b, p->x);
                guardSingle(b, p->span, "Cat");
                b.delta[k] = tCat(alpha, beta);
                return b;
            }
            if (sharedUses_.count(p->x) || sharedValues_.count(p->x)) resolveShared(p->x, inner, p->span, false);
            dropKey(b, p->x);
            guardSingle(b, p->span, "Rcv");
            b.delta[k] = tIn(sigma, beta);
            return b;
        }

        case PK::Select: {
            Syn b = check(p->p, env);
            std::string k = chanKey(p->k);
            SType beta = take(b, k, p->span);
            guardSingle(b, p->span, "Sel");
            b.delta[k] = tSel({{p->x, beta}});
            return b;
        }

        case PK::Branch: {
            std::string k = chanKey(p->k);
            std::optional<Syn> acc;
            TArms arms;
            for (auto &a : p->arms) {
                Syn b = check(a.second, env);
                arms.emplace_back(a.first, take(b, k, a.second->span));
                guardSingle(b, p->span, "Br");
                acc = acc ? mergeAlternatives(*acc, b, p->span, "branches of " + k) : b;
            }
            Syn out = acc ? *acc : Syn{};
            out.delta[k] = tBra(arms);
            return out;
        }

        case PK::If: {
            Sort s = expr(env, p->e, p->span);
            if (!sub_.unifySort(Sort::boolean(), s))
                fail("SortMismatch", p->span, "condition has sort " + printSort(sub_.zonkSort(s)));
            Syn a = check(p->p, env);
            Syn b = check(p->q, env);
            return mergeAlternatives(a, b, p->span, "then- and else-branch");
        }

        case PK::Par: {
            Syn a = check(p->p, env);
            Syn b = check(p->q, env);
            for (auto &kv : b.delta) {
                if (a.delta.count(kv.first))
                    fail("NonDisjointParallel", p->span, kv.first + " is used on both sides of |");
                a.delta[kv.first] = kv.second;
            }
            if (a.open || b.open) {
                a.open = true;
                a.forbidden.clear();
            } else {
                std::set<std::string> both;
                for (auto &f : a.forbidden)
                    if (b.forbidden.count(f)) both.insert(f);
                a.forbidden = both;
            }
            if (opts_.simple) {
                // s and ~s are the two ends of one session
                std::set<std::string> sessions;
                for (auto &kv : a.delta) sessions.insert(kv.first[0] == '~' ? kv.first.substr(1) : kv.first);
                if (sessions.size() > 1) guardSingle(a, p->span, "Conc");
            }
            return a;
        }

        case PK::Res: {
            const std::string &c = p->x;
            Env inner = env;
            inner.gamma.erase(c);
            Syn b = check(p->p, inner);
            std::string plain = c, dual = "~" + c;
            bool session = b.delta.count(plain) || b.delta.count(dual);
            if (session) {
                SType a = b.delta.count(plain) ? b.delta[plain] : tEnd();
                SType d = b.delta.count(dual) ? b.delta[dual] : tEnd();
                if (!sub_.compatible(a, d))
                    fail("UnbalancedRestriction", p->span,
                         "rule Res2: " + plain + ":" + printType(sub_.zonk(a)) + " is not dual to " + dual + ":" +
                             printType(sub_.zonk(d)));
                dropKey(b, plain);
                dropKey(b, dual);
            }
            if (sharedUses_.count(c) || sharedValues_.count(c)) resolveShared(c, inner, p->span, false);
            return b;
        }

        case PK::Commit: {
            if (!opts_.allowCommit) fail("CommitNotEnabled", p->span, "commit outside ReSpiC mode");
            Syn b = check(p->p, env);
            std::string k = chanKey(p->k);
            auto it = b.delta.find(k);
            if (it != b.delta.end()) {
                if (!isEnd(it->second))
                    fail("SessionUsedAfterCommit", p->span,
                         k + " is used after commit: " + printType(sub_.zonk(it->second)));
                b.delta.erase(it);
            }
            guardSingle(b, p->span, "Commit");
            b.delta[k] = tCommit();
            return b;
        }

        case PK::MRequest: case PK::MAccept: case PK::MSend: case PK::MReceive:
        case PK::MSelect: case PK::MBranch:
            fail("MultipartyNotTyped", p->span, "multiparty processes are not type checked");
        }
        fail("Internal", p->span, "unknown process form");
    }
};

}  // namespace

Sort typecheckExpr(const Sorting &gamma, const Expr &e, const PrimitiveTable &prims) {
    Checker c(prims, {});
    Env env;
    env.gamma = gamma;
    return c.expr(env, e, Span{});
}

TypecheckResult typecheckProcess(const Basis &theta, const Sorting &gamma, const P &p,
                                 const TypecheckOptions &opts) {
    static const PrimitiveTable defaults = PrimitiveTable::defaults();
    Checker c(opts.prims ? *opts.prims : defaults, opts);
    c.implicitFree_ = true;
    return c.run(theta, gamma, p);
}

// ============================================================================
// Simplicity
// ============================================================================

SimpleVerdict isSimple(const P &p, const PrimitiveTable *prims) {
    if (isMultiparty(p)) return syntacticSimpleMulti(p);
    TypecheckOptions o;
    o.simple = true;
    o.prims = prims;
    try {
        auto r = typecheckProcess({}, {}, p, o);
        if (!r.delta.empty()) {
            return SimpleVerdict{false, Diagnostic{"NotSimple", p->span,
                                                   "free session endpoints " + printTyping(r.delta)}};
        }
        return SimpleVerdict{true, std::nullopt};
    } catch (const TypeError &e) {
        return SimpleVerdict{false, e.diagnostic()};
    }
}

namespace {

bool exprMentionsSession(const Expr &e, const std::set<std::string> &sessVars) {
    if (e->kind == EK::Val) return e->val.kind == VK::Ep;
    if (e->kind == EK::Var) return sessVars.count(e->name) > 0;
    for (auto &a : e->args)
        if (exprMentionsSession(a, sessVars)) return true;
    return false;
}

std::optional<Diagnostic> multiCheck(const P &p, std::set<std::string> sessVars, bool inSession, bool inRec) {
    auto bad = [&](const std::string &msg) { return Diagnostic{"NotSimple", p->span, msg}; };
    switch (p->kind) {
    case PK::Request: case PK::Accept: case PK::MRequest: case PK::MAccept:
        if (inSession) return bad("session initiation under an established session");
        if (inRec) return bad("session initiation inside a recursion body");
        sessVars.insert(p->x);
        return multiCheck(p->p, sessVars, true, inRec);
    case PK::Send: case PK::MSend:
        if (exprMentionsSession(p->e, sessVars)) return bad("endpoint in send payload (delegation)");
        break;
    case PK::Receive: case PK::MReceive:
        if (usedAsSubject(p->p, p->x)) return bad("received value used as a session (delegation)");
        sessVars.erase(p->x);
        break;
    case PK::Rec:
        return multiCheck(p->p, sessVars, inSession, true);
    default:
        break;
    }
    bool session = inSession || p->kind == PK::Send || p->kind == PK::Receive || p->kind == PK::Select ||
                   p->kind == PK::Branch || p->kind == PK::MSend || p->kind == PK::MReceive ||
                   p->kind == PK::MSelect || p->kind == PK::MBranch || p->kind == PK::Commit;
    for (const P &c : {p->p, p->q})
        if (c)
            if (auto d = multiCheck(c, sessVars, session, inRec)) return d;
    for (auto &a : p->arms)
        if (auto d = multiCheck(a.second, sessVars, session, inRec)) return d;
    return std::nullopt;
}

}  // namespace

SimpleVerdict syntacticSimpleMulti(const P &p) {
    auto d = multiCheck(p, {}, false, false);
    return SimpleVerdict{!d.has_value(), d};
}

}  // namespace revses
