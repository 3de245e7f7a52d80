#include "revses/term.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <map>
#include <optional>
#include <unordered_set>

#include "revses/syntax.hpp"

namespace revses {

// ============================================================================
// Endpoints and values
// ============================================================================

Endpoint dualEndpoint(const Endpoint &e) {
    if (e.pol == Pol::Role)
        throw Error("MultipartyEndpointHasNoDual", showEndpoint(e));
    Endpoint d = e;
    d.pol = e.pol == Pol::Plain ? Pol::Dual : Pol::Plain;
    return d;
}

std::string showEndpoint(const Endpoint &e) {
    switch (e.pol) {
    case Pol::Plain: return e.chan;
    case Pol::Dual: return "~" + e.chan;
    case Pol::Role: return e.chan + "[" + std::to_string(e.role) + "]";
    }
    return e.chan;
}

std::string showValue(const Value &v) {
    switch (v.kind) {
    case VK::Bool: return v.i ? "true" : "false";
    case VK::Int: return std::to_string(v.i);
    case VK::Str: {
        std::string out = "\"";
        for (char c : v.s) {
            if (c == '"' || c == '\\') out += '\\';
            out += c;
        }
        return out + "\"";
    }
    case VK::SharedCh: return v.s;
    case VK::Ep: return showEndpoint(v.ep);
    }
    return "?";
}

Expr mkVal(Value v) {
    auto n = std::make_shared<ExprNode>();
    n->kind = EK::Val;
    n->val = std::move(v);
    return n;
}

Expr mkVar(std::string x) {
    auto n = std::make_shared<ExprNode>();
    n->kind = EK::Var;
    n->name = std::move(x);
    return n;
}

Expr mkOp(std::string op, std::vector<Expr> args) {
    auto n = std::make_shared<ExprNode>();
    n->kind = EK::Op;
    n->name = std::move(op);
    n->args = std::move(args);
    return n;
}

bool exprEqual(const Expr &a, const Expr &b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
    case EK::Val: return a->val == b->val;
    case EK::Var: return a->name == b->name;
    case EK::Op:
        if (a->name != b->name || a->args.size() != b->args.size()) return false;
        for (size_t i = 0; i < a->args.size(); ++i)
            if (!exprEqual(a->args[i], b->args[i])) return false;
        return true;
    }
    return false;
}

// ============================================================================
// Process constructors
// ============================================================================

namespace {

std::shared_ptr<Proc> node(PK k) {
    auto n = std::make_shared<Proc>();
    n->kind = k;
    return n;
}

}  // namespace

P mkInact() {
    static const P zero = node(PK::Inact);
    return zero;
}

P mkRequest(Shared u, std::string x, P p) {
    auto n = node(PK::Request);
    n->u = std::move(u); n->x = std::move(x); n->p = std::move(p);
    return n;
}

P mkAccept(Shared u, std::string x, P p) {
    auto n = node(PK::Accept);
    n->u = std::move(u); n->x = std::move(x); n->p = std::move(p);
    return n;
}

P mkSend(Chan k, Expr e, P p) {
    auto n = node(PK::Send);
    n->k = std::move(k); n->e = std::move(e); n->p = std::move(p);
    return n;
}

P mkReceive(Chan k, std::string x, P p) {
    auto n = node(PK::Receive);
    n->k = std::move(k); n->x = std::move(x); n->p = std::move(p);
    return n;
}

P mkSelect(Chan k, std::string l, P p) {
    auto n = node(PK::Select);
    n->k = std::move(k); n->x = std::move(l); n->p = std::move(p);
    return n;
}

P mkBranch(Chan k, Arms arms) {
    auto n = node(PK::Branch);
    n->k = std::move(k); n->arms = std::move(arms);
    return n;
}

P mkIf(Expr e, P p, P q) {
    auto n = node(PK::If);
    n->e = std::move(e); n->p = std::move(p); n->q = std::move(q);
    return n;
}

P mkPar(P p, P q) {
    auto n = node(PK::Par);
    n->p = std::move(p); n->q = std::move(q);
    return n;
}

P mkRes(std::string c, P p) {
    auto n = node(PK::Res);
    n->x = std::move(c); n->p = std::move(p);
    return n;
}

P mkRecVar(std::string X) {
    auto n = node(PK::RecVar);
    n->x = std::move(X);
    return n;
}

P mkRec(std::string X, P p) {
    auto n = node(PK::Rec);
    n->x = std::move(X); n->p = std::move(p);
    return n;
}

P mkMRequest(Shared u, int nroles, std::string x, P p) {
    auto n = node(PK::MRequest);
    n->u = std::move(u); n->role = nroles; n->x = std::move(x); n->p = std::move(p);
    return n;
}

P mkMAccept(Shared u, int role, std::string x, P p) {
    auto n = node(PK::MAccept);
    n->u = std::move(u); n->role = role; n->x = std::move(x); n->p = std::move(p);
    return n;
}

P mkMSend(Chan k, int to, Expr e, P p) {
    auto n = node(PK::MSend);
    n->k = std::move(k); n->role = to; n->e = std::move(e); n->p = std::move(p);
    return n;
}

P mkMReceive(Chan k, int from, std::string x, P p) {
    auto n = node(PK::MReceive);
    n->k = std::move(k); n->role = from; n->x = std::move(x); n->p = std::move(p);
    return n;
}

P mkMSelect(Chan k, int to, std::string l, P p) {
    auto n = node(PK::MSelect);
    n->k = std::move(k); n->role = to; n->x = std::move(l); n->p = std::move(p);
    return n;
}

P mkMBranch(Chan k, int from, Arms arms) {
    auto n = node(PK::MBranch);
    n->k = std::move(k); n->role = from; n->arms = std::move(arms);
    return n;
}

P mkCommit(Chan k, P p) {
    auto n = node(PK::Commit);
    n->k = std::move(k); n->p = std::move(p);
    return n;
}

P withConts(const P &n, P p, P q) {
    auto c = std::make_shared<Proc>(*n);
    c->p = std::move(p);
    if (q) c->q = std::move(q);
    return c;
}

bool procEqual(const P &a, const P &b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    if (!(a->u == b->u) || !(a->k == b->k) || a->x != b->x || a->role != b->role) return false;
    if ((a->e == nullptr) != (b->e == nullptr)) return false;
    if (a->e && !exprEqual(a->e, b->e)) return false;
    if ((a->p == nullptr) != (b->p == nullptr) || (a->q == nullptr) != (b->q == nullptr)) return false;
    if (a->p && !procEqual(a->p, b->p)) return false;
    if (a->q && !procEqual(a->q, b->q)) return false;
    if (a->arms.size() != b->arms.size()) return false;
    for (size_t i = 0; i < a->arms.size(); ++i) {
        if (a->arms[i].first != b->arms[i].first) return false;
        if (!procEqual(a->arms[i].second, b->arms[i].second)) return false;
    }
    return true;
}

P parOf(const std::vector<P> &ps) {
    if (ps.empty()) return mkInact();
    P acc = ps.front();
    for (size_t i = 1; i < ps.size(); ++i) acc = mkPar(acc, ps[i]);
    return acc;
}

std::vector<P> parComponents(const P &p) {
    std::vector<P> out;
    std::function<void(const P &)> go = [&](const P &q) {
        if (q->kind == PK::Par) {
            go(q->p);
            go(q->q);
        } else if (q->kind != PK::Inact) {
            out.push_back(q);
        }
    };
    go(p);
    return out;
}

namespace {

bool anyNode(const P &p, const std::function<bool(const Proc &)> &pred) {
    if (!p) return false;
    if (pred(*p)) return true;
    if (anyNode(p->p, pred) || anyNode(p->q, pred)) return true;
    for (auto &a : p->arms)
        if (anyNode(a.second, pred)) return true;
    return false;
}

bool binds(PK k) {
    switch (k) {
    case PK::Request: case PK::Accept: case PK::Receive:
    case PK::MRequest: case PK::MAccept: case PK::MReceive:
        return true;
    default:
        return false;
    }
}

}  // namespace

bool isMultiparty(const P &p) {
    return anyNode(p, [](const Proc &n) {
        switch (n.kind) {
        case PK::MRequest: case PK::MAccept: case PK::MSend:
        case PK::MReceive: case PK::MSelect: case PK::MBranch:
            return true;
        default:
            return false;
        }
    });
}

bool hasCommit(const P &p) {
    return anyNode(p, [](const Proc &n) { return n.kind == PK::Commit; });
}

// ============================================================================
// Free names
// ============================================================================

namespace {

void exprFree(const Expr &e, const std::set<std::string> &bound, FreeNames &fn) {
    if (!e) return;
    switch (e->kind) {
    case EK::Val:
        if (e->val.kind == VK::SharedCh) fn.shared.insert(e->val.s);
        if (e->val.kind == VK::Ep) fn.endpoints.insert(e->val.ep);
        break;
    case EK::Var:
        if (!bound.count(e->name)) fn.vars.insert(e->name);
        break;
    case EK::Op:
        for (auto &a : e->args) exprFree(a, bound, fn);
        break;
    }
}

void chanFree(const Chan &k, const std::set<std::string> &bound, FreeNames &fn) {
    if (k.isVar) {
        if (!bound.count(k.var)) fn.vars.insert(k.var);
    } else {
        fn.endpoints.insert(k.ep);
    }
}

void procFree(const P &p, std::set<std::string> bound, const std::set<std::string> &resBound,
              FreeNames &fn) {
    switch (p->kind) {
    case PK::Request: case PK::Accept: case PK::MRequest: case PK::MAccept:
        if (p->u.isVar) {
            if (!bound.count(p->u.name)) fn.vars.insert(p->u.name);
        } else {
            fn.shared.insert(p->u.name);
        }
        break;
    case PK::Send: case PK::Receive: case PK::Select: case PK::Branch:
    case PK::MSend: case PK::MReceive: case PK::MSelect: case PK::MBranch: case PK::Commit:
        chanFree(p->k, bound, fn);
        break;
    default:
        break;
    }
    if (p->e) exprFree(p->e, bound, fn);
    if (p->kind == PK::Res) {
        FreeNames inner;
        procFree(p->p, bound, resBound, inner);
        const std::string &c = p->x;
        for (auto &v : inner.vars) fn.vars.insert(v);
        for (auto &a : inner.shared)
            if (a != c) fn.shared.insert(a);
        for (auto &ep : inner.endpoints)
            if (ep.chan != c) fn.endpoints.insert(ep);
        return;
    }
    if (binds(p->kind)) bound.insert(p->x);
    if (p->p) procFree(p->p, bound, resBound, fn);
    if (p->q) procFree(p->q, bound, resBound, fn);
    for (auto &a : p->arms) procFree(a.second, bound, resBound, fn);
}

}  // namespace

FreeNames freeNames(const P &p) {
    FreeNames fn;
    procFree(p, {}, {}, fn);
    return fn;
}

bool varFree(const P &p, const std::string &x) { return freeNames(p).vars.count(x) > 0; }

std::set<std::string> freeChannels(const P &p) {
    FreeNames fn = freeNames(p);
    std::set<std::string> out(fn.shared.begin(), fn.shared.end());
    for (auto &e : fn.endpoints) out.insert(e.chan);
    return out;
}

std::string freshName(const std::string &prefix) {
    static std::atomic<uint64_t> counter{0};
    return prefix + std::to_string(counter.fetch_add(1));
}

// ============================================================================
// Renaming and substitution
// ============================================================================

namespace {

// Top-down renaming with one map per name space. Binders consult `fresh`
// to decide the replacement name of the bound identifier.
struct Renamer {
    std::map<std::string, std::string> vars, procVars, chans;
    std::function<std::string(PK, const std::string &)> fresh;  // may be empty

    std::string chan(const std::string &c) const {
        auto it = chans.find(c);
        return it == chans.end() ? c : it->second;
    }
    std::string var(const std::string &x) const {
        auto it = vars.find(x);
        return it == vars.end() ? x : it->second;
    }

    Value value(const Value &v) const {
        Value w = v;
        if (v.kind == VK::SharedCh) w.s = chan(v.s);
        if (v.kind == VK::Ep) w.ep.chan = chan(v.ep.chan);
        return w;
    }

    Expr expr(const Expr &e) const {
        if (!e) return e;
        switch (e->kind) {
        case EK::Val: {
            Value w = value(e->val);
            return w == e->val ? e : mkVal(w);
        }
        case EK::Var: {
            auto n = var(e->name);
            return n == e->name ? e : mkVar(n);
        }
        case EK::Op: {
            std::vector<Expr> args;
            for (auto &a : e->args) args.push_back(expr(a));
            return mkOp(e->name, std::move(args));
        }
        }
        return e;
    }

    Chan chanOf(const Chan &k) const {
        Chan c = k;
        if (k.isVar) c.var = var(k.var);
        else c.ep.chan = chan(k.ep.chan);
        return c;
    }

    P proc(const P &p) {
        auto n = std::make_shared<Proc>(*p);
        switch (p->kind) {
        case PK::Request: case PK::Accept: case PK::MRequest: case PK::MAccept:
            if (p->u.isVar) n->u.name = var(p->u.name);
            else n->u.name = chan(p->u.name);
            break;
        case PK::RecVar: {
            auto it = procVars.find(p->x);
            if (it != procVars.end()) n->x = it->second;
            return n;
        }
        default:
            break;
        }
        n->k = chanOf(p->k);
        if (p->e) n->e = expr(p->e);

        if (binds(p->kind)) {
            auto old = vars.find(p->x) == vars.end() ? std::optional<std::string>()
                                                      : std::optional<std::string>(vars[p->x]);
            std::string nn = fresh ? fresh(p->kind, p->x) : p->x;
            if (nn == p->x) vars.erase(p->x);
            else vars[p->x] = nn;
            n->x = nn;
            n->p = proc(p->p);
            if (old) vars[p->x] = *old;
            else vars.erase(p->x);
            return n;
        }
        if (p->kind == PK::Rec) {
            auto it = procVars.find(p->x);
            std::optional<std::string> old;
            if (it != procVars.end()) old = it->second;
            std::string nn = fresh ? fresh(p->kind, p->x) : p->x;
            if (nn == p->x) procVars.erase(p->x);
            else procVars[p->x] = nn;
            n->x = nn;
            n->p = proc(p->p);
            if (old) procVars[p->x] = *old;
            else procVars.erase(p->x);
            return n;
        }
        if (p->kind == PK::Res) {
            auto it = chans.find(p->x);
            std::optional<std::string> old;
            if (it != chans.end()) old = it->second;
            std::string nn = fresh ? fresh(p->kind, p->x) : p->x;
            if (nn == p->x) chans.erase(p->x);
            else chans[p->x] = nn;
            n->x = nn;
            n->p = proc(p->p);
            if (old) chans[p->x] = *old;
            else chans.erase(p->x);
            return n;
        }
        if (p->p) n->p = proc(p->p);
        if (p->q) n->q = proc(p->q);
        for (auto &a : n->arms) a.second = proc(a.second);
        return n;
    }
};

bool valueMentions(const Value &v, const std::string &c) {
    return (v.kind == VK::SharedCh && v.s == c) || (v.kind == VK::Ep && v.ep.chan == c);
}

Chan substChan(const Chan &k, const std::string &x, const Value &v) {
    if (!k.isVar || k.var != x) return k;
    if (v.kind == VK::Ep) return Chan::endpoint(v.ep);
    return k;  // non-endpoint value in subject position is ill-formed; left as is
}

}  // namespace

Expr substituteExpr(const Expr &e, const std::string &x, const Value &v) {
    if (!e) return e;
    switch (e->kind) {
    case EK::Val: return e;
    case EK::Var: return e->name == x ? mkVal(v) : e;
    case EK::Op: {
        std::vector<Expr> args;
        bool changed = false;
        for (auto &a : e->args) {
            args.push_back(substituteExpr(a, x, v));
            changed |= args.back() != a;
        }
        return changed ? mkOp(e->name, std::move(args)) : e;
    }
    }
    return e;
}

P substitute(const P &p, const std::string &x, const Value &v) {
    switch (p->kind) {
    case PK::Inact: case PK::RecVar: return p;
    default: break;
    }
    auto n = std::make_shared<Proc>(*p);
    switch (p->kind) {
    case PK::Request: case PK::Accept: case PK::MRequest: case PK::MAccept:
        if (p->u.isVar && p->u.name == x && v.kind == VK::SharedCh) n->u = Shared{false, v.s};
        break;
    case PK::Send: case PK::Receive: case PK::Select: case PK::Branch:
    case PK::MSend: case PK::MReceive: case PK::MSelect: case PK::MBranch: case PK::Commit:
        n->k = substChan(p->k, x, v);
        break;
    default:
        break;
    }
    if (p->e) n->e = substituteExpr(p->e, x, v);
    if (binds(p->kind) && p->x == x) return n;  // shadowed
    if (p->kind == PK::Res && valueMentions(v, p->x) && varFree(p->p, x)) {
        std::string c2 = freshName(p->x + "_");
        n->x = c2;
        n->p = substitute(renameChannel(p->p, p->x, c2), x, v);
        return n;
    }
    if (p->p) n->p = substitute(p->p, x, v);
    if (p->q) n->q = substitute(p->q, x, v);
    for (auto &a : n->arms) a.second = substitute(a.second, x, v);
    return n;
}

P renameChannel(const P &p, const std::string &from, const std::string &to) {
    Renamer r;
    r.chans[from] = to;
    return r.proc(p);
}

P substituteProcVar(const P &p, const std::string &X, const P &q) {
    switch (p->kind) {
    case PK::RecVar: return p->x == X ? q : p;
    case PK::Rec:
        if (p->x == X) return p;
        break;
    case PK::Inact: return p;
    default: break;
    }
    auto n = std::make_shared<Proc>(*p);
    if (p->p) n->p = substituteProcVar(p->p, X, q);
    if (p->q) n->q = substituteProcVar(p->q, X, q);
    for (auto &a : n->arms) a.second = substituteProcVar(a.second, X, q);
    return n;
}

P unfold(const P &rec) {
    if (rec->kind != PK::Rec) return rec;
    return substituteProcVar(rec->p, rec->x, rec);
}

P headNormal(const P &p, int budget) {
    P cur = p;
    while (cur->kind == PK::Rec && budget-- > 0) cur = unfold(cur);
    return cur;
}

// ============================================================================
// Canonical forms
// ============================================================================

namespace {

constexpr char kTemp = '\x01';

P uniquify(const P &p) {
    uint64_t counter = 0;
    Renamer r;
    r.fresh = [&counter](PK, const std::string &) {
        return std::string(1, kTemp) + std::to_string(counter++);
    };
    return r.proc(p);
}

void hoist(const P &p, std::vector<P> &comps, std::vector<std::string> &res) {
    switch (p->kind) {
    case PK::Par:
        hoist(p->p, comps, res);
        hoist(p->q, comps, res);
        break;
    case PK::Res:
        res.push_back(p->x);
        hoist(p->p, comps, res);
        break;
    case PK::Inact:
        break;
    default:
        comps.push_back(p);
    }
}

void exprChannels(const Expr &e, std::vector<std::string> &out) {
    if (!e) return;
    if (e->kind == EK::Val) {
        if (e->val.kind == VK::SharedCh) out.push_back(e->val.s);
        if (e->val.kind == VK::Ep) out.push_back(e->val.ep.chan);
    }
    for (auto &a : e->args) exprChannels(a, out);
}

void channelOrder(const P &p, std::vector<std::string> &out) {
    switch (p->kind) {
    case PK::Request: case PK::Accept: case PK::MRequest: case PK::MAccept:
        if (!p->u.isVar) out.push_back(p->u.name);
        break;
    case PK::Send: case PK::Receive: case PK::Select: case PK::Branch:
    case PK::MSend: case PK::MReceive: case PK::MSelect: case PK::MBranch: case PK::Commit:
        if (!p->k.isVar) out.push_back(p->k.ep.chan);
        break;
    default:
        break;
    }
    exprChannels(p->e, out);
    if (p->p) channelOrder(p->p, out);
    if (p->q) channelOrder(p->q, out);
    for (auto &a : p->arms) channelOrder(a.second, out);
}

struct CanonEnv {
    std::map<std::string, std::string> vars, procVars;
};

P canonLevel(const P &p, int d, const CanonEnv &env);

// Bound names are replaced on the way down, so each node is visited once.
P canonComp(const P &c, int d, const CanonEnv &env) {
    auto n = std::make_shared<Proc>(*c);
    Renamer r;
    r.vars = env.vars;
    if ((c->kind == PK::Request || c->kind == PK::Accept || c->kind == PK::MRequest || c->kind == PK::MAccept) &&
        c->u.isVar)
        n->u.name = r.var(c->u.name);
    n->k = r.chanOf(c->k);
    if (c->e) n->e = r.expr(c->e);
    if (c->kind == PK::RecVar) {
        auto it = env.procVars.find(c->x);
        if (it != env.procVars.end()) n->x = it->second;
        return n;
    }
    if (binds(c->kind)) {
        CanonEnv inner = env;
        n->x = inner.vars[c->x] = "_v" + std::to_string(d);
        n->p = canonLevel(c->p, d + 1, inner);
        return n;
    }
    if (c->kind == PK::Rec) {
        CanonEnv inner = env;
        n->x = inner.procVars[c->x] = "_X" + std::to_string(d);
        n->p = canonLevel(c->p, d + 1, inner);
        return n;
    }
    if (c->p) n->p = canonLevel(c->p, d + 1, env);
    if (c->q) n->q = canonLevel(c->q, d + 1, env);
    for (auto &a : n->arms) a.second = canonLevel(a.second, d + 1, env);
    return n;
}

P canonLevel(const P &p, int d, const CanonEnv &env) {
    std::vector<P> raw;
    std::vector<std::string> res;
    hoist(p, raw, res);
    if (raw.size() == 1 && res.empty()) return canonComp(raw[0], d, env);
    std::vector<P> comps;
    for (auto &c : raw) comps.push_back(canonComp(c, d, env));

    std::set<std::string> used;
    for (auto &c : comps)
        for (auto &ch : freeChannels(c)) used.insert(ch);
    std::vector<std::string> live;
    for (auto &r : res)
        if (used.count(r)) live.push_back(r);

    std::vector<std::pair<std::string, P>> keyed;
    for (auto &c : comps) {
        P masked = c;
        for (auto &r : live) masked = renameChannel(masked, r, "#");
        keyed.emplace_back(printProcess(masked) + "\x02" + printProcess(c), c);
    }
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](auto &a, auto &b) { return a.first < b.first; });

    std::map<std::string, std::string> names;
    std::set<std::string> liveSet(live.begin(), live.end());
    for (auto &kc : keyed) {
        std::vector<std::string> order;
        channelOrder(kc.second, order);
        for (auto &ch : order)
            if (liveSet.count(ch) && !names.count(ch)) {
                std::string nm = "_c" + std::to_string(d) + "_" + std::to_string(names.size());
                names[ch] = nm;
            }
    }

    std::vector<std::pair<std::string, P>> final;
    for (auto &kc : keyed) {
        P c = kc.second;
        if (!names.empty()) {
            Renamer r;
            r.chans = names;
            c = r.proc(c);
        }
        final.emplace_back(printProcess(c), c);
    }
    std::stable_sort(final.begin(), final.end(),
                     [](auto &a, auto &b) { return a.first < b.first; });
    std::vector<P> ordered;
    for (auto &f : final) ordered.push_back(f.second);
    P out = parOf(ordered);

    std::vector<std::string> newNames;
    for (auto &kv : names) newNames.push_back(kv.second);
    std::sort(newNames.begin(), newNames.end(), [](const std::string &a, const std::string &b) {
        return a.size() != b.size() ? a.size() > b.size() : a > b;
    });
    for (auto &nm : newNames) out = mkRes(nm, out);
    return out;
}

// All processes obtained by unfolding exactly one rec node.
void oneUnfoldings(const P &p, std::vector<P> &out) {
    if (p->kind == PK::Rec) out.push_back(unfold(p));
    auto rebuild = [&](auto setter) {
        auto n = std::make_shared<Proc>(*p);
        setter(*n);
        return P(n);
    };
    if (p->p) {
        std::vector<P> sub;
        oneUnfoldings(p->p, sub);
        for (auto &s : sub) out.push_back(rebuild([&](Proc &n) { n.p = s; }));
    }
    if (p->q) {
        std::vector<P> sub;
        oneUnfoldings(p->q, sub);
        for (auto &s : sub) out.push_back(rebuild([&](Proc &n) { n.q = s; }));
    }
    for (size_t i = 0; i < p->arms.size(); ++i) {
        std::vector<P> sub;
        oneUnfoldings(p->arms[i].second, sub);
        for (auto &s : sub) out.push_back(rebuild([&](Proc &n) { n.arms[i].second = s; }));
    }
}

std::set<std::string> unfoldVariants(const P &p, int budget) {
    std::set<std::string> seen;
    std::vector<P> frontier{p};
    seen.insert(printProcess(canonicalize(p)));
    for (int round = 0; round < budget && !frontier.empty(); ++round) {
        std::vector<P> next;
        for (auto &f : frontier) {
            std::vector<P> us;
            oneUnfoldings(f, us);
            for (auto &u : us) {
                auto key = printProcess(canonicalize(u));
                if (seen.insert(key).second) next.push_back(u);
                if (seen.size() > 4096) return seen;
            }
        }
        frontier = std::move(next);
    }
    return seen;
}

}  // namespace

P canonicalize(const P &p) { return canonLevel(uniquify(p), 0, CanonEnv{}); }

std::string canonicalText(const P &p, const std::string &mask) {
    struct Entry {
        P keep;
        std::string text;
    };
    thread_local std::map<std::pair<const Proc *, std::string>, Entry> cache;
    auto key = std::make_pair(p.get(), mask);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second.text;
    if (cache.size() > 50000) cache.clear();
    P q = mask.empty() ? p : renameChannel(p, mask, "@");
    std::string text = printProcess(canonicalize(q));
    cache.emplace(key, Entry{p, text});
    return text;
}

bool congruent(const P &p, const P &q, int unfoldBudget) {
    auto a = printProcess(canonicalize(p));
    auto b = printProcess(canonicalize(q));
    if (a == b) return true;
    if (unfoldBudget <= 0) return false;
    auto va = unfoldVariants(p, unfoldBudget);
    auto vb = unfoldVariants(q, unfoldBudget);
    for (auto &s : va)
        if (vb.count(s)) return true;
    return false;
}

}  // namespace revses
