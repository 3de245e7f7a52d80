#include "revses/host.hpp"

#include <functional>
#include <map>

namespace revses {

namespace {

void exprNames(const Expr &e, std::set<std::string> &out) {
    if (!e) return;
    if (e->kind == EK::Var) out.insert(e->name);
    if (e->kind == EK::Val) {
        if (e->val.kind == VK::SharedCh) out.insert(e->val.s);
        if (e->val.kind == VK::Ep) out.insert(e->val.ep.chan);
    }
    for (auto &a : e->args) exprNames(a, out);
}

void procNames(const P &p, std::set<std::string> &out) {
    if (!p) return;
    if (!p->u.name.empty()) out.insert(p->u.name);
    if (p->k.isVar) out.insert(p->k.var);
    else if (!p->k.ep.chan.empty()) out.insert(p->k.ep.chan);
    if (!p->x.empty()) out.insert(p->x);
    exprNames(p->e, out);
    procNames(p->p, out);
    procNames(p->q, out);
    for (auto &a : p->arms) procNames(a.second, out);
}

}  // namespace

std::set<std::string> allNames(const P &p) {
    std::set<std::string> out;
    procNames(p, out);
    return out;
}

std::string freshAgainst(const std::string &base, const std::set<std::string> &used) {
    if (!used.count(base)) return base;
    for (int i = 1;; ++i) {
        std::string c = base + std::to_string(i);
        if (!used.count(c)) return c;
    }
}

Soup toSoup(const P &p) {
    Soup s;
    std::set<std::string> used = allNames(p);
    std::set<std::string> taken;
    for (auto &c : freeChannels(p)) taken.insert(c);
    std::function<void(const P &)> go = [&](const P &c) {
        switch (c->kind) {
        case PK::Inact: return;
        case PK::Par:
            go(c->p);
            go(c->q);
            return;
        case PK::Res: {
            std::string name = c->x;
            P body = c->p;
            if (taken.count(name)) {
                name = freshAgainst(name, used);
                used.insert(name);
                body = renameChannel(body, c->x, name);
            }
            taken.insert(name);
            s.restricted.push_back(name);
            go(body);
            return;
        }
        default:
            s.comps.push_back(c);
        }
    };
    go(p);
    return s;
}

P fromSoup(const Soup &s) {
    P out = parOf(s.comps);
    for (auto it = s.restricted.rbegin(); it != s.restricted.rend(); ++it) out = mkRes(*it, out);
    return out;
}

std::string hostRuleName(HostRule r) {
    switch (r) {
    case HostRule::Con: return "Con";
    case HostRule::Com: return "Com";
    case HostRule::Lab: return "Lab";
    case HostRule::If: return "If";
    case HostRule::MCon: return "M-Con";
    case HostRule::MCom: return "M-Com";
    case HostRule::MLab: return "M-Lab";
    case HostRule::Commit: return "Commit";
    }
    return "?";
}

namespace {

bool hasArm(const P &b, const std::string &l) {
    for (auto &a : b->arms)
        if (a.first == l) return true;
    return false;
}

P armOf(const P &b, const std::string &l) {
    for (auto &a : b->arms)
        if (a.first == l) return a.second;
    throw Error("Internal", "missing branch " + l);
}

bool concrete(const Chan &k) { return !k.isVar; }

}  // namespace

std::vector<HostRedex> findHostRedexes(const std::vector<P> &heads, const PrimitiveTable &prims,
                                       const HostOptions &o) {
    (void)prims;
    std::vector<HostRedex> out;
    const size_t n = heads.size();
    for (size_t i = 0; i < n; ++i) {
        const P &h = heads[i];
        switch (h->kind) {
        case PK::If:
            if (o.conditionals) out.push_back(HostRedex{HostRule::If, {i}, "", ""});
            break;
        case PK::Request:
            if (!o.binary || !o.initiation || h->u.isVar) break;
            for (size_t j = 0; j < n; ++j)
                if (j != i && heads[j]->kind == PK::Accept && !heads[j]->u.isVar && heads[j]->u.name == h->u.name)
                    out.push_back(HostRedex{HostRule::Con, {i, j}, h->u.name, ""});
            break;
        case PK::Send:
            if (!o.binary || !o.sessionSteps || !concrete(h->k)) break;
            for (size_t j = 0; j < n; ++j)
                if (j != i && heads[j]->kind == PK::Receive && concrete(heads[j]->k) &&
                    heads[j]->k.ep == dualEndpoint(h->k.ep))
                    out.push_back(HostRedex{HostRule::Com, {i, j}, showEndpoint(h->k.ep), ""});
            break;
        case PK::Select:
            if (!o.binary || !o.sessionSteps || !concrete(h->k)) break;
            for (size_t j = 0; j < n; ++j)
                if (j != i && heads[j]->kind == PK::Branch && concrete(heads[j]->k) &&
                    heads[j]->k.ep == dualEndpoint(h->k.ep) && hasArm(heads[j], h->x))
                    out.push_back(HostRedex{HostRule::Lab, {i, j}, showEndpoint(h->k.ep), h->x});
            break;
        case PK::Commit:
            if (!o.commits || !concrete(h->k) || h->k.ep.pol != Pol::Plain) break;
            for (size_t j = 0; j < n; ++j)
                if (j != i && heads[j]->kind == PK::Commit && concrete(heads[j]->k) &&
                    heads[j]->k.ep == dualEndpoint(h->k.ep))
                    out.push_back(HostRedex{HostRule::Commit, {i, j}, showEndpoint(h->k.ep), ""});
            break;
        case PK::MRequest: {
            if (!o.multiparty || !o.initiation || h->u.isVar) break;
            int roles = h->role;
            std::vector<std::vector<size_t>> cands(roles);
            for (size_t j = 0; j < n; ++j) {
                const P &a = heads[j];
                if (j != i && a->kind == PK::MAccept && !a->u.isVar && a->u.name == h->u.name && a->role >= 1 &&
                    a->role < roles)
                    cands[a->role].push_back(j);
            }
            bool complete = true;
            for (int r = 1; r < roles; ++r) complete &= !cands[r].empty();
            if (!complete) break;
            std::vector<size_t> pick{i};
            std::function<void(int)> choose = [&](int r) {
                if (r == roles) {
                    out.push_back(HostRedex{HostRule::MCon, pick, h->u.name, ""});
                    return;
                }
                for (size_t j : cands[r]) {
                    pick.push_back(j);
                    choose(r + 1);
                    pick.pop_back();
                }
            };
            choose(1);
            break;
        }
        case PK::MSend:
            if (!o.multiparty || !o.sessionSteps || !concrete(h->k)) break;
            for (size_t j = 0; j < n; ++j) {
                const P &r = heads[j];
                if (j != i && r->kind == PK::MReceive && concrete(r->k) && r->k.ep.chan == h->k.ep.chan &&
                    r->k.ep.role == h->role && r->role == h->k.ep.role)
                    out.push_back(HostRedex{HostRule::MCom, {i, j}, showEndpoint(h->k.ep), ""});
            }
            break;
        case PK::MSelect:
            if (!o.multiparty || !o.sessionSteps || !concrete(h->k)) break;
            for (size_t j = 0; j < n; ++j) {
                const P &r = heads[j];
                if (j != i && r->kind == PK::MBranch && concrete(r->k) && r->k.ep.chan == h->k.ep.chan &&
                    r->k.ep.role == h->role && r->role == h->k.ep.role && hasArm(r, h->x))
                    out.push_back(HostRedex{HostRule::MLab, {i, j}, showEndpoint(h->k.ep), h->x});
            }
            break;
        default:
            break;
        }
    }
    return out;
}

HostFiring fireHost(const HostRedex &r, const std::vector<P> &heads, const PrimitiveTable &prims,
                    const std::string &chan) {
    HostFiring f;
    const P &a = heads[r.locus[0]];
    switch (r.rule) {
    case HostRule::If: {
        Value v = evalExpr(prims, a->e);
        if (v.kind != VK::Bool) throw Error("SortMismatch", "condition is not a boolean: " + showValue(v));
        f.thenBranch = v.i != 0;
        f.outs.push_back(f.thenBranch ? a->p : a->q);
        return f;
    }
    case HostRule::Con: {
        const P &b = heads[r.locus[1]];
        f.outs.push_back(substitute(a->p, a->x, Value::endpoint(Endpoint{chan, Pol::Dual, 0})));
        f.outs.push_back(substitute(b->p, b->x, Value::endpoint(Endpoint{chan, Pol::Plain, 0})));
        return f;
    }
    case HostRule::MCon: {
        f.outs.push_back(substitute(a->p, a->x, Value::endpoint(Endpoint{chan, Pol::Role, a->role})));
        for (size_t i = 1; i < r.locus.size(); ++i) {
            const P &b = heads[r.locus[i]];
            f.outs.push_back(substitute(b->p, b->x, Value::endpoint(Endpoint{chan, Pol::Role, b->role})));
        }
        return f;
    }
    case HostRule::Com:
    case HostRule::MCom: {
        const P &b = heads[r.locus[1]];
        Value v = evalExpr(prims, a->e);
        f.value = v;
        f.outs.push_back(a->p);
        f.outs.push_back(substitute(b->p, b->x, v));
        return f;
    }
    case HostRule::Lab:
    case HostRule::MLab: {
        const P &b = heads[r.locus[1]];
        f.outs.push_back(a->p);
        f.outs.push_back(armOf(b, a->x));
        return f;
    }
    case HostRule::Commit: {
        const P &b = heads[r.locus[1]];
        f.outs.push_back(a->p);
        f.outs.push_back(b->p);
        return f;
    }
    }
    return f;
}

// Unfold recursive components whose body starts with | or new, so that the
// soup only holds prefixed heads. Replicated recursion is cut off.
Soup normalizeSoup(const Soup &in) {
    Soup s{in.restricted, {}};
    std::vector<P> work(in.comps.rbegin(), in.comps.rend());
    int budget = 256;
    while (!work.empty()) {
        P c = work.back();
        work.pop_back();
        if (c->kind != PK::Rec) {
            s.comps.push_back(c);
            continue;
        }
        P h = headNormal(c);
        if (h->kind != PK::Par && h->kind != PK::Res && h->kind != PK::Inact) {
            s.comps.push_back(c);
            continue;
        }
        if (--budget < 0) throw Error("UnsupportedRecursion", "recursion spawns unboundedly many threads");
        Soup sub = toSoup(h);
        for (auto &r : sub.restricted) s.restricted.push_back(r);
        for (auto it = sub.comps.rbegin(); it != sub.comps.rend(); ++it) work.push_back(*it);
    }
    return s;
}

std::vector<HostStep> hostSuccessors(const P &p, const PrimitiveTable &prims) {
    Soup s = normalizeSoup(toSoup(p));
    std::vector<P> heads;
    for (auto &c : s.comps) heads.push_back(headNormal(c));
    std::string chan = freshAgainst("s", allNames(p));
    std::vector<HostStep> out;
    for (auto &r : findHostRedexes(heads, prims)) {
        HostFiring f = fireHost(r, heads, prims, chan);
        Soup t;
        t.restricted = s.restricted;
        if (r.rule == HostRule::Con || r.rule == HostRule::MCon) t.restricted.push_back(chan);
        std::set<size_t> gone(r.locus.begin(), r.locus.end());
        for (size_t i = 0; i < s.comps.size(); ++i)
            if (!gone.count(i)) t.comps.push_back(s.comps[i]);
        for (auto &o : f.outs) t.comps.push_back(o);
        out.push_back(HostStep{r, fromSoup(t)});
    }
    return out;
}

}  // namespace revses
