#include "revses/respi.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <functional>
#include <map>

#include "json.hpp"
#include "revses/host.hpp"
#include "revses/syntax.hpp"

namespace revses {

namespace {

uint64_t fnv1a(const std::string &s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex16(uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

const int kCongruenceBudget = 8;

}  // namespace

Tag rootTag(size_t i) { return "t" + std::to_string(i); }
Tag forkLeft(const Tag &t) { return t + "L"; }
Tag forkRight(const Tag &t) { return t + "R"; }
Tag contTag(const Tag &t) { return t + "c"; }

std::string memKindName(MemKind k) {
    switch (k) {
    case MemKind::Init: return "init";
    case MemKind::Com: return "com";
    case MemKind::Sel: return "sel";
    case MemKind::Choice: return "choice";
    case MemKind::Fork: return "fork";
    case MemKind::Commit: return "commit";
    }
    return "?";
}

std::string RMemory::id() const {
    std::string s = memKindName(kind) + ":" + t1;
    if (!t2.empty() && kind != MemKind::Choice && kind != MemKind::Fork) s += "+" + t2;
    return s;
}

std::vector<Tag> memHead(const RMemory &m) {
    switch (m.kind) {
    case MemKind::Choice:
    case MemKind::Fork: return {m.t1};
    default: return {m.t1, m.t2};
    }
}

std::vector<Tag> memTail(const RMemory &m) {
    switch (m.kind) {
    case MemKind::Choice: return {m.t1c};
    case MemKind::Commit: return {};
    default: return {m.t1c, m.t2c};
    }
}

namespace {

std::string pr(const P &p) { return canonicalText(p); }

std::string showArms(const Arms &arms) {
    std::string s = "{";
    for (size_t i = 0; i < arms.size(); ++i) {
        if (i) s += ", ";
        s += arms[i].first + ": " + pr(arms[i].second);
    }
    return s + "}";
}

// Generating term of an action or choice memory: what the head threads
// looked like before the step.
std::pair<P, P> generatingTerms(const RMemory &m) {
    switch (m.kind) {
    case MemKind::Init:
        return {mkRequest(Shared{false, m.shared}, m.x, m.p1), mkAccept(Shared{false, m.shared}, m.y, m.p2)};
    case MemKind::Com:
        return {mkSend(Chan::endpoint(dualEndpoint(m.k)), m.e, m.p1), mkReceive(Chan::endpoint(m.k), m.x, m.p2)};
    case MemKind::Sel:
        return {mkSelect(Chan::endpoint(dualEndpoint(m.k)), m.label, m.p1), mkBranch(Chan::endpoint(m.k), m.arms)};
    case MemKind::Choice: return {mkIf(m.e, m.p1, m.p2), nullptr};
    default: throw Error("Internal", "memory " + m.id() + " has no generating term");
    }
}

}  // namespace

std::string showMemory(const RMemory &m) {
    std::string s = "<" + m.t1;
    switch (m.kind) {
    case MemKind::Init:
        s += ", init(" + m.shared + ", " + m.x + ", " + m.y + ", " + pr(m.p1) + ", " + pr(m.p2) + ", " + m.chan +
             "), " + m.t2 + ", " + m.t1c + ", " + m.t2c;
        break;
    case MemKind::Com:
        s += ", com(" + showEndpoint(m.k) + ", " + printExpr(m.e) + ", " + m.x + ", " + pr(m.p1) + ", " + pr(m.p2) +
             "), " + m.t2 + ", " + m.t1c + ", " + m.t2c;
        break;
    case MemKind::Sel:
        s += ", sel(" + showEndpoint(m.k) + ", " + m.label + ", " + pr(m.p1) + ", " + showArms(m.arms) + "), " +
             m.t2 + ", " + m.t1c + ", " + m.t2c;
        break;
    case MemKind::Choice:
        s += ", if " + printExpr(m.e) + " then " + pr(m.p1) + " else " + pr(m.p2) + ", " + m.t1c;
        break;
    case MemKind::Fork: s += ", fork, " + m.t1c + ", " + m.t2c; break;
    case MemKind::Commit: s += ", commit(" + m.chan + "), " + m.t2; break;
    }
    return s + ">";
}

namespace {

std::set<std::string> usedChannels(const RConfig &c) {
    std::set<std::string> used = c.restricted;
    for (auto &t : c.threads)
        for (auto &n : allNames(t.body)) used.insert(n);
    return used;
}

void exprChans(const Expr &e, std::set<std::string> &out) {
    if (!e) return;
    if (e->kind == EK::Val) {
        if (e->val.kind == VK::SharedCh) out.insert(e->val.s);
        if (e->val.kind == VK::Ep) out.insert(e->val.ep.chan);
    }
    for (auto &a : e->args) exprChans(a, out);
}

// Channels mentioned by the stored payload; the Init channel itself is
// excluded since it is bound by the memory's restriction pattern.
std::set<std::string> memoryChannels(const RMemory &m) {
    std::set<std::string> out;
    auto add = [&](const P &p) {
        if (!p) return;
        for (auto &c : freeChannels(p)) out.insert(c);
    };
    add(m.p1);
    add(m.p2);
    for (auto &a : m.arms) add(a.second);
    exprChans(m.e, out);
    if (m.kind == MemKind::Init) out.insert(m.shared);
    if (m.kind == MemKind::Com || m.kind == MemKind::Sel) out.insert(m.k.chan);
    if (m.kind == MemKind::Commit) out.insert(m.chan);
    return out;
}

void checkHash(const RConfig &c, const RRedex &r) {
    if (r.confHash != rconfigHash(c))
        throw Error("StaleRedex", "redex '" + describe(r) + "' does not belong to this configuration");
}

size_t threadIndex(const RConfig &c, const Tag &t) {
    for (size_t i = 0; i < c.threads.size(); ++i)
        if (c.threads[i].tag == t) return i;
    return SIZE_MAX;
}

}  // namespace

RConfig splitForks(const RConfig &in) {
    RConfig c;
    c.restricted = in.restricted;
    c.mems = in.mems;
    std::set<std::string> used = usedChannels(in);
    int budget = 256;
    std::deque<Thread> work(in.threads.begin(), in.threads.end());
    while (!work.empty()) {
        Thread t = work.front();
        work.pop_front();
        P b = t.body;
        if (b->kind == PK::Rec) {
            P h = headNormal(b);
            if (h->kind == PK::Par || h->kind == PK::Res) {
                if (--budget < 0) throw Error("UnsupportedRecursion", "recursion spawns unboundedly many threads");
                work.push_front(Thread{t.tag, h});
                continue;
            }
        }
        if (b->kind == PK::Res) {
            std::string name = freshAgainst(b->x + "_" + t.tag, used);
            used.insert(name);
            c.restricted.insert(name);
            work.push_front(Thread{t.tag, renameChannel(b->p, b->x, name)});
            continue;
        }
        if (b->kind == PK::Par) {
            RMemory f;
            f.kind = MemKind::Fork;
            f.t1 = t.tag;
            f.t1c = forkLeft(t.tag);
            f.t2c = forkRight(t.tag);
            c.mems.push_back(f);
            work.push_front(Thread{f.t2c, b->q});
            work.push_front(Thread{f.t1c, b->p});
            continue;
        }
        c.threads.push_back(t);
    }
    return c;
}

RConfig liftInitial(const std::vector<P> &processes) {
    RConfig c;
    for (size_t i = 0; i < processes.size(); ++i) c.threads.push_back(Thread{rootTag(i + 1), processes[i]});
    return splitForks(c);
}

std::string describe(const RRedex &r) {
    std::string s = r.rule;
    if (!r.subject.empty()) s += " on " + r.subject;
    if (!r.label.empty()) s += " label " + r.label;
    s += " (";
    for (size_t i = 0; i < r.tags.size(); ++i) s += (i ? ", " : "") + r.tags[i];
    return s + ")";
}

std::string rconfigKey(const RConfig &c) {
    std::vector<std::string> ts, ms;
    for (auto &t : c.threads) ts.push_back(t.tag + ":" + pr(t.body));
    for (auto &m : c.mems) ms.push_back(showMemory(m));
    std::sort(ts.begin(), ts.end());
    std::sort(ms.begin(), ms.end());
    std::string k = "new";
    for (auto &r : c.restricted) k += " " + r;
    for (auto &t : ts) k += "\n" + t;
    for (auto &m : ms) k += "\n" + m;
    return k;
}

uint64_t rconfigHash(const RConfig &c) { return fnv1a(rconfigKey(c)); }

std::string showRConfig(const RConfig &c) {
    std::string out;
    if (!c.restricted.empty()) {
        out += "new";
        for (auto &r : c.restricted) out += " " + r;
        out += "\n";
    }
    for (auto &t : c.threads) out += "  " + t.tag + ": " + printProcess(t.body) + "\n";
    for (auto &m : c.mems) out += "  " + showMemory(m) + "\n";
    return out;
}

bool rconfigCongruent(const RConfig &a, const RConfig &b) {
    if (rconfigKey(a) == rconfigKey(b)) return true;
    if (a.restricted != b.restricted || a.threads.size() != b.threads.size() || a.mems.size() != b.mems.size())
        return false;
    std::vector<std::string> ma, mb;
    for (auto &m : a.mems) ma.push_back(showMemory(m));
    for (auto &m : b.mems) mb.push_back(showMemory(m));
    std::sort(ma.begin(), ma.end());
    std::sort(mb.begin(), mb.end());
    if (ma != mb) return false;
    for (auto &t : a.threads) {
        size_t j = threadIndex(b, t.tag);
        if (j == SIZE_MAX || !congruent(t.body, b.threads[j].body, kCongruenceBudget)) return false;
    }
    return true;
}

namespace {

std::string fwRuleName(HostRule r, bool thenBranch) {
    switch (r) {
    case HostRule::Con: return "fwCon";
    case HostRule::Com: return "fwCom";
    case HostRule::Lab: return "fwLab";
    case HostRule::If: return thenBranch ? "fwIf1" : "fwIf2";
    case HostRule::Commit: return "commit";
    default: return hostRuleName(r);
    }
}

HostOptions respiOptions(bool commits) {
    HostOptions o;
    o.multiparty = false;
    o.commits = commits;
    return o;
}

std::vector<P> headsOf(const RConfig &c) {
    std::vector<P> heads;
    for (auto &t : c.threads) heads.push_back(headNormal(t.body));
    return heads;
}

}  // namespace

std::vector<RRedex> enabledForwardR(const RConfig &c, const PrimitiveTable &prims, bool commits) {
    std::vector<P> heads = headsOf(c);
    uint64_t h = rconfigHash(c);
    std::vector<RRedex> out;
    for (auto &hr : findHostRedexes(heads, prims, respiOptions(commits))) {
        RRedex r;
        r.forward = true;
        bool thenBranch = false;
        if (hr.rule == HostRule::If) {
            Value v = evalExpr(prims, heads[hr.locus[0]]->e);
            if (v.kind != VK::Bool) throw Error("SortMismatch", "condition is not a boolean: " + showValue(v));
            thenBranch = v.i != 0;
        }
        r.rule = fwRuleName(hr.rule, thenBranch);
        for (size_t i : hr.locus) r.tags.push_back(c.threads[i].tag);
        r.subject = hr.subject;
        r.label = hr.label;
        r.confHash = h;
        out.push_back(r);
    }
    return out;
}

RConfig applyForwardR(const RConfig &c, const RRedex &r, const PrimitiveTable &prims) {
    checkHash(c, r);
    if (!r.forward) throw Error("StaleRedex", "backward redex given to applyForwardR");
    std::vector<P> heads = headsOf(c);
    std::optional<HostRedex> hr;
    for (auto &cand : findHostRedexes(heads, prims, respiOptions(true))) {
        if (cand.locus.size() != r.tags.size() || cand.label != r.label || cand.subject != r.subject) continue;
        bool same = true;
        for (size_t i = 0; i < cand.locus.size(); ++i) same &= c.threads[cand.locus[i]].tag == r.tags[i];
        if (same && fwRuleName(cand.rule, r.rule == "fwIf1") == r.rule) {
            hr = cand;
            break;
        }
    }
    if (!hr) throw Error("StaleRedex", "redex '" + describe(r) + "' is not enabled");

    std::string chan;
    if (hr->rule == HostRule::Con) chan = freshAgainst("s_" + r.tags[0], usedChannels(c));
    HostFiring f = fireHost(*hr, heads, prims, chan);

    RMemory m;
    const P &a = heads[hr->locus[0]];
    const P &b = hr->locus.size() > 1 ? heads[hr->locus[1]] : nullptr;
    m.t1 = r.tags[0];
    m.t1c = contTag(m.t1);
    if (b) {
        m.t2 = r.tags[1];
        m.t2c = contTag(m.t2);
    }
    switch (hr->rule) {
    case HostRule::Con:
        m.kind = MemKind::Init;
        m.shared = a->u.name;
        m.x = a->x;
        m.y = b->x;
        m.p1 = a->p;
        m.p2 = b->p;
        m.chan = chan;
        break;
    case HostRule::Com:
        m.kind = MemKind::Com;
        m.k = b->k.ep;
        m.e = a->e;
        m.x = b->x;
        m.p1 = a->p;
        m.p2 = b->p;
        break;
    case HostRule::Lab:
        m.kind = MemKind::Sel;
        m.k = b->k.ep;
        m.label = a->x;
        m.p1 = a->p;
        m.arms = b->arms;
        break;
    case HostRule::If:
        m.kind = MemKind::Choice;
        m.e = a->e;
        m.p1 = a->p;
        m.p2 = a->q;
        break;
    case HostRule::Commit:
        // the host lists the s side first; the memory records the ~s side as t1
        m.kind = MemKind::Commit;
        m.t1 = r.tags[1];
        m.t2 = r.tags[0];
        m.t1c.clear();
        m.t2c.clear();
        m.chan = a->k.ep.chan;
        break;
    default: throw Error("Internal", "rule " + hostRuleName(hr->rule) + " has no reversible counterpart");
    }

    RConfig n;
    n.restricted = c.restricted;
    if (!chan.empty()) n.restricted.insert(chan);
    n.mems = c.mems;
    n.mems.push_back(m);
    for (size_t i = 0; i < c.threads.size(); ++i) {
        auto it = std::find(hr->locus.begin(), hr->locus.end(), i);
        if (it == hr->locus.end()) {
            n.threads.push_back(c.threads[i]);
            continue;
        }
        size_t k = it - hr->locus.begin();
        n.threads.push_back(Thread{contTag(c.threads[i].tag), f.outs[k]});
    }
    return splitForks(n);
}

namespace {

const RMemory *forkAt(const RConfig &c, const Tag &t) {
    for (auto &m : c.mems)
        if (m.kind == MemKind::Fork && m.t1 == t) return &m;
    return nullptr;
}

bool live(const RConfig &c, const Tag &t) {
    if (threadIndex(c, t) != SIZE_MAX) return true;
    const RMemory *f = forkAt(c, t);
    return f && live(c, f->t1c) && live(c, f->t2c);
}

// Re-joins the subtree rooted at t into one body, recording what it used.
P rejoin(const RConfig &c, const Tag &t, std::set<size_t> &threads, std::set<std::string> &forks) {
    size_t i = threadIndex(c, t);
    if (i != SIZE_MAX) {
        threads.insert(i);
        return c.threads[i].body;
    }
    const RMemory *f = forkAt(c, t);
    if (!f) throw Error("Internal", "tag " + t + " is not live");
    forks.insert(f->id());
    return mkPar(rejoin(c, f->t1c, threads, forks), rejoin(c, f->t2c, threads, forks));
}

std::string bwRuleName(MemKind k) {
    switch (k) {
    case MemKind::Init: return "bwCon";
    case MemKind::Com: return "bwCom";
    case MemKind::Sel: return "bwLab";
    case MemKind::Choice: return "bwIf";
    default: return "?";
    }
}

bool reversible(MemKind k) { return k != MemKind::Fork && k != MemKind::Commit; }

P armOf(const Arms &arms, const std::string &l) {
    for (auto &a : arms)
        if (a.first == l) return a.second;
    throw Error("Internal", "missing branch " + l);
}

}  // namespace

const RMemory *findMemory(const RConfig &c, const std::string &id) {
    for (auto &m : c.mems)
        if (m.id() == id) return &m;
    return nullptr;
}

std::vector<RRedex> enabledBackwardR(const RConfig &c) {
    uint64_t h = rconfigHash(c);
    std::vector<RRedex> out;
    for (auto &m : c.mems) {
        if (!reversible(m.kind)) continue;
        bool ok = true;
        for (auto &t : memTail(m)) ok &= live(c, t);
        if (!ok) continue;
        RRedex r;
        r.forward = false;
        r.rule = bwRuleName(m.kind);
        r.tags = memHead(m);
        r.memoryId = m.id();
        if (m.kind == MemKind::Init) r.subject = m.shared;
        if (m.kind == MemKind::Com || m.kind == MemKind::Sel) r.subject = showEndpoint(m.k);
        if (m.kind == MemKind::Sel) r.label = m.label;
        r.confHash = h;
        out.push_back(r);
    }
#ifndef NDEBUG
    std::set<std::string> locked = lockedMemories(c);
    for (auto &r : out)
        if (locked.count(r.memoryId)) throw Error("Internal", "locked memory " + r.memoryId + " is revertible");
#endif
    return out;
}

RConfig applyBackwardR(const RConfig &c, const RRedex &r, const PrimitiveTable &prims) {
    checkHash(c, r);
    const RMemory *mp = r.forward ? nullptr : findMemory(c, r.memoryId);
    if (!mp || !reversible(mp->kind)) throw Error("StaleRedex", "redex '" + describe(r) + "' is not enabled");
    const RMemory m = *mp;
    for (auto &t : memTail(m))
        if (!live(c, t)) throw Error("StaleRedex", "continuation " + t + " of " + m.id() + " is not live");

    std::set<size_t> used;
    std::set<std::string> forks;
    std::vector<P> actual;
    for (auto &t : memTail(m)) actual.push_back(rejoin(c, t, used, forks));

    std::vector<P> expected;
    switch (m.kind) {
    case MemKind::Init:
        expected.push_back(substitute(m.p1, m.x, Value::endpoint(Endpoint{m.chan, Pol::Dual, 0})));
        expected.push_back(substitute(m.p2, m.y, Value::endpoint(Endpoint{m.chan, Pol::Plain, 0})));
        break;
    case MemKind::Com:
        expected.push_back(m.p1);
        expected.push_back(substitute(m.p2, m.x, evalExpr(prims, m.e)));
        break;
    case MemKind::Sel:
        expected.push_back(m.p1);
        expected.push_back(armOf(m.arms, m.label));
        break;
    case MemKind::Choice: {
        Value v = evalExpr(prims, m.e);
        expected.push_back(v.kind == VK::Bool && v.i ? m.p1 : m.p2);
        break;
    }
    default: break;
    }

    // Restrictions that only the undone continuations know go back inside.
    std::set<std::string> elsewhere = memoryChannels(m);
    for (size_t i = 0; i < c.threads.size(); ++i)
        if (!used.count(i))
            for (auto &ch : freeChannels(c.threads[i].body)) elsewhere.insert(ch);
    for (auto &o : c.mems)
        if (o.id() != m.id() && !forks.count(o.id()))
            for (auto &ch : memoryChannels(o)) elsewhere.insert(ch);
    std::set<std::string> inner;
    for (auto &p : actual)
        for (auto &ch : freeChannels(p))
            if (c.restricted.count(ch) && !elsewhere.count(ch)) inner.insert(ch);
    auto wrap = [&](const std::vector<P> &ps) {
        P out = parOf(ps);
        for (auto &ch : inner) out = mkRes(ch, out);
        return out;
    };
    if (!congruent(wrap(expected), wrap(actual), kCongruenceBudget))
        throw Error("MemoryMismatch", "continuations of " + m.id() + " do not match the stored data");

    auto [g1, g2] = generatingTerms(m);
    RConfig n;
    for (auto &ch : c.restricted)
        if (!inner.count(ch)) n.restricted.insert(ch);
    for (auto &o : c.mems)
        if (o.id() != m.id() && !forks.count(o.id())) n.mems.push_back(o);
    size_t first = *used.begin();
    for (size_t i = 0; i < c.threads.size(); ++i) {
        if (i == first) {
            n.threads.push_back(Thread{m.t1, g1});
            if (g2) n.threads.push_back(Thread{m.t2, g2});
        }
        if (!used.count(i)) n.threads.push_back(c.threads[i]);
    }
    return n;
}

std::set<std::string> lockedMemories(const RConfig &c) {
    std::set<std::string> locked;
    std::set<Tag> heads;
    for (auto &m : c.mems)
        if (m.kind == MemKind::Commit) {
            locked.insert(m.id());
            for (auto &t : memHead(m)) heads.insert(t);
        }
    bool grew = !locked.empty();
    while (grew) {
        grew = false;
        for (auto &m : c.mems) {
            if (locked.count(m.id())) continue;
            bool hit = false;
            for (auto &t : memTail(m)) hit |= heads.count(t) > 0;
            if (!hit) continue;
            locked.insert(m.id());
            for (auto &t : memHead(m)) heads.insert(t);
            grew = true;
        }
    }
    return locked;
}

P forgetfulMap(const RConfig &c) {
    std::vector<P> bodies;
    for (auto &t : c.threads) bodies.push_back(t.body);
    P out = parOf(bodies);
    for (auto it = c.restricted.rbegin(); it != c.restricted.rend(); ++it) out = mkRes(*it, out);
    return canonicalize(out);
}

std::vector<std::string> subordinateCommitWarnings(const P &p) {
    std::vector<std::string> out;
    std::function<void(const P &, std::vector<std::string> &, const std::set<std::string> &)> go =
        [&](const P &q, std::vector<std::string> &open, const std::set<std::string> &nested) {
            if (!q) return;
            bool init = q->kind == PK::Request || q->kind == PK::Accept || q->kind == PK::MRequest ||
                        q->kind == PK::MAccept;
            if (init) {
                std::set<std::string> inner = nested;
                if (!open.empty()) inner.insert(q->x);
                else inner.erase(q->x);
                open.push_back(q->x);
                go(q->p, open, inner);
                open.pop_back();
                return;
            }
            if (q->kind == PK::Commit && q->k.isVar && nested.count(q->k.var))
                out.push_back("line " + std::to_string(q->span.line) + ": commit on " + q->k.var +
                              ", a session opened inside " + q->k.var + "'s enclosing session");
            go(q->p, open, nested);
            go(q->q, open, nested);
            for (auto &a : q->arms) go(a.second, open, nested);
        };
    std::vector<std::string> open;
    go(p, open, {});
    return out;
}

CorrespondenceReport checkCorrespondence(const RConfig &start, int depth, const PrimitiveTable &prims,
                                         RConfig (*mutate)(const RConfig &)) {
    CorrespondenceReport rep;
    std::set<std::string> seen;
    std::deque<std::pair<RConfig, int>> work;
    work.push_back({start, 0});
    seen.insert(rconfigKey(start));
    auto hostHas = [&](const P &from, const P &to) {
        for (auto &s : hostSuccessors(from, prims))
            if (congruent(s.result, to, kCongruenceBudget)) return true;
        return false;
    };
    while (!work.empty()) {
        auto [m, d] = work.front();
        work.pop_front();
        if (mutate) m = mutate(m);
        ++rep.statesVisited;
        P phiM = forgetfulMap(m);
        std::vector<RRedex> fw = enabledForwardR(m, prims);
        std::vector<P> lifted;
        for (auto &r : fw) {
            RConfig n = applyForwardR(m, r, prims);
            P phiN = forgetfulMap(n);
            lifted.push_back(phiN);
            ++rep.edgesChecked;
            if (!hostHas(phiM, phiN))
                rep.violations.push_back("forward " + describe(r) + " has no host counterpart from " + printProcess(phiM));
            if (d + 1 <= depth) {
                if (seen.insert(rconfigKey(n)).second) work.push_back({n, d + 1});
            } else {
                rep.truncated = true;
            }
        }
        for (auto &s : hostSuccessors(phiM, prims)) {
            bool found = false;
            for (auto &q : lifted) found = found || congruent(s.result, q, kCongruenceBudget);
            if (!found)
                rep.violations.push_back("host " + hostRuleName(s.redex.rule) + " on " + s.redex.subject +
                                         " has no lifting from " + printProcess(phiM));
        }
        for (auto &r : enabledBackwardR(m)) {
            ++rep.edgesChecked;
            try {
                RConfig n = applyBackwardR(m, r, prims);
                if (!hostHas(forgetfulMap(n), phiM))
                    rep.violations.push_back("backward " + describe(r) + " does not undo a host step");
            } catch (const Error &e) {
                rep.violations.push_back("backward " + describe(r) + ": " + e.what());
            }
        }
    }
    return rep;
}

Typing typecheckRespi(const Basis &theta, const Sorting &gamma, const RConfig &c, const PrimitiveTable &prims) {
    std::vector<P> parts;
    for (auto &t : c.threads) parts.push_back(t.body);
    std::set<std::string> initiated;
    for (auto &m : c.mems)
        if (m.kind == MemKind::Init) initiated.insert(m.chan);
    for (auto &m : c.mems) {
        bool check = m.kind == MemKind::Init ||
                     ((m.kind == MemKind::Com || m.kind == MemKind::Sel) && !initiated.count(m.k.chan));
        if (!check) continue;
        auto [g1, g2] = generatingTerms(m);
        parts.push_back(g1);
        parts.push_back(g2);
    }
    P whole = parOf(parts);
    for (auto it = c.restricted.rbegin(); it != c.restricted.rend(); ++it) whole = mkRes(*it, whole);
    TypecheckOptions opts;
    opts.prims = &prims;
    return typecheckProcess(theta, gamma, whole, opts).delta;
}

std::string traceLine(const RTraceRecord &r) {
    nlohmann::ordered_json j;
    j["stepIndex"] = r.stepIndex;
    j["direction"] = r.forward ? "fw" : "bw";
    j["ruleName"] = r.rule;
    j["memoryId"] = r.memoryId;
    j["tagsCreated"] = r.tagsCreated;
    j["tagsConsumed"] = r.tagsConsumed;
    j["lockedCount"] = r.lockedCount;
    j["locked"] = r.locked;
    j["confHash"] = hex16(r.confHash);
    return j.dump();
}

RConfig stepWithTraceR(const RConfig &c, const RRedex &r, const PrimitiveTable &prims, size_t index,
                       RTraceRecord &rec) {
    rec = RTraceRecord{};
    rec.stepIndex = index;
    rec.forward = r.forward;
    rec.rule = r.rule;
    RConfig n = r.forward ? applyForwardR(c, r, prims) : applyBackwardR(c, r, prims);
    if (r.forward) {
        std::set<std::string> before;
        for (auto &m : c.mems) before.insert(m.id());
        for (auto &m : n.mems)
            if (!before.count(m.id()) && m.kind != MemKind::Fork) rec.memoryId = m.id();
    } else {
        rec.memoryId = r.memoryId;
    }
    std::set<Tag> tb, ta;
    for (auto &t : c.threads) tb.insert(t.tag);
    for (auto &t : n.threads) ta.insert(t.tag);
    std::set_difference(ta.begin(), ta.end(), tb.begin(), tb.end(), std::back_inserter(rec.tagsCreated));
    std::set_difference(tb.begin(), tb.end(), ta.begin(), ta.end(), std::back_inserter(rec.tagsConsumed));
    std::set<std::string> locked = lockedMemories(n);
    rec.lockedCount = locked.size();
    rec.locked.assign(locked.begin(), locked.end());
    rec.confHash = rconfigHash(n);
    return n;
}

}  // namespace revses
