#include "revses/analysis.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <functional>
#include <map>
#include <random>

#include "json.hpp"

namespace revses {

std::string showLabel(const TransitionLabel &l) {
    std::string s = (l.forward ? "fw " : "bw ") + l.memoryId;
    for (auto &f : l.forkMemoryIds) s += " " + f;
    return s;
}

namespace {

std::set<std::string> forkIds(const RConfig &c) {
    std::set<std::string> out;
    for (auto &m : c.mems)
        if (m.kind == MemKind::Fork) out.insert(m.id());
    return out;
}

}  // namespace

TransitionLabel labelOf(const RConfig &src, const RRedex &r, const RConfig &dst) {
    TransitionLabel l;
    l.forward = r.forward;
    std::set<std::string> a = forkIds(src), b = forkIds(dst);
    if (r.forward) {
        std::set<std::string> before;
        for (auto &m : src.mems) before.insert(m.id());
        for (auto &m : dst.mems)
            if (m.kind != MemKind::Fork && !before.count(m.id())) l.memoryId = m.id();
        std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::inserter(l.forkMemoryIds, l.forkMemoryIds.end()));
    } else {
        l.memoryId = r.memoryId;
        std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(l.forkMemoryIds, l.forkMemoryIds.end()));
    }
    return l;
}

std::set<Tag> stamp(const TransitionLabel &l, const RConfig &conf) {
    const RMemory *m = findMemory(conf, l.memoryId);
    if (!m) throw Error("UnresolvableMemory", "no memory " + l.memoryId + " in this configuration");
    std::set<Tag> out;
    for (auto &t : memHead(*m)) out.insert(t);
    for (auto &t : memTail(*m)) out.insert(t);
    std::vector<const RMemory *> forks;
    for (auto &id : l.forkMemoryIds) {
        const RMemory *f = findMemory(conf, id);
        if (!f) throw Error("UnresolvableMemory", "no fork memory " + id + " in this configuration");
        forks.push_back(f);
    }
    for (bool grew = true; grew;) {
        grew = false;
        for (auto *f : forks)
            if (out.count(f->t1) && (!out.count(f->t1c) || !out.count(f->t2c))) {
                out.insert(f->t1c);
                out.insert(f->t2c);
                grew = true;
            }
    }
    return out;
}

bool concurrent(const TransitionLabel &l1, const RConfig &conf1, const TransitionLabel &l2, const RConfig &conf2) {
    std::set<Tag> a = stamp(l1, conf1), b = stamp(l2, conf2);
    for (auto &t : a)
        if (b.count(t)) return false;
    return true;
}

Lts buildLTS(const RConfig &conf, const PrimitiveTable &prims, const LtsOptions &opts) {
    Lts g;
    g.depthBound = opts.depth;
    std::map<std::string, size_t> index;
    auto add = [&](const RConfig &c, int d) -> std::optional<size_t> {
        std::string k = rconfigKey(c);
        auto it = index.find(k);
        if (it != index.end()) return it->second;
        if (g.states.size() >= opts.maxStates) {
            g.truncated = true;
            return std::nullopt;
        }
        index[k] = g.states.size();
        g.states.push_back(c);
        g.keys.push_back(k);
        g.depth.push_back(d);
        g.out.emplace_back();
        return g.states.size() - 1;
    };
    add(conf, 0);
    for (size_t s = 0; s < g.states.size(); ++s) {
        std::vector<RRedex> rs = enabledForwardR(g.states[s], prims, opts.commits);
        if (opts.backward)
            for (auto &r : enabledBackwardR(g.states[s])) rs.push_back(r);
        for (auto &r : rs) {
            RConfig src = g.states[s];
            RConfig n = r.forward ? applyForwardR(src, r, prims) : applyBackwardR(src, r, prims);
            if (g.depth[s] >= opts.depth) {
                // unexplored only if the successor is genuinely new
                if (!index.count(rconfigKey(n))) g.truncated = true;
                continue;
            }
            auto t = add(n, g.depth[s] + 1);
            if (!t) continue;
            LtsEdge e{s, *t, labelOf(src, r, n), r};
            g.out[s].push_back(g.edges.size());
            g.edges.push_back(e);
        }
    }
    return g;
}

const RConfig &memoryHome(const Lts &g, const LtsEdge &e) {
    return e.label.forward ? g.states[e.to] : g.states[e.from];
}

bool edgesConcurrent(const Lts &g, const LtsEdge &a, const LtsEdge &b) {
    return concurrent(a.label, memoryHome(g, a), b.label, memoryHome(g, b));
}

std::string reportLine(const CheckReport &r) {
    nlohmann::ordered_json j;
    j["checkName"] = r.checkName;
    j["statesVisited"] = r.statesVisited;
    j["checked"] = r.checked;
    j["unknown"] = r.unknown;
    j["violations"] = r.violations;
    j["truncated"] = r.truncated;
    return j.dump();
}

CheckReport squareCheck(const Lts &g) {
    CheckReport rep;
    rep.checkName = "square";
    rep.statesVisited = g.states.size();
    rep.truncated = g.truncated;
    auto step = [&](size_t from, const TransitionLabel &l) -> std::optional<size_t> {
        for (size_t ei : g.out[from])
            if (g.edges[ei].label.sameStep(l)) return g.edges[ei].to;
        return std::nullopt;
    };
    for (size_t s = 0; s < g.states.size(); ++s) {
        if (g.depth[s] + 1 >= g.depthBound) continue;  // residuals would be unexplored
        auto &outs = g.out[s];
        for (size_t i = 0; i < outs.size(); ++i)
            for (size_t j = i + 1; j < outs.size(); ++j) {
                const LtsEdge &a = g.edges[outs[i]], &b = g.edges[outs[j]];
                if (!edgesConcurrent(g, a, b)) continue;
                ++rep.checked;
                auto n1 = step(a.to, b.label);
                auto n2 = step(b.to, a.label);
                if (!n1 || !n2 || *n1 != *n2)
                    rep.violations.push_back("state " + std::to_string(s) + ": " + showLabel(a.label) + " and " +
                                             showLabel(b.label) + " do not close");
            }
    }
    return rep;
}

CheckReport squareCheck(const RConfig &conf, int depth, const PrimitiveTable &prims) {
    LtsOptions o;
    o.depth = depth;
    return squareCheck(buildLTS(conf, prims, o));
}

size_t traceTarget(const Lts &g, const LtsTrace &t) { return t.edges.empty() ? t.source : g.edges[t.edges.back()].to; }

namespace {

struct Closure {
    std::set<std::vector<size_t>> members;
    bool complete = true;
};

size_t stateAt(const Lts &g, size_t source, const std::vector<size_t> &es, size_t i) {
    return i == 0 ? source : g.edges[es[i - 1]].to;
}

Closure closureOf(const Lts &g, const LtsTrace &t, size_t budget) {
    Closure c;
    std::deque<std::vector<size_t>> work{t.edges};
    c.members.insert(t.edges);
    while (!work.empty()) {
        std::vector<size_t> es = work.front();
        work.pop_front();
        auto push = [&](std::vector<size_t> n) {
            if (c.members.size() >= budget) {
                c.complete = false;
                return;
            }
            if (c.members.insert(n).second) work.push_back(std::move(n));
        };
        for (size_t i = 0; i + 1 < es.size(); ++i) {
            const LtsEdge &e1 = g.edges[es[i]], &e2 = g.edges[es[i + 1]];
            size_t a = stateAt(g, t.source, es, i);
            // tau ; inverse(tau) back to where it started
            if (e2.label.inverseOf(e1.label) && e2.to == a) {
                std::vector<size_t> n(es.begin(), es.begin() + i);
                n.insert(n.end(), es.begin() + i + 2, es.end());
                push(std::move(n));
            }
            if (!g.expanded(a)) {
                c.complete = false;
                continue;
            }
            for (size_t ei : g.out[a]) {
                const LtsEdge &f2 = g.edges[ei];
                if (!f2.label.sameStep(e2.label) || !edgesConcurrent(g, e1, f2)) continue;
                if (!g.expanded(f2.to)) {
                    c.complete = false;
                    continue;
                }
                for (size_t ej : g.out[f2.to]) {
                    const LtsEdge &f1 = g.edges[ej];
                    if (!f1.label.sameStep(e1.label) || f1.to != e2.to) continue;
                    std::vector<size_t> n = es;
                    n[i] = ei;
                    n[i + 1] = ej;
                    push(std::move(n));
                }
            }
        }
    }
    return c;
}

Verdict compare(const Closure &a, const Closure &b) {
    const auto &small = a.members.size() <= b.members.size() ? a.members : b.members;
    const auto &large = a.members.size() <= b.members.size() ? b.members : a.members;
    for (auto &m : small)
        if (large.count(m)) return Verdict::True;
    return a.complete && b.complete ? Verdict::False : Verdict::Unknown;
}

}  // namespace

Verdict causallyEquivalent(const Lts &g, const LtsTrace &a, const LtsTrace &b, size_t budget) {
    if (a.source != b.source) return Verdict::False;
    return compare(closureOf(g, a, budget), closureOf(g, b, budget));
}

CheckReport causalConsistencyCheck(const RConfig &conf, int maxLen, const PrimitiveTable &prims) {
    CheckReport rep;
    rep.checkName = "causal";
    LtsOptions o;
    o.depth = maxLen;
    Lts g = buildLTS(conf, prims, o);
    rep.statesVisited = g.states.size();
    rep.truncated = g.truncated;

    std::vector<LtsTrace> traces;
    std::function<void(LtsTrace &)> enumerate = [&](LtsTrace &t) {
        traces.push_back(t);
        if (static_cast<int>(t.edges.size()) == maxLen) return;
        for (size_t ei : g.out[traceTarget(g, t)]) {
            t.edges.push_back(ei);
            enumerate(t);
            t.edges.pop_back();
        }
    };
    LtsTrace empty{0, {}};
    enumerate(empty);

    std::vector<Closure> closures;
    for (auto &t : traces) closures.push_back(closureOf(g, t, 20000));
    for (size_t i = 0; i < traces.size(); ++i)
        for (size_t j = i + 1; j < traces.size(); ++j) {
            ++rep.checked;
            bool cofinal = traceTarget(g, traces[i]) == traceTarget(g, traces[j]);
            Verdict v = compare(closures[i], closures[j]);
            if (v == Verdict::Unknown) {
                ++rep.unknown;
                continue;
            }
            if ((v == Verdict::True) != cofinal && rep.violations.size() < 50) {
                auto show = [&](const LtsTrace &t) {
                    std::string s = "[";
                    for (size_t k = 0; k < t.edges.size(); ++k)
                        s += (k ? "; " : "") + showLabel(g.edges[t.edges[k]].label);
                    return s + "]";
                };
                rep.violations.push_back(show(traces[i]) + (cofinal ? " cofinal but not equivalent to "
                                                                     : " equivalent but not cofinal with ") +
                                         show(traces[j]));
            }
        }
    return rep;
}

// ---------------------------------------------------------------------------

std::optional<EngineKind> engineFromName(const std::string &s) {
    if (s == "respi") return EngineKind::Respi;
    if (s.size() == 5 && s.rfind("case", 0) == 0 && s[4] >= '1' && s[4] <= '6')
        return static_cast<EngineKind>(s[4] - '0');
    return std::nullopt;
}

std::string engineName(EngineKind k) {
    if (k == EngineKind::Respi) return "respi";
    return "case" + std::to_string(static_cast<int>(k));
}

namespace {

template <class T>
const T &pick(std::mt19937_64 &rng, const std::vector<T> &v) {
    return v[std::uniform_int_distribution<size_t>(0, v.size() - 1)(rng)];
}

bool chance(std::mt19937_64 &rng, double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; }

// Forward steps that leave a memory behind (top-level conditionals do not).
std::vector<SRedex> memorisedForward(const SConfig &c, Mode mode, const PrimitiveTable &prims) {
    std::vector<SRedex> out;
    for (auto &r : enabledForward(c, mode, prims))
        if (r.inner || r.rule == "Con" || r.rule == "M-Con") out.push_back(r);
    return out;
}

size_t totalStack(const SConfig &c) {
    size_t n = 0;
    for (auto &it : c.items)
        if (it.isBox) n += it.box.stack.size();
    return n;
}

bool forwardReaches(const SConfig &from, const SConfig &goal, int steps, Mode mode, const PrimitiveTable &prims) {
    std::set<std::string> seen{configKey(from)};
    std::vector<SConfig> frontier{from};
    if (configCongruent(from, goal)) return true;
    for (int d = 0; d < steps; ++d) {
        std::vector<SConfig> next;
        for (auto &c : frontier)
            for (auto &r : enabledForward(c, mode, prims)) {
                SConfig n = applyForward(c, r, mode, prims);
                if (configCongruent(n, goal)) return true;
                if (seen.insert(configKey(n)).second) next.push_back(n);
            }
        frontier = std::move(next);
    }
    return false;
}

void sessionProbe(Mode mode, const std::vector<P> &procs, std::mt19937_64 &rng, const PrimitiveTable &prims,
                  CheckReport &rep) {
    SConfig c = initConfig(mode, procs, &prims);
    int walk = std::uniform_int_distribution<int>(0, 10)(rng);
    for (int i = 0; i < walk; ++i) {
        auto fw = enabledForward(c, mode, prims);
        auto bw = enabledBackward(c, mode);
        if (fw.empty() && bw.empty()) break;
        if (!fw.empty() && (bw.empty() || chance(rng, 0.75)))
            c = applyForward(c, pick(rng, fw), mode, prims);
        else
            c = applyBackward(c, pick(rng, bw), mode);
    }
    ++rep.statesVisited;
    std::string where = " (case " + std::to_string(caseNumber(mode)) + ")\n" + showConfig(c);

    auto fw = memorisedForward(c, mode, prims);
    if (!fw.empty()) {
        const SRedex &r = pick(rng, fw);
        SConfig n = applyForward(c, r, mode, prims);
        bool back = false;
        for (auto &b : enabledBackward(n, mode)) back = back || configCongruent(applyBackward(n, b, mode), c);
        ++rep.checked;
        if (!back) rep.violations.push_back("forward " + describe(r) + " is not undone by any backward step" + where);
    }
    auto bw = enabledBackward(c, mode);
    if (!bw.empty()) {
        const SRedex &r = pick(rng, bw);
        SConfig n = applyBackward(c, r, mode);
        int popped = static_cast<int>(totalStack(c) - totalStack(n));
        ++rep.checked;
        if (!forwardReaches(n, c, std::max(popped, 1), mode, prims))
            rep.violations.push_back("backward " + describe(r) + " is not redone by forward steps" + where);
    }
}

void respiProbe(const std::vector<P> &procs, std::mt19937_64 &rng, const PrimitiveTable &prims, CheckReport &rep) {
    RConfig c = liftInitial(procs);
    int walk = std::uniform_int_distribution<int>(0, 10)(rng);
    for (int i = 0; i < walk; ++i) {
        auto fw = enabledForwardR(c, prims);
        auto bw = enabledBackwardR(c);
        if (fw.empty() && bw.empty()) break;
        if (!fw.empty() && (bw.empty() || chance(rng, 0.75)))
            c = applyForwardR(c, pick(rng, fw), prims);
        else
            c = applyBackwardR(c, pick(rng, bw), prims);
    }
    ++rep.statesVisited;
    std::string where = " (respi)\n" + showRConfig(c);

    auto fw = enabledForwardR(c, prims);
    if (!fw.empty()) {
        const RRedex &r = pick(rng, fw);
        RConfig n = applyForwardR(c, r, prims);
        TransitionLabel l = labelOf(c, r, n);
        bool back = false;
        if (findMemory(n, l.memoryId) && findMemory(n, l.memoryId)->kind != MemKind::Commit) {
            for (auto &b : enabledBackwardR(n))
                if (b.memoryId == l.memoryId) back = rconfigCongruent(applyBackwardR(n, b, prims), c);
            ++rep.checked;
            if (!back) rep.violations.push_back("forward " + describe(r) + " is not undone" + where);
        }
    }
    auto bw = enabledBackwardR(c);
    if (!bw.empty()) {
        const RRedex &r = pick(rng, bw);
        RConfig n = applyBackwardR(c, r, prims);
        bool redo = false;
        for (auto &f : enabledForwardR(n, prims)) redo = redo || rconfigCongruent(applyForwardR(n, f, prims), c);
        ++rep.checked;
        if (!redo) rep.violations.push_back("backward " + describe(r) + " is not redone" + where);
    }
}

}  // namespace

CheckReport loopLemmaSuite(EngineKind kind, const std::vector<std::vector<P>> &configs, size_t trials,
                           uint64_t seed, const PrimitiveTable &prims) {
    if (kind == EngineKind::Case1 || kind == EngineKind::Case4)
        throw Error("LoopLemmaUnavailable", engineName(kind) +
                                                " reverts whole sessions only; intermediate states cannot be restored");
    CheckReport rep;
    rep.checkName = "loop-" + engineName(kind);
    if (configs.empty()) return rep;
    std::mt19937_64 rng(seed);
    for (size_t t = 0; t < trials; ++t) {
        const auto &procs = configs[t % configs.size()];
        if (kind == EngineKind::Respi)
            respiProbe(procs, rng, prims, rep);
        else
            sessionProbe(static_cast<Mode>(static_cast<int>(kind)), procs, rng, prims, rep);
    }
    return rep;
}

// ---------------------------------------------------------------------------

Costs expectedCosts(Mode m, int n) {
    switch (rollbackStyle(m)) {
    case 1: return Costs{1, 1};
    case 2: return Costs{n, n};
    default: return Costs{1, n};
    }
}

std::vector<P> sessionOfLength(Mode m, int n) {
    bool multi = isMultipartyMode(m);
    P a = mkInact(), b = mkInact();
    for (int i = n - 1; i >= 1; --i) {
        Expr v = mkVal(Value::integer(i));
        std::string z = "z" + std::to_string(i);
        if (multi) {
            a = mkMSend(Chan::variable("x"), 1, v, a);
            b = mkMReceive(Chan::variable("y"), 2, z, b);
        } else {
            a = mkSend(Chan::variable("x"), v, a);
            b = mkReceive(Chan::variable("y"), z, b);
        }
    }
    Shared ch{false, "a"};
    if (multi) return {mkMRequest(ch, 2, "x", a), mkMAccept(ch, 1, "y", b)};
    return {mkRequest(ch, "x", a), mkAccept(ch, "y", b)};
}

std::vector<CostRow> costReport(const std::vector<Mode> &modes, int nMin, int nMax, const PrimitiveTable &prims) {
    std::vector<CostRow> rows;
    for (Mode m : modes)
        for (int n = nMin; n <= nMax; ++n) {
            SConfig c = initConfig(m, sessionOfLength(m, n), &prims);
            for (int i = 0; i < n; ++i) {
                auto fw = enabledForward(c, m, prims);
                if (fw.empty()) throw Error("Internal", "generated session stopped early");
                c = applyForward(c, fw.front(), m, prims);
            }
            if (!enabledForward(c, m, prims).empty()) throw Error("Internal", "generated session is too long");
            rows.push_back(CostRow{caseNumber(m), n, measureCosts(c, 0, m), expectedCosts(m, n)});
        }
    return rows;
}

// ---------------------------------------------------------------------------

std::string exportLines(const Lts &g) {
    std::string out;
    for (size_t s = 0; s < g.states.size(); ++s) {
        nlohmann::ordered_json j;
        j["record"] = "node";
        j["id"] = s;
        j["depth"] = g.depth[s];
        char buf[20];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rconfigHash(g.states[s])));
        j["confHash"] = buf;
        out += j.dump() + "\n";
    }
    for (auto &e : g.edges) {
        nlohmann::ordered_json j;
        j["record"] = "edge";
        j["from"] = e.from;
        j["to"] = e.to;
        j["direction"] = e.label.forward ? "fw" : "bw";
        j["ruleName"] = e.redex.rule;
        j["memoryId"] = e.label.memoryId;
        j["forkMemoryIds"] = e.label.forkMemoryIds;
        out += j.dump() + "\n";
    }
    return out;
}

std::string exportDot(const Lts &g) {
    std::string out = "digraph lts {\n";
    for (size_t s = 0; s < g.states.size(); ++s)
        out += "  n" + std::to_string(s) + " [label=\"" + std::to_string(s) + "\"];\n";
    for (auto &e : g.edges)
        out += "  n" + std::to_string(e.from) + " -> n" + std::to_string(e.to) + " [label=\"" + e.redex.rule + " " +
               e.label.memoryId + "\"" + (e.label.forward ? "" : ", style=dashed") + "];\n";
    return out + "}\n";
}

}  // namespace revses
