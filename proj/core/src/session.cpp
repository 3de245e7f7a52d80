#include "revses/session.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

#include "revses/syntax.hpp"
#include "revses/typecheck.hpp"

namespace revses {

int caseNumber(Mode m) { return static_cast<int>(m); }
bool isMultipartyMode(Mode m) { return caseNumber(m) >= 4; }
int rollbackStyle(Mode m) { return (caseNumber(m) - 1) % 3 + 1; }

Mode modeFromCase(int n) {
    if (n < 1 || n > 6) throw Error("BadMode", "case must be 1..6, got " + std::to_string(n));
    return static_cast<Mode>(n);
}

namespace {

uint64_t fnv1a(const std::string &s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string bwName(Mode m, int sub) {
    std::string base = "Bw(" + std::to_string(caseNumber(m)) + ")";
    return rollbackStyle(m) == 1 ? base : base + "-" + std::to_string(sub);
}

std::set<std::string> configNames(const SConfig &c) {
    std::set<std::string> out(c.restricted.begin(), c.restricted.end());
    auto add = [&](const P &p) {
        auto n = allNames(p);
        out.insert(n.begin(), n.end());
    };
    for (auto &it : c.items) {
        if (!it.isBox) {
            add(it.proc);
            continue;
        }
        out.insert(it.box.chan);
        add(it.box.body);
        for (auto &s : it.box.stack) add(s);
    }
    return out;
}

// Splice the components of p into c at position pos, hoisting restrictions.
void addPlain(SConfig &c, const P &p, size_t pos) {
    Soup s = normalizeSoup(toSoup(p));
    std::set<std::string> used = configNames(c);
    std::vector<SItem> fresh;
    std::vector<P> comps = s.comps;
    for (auto &r : s.restricted) {
        std::string name = r;
        if (std::find(c.restricted.begin(), c.restricted.end(), r) != c.restricted.end()) {
            name = freshAgainst(r, used);
            for (auto &q : comps) q = renameChannel(q, r, name);
        }
        used.insert(name);
        c.restricted.push_back(name);
    }
    for (auto &q : comps) fresh.push_back(SItem{false, q, {}});
    c.items.insert(c.items.begin() + static_cast<long>(std::min(pos, c.items.size())), fresh.begin(), fresh.end());
}

std::string boxKey(const SessionBox &b) {
    std::string k = "box{";
    for (auto &s : b.stack) k += canonicalText(s, b.chan) + " ; ";
    k += "|| " + canonicalText(b.body, b.chan) + "}";
    return k;
}

void checkFresh(const SConfig &c, const SRedex &r) {
    if (r.confHash != configHash(c))
        throw Error("StaleRedex", "redex '" + describe(r) + "' does not belong to this configuration");
}

}  // namespace

std::string describe(const SRedex &r) {
    std::string s = r.rule;
    if (!r.subject.empty()) s += " on " + r.subject;
    if (r.inner && !r.inner->label.empty()) s += " label " + r.inner->label;
    if (r.depth >= 0) s += " depth " + std::to_string(r.depth);
    return s;
}

SConfig initConfig(Mode mode, const std::vector<P> &processes, const PrimitiveTable *prims) {
    for (auto &p : processes) {
        if (isMultiparty(p) && !isMultipartyMode(mode))
            throw Error("ModeMismatch", "multiparty process in binary case " + std::to_string(caseNumber(mode)));
        if (hasCommit(p)) throw Error("ModeMismatch", "commit is only available in respic mode");
        FreeNames fn = freeNames(p);
        if (!fn.vars.empty()) throw Error("NotClosed", "free variable '" + *fn.vars.begin() + "'");
        SimpleVerdict v = isMultiparty(p) ? syntacticSimpleMulti(p) : isSimple(p, prims);
        if (v.simple && !fn.endpoints.empty())
            v = SimpleVerdict{false, Diagnostic{"NotSimple", p->span,
                                                "free endpoint " + showEndpoint(*fn.endpoints.begin())}};
        if (!v.simple) {
            std::string why = v.diagnosis ? v.diagnosis->rule + ": " + v.diagnosis->message : "not simple";
            throw Error("NotSimple", why);
        }
    }
    SConfig c;
    for (auto &p : processes) addPlain(c, p, c.items.size());
    return c;
}

std::string configKey(const SConfig &c) {
    std::vector<std::string> parts;
    for (auto &it : c.items)
        parts.push_back(it.isBox ? boxKey(it.box) : canonicalText(it.proc));
    std::sort(parts.begin(), parts.end());
    std::vector<std::string> res = c.restricted;
    std::sort(res.begin(), res.end());
    std::string k = "new";
    for (auto &r : res) k += " " + r;
    for (auto &p : parts) k += "\n" + p;
    return k;
}

uint64_t configHash(const SConfig &c) { return fnv1a(configKey(c)); }

std::string showConfig(const SConfig &c) {
    std::string out;
    if (!c.restricted.empty()) {
        out += "new";
        for (auto &r : c.restricted) out += " " + r;
        out += "\n";
    }
    for (size_t i = 0; i < c.items.size(); ++i) {
        auto &it = c.items[i];
        out += "[" + std::to_string(i) + "] ";
        if (!it.isBox) {
            out += printProcess(it.proc) + "\n";
            continue;
        }
        out += "box " + it.box.chan + " stack=" + std::to_string(it.box.stack.size()) + "\n";
        for (size_t d = 0; d < it.box.stack.size(); ++d)
            out += "    m[" + std::to_string(d) + "] " + printProcess(it.box.stack[d]) + "\n";
        out += "    body " + printProcess(it.box.body) + "\n";
    }
    if (c.items.empty()) out += "0\n";
    return out;
}

bool configCongruent(const SConfig &a, const SConfig &b) {
    if (configKey(a) == configKey(b)) return true;
    if (a.items.size() != b.items.size()) return false;
    auto ra = a.restricted, rb = b.restricted;
    std::sort(ra.begin(), ra.end());
    std::sort(rb.begin(), rb.end());
    if (ra != rb) return false;
    constexpr int budget = 8;
    std::vector<bool> used(b.items.size(), false);
    for (auto &x : a.items) {
        bool found = false;
        for (size_t j = 0; j < b.items.size() && !found; ++j) {
            if (used[j] || b.items[j].isBox != x.isBox) continue;
            auto &y = b.items[j];
            bool ok;
            if (!x.isBox) {
                ok = congruent(x.proc, y.proc, budget);
            } else {
                ok = x.box.stack.size() == y.box.stack.size();
                auto norm = [](const SessionBox &bx, const P &p) { return renameChannel(p, bx.chan, "@"); };
                for (size_t d = 0; ok && d < x.box.stack.size(); ++d)
                    ok = congruent(norm(x.box, x.box.stack[d]), norm(y.box, y.box.stack[d]), budget);
                ok = ok && congruent(norm(x.box, x.box.body), norm(y.box, y.box.body), budget);
            }
            if (ok) used[j] = found = true;
        }
        if (!found) return false;
    }
    return true;
}

std::vector<SRedex> enabledForward(const SConfig &c, Mode mode, const PrimitiveTable &prims) {
    std::vector<SRedex> out;
    uint64_t h = configHash(c);
    bool multi = isMultipartyMode(mode);

    std::vector<size_t> plain;
    std::vector<P> heads;
    for (size_t i = 0; i < c.items.size(); ++i)
        if (!c.items[i].isBox) {
            plain.push_back(i);
            heads.push_back(headNormal(c.items[i].proc));
        }
    HostOptions top;
    top.binary = !multi;
    top.multiparty = multi;
    top.sessionSteps = false;
    top.commits = false;
    for (auto &r : findHostRedexes(heads, prims, top)) {
        SRedex s;
        s.rule = hostRuleName(r.rule);
        for (size_t l : r.locus) s.locus.push_back(plain[l]);
        s.item = s.locus.front();
        s.subject = r.subject;
        s.confHash = h;
        out.push_back(s);
    }

    HostOptions in;
    in.binary = !multi;
    in.multiparty = multi;
    in.initiation = false;
    in.commits = false;
    for (size_t i = 0; i < c.items.size(); ++i) {
        if (!c.items[i].isBox) continue;
        Soup s = normalizeSoup(toSoup(c.items[i].box.body));
        std::vector<P> bh;
        for (auto &q : s.comps) bh.push_back(headNormal(q));
        for (auto &r : findHostRedexes(bh, prims, in)) {
            SRedex x;
            x.rule = hostRuleName(r.rule);
            x.item = i;
            x.inner = r;
            x.subject = r.subject.empty() ? c.items[i].box.chan : r.subject;
            x.confHash = h;
            out.push_back(x);
        }
    }
    return out;
}

SConfig applyForward(const SConfig &c, const SRedex &r, Mode mode, const PrimitiveTable &prims) {
    checkFresh(c, r);
    if (!r.forward) throw Error("StaleRedex", "backward redex passed to applyForward");
    SConfig n = c;
    if (r.inner) {
        SessionBox &b = n.items.at(r.item).box;
        Soup s = normalizeSoup(toSoup(b.body));
        std::vector<P> bh;
        for (auto &q : s.comps) bh.push_back(headNormal(q));
        HostFiring f = fireHost(*r.inner, bh, prims, "");
        Soup t;
        t.restricted = s.restricted;
        std::set<size_t> gone(r.inner->locus.begin(), r.inner->locus.end());
        for (size_t i = 0; i < s.comps.size(); ++i)
            if (!gone.count(i)) t.comps.push_back(s.comps[i]);
        for (auto &o : f.outs)
            if (o->kind != PK::Inact) t.comps.push_back(o);
        P body = fromSoup(t);
        if (rollbackStyle(mode) != 1) b.stack.insert(b.stack.begin(), b.body);
        b.body = body;
        return n;
    }

    std::vector<P> heads;
    for (size_t l : r.locus) heads.push_back(headNormal(c.items.at(l).proc));
    HostRedex hr;
    hr.subject = r.subject;
    for (size_t i = 0; i < r.locus.size(); ++i) hr.locus.push_back(i);
    if (r.rule == "If") {
        hr.rule = HostRule::If;
        HostFiring f = fireHost(hr, heads, prims, "");
        n.items.erase(n.items.begin() + static_cast<long>(r.item));
        addPlain(n, f.outs[0], r.item);
        return n;
    }
    hr.rule = r.rule == "M-Con" ? HostRule::MCon : HostRule::Con;
    std::set<std::string> used = configNames(c);
    std::string chan;
    do {
        chan = "_s" + std::to_string(n.counter++);
    } while (used.count(chan));
    HostFiring f = fireHost(hr, heads, prims, chan);
    std::vector<P> init;
    for (size_t l : r.locus) init.push_back(c.items[l].proc);
    SItem box;
    box.isBox = true;
    box.box.chan = chan;
    box.box.stack = {parOf(init)};
    std::vector<P> outs;
    for (auto &o : f.outs)
        if (o->kind != PK::Inact) outs.push_back(o);
    box.box.body = parOf(outs);
    size_t pos = *std::min_element(r.locus.begin(), r.locus.end());
    std::vector<size_t> gone = r.locus;
    std::sort(gone.rbegin(), gone.rend());
    for (size_t l : gone) n.items.erase(n.items.begin() + static_cast<long>(l));
    n.items.insert(n.items.begin() + static_cast<long>(pos), box);
    return n;
}

std::vector<SRedex> enabledBackward(const SConfig &c, Mode mode) {
    std::vector<SRedex> out;
    uint64_t h = configHash(c);
    int style = rollbackStyle(mode);
    for (size_t i = 0; i < c.items.size(); ++i) {
        if (!c.items[i].isBox) continue;
        const SessionBox &b = c.items[i].box;
        size_t n = b.stack.size();
        auto push = [&](int sub, int depth) {
            SRedex r;
            r.forward = false;
            r.rule = bwName(mode, sub);
            r.item = i;
            r.depth = depth;
            r.subject = b.chan;
            r.confHash = h;
            out.push_back(r);
        };
        if (style == 1) {
            push(1, -1);
        } else if (n == 1) {
            push(1, -1);
        } else {
            push(2, -1);
            if (style == 3) {
                push(3, -1);
                for (size_t d = 1; d + 1 < n; ++d) push(4, static_cast<int>(d));
            }
        }
    }
    return out;
}

SConfig applyBackward(const SConfig &c, const SRedex &r, Mode mode) {
    checkFresh(c, r);
    if (r.forward) throw Error("StaleRedex", "forward redex passed to applyBackward");
    SConfig n = c;
    SessionBox b = n.items.at(r.item).box;
    auto dissolve = [&] {
        n.items.erase(n.items.begin() + static_cast<long>(r.item));
        addPlain(n, b.stack.back(), r.item);
    };
    std::string tail = r.rule.substr(r.rule.find(')') + 1);
    if (rollbackStyle(mode) == 1 || tail == "-1" || tail == "-3") {
        dissolve();
    } else if (tail == "-2") {
        SessionBox &nb = n.items[r.item].box;
        nb.body = nb.stack.front();
        nb.stack.erase(nb.stack.begin());
    } else if (tail == "-4") {
        SessionBox &nb = n.items[r.item].box;
        size_t d = static_cast<size_t>(r.depth);
        if (r.depth < 1 || d + 1 >= nb.stack.size()) throw Error("StaleRedex", "depth out of range");
        nb.body = nb.stack[d];
        nb.stack.erase(nb.stack.begin(), nb.stack.begin() + static_cast<long>(d) + 1);
    } else {
        throw Error("StaleRedex", "unknown backward rule " + r.rule);
    }
    return n;
}

size_t boxCount(const SConfig &c) {
    return static_cast<size_t>(std::count_if(c.items.begin(), c.items.end(), [](auto &i) { return i.isBox; }));
}

Costs measureCosts(const SConfig &c, size_t boxIndex, Mode mode) {
    size_t item = c.items.size();
    for (size_t i = 0, k = 0; i < c.items.size(); ++i)
        if (c.items[i].isBox && k++ == boxIndex) {
            item = i;
            break;
        }
    if (item == c.items.size()) throw Error("NoSuchBox", "no box with index " + std::to_string(boxIndex));
    Costs out;
    out.mo = static_cast<int>(c.items[item].box.stack.size());
    // Full revert: whole-session rules when available, otherwise pop.
    SConfig cur = c;
    size_t before = boxCount(c);
    while (boxCount(cur) == before) {
        std::vector<SRedex> rs;
        for (auto &r : enabledBackward(cur, mode))
            if (r.item == item) rs.push_back(r);
        auto pick = std::find_if(rs.begin(), rs.end(), [](auto &r) {
            auto t = r.rule.substr(r.rule.find(')') + 1);
            return t.empty() || t == "-1" || t == "-3";
        });
        if (pick == rs.end()) pick = rs.begin();
        cur = applyBackward(cur, *pick, mode);
        ++out.br;
    }
    return out;
}

std::string traceLine(const TraceRecord &r) {
    nlohmann::ordered_json j;
    j["stepIndex"] = r.stepIndex;
    j["direction"] = r.forward ? "fw" : "bw";
    j["ruleName"] = r.rule;
    if (!r.boxChannel.empty()) j["boxChannel"] = r.boxChannel;
    j["stackLenBefore"] = r.stackLenBefore;
    j["stackLenAfter"] = r.stackLenAfter;
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(r.confHash));
    j["confHash"] = buf;
    return j.dump();
}

SConfig stepWithTrace(const SConfig &c, const SRedex &r, Mode mode, const PrimitiveTable &prims, size_t index,
                      TraceRecord &rec) {
    rec = TraceRecord{};
    rec.stepIndex = index;
    rec.forward = r.forward;
    rec.rule = r.rule;
    bool boxLocal = r.inner.has_value() || !r.forward;
    if (boxLocal) {
        rec.boxChannel = c.items.at(r.item).box.chan;
        rec.stackLenBefore = c.items[r.item].box.stack.size();
    }
    SConfig n = r.forward ? applyForward(c, r, mode, prims) : applyBackward(c, r, mode);
    if (r.forward && !r.inner && (r.rule == "Con" || r.rule == "M-Con")) {
        size_t pos = *std::min_element(r.locus.begin(), r.locus.end());
        rec.boxChannel = n.items[pos].box.chan;
        rec.stackLenAfter = n.items[pos].box.stack.size();
    } else if (boxLocal && r.item < n.items.size() && n.items[r.item].isBox &&
               n.items[r.item].box.chan == rec.boxChannel) {
        rec.stackLenAfter = n.items[r.item].box.stack.size();
    }
    rec.confHash = configHash(n);
    return n;
}

}  // namespace revses
