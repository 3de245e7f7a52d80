#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "revses/prims.hpp"
#include "revses/stype.hpp"
#include "revses/syntax.hpp"
#include "revses/term.hpp"

namespace tsupport {

using namespace revses;

inline std::string corpusPath(const std::string &name) { return std::string(REVSES_CORPUS_DIR) + "/" + name; }

inline std::string readFile(const std::string &path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline P corpusTerm(const std::string &name) { return parseProcess(readFile(corpusPath(name))); }
inline std::vector<P> corpus(const std::string &name) { return parComponents(corpusTerm(name)); }

inline PrimitiveTable corpusPrims() {
    auto t = PrimitiveTable::defaults();
    t.loadFile(corpusPath("primitives.txt"));
    return t;
}

inline const std::string kBuyer =
    "req a(x). snd x<\"The Divine Comedy\">. rcv x(xq). if xq <= 20 then sel x lok. snd x<addr()>. "
    "rcv x(xd). 0 else sel x lquit. 0";
inline const std::string kSeller =
    "acc a(z). rcv z(zt). snd z<quote(zt)>. bra z {lok: rcv z(za). snd z<date()>. 0, lquit: 0}";

// Random ASTs whose printed form parses back to the same tree: bound names
// are fresh, free endpoints and shared channels come from disjoint pools.
class TermGen {
public:
    explicit TermGen(uint64_t seed) : rng_(seed) {}

    P process(int depth) {
        bound_.clear();
        procVars_.clear();
        counter_ = 0;
        return proc(depth);
    }

    Expr expr(int depth) {
        int pick = uniform(0, depth > 0 ? 5 : 2);
        switch (pick) {
        case 0: return mkVal(Value::integer(uniform(0, 99)));
        case 1: return mkVal(Value::boolean(uniform(0, 1)));
        case 2:
            if (!bound_.empty()) return mkVar(bound_[uniform(0, bound_.size() - 1)]);
            return mkVal(Value::str("w" + std::to_string(uniform(0, 9))));
        case 3: return mkOp("+", {expr(depth - 1), expr(depth - 1)});
        case 4: return mkOp("<=", {expr(depth - 1), expr(depth - 1)});
        default: return mkOp("&&", {expr(depth - 1), expr(depth - 1)});
        }
    }

    SType type(int depth) {
        int pick = uniform(0, depth > 0 ? 6 : 0);
        auto sort = [&] { return uniform(0, 1) ? Sort::integer() : Sort::boolean(); };
        switch (pick) {
        case 0: return tEnd();
        case 1: return tOut(sort(), type(depth - 1));
        case 2: return tIn(sort(), type(depth - 1));
        case 3: return tSel({{"l1", type(depth - 1)}, {"l2", type(depth - 1)}});
        case 4: return tBra({{"l1", type(depth - 1)}});
        case 5: return tRec("t", tOut(Sort::integer(), tVar("t")));
        default: return tIn(Sort::chan(tOut(Sort::integer(), tEnd())), type(depth - 1));
        }
    }

    size_t uniform(size_t lo, size_t hi) { return std::uniform_int_distribution<size_t>(lo, hi)(rng_); }

private:
    std::mt19937_64 rng_;
    std::vector<std::string> bound_;
    std::vector<std::string> procVars_;
    int counter_ = 0;

    std::string fresh(const char *base) { return base + std::to_string(++counter_); }

    Chan subject() {
        if (!bound_.empty() && uniform(0, 1)) return Chan::variable(bound_[uniform(0, bound_.size() - 1)]);
        static const char *names[] = {"s", "r"};
        return Chan::endpoint(Endpoint{names[uniform(0, 1)], uniform(0, 1) ? Pol::Dual : Pol::Plain, 0});
    }

    Shared shared() { return Shared{false, uniform(0, 1) ? "a" : "b"}; }

    template <class F> P binding(const std::string &x, F body) {
        bound_.push_back(x);
        P p = body();
        bound_.pop_back();
        return p;
    }

    P proc(int depth) {
        if (depth <= 0) {
            if (!procVars_.empty() && uniform(0, 3) == 0) return mkRecVar(procVars_.back());
            return mkInact();
        }
        switch (uniform(0, 15)) {
        case 0: {
            auto x = fresh("x");
            auto u = shared();
            return binding(x, [&] { return mkRequest(u, x, proc(depth - 1)); });
        }
        case 1: {
            auto x = fresh("x");
            auto u = shared();
            return binding(x, [&] { return mkAccept(u, x, proc(depth - 1)); });
        }
        case 2: return mkSend(subject(), expr(2), proc(depth - 1));
        case 3: {
            auto k = subject();
            auto x = fresh("y");
            return binding(x, [&] { return mkReceive(k, x, proc(depth - 1)); });
        }
        case 4: return mkSelect(subject(), uniform(0, 1) ? "l1" : "l2", proc(depth - 1));
        case 5: {
            auto k = subject();
            Arms arms{{"l1", proc(depth - 1)}};
            if (uniform(0, 1)) arms.emplace_back("l2", proc(depth - 1));
            return mkBranch(k, arms);
        }
        case 6: return mkIf(expr(2), proc(depth - 1), proc(depth - 1));
        case 7:
        case 8: return mkPar(proc(depth - 1), proc(depth - 1));
        case 9: return mkRes(uniform(0, 1) ? "s" : "c", proc(depth - 1));
        case 10: {
            auto X = "X" + std::to_string(++counter_);
            procVars_.push_back(X);
            P body = mkSend(subject(), expr(1), proc(depth - 1));
            procVars_.pop_back();
            return mkRec(X, body);
        }
        case 11: return mkCommit(subject(), proc(depth - 1));
        case 12: {
            auto x = fresh("x");
            auto u = shared();
            int n = static_cast<int>(uniform(2, 4));
            return binding(x, [&] { return mkMRequest(u, n, x, proc(depth - 1)); });
        }
        case 13: {
            if (bound_.empty()) return mkInact();
            auto k = Chan::variable(bound_.back());
            return mkMSend(k, static_cast<int>(uniform(1, 3)), expr(1), proc(depth - 1));
        }
        case 14: {
            auto k = Chan::endpoint(Endpoint{"m", Pol::Role, static_cast<int>(uniform(1, 3))});
            return mkMSelect(k, static_cast<int>(uniform(1, 3)), "l1", proc(depth - 1));
        }
        default: return mkInact();
        }
    }
};

}  // namespace tsupport
