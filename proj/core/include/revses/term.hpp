#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "revses/error.hpp"

namespace revses {

// ============================================================================
// Endpoints, channels, values
// ============================================================================

enum class Pol { Plain, Dual, Role };

struct Endpoint {
    std::string chan;
    Pol pol = Pol::Plain;
    int role = 0;  // only for Pol::Role

    bool binary() const { return pol != Pol::Role; }
    bool operator==(const Endpoint &) const = default;
    auto operator<=>(const Endpoint &) const = default;
};

Endpoint dualEndpoint(const Endpoint &e);
std::string showEndpoint(const Endpoint &e);

// Subject of a session prefix: a variable or a concrete endpoint.
struct Chan {
    bool isVar = false;
    std::string var;
    Endpoint ep;

    static Chan variable(std::string x) { return Chan{true, std::move(x), {}}; }
    static Chan endpoint(Endpoint e) { return Chan{false, {}, std::move(e)}; }
    bool operator==(const Chan &) const = default;
};

// Subject of req/acc: a variable or a shared channel name.
struct Shared {
    bool isVar = false;
    std::string name;
    bool operator==(const Shared &) const = default;
};

enum class VK { Bool, Int, Str, SharedCh, Ep };

struct Value {
    VK kind = VK::Int;
    int64_t i = 0;      // Bool (0/1) and Int
    std::string s;      // Str and SharedCh
    Endpoint ep;        // Ep

    static Value boolean(bool b) { Value v; v.kind = VK::Bool; v.i = b; return v; }
    static Value integer(int64_t n) { Value v; v.kind = VK::Int; v.i = n; return v; }
    static Value str(std::string t) { Value v; v.kind = VK::Str; v.s = std::move(t); return v; }
    static Value shared(std::string a) { Value v; v.kind = VK::SharedCh; v.s = std::move(a); return v; }
    static Value endpoint(Endpoint e) { Value v; v.kind = VK::Ep; v.ep = std::move(e); return v; }

    bool operator==(const Value &) const = default;
};

std::string showValue(const Value &v);

// ============================================================================
// Expressions
// ============================================================================

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

enum class EK { Val, Var, Op };

struct ExprNode {
    EK kind = EK::Val;
    Value val;
    std::string name;  // variable name or operator name
    std::vector<Expr> args;
};

Expr mkVal(Value v);
Expr mkVar(std::string x);
Expr mkOp(std::string op, std::vector<Expr> args);
bool exprEqual(const Expr &a, const Expr &b);

// ============================================================================
// Processes
// ============================================================================

struct Span {
    size_t byteStart = 0, byteEnd = 0;
    int line = 0, column = 0;
};

enum class PK {
    Inact, Request, Accept, Send, Receive, Select, Branch, If, Par, Res,
    RecVar, Rec, MRequest, MAccept, MSend, MReceive, MSelect, MBranch, Commit
};

struct Proc;
using P = std::shared_ptr<const Proc>;
using Arms = std::vector<std::pair<std::string, P>>;

struct Proc {
    PK kind = PK::Inact;
    Shared u;          // Request/Accept/MRequest/MAccept
    Chan k;            // session subject
    std::string x;     // bound variable, label (Select), channel (Res), process variable
    int role = 0;      // n of mreq, p of macc, target role of MSend/MReceive/MSelect/MBranch
    Expr e;            // Send payload, If guard
    P p, q;            // continuation(s)
    Arms arms;         // Branch/MBranch
    Span span;
};

P mkInact();
P mkRequest(Shared u, std::string x, P p);
P mkAccept(Shared u, std::string x, P p);
P mkSend(Chan k, Expr e, P p);
P mkReceive(Chan k, std::string x, P p);
P mkSelect(Chan k, std::string l, P p);
P mkBranch(Chan k, Arms arms);
P mkIf(Expr e, P p, P q);
P mkPar(P p, P q);
P mkRes(std::string c, P p);
P mkRecVar(std::string X);
P mkRec(std::string X, P p);
P mkMRequest(Shared u, int n, std::string x, P p);
P mkMAccept(Shared u, int role, std::string x, P p);
P mkMSend(Chan k, int to, Expr e, P p);
P mkMReceive(Chan k, int from, std::string x, P p);
P mkMSelect(Chan k, int to, std::string l, P p);
P mkMBranch(Chan k, int from, Arms arms);
P mkCommit(Chan k, P p);

// Copy of n with some fields replaced, keeping the span.
P withConts(const P &n, P p, P q = nullptr);

// Structural equality ignoring spans.
bool procEqual(const P &a, const P &b);

// Par of a list (left-associated); empty list gives 0.
P parOf(const std::vector<P> &ps);
// Flatten nested Par, dropping 0 components.
std::vector<P> parComponents(const P &p);

bool isMultiparty(const P &p);
bool hasCommit(const P &p);

// ============================================================================
// Binders and substitution
// ============================================================================

struct FreeNames {
    std::set<std::string> vars;
    std::set<std::string> shared;
    std::set<Endpoint> endpoints;
    std::set<std::string> tags;  // always empty for plain processes
};

FreeNames freeNames(const P &p);
bool varFree(const P &p, const std::string &x);
// Channel names (shared or session) occurring free.
std::set<std::string> freeChannels(const P &p);

P substitute(const P &p, const std::string &x, const Value &v);
Expr substituteExpr(const Expr &e, const std::string &x, const Value &v);
// Rename a free channel name (shared or session) throughout p.
P renameChannel(const P &p, const std::string &from, const std::string &to);
// Replace free occurrences of process variable X by q.
P substituteProcVar(const P &p, const std::string &X, const P &q);
P unfold(const P &rec);
// Unfold top-level recursion until the head is not rec (bounded).
P headNormal(const P &p, int budget = 16);

std::string freshName(const std::string &prefix);

// ============================================================================
// Structural congruence
// ============================================================================

P canonicalize(const P &p);
bool congruent(const P &p, const P &q, int unfoldBudget);
// printProcess(canonicalize(p)) with the free channel `mask` (if any) shown as @.
// Memoized per node and thread; terms are immutable so entries stay valid.
std::string canonicalText(const P &p, const std::string &mask = "");

}  // namespace revses
