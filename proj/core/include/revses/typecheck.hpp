#pragma once

#include <map>
#include <optional>
#include <string>

#include "revses/error.hpp"
#include "revses/prims.hpp"
#include "revses/stype.hpp"
#include "revses/term.hpp"

namespace revses {

struct Diagnostic {
    std::string rule;  // e.g. BranchTypingMismatch, NonDisjointParallel
    Span span;
    std::string message;
};

class TypeError : public Error {
public:
    explicit TypeError(Diagnostic d) : Error(d.rule, d.message), diag_(std::move(d)) {}
    const Diagnostic &diagnostic() const { return diag_; }

private:
    Diagnostic diag_;
};

// Keys: variables by name, endpoints as printed (s, ~s).
using Typing = std::map<std::string, SType>;
using Sorting = std::map<std::string, Sort>;
using Basis = std::map<std::string, Typing>;

struct TypecheckOptions {
    bool simple = false;        // per-rule cardinality guards of simple processes
    bool allowCommit = true;    // ReSpiC commit prefix
    const PrimitiveTable *prims = nullptr;  // defaults when null
};

struct TypecheckResult {
    Typing delta;
    Sorting inferred;  // shared channels whose sort was inferred from usage
};

SType dualType(const SType &t);
bool typeEqual(const SType &a, const SType &b);
SType unfoldType(const SType &rec);

Sort typecheckExpr(const Sorting &gamma, const Expr &e, const PrimitiveTable &prims);

// Throws TypeError.
TypecheckResult typecheckProcess(const Basis &theta, const Sorting &gamma, const P &p,
                                 const TypecheckOptions &opts = {});

struct SimpleVerdict {
    bool simple = false;
    std::optional<Diagnostic> diagnosis;
};

// Binary: typing with simple-mode guards. Multiparty: syntactic check.
SimpleVerdict isSimple(const P &p, const PrimitiveTable *prims = nullptr);
SimpleVerdict syntacticSimpleMulti(const P &p);

std::string printTyping(const Typing &d);

}  // namespace revses
