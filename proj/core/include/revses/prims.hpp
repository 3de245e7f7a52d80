#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "revses/term.hpp"

namespace revses {

// Sort names used by primitive signatures: "bool", "int", "str", "any".
struct Primitive {
    int arity = 0;
    std::vector<std::string> argSorts;
    std::string retSort;  // "any" means: same sort as the arguments
    std::function<Value(const std::vector<Value> &)> fn;
};

class PrimitiveTable {
public:
    // Operators (+, -, <=, &&, ...) plus the example functions addr, quote,
    // date, split, lastQuote, accept.
    static PrimitiveTable defaults();
    // Records "name arity sig impl", impl = "builtin ID" | "table k=v ... [*=v]".
    // Entries override the defaults they are loaded into.
    void loadFile(const std::string &path);
    void loadText(const std::string &text);

    void add(const std::string &name, Primitive p) { prims_[name] = std::move(p); }
    const Primitive *find(const std::string &name) const;
    const std::map<std::string, Primitive> &all() const { return prims_; }

private:
    std::map<std::string, Primitive> prims_;
};

Value evalExpr(const PrimitiveTable &tbl, const Expr &e);

}  // namespace revses
