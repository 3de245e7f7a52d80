#include "revses/prims.hpp"

#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>

#include "revses/syntax.hpp"

namespace revses {

namespace {

int64_t asInt(const Value &v, const std::string &op) {
    if (v.kind != VK::Int) throw Error("SortMismatch", op + " expects int, got " + showValue(v));
    return v.i;
}

bool asBool(const Value &v, const std::string &op) {
    if (v.kind != VK::Bool) throw Error("SortMismatch", op + " expects bool, got " + showValue(v));
    return v.i != 0;
}

using Fn = std::function<Value(const std::vector<Value> &)>;

Fn builtin(const std::string &id) {
    auto arith = [id](auto f) -> Fn {
        return [id, f](const std::vector<Value> &a) {
            return Value::integer(f(asInt(a[0], id), asInt(a[1], id)));
        };
    };
    auto cmp = [id](auto f) -> Fn {
        return [id, f](const std::vector<Value> &a) {
            return Value::boolean(f(asInt(a[0], id), asInt(a[1], id)));
        };
    };
    if (id == "add") return arith([](int64_t x, int64_t y) { return x + y; });
    if (id == "sub") return arith([](int64_t x, int64_t y) { return x - y; });
    if (id == "mul") return arith([](int64_t x, int64_t y) { return x * y; });
    if (id == "div" || id == "mod")
        return [id](const std::vector<Value> &a) {
            int64_t y = asInt(a[1], id);
            if (y == 0) throw Error("DivisionByZero", id);
            int64_t x = asInt(a[0], id);
            return Value::integer(id == "div" ? x / y : x % y);
        };
    if (id == "lt") return cmp([](int64_t x, int64_t y) { return x < y; });
    if (id == "le") return cmp([](int64_t x, int64_t y) { return x <= y; });
    if (id == "gt") return cmp([](int64_t x, int64_t y) { return x > y; });
    if (id == "ge") return cmp([](int64_t x, int64_t y) { return x >= y; });
    if (id == "eq") return [](const std::vector<Value> &a) { return Value::boolean(a[0] == a[1]); };
    if (id == "ne") return [](const std::vector<Value> &a) { return Value::boolean(!(a[0] == a[1])); };
    if (id == "and")
        return [id](const std::vector<Value> &a) {
            return Value::boolean(asBool(a[0], id) && asBool(a[1], id));
        };
    if (id == "or")
        return [id](const std::vector<Value> &a) {
            return Value::boolean(asBool(a[0], id) || asBool(a[1], id));
        };
    if (id == "not") return [id](const std::vector<Value> &a) { return Value::boolean(!asBool(a[0], id)); };
    if (id == "neg") return [id](const std::vector<Value> &a) { return Value::integer(-asInt(a[0], id)); };
    if (id == "half") return [id](const std::vector<Value> &a) { return Value::integer(asInt(a[0], id) / 2); };
    if (id == "id") return [](const std::vector<Value> &a) { return a[0]; };
    throw Error("UnknownPrimitive", "no builtin '" + id + "'");
}

Primitive prim(int arity, std::vector<std::string> args, std::string ret, Fn fn) {
    return Primitive{arity, std::move(args), std::move(ret), std::move(fn)};
}

Fn constant(Value v) {
    return [v](const std::vector<Value> &) { return v; };
}

std::vector<std::string> splitSig(const std::string &s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

// Split on whitespace, keeping double-quoted strings intact.
std::vector<std::string> words(const std::string &line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            cur += c;
            if (c == '\\' && i + 1 < line.size()) cur += line[++i];
            else if (c == '"') quoted = false;
        } else if (c == '"') {
            quoted = true;
            cur += c;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) out.push_back(cur), cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

Value literal(const std::string &text) {
    Expr e = parseExpr(text);
    if (e->kind == EK::Val) return e->val;
    if (e->kind == EK::Op && e->name == "-" && e->args.size() == 1 && e->args[0]->kind == EK::Val)
        return Value::integer(-e->args[0]->val.i);
    throw Error("PrimitiveFileError", "not a literal: " + text);
}

}  // namespace

PrimitiveTable PrimitiveTable::defaults() {
    PrimitiveTable t;
    const std::vector<std::string> ii{"int", "int"}, bb{"bool", "bool"}, aa{"any", "any"};
    t.add("+", prim(2, ii, "int", builtin("add")));
    t.add("-", prim(2, ii, "int", builtin("sub")));
    t.add("*", prim(2, ii, "int", builtin("mul")));
    t.add("/", prim(2, ii, "int", builtin("div")));
    t.add("%", prim(2, ii, "int", builtin("mod")));
    t.add("<", prim(2, ii, "bool", builtin("lt")));
    t.add("<=", prim(2, ii, "bool", builtin("le")));
    t.add(">", prim(2, ii, "bool", builtin("gt")));
    t.add(">=", prim(2, ii, "bool", builtin("ge")));
    t.add("==", prim(2, aa, "bool", builtin("eq")));
    t.add("!=", prim(2, aa, "bool", builtin("ne")));
    t.add("&&", prim(2, bb, "bool", builtin("and")));
    t.add("||", prim(2, bb, "bool", builtin("or")));
    t.add("!", prim(1, {"bool"}, "bool", builtin("not")));
    t.add("neg", prim(1, {"int"}, "int", builtin("neg")));

    t.add("addr", prim(0, {}, "str", constant(Value::str("Via Roma 1"))));
    t.add("date", prim(0, {}, "str", constant(Value::str("2026-11-02"))));
    t.add("quote", prim(1, {"str"}, "int", constant(Value::integer(18))));
    t.add("lastQuote", prim(1, {"str"}, "int", constant(Value::integer(16))));
    t.add("split", prim(1, {"int"}, "int", builtin("half")));
    t.add("accept", prim(1, {"int"}, "bool",
                         [](const std::vector<Value> &a) { return Value::boolean(asInt(a[0], "accept") <= 20); }));
    return t;
}

const Primitive *PrimitiveTable::find(const std::string &name) const {
    auto it = prims_.find(name);
    return it == prims_.end() ? nullptr : &it->second;
}

void PrimitiveTable::loadFile(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw Error("PrimitiveFileError", "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    loadText(ss.str());
}

void PrimitiveTable::loadText(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        auto cut = line.find("--");
        if (cut != std::string::npos) line = line.substr(0, cut);
        auto w = words(line);
        if (w.empty()) continue;
        auto bad = [&](const std::string &why) {
            return Error("PrimitiveFileError", "line " + std::to_string(lineNo) + ": " + why);
        };
        if (w.size() < 4) throw bad("expected: name arity sig impl");
        Primitive p;
        p.arity = std::stoi(w[1]);
        auto arrow = w[2].find("->");
        if (arrow == std::string::npos) throw bad("signature needs '->'");
        p.argSorts = splitSig(w[2].substr(0, arrow));
        p.retSort = w[2].substr(arrow + 2);
        if (static_cast<int>(p.argSorts.size()) != p.arity) throw bad("arity does not match signature");
        if (w[3] == "builtin") {
            if (w.size() != 5) throw bad("builtin takes one id");
            p.fn = builtin(w[4]);
        } else if (w[3] == "table") {
            std::vector<std::pair<std::vector<Value>, Value>> rows;
            std::optional<Value> dflt;
            for (size_t i = 4; i < w.size(); ++i) {
                auto eq = w[i].rfind('=');
                if (eq == std::string::npos) throw bad("table entry needs '='");
                std::string key = w[i].substr(0, eq), val = w[i].substr(eq + 1);
                Value v = literal(val);
                if (key == "*") {
                    dflt = v;
                    continue;
                }
                std::vector<Value> args;
                for (auto &k : splitSig(key)) args.push_back(literal(k));
                if (static_cast<int>(args.size()) != p.arity) throw bad("table key arity");
                rows.emplace_back(std::move(args), v);
            }
            std::string name = w[0];
            p.fn = [rows, dflt, name](const std::vector<Value> &a) {
                for (auto &r : rows)
                    if (r.first == a) return r.second;
                if (dflt) return *dflt;
                throw Error("PrimitiveUndefined", name + " has no entry for these arguments");
            };
        } else {
            throw bad("impl must be 'builtin' or 'table'");
        }
        prims_[w[0]] = std::move(p);
    }
}

Value evalExpr(const PrimitiveTable &tbl, const Expr &e) {
    switch (e->kind) {
    case EK::Val: return e->val;
    case EK::Var: throw Error("UnboundVariable", e->name);
    case EK::Op: {
        const Primitive *p = tbl.find(e->name);
        if (!p) throw Error("UnknownPrimitive", e->name);
        if (p->arity != static_cast<int>(e->args.size()))
            throw Error("PrimitiveArityMismatch", e->name + " expects " + std::to_string(p->arity) +
                                                      " arguments, got " + std::to_string(e->args.size()));
        std::vector<Value> args;
        for (auto &a : e->args) args.push_back(evalExpr(tbl, a));
        return p->fn(args);
    }
    }
    throw Error("UnknownPrimitive", "bad expression");
}

}  // namespace revses
