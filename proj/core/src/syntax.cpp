#include "revses/syntax.hpp"

#include <cctype>
#include <map>
#include <optional>

namespace revses {

// ============================================================================
// Lexer
// ============================================================================

namespace {

enum class Tok { Ident, Int, Str, Sym, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    int64_t num = 0;
    Span span;
};

const char *const kSymbols2[] = {"<=", ">=", "==", "!=", "&&", "||"};
const std::string kSymbols1 = ".()<>[]{},:|~+-*/%!?&=";

std::vector<Token> lex(const std::string &src) {
    std::vector<Token> out;
    size_t i = 0;
    int line = 1, col = 1;
    auto advance = [&](size_t n) {
        for (size_t k = 0; k < n && i < src.size(); ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        Token t;
        t.span = Span{i, i, line, col};
        if (static_cast<unsigned char>(c) >= 0x80)
            throw ParseError("non-ASCII character", t.span, {});
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i;
            while (j < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '\''))
                ++j;
            t.kind = Tok::Ident;
            t.text = src.substr(i, j - i);
            advance(j - i);
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            t.kind = Tok::Int;
            t.text = src.substr(i, j - i);
            try {
                t.num = std::stoll(t.text);
            } catch (const std::out_of_range &) {
                throw ParseError("integer literal out of range", t.span, {});
            }
            advance(j - i);
        } else if (c == '"') {
            size_t j = i + 1;
            std::string s;
            while (j < src.size() && src[j] != '"') {
                if (src[j] == '\\' && j + 1 < src.size()) ++j;
                if (src[j] == '\n') throw ParseError("unterminated string", t.span, {"\""});
                s += src[j++];
            }
            if (j >= src.size()) throw ParseError("unterminated string", t.span, {"\""});
            t.kind = Tok::Str;
            t.text = s;
            advance(j + 1 - i);
        } else {
            bool two = false;
            for (auto *sym : kSymbols2)
                if (src.compare(i, 2, sym) == 0) {
                    t.kind = Tok::Sym;
                    t.text = sym;
                    two = true;
                    break;
                }
            if (!two) {
                if (kSymbols1.find(c) == std::string::npos)
                    throw ParseError(std::string("unexpected character '") + c + "'", t.span, {});
                t.kind = Tok::Sym;
                t.text = std::string(1, c);
            }
            advance(t.text.size());
        }
        t.span.byteEnd = i;
        out.push_back(t);
    }
    Token end;
    end.kind = Tok::End;
    end.span = Span{src.size(), src.size(), line, col};
    out.push_back(end);
    return out;
}

const std::set<std::string> kKeywords = {"req", "acc", "snd", "rcv", "sel", "bra", "if",
                                          "then", "else", "new", "rec", "commit", "mreq",
                                          "macc", "true", "false"};

// ============================================================================
// Parser
// ============================================================================

struct Subject {
    Chan k;
    int target = -1;
};

class Parser {
public:
    explicit Parser(const std::string &src) : toks_(lex(src)) {}

    P processFile() {
        if (at(Tok::End)) fail({"process"});
        P p = par();
        if (!at(Tok::End)) fail({"|", "end of input"});
        return p;
    }

    SType typeFile() {
        SType t = type();
        if (!at(Tok::End)) fail({"end of input"});
        return t;
    }

    Sort sortFile() {
        Sort s = sort();
        if (!at(Tok::End)) fail({"end of input"});
        return s;
    }

    Expr exprFile() {
        Expr e = expr(false);
        if (!at(Tok::End)) fail({"end of input"});
        return e;
    }

private:
    std::vector<Token> toks_;
    size_t pos_ = 0;

    const Token &peek(size_t ahead = 0) const {
        return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
    }
    bool at(Tok k) const { return peek().kind == k; }
    bool atSym(const std::string &s, size_t ahead = 0) const {
        return peek(ahead).kind == Tok::Sym && peek(ahead).text == s;
    }
    bool atKw(const std::string &s) const { return peek().kind == Tok::Ident && peek().text == s; }

    [[noreturn]] void fail(std::set<std::string> expected) const {
        const Token &t = peek();
        std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
        std::string exp;
        for (auto &e : expected) exp += (exp.empty() ? "" : ", ") + e;
        throw ParseError("line " + std::to_string(t.span.line) + ", column " +
                             std::to_string(t.span.column) + ": unexpected " + got + ", expected " + exp,
                         t.span, std::move(expected));
    }

    void sym(const std::string &s) {
        if (!atSym(s)) fail({s});
        ++pos_;
    }
    void kw(const std::string &s) {
        if (!atKw(s)) fail({s});
        ++pos_;
    }
    std::string ident(const std::string &what) {
        if (!at(Tok::Ident) || kKeywords.count(peek().text)) fail({what});
        return toks_[pos_++].text;
    }
    int64_t integer(const std::string &what) {
        if (!at(Tok::Int)) fail({what});
        return toks_[pos_++].num;
    }
    int role(const std::string &what) {
        Span s = peek().span;
        int64_t r = integer(what);
        if (r < 1 || r > 1000000) throw ParseError("roles are positive integers", s, {what});
        return static_cast<int>(r);
    }

    P spanned(P p, const Span &start) {
        auto n = std::make_shared<Proc>(*p);
        n->span = start;
        n->span.byteEnd = pos_ > 0 ? toks_[pos_ - 1].span.byteEnd : start.byteEnd;
        return n;
    }

    // ---- processes ---------------------------------------------------------

    P par() {
        Span start = peek().span;
        P left = prefix();
        while (atSym("|")) {
            ++pos_;
            P right = prefix();
            left = spanned(mkPar(left, right), start);
        }
        return left;
    }

    P cont() {
        sym(".");
        return prefix();
    }

    Subject subject() {
        Subject s;
        if (atSym("~")) {
            ++pos_;
            std::string c = ident("session channel");
            s.k = Chan::endpoint(Endpoint{c, Pol::Dual, 0});
            return s;
        }
        std::string name = ident("session subject");
        std::vector<int> groups;
        while (atSym("[") && groups.size() < 2) {
            ++pos_;
            groups.push_back(role("role"));
            sym("]");
        }
        if (groups.empty()) {
            s.k = Chan::variable(name);
        } else if (groups.size() == 1) {
            s.k = Chan::variable(name);
            s.target = groups[0];
        } else {
            s.k = Chan::endpoint(Endpoint{name, Pol::Role, groups[0]});
            s.target = groups[1];
        }
        return s;
    }

    Arms arms() {
        sym("{");
        Arms out;
        std::set<std::string> seen;
        do {
            Span at = peek().span;
            std::string l = ident("label");
            if (!seen.insert(l).second) throw Error("DuplicateLabel", "label '" + l + "' at line " +
                                                                        std::to_string(at.line) + ", column " +
                                                                        std::to_string(at.column));
            sym(":");
            out.emplace_back(l, par());
        } while (atSym(",") && (++pos_, true));
        sym("}");
        return out;
    }

    P prefix() {
        Span start = peek().span;
        if (at(Tok::Int)) {
            if (peek().num != 0) fail({"0", "process"});
            ++pos_;
            return spanned(mkInact(), start);
        }
        if (atSym("(")) {
            ++pos_;
            P p = par();
            sym(")");
            return p;
        }
        if (!at(Tok::Ident))
            fail({"req", "acc", "snd", "rcv", "sel", "bra", "if", "new", "rec", "commit", "mreq", "macc", "0",
                  "(", "process variable"});
        std::string w = peek().text;
        if (w == "req" || w == "acc") {
            ++pos_;
            Shared u{true, ident("shared channel")};
            sym("(");
            std::string x = ident("variable");
            sym(")");
            P k = cont();
            return spanned(w == "req" ? mkRequest(u, x, k) : mkAccept(u, x, k), start);
        }
        if (w == "mreq" || w == "macc") {
            ++pos_;
            Shared u{true, ident("shared channel")};
            sym("[");
            int n = role(w == "mreq" ? "participant count" : "role");
            sym("]");
            sym("(");
            std::string x = ident("variable");
            sym(")");
            P k = cont();
            if (w == "mreq" && n < 2) throw ParseError("mreq needs at least 2 participants", start, {"2"});
            return spanned(w == "mreq" ? mkMRequest(u, n, x, k) : mkMAccept(u, n, x, k), start);
        }
        if (w == "snd") {
            ++pos_;
            Subject s = subject();
            sym("<");
            Expr e = expr(true);
            sym(">");
            P k = cont();
            return spanned(s.target > 0 ? mkMSend(s.k, s.target, e, k) : mkSend(s.k, e, k), start);
        }
        if (w == "rcv") {
            ++pos_;
            Subject s = subject();
            sym("(");
            std::string x = ident("variable");
            sym(")");
            P k = cont();
            return spanned(s.target > 0 ? mkMReceive(s.k, s.target, x, k) : mkReceive(s.k, x, k), start);
        }
        if (w == "sel") {
            ++pos_;
            Subject s = subject();
            std::string l = ident("label");
            P k = cont();
            return spanned(s.target > 0 ? mkMSelect(s.k, s.target, l, k) : mkSelect(s.k, l, k), start);
        }
        if (w == "bra") {
            ++pos_;
            Subject s = subject();
            Arms as = arms();
            return spanned(s.target > 0 ? mkMBranch(s.k, s.target, as) : mkBranch(s.k, as), start);
        }
        if (w == "commit") {
            ++pos_;
            Subject s = subject();
            if (s.target > 0) throw ParseError("commit takes a binary endpoint", start, {"endpoint"});
            P k = cont();
            return spanned(mkCommit(s.k, k), start);
        }
        if (w == "if") {
            ++pos_;
            Expr e = expr(false);
            kw("then");
            P a = prefix();
            kw("else");
            P b = prefix();
            return spanned(mkIf(e, a, b), start);
        }
        if (w == "new") {
            ++pos_;
            std::string c = ident("channel");
            return spanned(mkRes(c, cont()), start);
        }
        if (w == "rec") {
            ++pos_;
            std::string X = ident("process variable");
            return spanned(mkRec(X, cont()), start);
        }
        std::string X = ident("process");
        return spanned(mkRecVar(X), start);
    }

    // ---- expressions -------------------------------------------------------

    Expr expr(bool noGt) { return orExpr(noGt); }

    Expr orExpr(bool noGt) {
        Expr l = andExpr(noGt);
        while (atSym("||")) {
            ++pos_;
            l = mkOp("||", {l, andExpr(noGt)});
        }
        return l;
    }

    Expr andExpr(bool noGt) {
        Expr l = cmpExpr(noGt);
        while (atSym("&&")) {
            ++pos_;
            l = mkOp("&&", {l, cmpExpr(noGt)});
        }
        return l;
    }

    Expr cmpExpr(bool noGt) {
        Expr l = addExpr();
        for (const char *op : {"==", "!=", "<=", "<", ">=", ">"}) {
            std::string o = op;
            if (noGt && (o == ">" || o == ">=")) continue;
            if (atSym(o)) {
                ++pos_;
                return mkOp(o, {l, addExpr()});
            }
        }
        return l;
    }

    Expr addExpr() {
        Expr l = mulExpr();
        while (atSym("+") || atSym("-")) {
            std::string o = toks_[pos_++].text;
            l = mkOp(o, {l, mulExpr()});
        }
        return l;
    }

    Expr mulExpr() {
        Expr l = unary();
        while (atSym("*") || atSym("/") || atSym("%")) {
            std::string o = toks_[pos_++].text;
            l = mkOp(o, {l, unary()});
        }
        return l;
    }

    Expr unary() {
        if (atSym("!")) {
            ++pos_;
            return mkOp("!", {unary()});
        }
        if (atSym("-")) {
            ++pos_;
            if (at(Tok::Int)) return mkVal(Value::integer(-toks_[pos_++].num));
            return mkOp("neg", {unary()});
        }
        return primary();
    }

    Expr primary() {
        if (at(Tok::Int)) return mkVal(Value::integer(toks_[pos_++].num));
        if (at(Tok::Str)) return mkVal(Value::str(toks_[pos_++].text));
        if (atKw("true")) {
            ++pos_;
            return mkVal(Value::boolean(true));
        }
        if (atKw("false")) {
            ++pos_;
            return mkVal(Value::boolean(false));
        }
        if (atSym("(")) {
            ++pos_;
            Expr e = expr(false);
            sym(")");
            return e;
        }
        if (atSym("~")) {
            ++pos_;
            return mkVal(Value::endpoint(Endpoint{ident("session channel"), Pol::Dual, 0}));
        }
        if (!at(Tok::Ident) || kKeywords.count(peek().text))
            fail({"expression"});
        std::string name = toks_[pos_++].text;
        if (atSym("(")) {
            ++pos_;
            std::vector<Expr> args;
            if (!atSym(")")) {
                args.push_back(expr(false));
                while (atSym(",")) {
                    ++pos_;
                    args.push_back(expr(false));
                }
            }
            sym(")");
            return mkOp(name, std::move(args));
        }
        if (atSym("[")) {
            ++pos_;
            int r = role("role");
            sym("]");
            return mkVal(Value::endpoint(Endpoint{name, Pol::Role, r}));
        }
        return mkVar(name);
    }

    // ---- types -------------------------------------------------------------

    Sort sort() {
        if (atKw("bool") || atKw("int") || atKw("str")) {
            std::string s = toks_[pos_++].text;
            return s == "bool" ? Sort::boolean() : s == "int" ? Sort::integer() : Sort::str();
        }
        if (atSym("<")) {
            ++pos_;
            SType t = type();
            sym(">");
            return Sort::chan(t);
        }
        fail({"bool", "int", "str", "<"});
    }

    TArms typeArms() {
        sym("{");
        TArms out;
        std::set<std::string> seen;
        do {
            std::string l = ident("label");
            if (!seen.insert(l).second) throw Error("DuplicateLabel", "label '" + l + "' in type");
            sym(":");
            out.emplace_back(l, type());
        } while (atSym(",") && (++pos_, true));
        sym("}");
        return out;
    }

    SType type() {
        if (atSym("!") || atSym("?")) {
            bool out = toks_[pos_++].text == "!";
            if (atSym("(")) {
                ++pos_;
                SType a = type();
                sym(")");
                sym(".");
                SType b = type();
                return out ? tThr(a, b) : tCat(a, b);
            }
            Sort s = sort();
            sym(".");
            SType b = type();
            return out ? tOut(s, b) : tIn(s, b);
        }
        if (atSym("+") || atSym("&")) {
            bool sel = toks_[pos_++].text == "+";
            TArms as = typeArms();
            return sel ? tSel(as) : tBra(as);
        }
        if (atSym("(")) {
            ++pos_;
            SType t = type();
            sym(")");
            return t;
        }
        if (atKw("end")) {
            ++pos_;
            return tEnd();
        }
        if (atKw("commit")) {
            ++pos_;
            return tCommit();
        }
        if (atKw("rec")) {
            ++pos_;
            std::string v = ident("type variable");
            sym(".");
            return tRec(v, type());
        }
        if (at(Tok::Ident) && !kKeywords.count(peek().text) && peek().text != "end")
            return tVar(toks_[pos_++].text);
        fail({"!", "?", "+", "&", "end", "commit", "rec", "type variable"});
    }
};

// ============================================================================
// Name resolution
// ============================================================================

struct Usage {
    std::set<std::string> session, shared;
};

void collectUsage(const P &p, std::set<std::string> bound, Usage &u) {
    switch (p->kind) {
    case PK::Request: case PK::Accept: case PK::MRequest: case PK::MAccept:
        if (p->u.isVar && !bound.count(p->u.name)) u.shared.insert(p->u.name);
        break;
    case PK::Send: case PK::Receive: case PK::Select: case PK::Branch:
    case PK::MSend: case PK::MReceive: case PK::MSelect: case PK::MBranch: case PK::Commit:
        if (p->k.isVar) {
            if (!bound.count(p->k.var)) u.session.insert(p->k.var);
        } else {
            u.session.insert(p->k.ep.chan);
        }
        break;
    default:
        break;
    }
    switch (p->kind) {
    case PK::Request: case PK::Accept: case PK::Receive:
    case PK::MRequest: case PK::MAccept: case PK::MReceive:
        bound.insert(p->x);
        break;
    default:
        break;
    }
    if (p->p) collectUsage(p->p, bound, u);
    if (p->q) collectUsage(p->q, bound, u);
    for (auto &a : p->arms) collectUsage(a.second, bound, u);
}

Expr resolveExpr(const Expr &e, const std::set<std::string> &bound, const Usage &u) {
    switch (e->kind) {
    case EK::Val: return e;
    case EK::Var:
        if (bound.count(e->name)) return e;
        if (u.session.count(e->name)) return mkVal(Value::endpoint(Endpoint{e->name, Pol::Plain, 0}));
        if (u.shared.count(e->name)) return mkVal(Value::shared(e->name));
        return e;
    case EK::Op: {
        std::vector<Expr> args;
        for (auto &a : e->args) args.push_back(resolveExpr(a, bound, u));
        return mkOp(e->name, std::move(args));
    }
    }
    return e;
}

P resolve(const P &p, std::set<std::string> bound, const Usage &u) {
    auto n = std::make_shared<Proc>(*p);
    switch (p->kind) {
    case PK::Request: case PK::Accept: case PK::MRequest: case PK::MAccept:
        if (p->u.isVar && !bound.count(p->u.name)) n->u.isVar = false;
        break;
    case PK::Send: case PK::Receive: case PK::Select: case PK::Branch:
    case PK::MSend: case PK::MReceive: case PK::MSelect: case PK::MBranch: case PK::Commit:
        if (p->k.isVar && !bound.count(p->k.var)) {
            bool multi = p->kind == PK::MSend || p->kind == PK::MReceive || p->kind == PK::MSelect ||
                         p->kind == PK::MBranch;
            if (multi)
                throw ParseError("multiparty subject '" + p->k.var +
                                     "' must be a bound variable or an endpoint s[p][q]",
                                 p->span, {"s[p][q]"});
            n->k = Chan::endpoint(Endpoint{p->k.var, Pol::Plain, 0});
        }
        break;
    default:
        break;
    }
    if (p->e) n->e = resolveExpr(p->e, bound, u);
    switch (p->kind) {
    case PK::Request: case PK::Accept: case PK::Receive:
    case PK::MRequest: case PK::MAccept: case PK::MReceive:
        bound.insert(p->x);
        break;
    default:
        break;
    }
    if (p->p) n->p = resolve(p->p, bound, u);
    if (p->q) n->q = resolve(p->q, bound, u);
    for (auto &a : n->arms) a.second = resolve(a.second, bound, u);
    return n;
}

// ============================================================================
// Printer
// ============================================================================

bool isInfix(const Expr &e) {
    static const std::set<std::string> ops = {"||", "&&", "==", "!=", "<", "<=", ">", ">=",
                                              "+",  "-",  "*",  "/",  "%"};
    return e->kind == EK::Op && e->args.size() == 2 && ops.count(e->name);
}

std::string exprStr(const Expr &e) {
    switch (e->kind) {
    case EK::Val: return showValue(e->val);
    case EK::Var: return e->name;
    case EK::Op: {
        auto wrap = [](const Expr &a) { return isInfix(a) ? "(" + exprStr(a) + ")" : exprStr(a); };
        if (isInfix(e)) return wrap(e->args[0]) + " " + e->name + " " + wrap(e->args[1]);
        if (e->name == "!" && e->args.size() == 1) return "!" + wrap(e->args[0]);
        if (e->name == "neg" && e->args.size() == 1) {
            const Expr &a = e->args[0];
            bool atom = a->kind == EK::Var || (a->kind == EK::Op && !isInfix(a) && a->name != "neg" &&
                                               a->name != "!");
            return atom ? "-" + exprStr(a) : "-(" + exprStr(a) + ")";
        }
        std::string out = e->name + "(";
        for (size_t i = 0; i < e->args.size(); ++i) out += (i ? ", " : "") + exprStr(e->args[i]);
        return out + ")";
    }
    }
    return "?";
}

std::string chanStr(const Chan &k) { return k.isVar ? k.var : showEndpoint(k.ep); }

std::string subjStr(const Chan &k, int target) { return chanStr(k) + "[" + std::to_string(target) + "]"; }

void printP(const P &p, std::string &out);

void printCont(const P &p, std::string &out) {
    if (p->kind == PK::Par) {
        out += "(";
        printP(p, out);
        out += ")";
    } else {
        printP(p, out);
    }
}

std::string payload(const Expr &e) {
    bool gt = e->kind == EK::Op && (e->name == ">" || e->name == ">=") && e->args.size() == 2;
    return gt ? "(" + exprStr(e) + ")" : exprStr(e);
}

void printArms(const Arms &arms, std::string &out) {
    out += " {";
    for (size_t i = 0; i < arms.size(); ++i) {
        if (i) out += ", ";
        out += arms[i].first + ": ";
        printP(arms[i].second, out);
    }
    out += "}";
}

std::string sharedStr(const Shared &u) { return u.name; }

void printP(const P &p, std::string &out) {
    switch (p->kind) {
    case PK::Inact: out += "0"; return;
    case PK::Request:
    case PK::Accept:
        out += (p->kind == PK::Request ? "req " : "acc ") + sharedStr(p->u) + "(" + p->x + ").";
        printCont(p->p, out);
        return;
    case PK::MRequest:
    case PK::MAccept:
        out += (p->kind == PK::MRequest ? "mreq " : "macc ") + sharedStr(p->u) + "[" + std::to_string(p->role) +
               "](" + p->x + ").";
        printCont(p->p, out);
        return;
    case PK::Send:
        out += "snd " + chanStr(p->k) + "<" + payload(p->e) + ">.";
        printCont(p->p, out);
        return;
    case PK::MSend:
        out += "snd " + subjStr(p->k, p->role) + "<" + payload(p->e) + ">.";
        printCont(p->p, out);
        return;
    case PK::Receive:
        out += "rcv " + chanStr(p->k) + "(" + p->x + ").";
        printCont(p->p, out);
        return;
    case PK::MReceive:
        out += "rcv " + subjStr(p->k, p->role) + "(" + p->x + ").";
        printCont(p->p, out);
        return;
    case PK::Select:
        out += "sel " + chanStr(p->k) + " " + p->x + ".";
        printCont(p->p, out);
        return;
    case PK::MSelect:
        out += "sel " + subjStr(p->k, p->role) + " " + p->x + ".";
        printCont(p->p, out);
        return;
    case PK::Branch:
        out += "bra " + chanStr(p->k);
        printArms(p->arms, out);
        return;
    case PK::MBranch:
        out += "bra " + subjStr(p->k, p->role);
        printArms(p->arms, out);
        return;
    case PK::Commit:
        out += "commit " + chanStr(p->k) + ".";
        printCont(p->p, out);
        return;
    case PK::If:
        out += "if " + exprStr(p->e) + " then ";
        printCont(p->p, out);
        out += " else ";
        printCont(p->q, out);
        return;
    case PK::Par:
        printP(p->p, out);
        out += " | ";
        printCont(p->q, out);
        return;
    case PK::Res:
        out += "new " + p->x + ".";
        printCont(p->p, out);
        return;
    case PK::RecVar: out += p->x; return;
    case PK::Rec:
        out += "rec " + p->x + ".";
        printCont(p->p, out);
        return;
    }
}

void printT(const SType &t, std::string &out) {
    switch (t->kind) {
    case TK::Out: out += "!" + printSort(t->sort) + "."; printT(t->b, out); return;
    case TK::In: out += "?" + printSort(t->sort) + "."; printT(t->b, out); return;
    case TK::Thr: out += "!("; printT(t->a, out); out += ")."; printT(t->b, out); return;
    case TK::Cat: out += "?("; printT(t->a, out); out += ")."; printT(t->b, out); return;
    case TK::Sel:
    case TK::Bra:
        out += t->kind == TK::Sel ? "+{" : "&{";
        for (size_t i = 0; i < t->arms.size(); ++i) {
            if (i) out += ", ";
            out += t->arms[i].first + ": ";
            printT(t->arms[i].second, out);
        }
        out += "}";
        return;
    case TK::End: out += "end"; return;
    case TK::Commit: out += "commit"; return;
    case TK::Var: out += t->var; return;
    case TK::Rec: out += "rec " + t->var + "."; printT(t->b, out); return;
    case TK::Meta: out += "_" + std::to_string(t->meta); return;
    }
}

void contractive(const SType &t, std::set<std::string> guardless) {
    switch (t->kind) {
    case TK::Var:
        if (guardless.count(t->var))
            throw Error("NonContractiveType", "type variable '" + t->var + "' is not guarded");
        return;
    case TK::Rec:
        guardless.insert(t->var);
        contractive(t->b, guardless);
        return;
    case TK::Out:
    case TK::In:
        if (t->sort.kind == Sort::Chan) contractive(t->sort.t, {});
        contractive(t->b, {});
        return;
    case TK::Thr:
    case TK::Cat:
        contractive(t->a, {});
        contractive(t->b, {});
        return;
    case TK::Sel:
    case TK::Bra:
        for (auto &a : t->arms) contractive(a.second, {});
        return;
    default:
        return;
    }
}

}  // namespace

// ============================================================================
// Public entry points
// ============================================================================

P parseProcess(const std::string &text) {
    Parser ps(text);
    P raw = ps.processFile();
    Usage u;
    collectUsage(raw, {}, u);
    return resolve(raw, {}, u);
}

SType parseType(const std::string &text) {
    Parser ps(text);
    SType t = ps.typeFile();
    checkContractive(t);
    return t;
}

Sort parseSort(const std::string &text) {
    Parser ps(text);
    Sort s = ps.sortFile();
    if (s.kind == Sort::Chan) checkContractive(s.t);
    return s;
}

Expr parseExpr(const std::string &text) {
    Parser ps(text);
    return ps.exprFile();
}

std::string printProcess(const P &p) {
    std::string out;
    printP(p, out);
    return out;
}

std::string printExpr(const Expr &e) { return exprStr(e); }

std::string printType(const SType &t) {
    std::string out;
    printT(t, out);
    return out;
}

std::string printSort(const Sort &s) {
    switch (s.kind) {
    case Sort::Bool: return "bool";
    case Sort::Int: return "int";
    case Sort::Str: return "str";
    case Sort::Chan: return "<" + printType(s.t) + ">";
    case Sort::Meta: return "_s" + std::to_string(s.meta);
    }
    return "?";
}

void checkContractive(const SType &t) { contractive(t, {}); }

}  // namespace revses
