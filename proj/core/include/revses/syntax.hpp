#pragma once

#include <set>
#include <string>

#include "revses/error.hpp"
#include "revses/stype.hpp"
#include "revses/term.hpp"

namespace revses {

class ParseError : public Error {
public:
    ParseError(const std::string &msg, Span span, std::set<std::string> expected)
        : Error("ParseError", msg), span_(span), expected_(std::move(expected)) {}
    const Span &span() const { return span_; }
    const std::set<std::string> &expected() const { return expected_; }

private:
    Span span_;
    std::set<std::string> expected_;
};

// Free bare names are classified by usage: a name used as a session subject
// anywhere in the text is an endpoint, a name used as a req/acc subject is a
// shared channel, anything else stays a (free) variable.
P parseProcess(const std::string &text);
SType parseType(const std::string &text);
// bool, int, str or a shared channel sort <T>
Sort parseSort(const std::string &text);
Expr parseExpr(const std::string &text);

std::string printProcess(const P &p);
std::string printExpr(const Expr &e);
std::string printType(const SType &t);
std::string printSort(const Sort &s);

// Contractivity check used by the type parser; throws NonContractiveType.
void checkContractive(const SType &t);

}  // namespace revses
