#pragma once

#include <stdexcept>
#include <string>

namespace revses {

// Every failure carries a stable code (ParseError, StaleRedex, ...).
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string &msg)
        : std::runtime_error(code + ": " + msg), code_(std::move(code)), detail_(msg) {}

    const std::string &code() const { return code_; }
    const std::string &detail() const { return detail_; }

private:
    std::string code_;
    std::string detail_;
};

}  // namespace revses
