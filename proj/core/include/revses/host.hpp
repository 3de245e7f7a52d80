#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "revses/prims.hpp"
#include "revses/term.hpp"

namespace revses {

// A process as a flat multiset of components under top-level restrictions.
struct Soup {
    std::vector<std::string> restricted;
    std::vector<P> comps;
};

// Flattens |, hoists new (renaming on clashes, deterministically) and drops 0.
// Recursive components stay folded; they are unfolded at match time.
Soup toSoup(const P &p);
P fromSoup(const Soup &s);
// Expands recursive components whose unfolding starts with | or new.
Soup normalizeSoup(const Soup &s);

// Every identifier occurring in p, bound or free.
std::set<std::string> allNames(const P &p);
// First of base, base1, base2, ... not in used.
std::string freshAgainst(const std::string &base, const std::set<std::string> &used);

// Host reduction rules of the binary and multiparty calculi.
enum class HostRule { Con, Com, Lab, If, MCon, MCom, MLab, Commit };
std::string hostRuleName(HostRule r);

struct HostRedex {
    HostRule rule;
    std::vector<size_t> locus;  // component indices; Con/MCon: requester first
    std::string subject;        // shared channel or endpoint as printed
    std::string label;          // Lab/MLab: chosen label
};

struct HostFiring {
    std::vector<P> outs;          // one continuation per locus entry
    std::optional<Value> value;   // Com/MCom: transmitted value
    bool thenBranch = false;      // If
};

struct HostOptions {
    bool binary = true;
    bool multiparty = true;
    bool conditionals = true;
    bool initiation = true;
    bool sessionSteps = true;
    bool commits = true;
};

// heads[i] must already be in head normal form (see headNormal).
std::vector<HostRedex> findHostRedexes(const std::vector<P> &heads, const PrimitiveTable &prims,
                                       const HostOptions &opts = {});
// chan: fresh session channel used by Con/MCon.
HostFiring fireHost(const HostRedex &r, const std::vector<P> &heads, const PrimitiveTable &prims,
                    const std::string &chan);

// One-step successors of a closed process under the plain calculus.
struct HostStep {
    HostRedex redex;
    P result;
};
std::vector<HostStep> hostSuccessors(const P &p, const PrimitiveTable &prims);

}  // namespace revses
