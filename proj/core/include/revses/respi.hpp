#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "revses/prims.hpp"
#include "revses/term.hpp"
#include "revses/typecheck.hpp"

namespace revses {

// Tags are paths: a root "t<i>" followed by atoms L, R (fork children) and
// c (reduction continuation). Derivation is injective, so tags never clash.
using Tag = std::string;

Tag rootTag(size_t i);  // 1-based
Tag forkLeft(const Tag &t);
Tag forkRight(const Tag &t);
Tag contTag(const Tag &t);

struct Thread {
    Tag tag;
    P body;
};

enum class MemKind { Init, Com, Sel, Choice, Fork, Commit };
std::string memKindName(MemKind k);

struct RMemory {
    MemKind kind = MemKind::Init;
    // Action memories: t1, t2 -> t1c, t2c. Choice: t1 -> t1c. Fork: t1 -> t1c (L), t2c (R).
    // Commit: t1 (the ~s side), t2.
    Tag t1, t2, t1c, t2c;
    // Init(a, x, y, p1, p2, chan)
    std::string shared, x, y;
    P p1, p2;
    std::string chan;  // Init: new session channel; Commit: committed session
    // Com(k, e, x, p1, p2) and Sel(k, label, p1, arms): k is the receiver's endpoint
    Endpoint k;
    Expr e;  // Com payload, Choice guard
    std::string label;
    Arms arms;

    std::string id() const;
};

std::vector<Tag> memHead(const RMemory &m);
std::vector<Tag> memTail(const RMemory &m);
std::string showMemory(const RMemory &m);

struct RConfig {
    std::set<std::string> restricted;  // channels; tag restrictions are implicit
    std::vector<Thread> threads;
    std::vector<RMemory> mems;
};

// Thread i gets tag t<i+1>; forks are split right away.
RConfig liftInitial(const std::vector<P> &processes);
// Splits t:(P|Q) into t.L, t.R and a fork memory; hoists new out of threads
// (hoisted channels are renamed c_<tag>). Runs to fixpoint.
RConfig splitForks(const RConfig &c);

struct RRedex {
    bool forward = true;
    std::string rule;        // fwCon, fwCom, fwLab, fwIf1, fwIf2, commit, bwCon, bwCom, bwLab, bwIf
    std::vector<Tag> tags;   // threads involved (forward) or memory head (backward)
    std::string memoryId;    // backward: memory to revert
    std::string subject;
    std::string label;
    uint64_t confHash = 0;
};
std::string describe(const RRedex &r);

std::string rconfigKey(const RConfig &c);
uint64_t rconfigHash(const RConfig &c);
std::string showRConfig(const RConfig &c);
bool rconfigCongruent(const RConfig &a, const RConfig &b);

// commits = false gives plain ReSpi (commit prefixes stay stuck).
std::vector<RRedex> enabledForwardR(const RConfig &c, const PrimitiveTable &prims, bool commits = true);
RConfig applyForwardR(const RConfig &c, const RRedex &r, const PrimitiveTable &prims);
std::vector<RRedex> enabledBackwardR(const RConfig &c);
RConfig applyBackwardR(const RConfig &c, const RRedex &r, const PrimitiveTable &prims);

const RMemory *findMemory(const RConfig &c, const std::string &id);
std::set<std::string> lockedMemories(const RConfig &c);

P forgetfulMap(const RConfig &c);

// Commit prefixes on sessions opened inside another session's scope.
// Committing those is legal but locks the enclosing session too.
std::vector<std::string> subordinateCommitWarnings(const P &p);

struct CorrespondenceReport {
    size_t statesVisited = 0;
    size_t edgesChecked = 0;
    std::vector<std::string> violations;
    bool truncated = false;
};
// Bounded cross-check of ReSpi steps, both directions, against the host calculus.
// mutate, when set, is applied to every explored configuration (mutation tests).
CorrespondenceReport checkCorrespondence(const RConfig &c, int depth, const PrimitiveTable &prims,
                                         RConfig (*mutate)(const RConfig &) = nullptr);

// Types threads by dropping tags, initialisation memories via their
// generating terms, and session memories with no initialisation memory for
// their channel via their generating terms as well.
Typing typecheckRespi(const Basis &theta, const Sorting &gamma, const RConfig &c, const PrimitiveTable &prims);

struct RTraceRecord {
    size_t stepIndex = 0;
    bool forward = true;
    std::string rule;
    std::string memoryId;
    std::vector<Tag> tagsCreated, tagsConsumed;
    size_t lockedCount = 0;
    std::vector<std::string> locked;
    uint64_t confHash = 0;
};
std::string traceLine(const RTraceRecord &r);
RConfig stepWithTraceR(const RConfig &c, const RRedex &r, const PrimitiveTable &prims, size_t index,
                       RTraceRecord &rec);

}  // namespace revses
