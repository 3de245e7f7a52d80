#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "revses/host.hpp"
#include "revses/prims.hpp"
#include "revses/term.hpp"

namespace revses {

// The six single-session settings: {binary, multiparty} x {whole, multi-step, single-step}.
enum class Mode { Case1 = 1, Case2, Case3, Case4, Case5, Case6 };

int caseNumber(Mode m);
bool isMultipartyMode(Mode m);
// 1 = whole session, 2 = multi-step, 3 = single-step
int rollbackStyle(Mode m);
Mode modeFromCase(int n);

struct SessionBox {
    std::string chan;
    std::vector<P> stack;  // stack[0] is the top, stack.back() the initiating term
    P body;
};

struct SItem {
    bool isBox = false;
    P proc;          // plain item
    SessionBox box;  // box item
};

struct SConfig {
    std::vector<std::string> restricted;  // top-level shared channel restrictions
    std::vector<SItem> items;
    uint64_t counter = 0;  // fresh session channels
};

struct SRedex {
    bool forward = true;
    std::string rule;            // Con, Com, If, Bw(2)-2, ...
    size_t item = 0;             // box or first plain item
    std::vector<size_t> locus;   // plain items (initiation, top-level If)
    std::optional<HostRedex> inner;  // in-box host step
    int depth = -1;              // Bw(3)-4 / Bw(6)-4 target
    std::string subject;
    uint64_t confHash = 0;
};

std::string describe(const SRedex &r);

// Rejects non-simple processes with NotSimple.
SConfig initConfig(Mode mode, const std::vector<P> &processes, const PrimitiveTable *prims = nullptr);

// Stable key: box channels masked, items sorted.
std::string configKey(const SConfig &c);
uint64_t configHash(const SConfig &c);
std::string showConfig(const SConfig &c);
bool configCongruent(const SConfig &a, const SConfig &b);

std::vector<SRedex> enabledForward(const SConfig &c, Mode mode, const PrimitiveTable &prims);
SConfig applyForward(const SConfig &c, const SRedex &r, Mode mode, const PrimitiveTable &prims);
std::vector<SRedex> enabledBackward(const SConfig &c, Mode mode);
SConfig applyBackward(const SConfig &c, const SRedex &r, Mode mode);

struct Costs {
    int br = 0;  // backward steps of a full revert
    int mo = 0;  // stack length
};
// boxIndex counts boxes only, in item order.
Costs measureCosts(const SConfig &c, size_t boxIndex, Mode mode);
size_t boxCount(const SConfig &c);

struct TraceRecord {
    size_t stepIndex = 0;
    bool forward = true;
    std::string rule;
    std::string boxChannel;  // empty when not box-local
    size_t stackLenBefore = 0, stackLenAfter = 0;
    uint64_t confHash = 0;
};
std::string traceLine(const TraceRecord &r);

// Applies r and produces its trace record.
SConfig stepWithTrace(const SConfig &c, const SRedex &r, Mode mode, const PrimitiveTable &prims, size_t index,
                      TraceRecord &rec);

}  // namespace revses
