#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace revses {

struct STypeNode;
using SType = std::shared_ptr<const STypeNode>;
using TArms = std::vector<std::pair<std::string, SType>>;

struct Sort {
    enum K { Bool, Int, Str, Chan, Meta } kind = Int;
    SType t;       // Chan: <T>
    int meta = -1; // Meta: unification variable

    static Sort boolean() { return Sort{Bool, nullptr, -1}; }
    static Sort integer() { return Sort{Int, nullptr, -1}; }
    static Sort str() { return Sort{Str, nullptr, -1}; }
    static Sort chan(SType t) { return Sort{Chan, std::move(t), -1}; }
    static Sort metaVar(int m) { return Sort{Meta, nullptr, m}; }
};

enum class TK { Out, In, Thr, Cat, Sel, Bra, End, Var, Rec, Commit, Meta };

struct STypeNode {
    TK kind = TK::End;
    Sort sort;        // Out/In
    SType a;          // Thr/Cat payload
    SType b;          // continuation (Out/In/Thr/Cat), body (Rec)
    TArms arms;       // Sel/Bra
    std::string var;  // Var/Rec
    int meta = -1;    // Meta
};

SType tOut(Sort s, SType t);
SType tIn(Sort s, SType t);
SType tThr(SType a, SType t);
SType tCat(SType a, SType t);
SType tSel(TArms arms);
SType tBra(TArms arms);
SType tEnd();
SType tCommit();
SType tVar(std::string t);
SType tRec(std::string t, SType body);
SType tMeta(int m);

}  // namespace revses
