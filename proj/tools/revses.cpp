#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "revses/analysis.hpp"
#include "revses/respi.hpp"
#include "revses/session.hpp"
#include "revses/syntax.hpp"
#include "revses/typecheck.hpp"

using namespace revses;

namespace {

constexpr int kOk = 0, kUserError = 1, kViolation = 2, kInternal = 3;

struct Violation {
    int code;
};

struct RunConfig {
    std::string mode = "respi";
    uint64_t seed = 0;
    int maxSteps = 100;
    int depth = 6;
    std::string primitivesPath;
    std::string policy = "first";
};

std::string readFile(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw Error("FileError", "cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

P parseFile(const std::string &path) {
    try {
        return parseProcess(readFile(path));
    } catch (const ParseError &e) {
        throw Error("ParseError", path + ":" + std::to_string(e.span().line) + ":" + std::to_string(e.span().column) +
                                      ": " + e.detail());
    }
}

// Every file contributes its top-level parallel components.
std::vector<P> loadProcesses(const std::vector<std::string> &files) {
    std::vector<P> out;
    for (auto &f : files)
        for (auto &c : parComponents(parseFile(f))) out.push_back(c);
    return out;
}

PrimitiveTable loadPrims(const RunConfig &rc) {
    PrimitiveTable t = PrimitiveTable::defaults();
    if (!rc.primitivesPath.empty()) t.loadFile(rc.primitivesPath);
    return t;
}

uint64_t effectiveSeed(uint64_t seed) {
    if (const char *env = std::getenv("REVSES_SEED")) return std::strtoull(env, nullptr, 10);
    return seed;
}

bool isSessionMode(const std::string &m) { return m.size() == 5 && m.rfind("case", 0) == 0; }

Mode sessionMode(const std::string &m) {
    if (!isSessionMode(m) || m[4] < '1' || m[4] > '6') throw Error("BadMode", "unknown mode " + m);
    return modeFromCase(m[4] - '0');
}

void checkMode(const std::string &m) {
    if (m == "respi" || m == "respic") return;
    sessionMode(m);
}

std::string traceHeader(const std::string &mode) {
    nlohmann::ordered_json j;
    j["format"] = "revses-trace";
    j["version"] = 1;
    j["mode"] = mode;
    return j.dump();
}

std::string diagText(const Diagnostic &d) {
    return std::to_string(d.span.line) + ":" + std::to_string(d.span.column) + ": " + d.rule + ": " + d.message;
}

// ---------------------------------------------------------------------------
// A uniform front over both engines, used by run and step.

class Session {
public:
    Session(const std::string &mode, const std::vector<P> &procs, const PrimitiveTable &prims)
        : modeName_(mode), prims_(prims) {
        if (isSessionMode(mode)) {
            mode_ = sessionMode(mode);
            sc_ = initConfig(mode_, procs, &prims_);
        } else {
            for (auto &p : procs)
                if (isMultiparty(p)) throw Error("ModeMismatch", "the tagged calculus is binary only");
            commits_ = mode == "respic";
            if (!commits_)
                for (auto &p : procs)
                    if (hasCommit(p)) throw Error("ModeMismatch", "commit needs --mode respic");
            for (auto &p : procs)
                for (auto &w : subordinateCommitWarnings(p)) std::cerr << "warning: " << w << "\n";
            rc_ = liftInitial(procs);
        }
    }

    bool tagged() const { return !isSessionMode(modeName_); }

    std::vector<std::string> forward() {
        std::vector<std::string> out;
        if (tagged()) {
            rfw_ = enabledForwardR(rc_, prims_, commits_);
            for (auto &r : rfw_) out.push_back(describe(r));
        } else {
            sfw_ = enabledForward(sc_, mode_, prims_);
            for (auto &r : sfw_) out.push_back(describe(r));
        }
        return out;
    }

    std::vector<std::string> backward() {
        std::vector<std::string> out;
        if (tagged()) {
            rbw_ = enabledBackwardR(rc_);
            for (auto &r : rbw_) out.push_back(describe(r));
        } else {
            sbw_ = enabledBackward(sc_, mode_);
            for (auto &r : sbw_) out.push_back(describe(r));
        }
        return out;
    }

    // i indexes the lists of the last forward()/backward() call.
    std::string step(bool fw, size_t i) {
        std::string line;
        if (tagged()) {
            RTraceRecord rec;
            rc_ = stepWithTraceR(rc_, fw ? rfw_.at(i) : rbw_.at(i), prims_, index_++, rec);
            line = traceLine(rec);
        } else {
            TraceRecord rec;
            sc_ = stepWithTrace(sc_, fw ? sfw_.at(i) : sbw_.at(i), mode_, prims_, index_++, rec);
            line = traceLine(rec);
        }
        trace_.push_back(line);
        return line;
    }

    std::string show() const { return tagged() ? showRConfig(rc_) : showConfig(sc_); }

    std::string costs() const {
        std::string out;
        if (tagged()) {
            size_t total = 0;
            for (auto &m : rc_.mems)
                if (m.kind != MemKind::Fork) ++total;
            out = "memories " + std::to_string(total) + ", locked " + std::to_string(lockedMemories(rc_).size()) + "\n";
            return out;
        }
        size_t n = boxCount(sc_);
        if (n == 0) return "no sessions\n";
        size_t k = 0;
        for (auto &it : sc_.items) {
            if (!it.isBox) continue;
            Costs c = measureCosts(sc_, k++, mode_);
            out += it.box.chan + ": C_br=" + std::to_string(c.br) + " C_mo=" + std::to_string(c.mo) + "\n";
        }
        return out;
    }

    std::string exportTrace() const {
        std::string out = traceHeader(modeName_) + "\n";
        for (auto &l : trace_) out += l + "\n";
        return out;
    }

    const std::vector<std::string> &trace() const { return trace_; }

private:
    std::string modeName_;
    PrimitiveTable prims_;
    Mode mode_ = Mode::Case1;
    bool commits_ = false;
    SConfig sc_;
    RConfig rc_;
    std::vector<SRedex> sfw_, sbw_;
    std::vector<RRedex> rfw_, rbw_;
    std::vector<std::string> trace_;
    size_t index_ = 0;
};

// ---------------------------------------------------------------------------

int cmdTypecheck(const std::vector<std::string> &files, bool simple, const RunConfig &rc) {
    PrimitiveTable prims = loadPrims(rc);
    for (auto &f : files) {
        P p = parseFile(f);
        try {
            TypecheckOptions o;
            o.prims = &prims;
            TypecheckResult r = typecheckProcess({}, {}, p, o);
            std::cout << f << ": ok, typing " << printTyping(r.delta) << "\n";
            for (auto &kv : r.inferred) std::cout << "  " << kv.first << " : " << printSort(kv.second) << "\n";
        } catch (const TypeError &e) {
            if (e.code() != "MultipartyNotTyped") {
                std::cout << f << ":" << diagText(e.diagnostic()) << "\n";
                return kUserError;
            }
            if (!simple) {
                std::cout << f << ":" << diagText(e.diagnostic()) << "\n";
                return kUserError;
            }
        }
        if (simple) {
            SimpleVerdict v = isMultiparty(p) ? syntacticSimpleMulti(p) : isSimple(p, &prims);
            if (!v.simple) {
                std::cout << f << ": not simple";
                if (v.diagnosis) std::cout << ": " << diagText(*v.diagnosis);
                std::cout << "\n";
                return kUserError;
            }
            std::cout << f << ": simple\n";
        }
    }
    return kOk;
}

int cmdRun(const std::vector<std::string> &files, const RunConfig &rc, const std::string &tracePath) {
    checkMode(rc.mode);
    Session s(rc.mode, loadProcesses(files), loadPrims(rc));
    std::mt19937_64 rng(effectiveSeed(rc.seed));
    for (int i = 0; i < rc.maxSteps; ++i) {
        auto fw = s.forward();
        if (fw.empty()) break;
        size_t k = rc.policy == "random" ? std::uniform_int_distribution<size_t>(0, fw.size() - 1)(rng) : 0;
        s.step(true, k);
    }
    if (tracePath.empty()) {
        std::cout << s.exportTrace();
    } else {
        std::ofstream out(tracePath);
        out << s.exportTrace();
    }
    std::cerr << "steps: " << s.trace().size() << "\n" << s.costs();
    return kOk;
}

int cmdStep(const std::vector<std::string> &files, const RunConfig &rc, std::istream &in, std::ostream &out) {
    checkMode(rc.mode);
    Session s(rc.mode, loadProcesses(files), loadPrims(rc));
    std::string line;
    out << "> " << std::flush;
    while (std::getline(in, line)) {
        std::istringstream ws(line);
        std::string cmd;
        ws >> cmd;
        if (cmd.empty()) {
        } else if (cmd == "quit" || cmd == "q") {
            break;
        } else if (cmd == "ls") {
            auto fw = s.forward();
            auto bw = s.backward();
            if (fw.empty()) out << "no forward redexes\n";
            for (size_t i = 0; i < fw.size(); ++i) out << "fw " << i << ": " << fw[i] << "\n";
            if (bw.empty()) out << "no backward redexes\n";
            for (size_t i = 0; i < bw.size(); ++i) out << "bw " << i << ": " << bw[i] << "\n";
        } else if (cmd == "fw" || cmd == "bw") {
            bool fwd = cmd == "fw";
            auto list = fwd ? s.forward() : s.backward();
            long i = -1;
            if (!(ws >> i) || i < 0 || static_cast<size_t>(i) >= list.size()) {
                if (list.empty())
                    out << (fwd ? "no forward redexes\n" : "no backward redexes\n");
                else
                    out << "bad index; choose 0.." << list.size() - 1 << "\n";
            } else {
                out << s.step(fwd, static_cast<size_t>(i)) << "\n";
            }
        } else if (cmd == "show") {
            out << s.show();
        } else if (cmd == "costs") {
            out << s.costs();
        } else if (cmd == "export") {
            std::string path;
            ws >> path;
            if (path.empty()) {
                out << "usage: export FILE\n";
            } else {
                std::ofstream f(path);
                f << s.exportTrace();
                out << "wrote " << s.trace().size() << " records to " << path << "\n";
            }
        } else {
            out << "commands: ls, fw i, bw i, show, costs, export FILE, quit\n";
        }
        out << "> " << std::flush;
    }
    out << "\n";
    return kOk;
}

int cmdAnalyze(const std::vector<std::string> &files, const RunConfig &rc, const std::vector<std::string> &checks,
               int nMax, int maxLen, size_t trials, const std::string &exportPath, const std::string &exportFormat) {
    PrimitiveTable prims = loadPrims(rc);
    std::vector<P> procs = files.empty() ? std::vector<P>{} : loadProcesses(files);
    bool violated = false;
    auto emit = [&](const CheckReport &r) {
        std::cout << reportLine(r) << "\n";
        violated = violated || !r.violations.empty();
        if (r.truncated) std::cerr << "note: " << r.checkName << " exploration was cut at the bound\n";
    };
    auto needFiles = [&](const std::string &check) {
        if (procs.empty()) throw Error("NoInput", "check '" + check + "' needs input files");
    };
    for (auto &c : checks) {
        if (c == "costs") {
            std::vector<Mode> modes;
            for (int i = 1; i <= 6; ++i) modes.push_back(modeFromCase(i));
            CheckReport rep;
            rep.checkName = "costs";
            std::cout << "case     n  C_br  C_mo  expected\n";
            for (auto &row : costReport(modes, 1, nMax, prims)) {
                ++rep.checked;
                char buf[96];
                std::snprintf(buf, sizeof buf, "%4d  %4d  %4d  %4d  (%d,%d)%s\n", row.caseNo, row.n, row.measured.br,
                              row.measured.mo, row.expected.br, row.expected.mo, row.match() ? "" : "  MISMATCH");
                std::cout << buf;
                if (!row.match())
                    rep.violations.push_back("case " + std::to_string(row.caseNo) + " n=" + std::to_string(row.n));
            }
            emit(rep);
        } else if (c == "loop") {
            needFiles(c);
            std::string m = rc.mode == "respic" ? "respi" : rc.mode;
            auto kind = engineFromName(m);
            if (!kind) throw Error("BadMode", "unknown mode " + rc.mode);
            if (*kind == EngineKind::Case1 || *kind == EngineKind::Case4) {
                std::cerr << "loop: " << m
                          << " reverts a whole session in one step, so intermediate states cannot be restored and "
                             "the loop lemma does not apply\n";
                return kUserError;
            }
            emit(loopLemmaSuite(*kind, {procs}, trials, effectiveSeed(rc.seed), prims));
        } else if (c == "square") {
            needFiles(c);
            emit(squareCheck(liftInitial(procs), rc.depth, prims));
        } else if (c == "causal") {
            needFiles(c);
            emit(causalConsistencyCheck(liftInitial(procs), maxLen, prims));
        } else if (c == "correspondence") {
            needFiles(c);
            CorrespondenceReport cr = checkCorrespondence(liftInitial(procs), rc.depth, prims);
            CheckReport rep;
            rep.checkName = "correspondence";
            rep.statesVisited = cr.statesVisited;
            rep.checked = cr.edgesChecked;
            rep.violations = cr.violations;
            rep.truncated = cr.truncated;
            emit(rep);
        } else {
            throw Error("BadCheck", "unknown check '" + c + "' (loop, square, causal, costs, correspondence)");
        }
    }
    if (!exportPath.empty()) {
        needFiles("export");
        LtsOptions o;
        o.depth = rc.depth;
        Lts g = buildLTS(liftInitial(procs), prims, o);
        std::ofstream out(exportPath);
        out << (exportFormat == "dot" ? exportDot(g) : exportLines(g));
    }
    if (violated) throw Violation{kViolation};
    return kOk;
}

void addRunOptions(CLI::App *app, RunConfig &rc) {
    app->add_option("--mode", rc.mode, "case1..case6, respi or respic")->capture_default_str();
    app->add_option("--seed", rc.seed, "random seed (REVSES_SEED overrides)")->capture_default_str();
    app->add_option("--primitives", rc.primitivesPath, "primitive definitions file");
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"revses: reversible session calculi"};
    app.require_subcommand(1);
    RunConfig rc;
    std::vector<std::string> files;

    auto *tc = app.add_subcommand("typecheck", "type check processes");
    bool simple = false;
    tc->add_option("files", files, "process files")->required()->check(CLI::ExistingFile);
    tc->add_flag("--simple", simple, "also require simple processes");
    tc->add_option("--primitives", rc.primitivesPath, "primitive definitions file");

    auto *run = app.add_subcommand("run", "run forward and print a trace");
    std::string tracePath;
    run->add_option("files", files, "process files")->required()->check(CLI::ExistingFile);
    addRunOptions(run, rc);
    run->add_option("--policy", rc.policy, "first or random")
        ->check(CLI::IsMember({"first", "random"}))
        ->capture_default_str();
    run->add_option("--max-steps", rc.maxSteps, "step limit")->check(CLI::NonNegativeNumber)->capture_default_str();
    run->add_option("--trace", tracePath, "write the trace here instead of stdout");

    auto *step = app.add_subcommand("step", "interactive stepper reading commands from stdin");
    step->add_option("files", files, "process files")->required()->check(CLI::ExistingFile);
    addRunOptions(step, rc);

    auto *an = app.add_subcommand("analyze", "run bounded checks");
    std::vector<std::string> checks;
    int nMax = 50, maxLen = 4;
    size_t trials = 500;
    std::string exportPath, exportFormat = "lines";
    an->add_option("files", files, "process files")->check(CLI::ExistingFile);
    addRunOptions(an, rc);
    an->add_option("--checks", checks, "loop, square, causal, costs, correspondence")->delimiter(',')->required();
    an->add_option("--depth", rc.depth, "exploration depth")->check(CLI::NonNegativeNumber)->capture_default_str();
    an->add_option("--n-max", nMax, "largest session length for costs")->check(CLI::PositiveNumber)->capture_default_str();
    an->add_option("--max-len", maxLen, "trace length for causal")->check(CLI::NonNegativeNumber)->capture_default_str();
    an->add_option("--trials", trials, "probes for loop")->capture_default_str();
    an->add_option("--export", exportPath, "write the explored graph");
    an->add_option("--format", exportFormat, "lines or dot")->check(CLI::IsMember({"lines", "dot"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUserError;
    }

    try {
        if (tc->parsed()) return cmdTypecheck(files, simple, rc);
        if (run->parsed()) return cmdRun(files, rc, tracePath);
        if (step->parsed()) return cmdStep(files, rc, std::cin, std::cout);
        if (an->parsed()) return cmdAnalyze(files, rc, checks, nMax, maxLen, trials, exportPath, exportFormat);
    } catch (const Violation &v) {
        return v.code;
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        static const std::set<std::string> internal{"Internal", "StaleRedex", "MemoryMismatch"};
        return internal.count(e.code()) ? kInternal : kUserError;
    } catch (const std::exception &e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kInternal;
    }
    return kOk;
}
