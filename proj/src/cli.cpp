#include "gkm/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "gkm/adversary.hpp"
#include "gkm/sim.hpp"

namespace gkm {

namespace {

namespace fs = std::filesystem;

struct Common {
    std::string scheme = "lkh";
    std::uint64_t seed = 0x5eed;
    std::size_t key_width = crypto::kDefaultKeyBits;
    std::string format = "csv";

    SchemeKind kind() const {
        auto k = parse_scheme(scheme);
        if (!k) {
            throw InvalidScript("unknown scheme '" + scheme + "'");
        }
        return *k;
    }
    SchemeConfig config() const { return SchemeConfig{crypto::KeyWidth{key_width}, seed}; }
};

void add_common(CLI::App& cmd, Common& c, bool with_scheme = true) {
    if (with_scheme) {
        cmd.add_option("--scheme", c.scheme, "simple | lkh | oft | oft-secure | lkh-bottomup")
            ->check(CLI::IsMember({"simple", "lkh", "oft", "oft-secure", "lkh-bottomup"}));
    }
    cmd.add_option("--seed", c.seed, "RNG seed");
    cmd.add_option("--key-width", c.key_width, "key width in bits (64..256, multiple of 8)");
    cmd.add_option("--format", c.format, "csv | plain")->check(CLI::IsMember({"csv", "plain"}));
}

/// Write-then-rename so readers never see a partial file.
void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw Error("cannot write " + tmp.string());
        }
        f << content;
    }
    fs::rename(tmp, path);
}

std::string verdict(bool success, bool expected) {
    return std::string(success ? "SUCCESS" : "RESISTED") + (success == expected ? " (expected)" : " (unexpected)");
}

// ---------------------------------------------------------------------------
// run

struct RunArgs {
    Common common;
    std::string script;
    int perfect_height = 0;
    std::string event;
    std::size_t members = 0;
    std::size_t events = 0;
    std::string out_dir = ".";
};

int cmd_run(const RunArgs& a, std::ostream& out) {
    const SchemeKind kind = a.common.kind();
    const bool csv = a.common.format == "csv";
    const fs::path dir(a.out_dir);
    const std::string stem = to_string(kind);

    CostReport costs;
    std::string transcript;
    if (a.perfect_height > 0) {
        const auto both = measure_perfect(kind, a.perfect_height, a.common.config());
        for (const auto& row : both.rows) {
            if (a.event.empty() || a.event == row.event) {
                costs.rows.push_back(row);
            }
        }
    } else {
        EventScript script;
        if (!a.script.empty()) {
            script = EventScript::load(a.script);
        } else if (a.members > 0 || a.events > 0) {
            script = random_script(a.members, a.events, a.common.seed);
        }
        auto scheme = make_scheme(kind, a.common.config());
        try {
            auto res = run_script(*scheme, script);
            costs = std::move(res.costs);
            transcript = res.transcript.dump();
        } catch (const ConsistencyViolation& e) {
            out << "consistency violation: " << e.what() << '\n';
            return kExitMismatch;
        }
        write_file(dir / (stem + "_transcript.csv"), transcript);
    }
    const std::string report = csv ? costs.csv() : costs.plain();
    write_file(dir / (stem + (csv ? "_costs.csv" : "_costs.txt")), report);
    out << report;
    return kExitOk;
}

// ---------------------------------------------------------------------------
// compare

std::string flag(long measured, std::optional<long> formula) {
    return formula && measured == *formula ? "match" : "MISMATCH";
}

int cmd_compare(const Common& c, const std::vector<int>& heights, std::ostream& out) {
    const auto cfg = c.config();
    std::ostringstream csv;
    csv << "height,scheme,event,encryptions,transmissions,formula,flag\n";
    std::ostringstream plain;
    plain << std::fixed << std::setprecision(3);
    plain << "Broadcast costs on perfect trees (measured / formula)\n";
    plain << std::setw(6) << "h" << std::setw(16) << "lkh join" << std::setw(16) << "lkh leave" << std::setw(16)
          << "bottomup join" << std::setw(16) << "bottomup leave" << std::setw(12) << "join ratio" << std::setw(13)
          << "leave ratio" << '\n';

    auto cell = [](const CostRow& r) { return std::to_string(r.encryptions) + "/" + std::to_string(r.formula.value_or(0)); };
    auto emit = [&](int h, const CostRow& r) {
        csv << h << ',' << r.scheme << ',' << r.event << ',' << r.encryptions << ',' << r.transmissions << ','
            << r.formula.value_or(0) << ',' << flag(static_cast<long>(r.encryptions), r.formula) << '\n';
    };

    for (int h : heights) {
        const auto lkh = measure_perfect(SchemeKind::lkh, h, cfg).rows;
        const auto blkh = measure_perfect(SchemeKind::lkh_bottomup, h, cfg).rows;
        for (const auto& r : lkh) {
            emit(h, r);
        }
        for (const auto& r : blkh) {
            emit(h, r);
        }
        const double join_ratio = static_cast<double>(blkh[0].encryptions) / static_cast<double>(lkh[0].encryptions);
        const double leave_ratio = static_cast<double>(blkh[1].encryptions) / static_cast<double>(*lkh[1].formula);
        plain << std::setw(6) << h << std::setw(16) << cell(lkh[0]) << std::setw(16) << cell(lkh[1]) << std::setw(16)
              << cell(blkh[0]) << std::setw(16) << cell(blkh[1]) << std::setw(12) << join_ratio << std::setw(13)
              << leave_ratio << '\n';
        csv << h << ",ratio,join," << join_ratio << ",,,\n" << h << ",ratio,leave," << leave_ratio << ",,,\n";
    }

    plain << "\nOFT family on perfect trees (encryptions/transmissions vs formula)\n";
    plain << std::setw(6) << "h" << std::setw(18) << "oft join" << std::setw(18) << "oft leave" << std::setw(18)
          << "secure join" << std::setw(18) << "secure leave" << std::setw(10) << "flag" << '\n';
    for (int h : heights) {
        const auto oft = measure_perfect(SchemeKind::oft, h, cfg).rows;
        const auto sec = measure_perfect(SchemeKind::oft_secure, h, cfg).rows;
        for (const auto& r : oft) {
            emit(h, r);
        }
        for (const auto& r : sec) {
            emit(h, r);
        }
        auto ocell = [](const CostRow& r) {
            return std::to_string(r.encryptions) + "/" + std::to_string(r.transmissions) + " vs " +
                   std::to_string(r.formula.value_or(0));
        };
        const bool ok = sec[1].encryptions == 5 && sec[1].transmissions == 5;
        plain << std::setw(6) << h << std::setw(18) << ocell(oft[0]) << std::setw(18) << ocell(oft[1]) << std::setw(18)
              << ocell(sec[0]) << std::setw(18) << ocell(sec[1]) << std::setw(10) << (ok ? "match" : "MISMATCH")
              << '\n';
    }
    out << (c.format == "csv" ? csv.str() : plain.str());
    return kExitOk;
}

// ---------------------------------------------------------------------------
// attack

struct AttackArgs {
    Common common;
    std::string scenario = "horng";
    std::size_t scripts = 70;
    std::size_t events = 24;
};

int cmd_attack(const AttackArgs& a, std::ostream& out) {
    const SchemeKind kind = a.common.kind();
    const auto cfg = a.common.config();
    if (a.scenario != "secrecy-sweep") {
        AttackOutcome o;
        if (a.scenario == "horng") {
            o = run_horng(kind, cfg);
        } else {
            o = run_kuchen(kind, a.scenario == "kuchen1" ? 1 : 2, cfg);
        }
        const bool expected = kind == SchemeKind::oft;
        out << o.report() << "verdict: " << verdict(o.success, expected) << '\n';
        return o.success == expected && (!o.success || o.replayed) ? kExitOk : kExitMismatch;
    }

    const bool claims_independence = kind != SchemeKind::oft;
    const auto r = secrecy_sweep(kind, {a.common.seed, a.common.seed + 1, a.common.seed + 2}, a.scripts, a.events, true, cfg);
    out << "scenario: secrecy-sweep\nscheme: " << to_string(kind) << "\nscripts: " << r.scripts
        << "\nprobes: " << r.probes << "\nforward: " << (r.forward_holds() ? "Y" : "N") << " (" << r.forward_breaks
        << " breaks)\nbackward: " << (r.backward_holds() ? "Y" : "N") << " (" << r.backward_breaks
        << " breaks)\nkey independence: " << (r.independence_holds() ? "Y" : "N") << " (" << r.independence_breaks
        << " breaks)\n";
    for (const auto& c : r.counterexamples) {
        out << "--\n" << c.report();
    }
    const bool ok = r.forward_holds() && r.backward_holds() && r.independence_holds() == claims_independence;
    out << "verdict: " << (ok ? "as expected" : "contradicts the expected security row") << '\n';
    return ok ? kExitOk : kExitMismatch;
}

std::vector<int> parse_heights(const std::string& list) {
    std::vector<int> hs;
    std::istringstream in(list);
    for (std::string part; std::getline(in, part, ',');) {
        if (auto dash = part.find('-'); dash != std::string::npos) {
            const int lo = std::stoi(part.substr(0, dash));
            const int hi = std::stoi(part.substr(dash + 1));
            for (int h = lo; h <= hi; ++h) {
                hs.push_back(h);
            }
        } else if (!part.empty()) {
            hs.push_back(std::stoi(part));
        }
    }
    return hs;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multicast group key management simulator"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "run a script or a perfect-tree measurement");
    add_common(*run_cmd, run.common);
    run_cmd->add_option("--script", run.script, "event script file");
    run_cmd->add_option("--perfect-height", run.perfect_height, "measure one join/leave on a perfect tree")
        ->check(CLI::Range(1, 24));
    run_cmd->add_option("--event", run.event, "join | leave (with --perfect-height)")
        ->check(CLI::IsMember({"join", "leave"}));
    run_cmd->add_option("--members", run.members, "initial members of a generated script");
    run_cmd->add_option("--events", run.events, "random events of a generated script");
    run_cmd->add_option("--out-dir", run.out_dir, "directory for transcript and cost files");

    Common cmp;
    std::string heights = "10,12,13,14,15,16,17,18";
    auto* cmp_cmd = app.add_subcommand("compare", "measured versus formula costs on perfect trees");
    add_common(*cmp_cmd, cmp, false);
    cmp.format = "plain";
    cmp_cmd->add_option("--heights", heights, "comma list or ranges, e.g. 2-18");

    AttackArgs atk;
    auto* atk_cmd = app.add_subcommand("attack", "run a collusion scenario or a secrecy sweep");
    add_common(*atk_cmd, atk.common);
    atk.common.scheme = "oft";
    atk_cmd->add_option("--scenario", atk.scenario, "horng | kuchen1 | kuchen2 | secrecy-sweep")
        ->check(CLI::IsMember({"horng", "kuchen1", "kuchen2", "secrecy-sweep"}));
    atk_cmd->add_option("--scripts", atk.scripts, "random scripts per seed (secrecy-sweep)");
    atk_cmd->add_option("--events", atk.events, "events per random script (secrecy-sweep)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*run_cmd) {
            return cmd_run(run, out);
        }
        if (*cmp_cmd) {
            return cmd_compare(cmp, parse_heights(heights), out);
        }
        return cmd_attack(atk, out);
    } catch (const InvalidScript& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

} // namespace gkm
