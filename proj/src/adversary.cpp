#include "gkm/adversary.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_set>

namespace gkm {

std::string to_string(AtomSource s) {
    switch (s) {
    case AtomSource::initial: return "initial";
    case AtomSource::decrypted: return "decrypt";
    case AtomSource::blinded: return "blind";
    case AtomSource::mixed: return "mix";
    case AtomSource::xored: return "xor";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// KnowledgeBase

bool KnowledgeBase::add(const crypto::Bytes& atom, Provenance p) {
    auto [it, fresh] = index_.try_emplace(atom, atoms_.size());
    if (!fresh) {
        return false;
    }
    atoms_.push_back(atom);
    provenance_.push_back(std::move(p));
    return true;
}

void KnowledgeBase::add_initial(const std::vector<crypto::Bytes>& atoms, const std::string& label) {
    for (const auto& a : atoms) {
        add(a, Provenance{AtomSource::initial, {}, 0, label});
    }
}

std::optional<std::size_t> KnowledgeBase::index_of(const crypto::Bytes& atom) const {
    auto it = index_.find(atom);
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::vector<std::string> KnowledgeBase::trace(const crypto::Bytes& target) const {
    std::vector<std::string> lines;
    auto root = index_of(target);
    if (!root) {
        return lines;
    }
    std::set<std::size_t> done;
    std::function<void(std::size_t)> visit = [&](std::size_t i) {
        if (!done.insert(i).second) {
            return;
        }
        const Provenance& p = provenance_[i];
        for (auto pre : p.premises) {
            visit(pre);
        }
        std::ostringstream line;
        const auto& bits = atoms_[i];
        line << '[' << i << "] " << crypto::to_hex(std::span(bits).first(std::min<std::size_t>(8, bits.size())))
             << " <- ";
        switch (p.source) {
        case AtomSource::initial: line << "held by " << p.label; break;
        case AtomSource::decrypted: line << "decrypt message #" << p.message << " with [" << p.premises[0] << ']'; break;
        case AtomSource::blinded: line << "blind([" << p.premises[0] << "])"; break;
        case AtomSource::mixed: line << "mix([" << p.premises[0] << "], [" << p.premises[1] << "])"; break;
        case AtomSource::xored: line << "xor([" << p.premises[0] << "], [" << p.premises[1] << "])"; break;
        }
        lines.push_back(line.str());
    };
    visit(*root);
    return lines;
}

bool KnowledgeBase::replay(const crypto::Bytes& target, const std::vector<RekeyMessage>& transcript) const {
    auto root = index_of(target);
    if (!root) {
        return false;
    }
    std::unordered_map<std::size_t, crypto::Bytes> memo;
    std::function<crypto::Bytes(std::size_t)> value = [&](std::size_t i) -> crypto::Bytes {
        if (auto it = memo.find(i); it != memo.end()) {
            return it->second;
        }
        const Provenance& p = provenance_[i];
        crypto::Bytes v;
        switch (p.source) {
        case AtomSource::initial: v = atoms_[i]; break;
        case AtomSource::decrypted: {
            auto msg = std::find_if(transcript.begin(), transcript.end(),
                                    [&](const RekeyMessage& m) { return m.seq == p.message; });
            if (msg == transcript.end()) {
                throw Error("replay: message #" + std::to_string(p.message) + " missing");
            }
            v = crypto::decrypt(value(p.premises[0]), msg->ciphertext).bytes;
            break;
        }
        case AtomSource::blinded: v = crypto::blind_bytes(value(p.premises[0])); break;
        case AtomSource::mixed: v = crypto::mix_bytes(value(p.premises[0]), value(p.premises[1])); break;
        case AtomSource::xored: v = crypto::xor_bytes(value(p.premises[0]), value(p.premises[1])); break;
        }
        memo[i] = v;
        return v;
    };
    try {
        return value(*root) == target;
    } catch (const Error&) {
        return false;
    }
}

// ---------------------------------------------------------------------------
// Closure

KnowledgeBase closure(KnowledgeBase kb, const std::vector<RekeyMessage>& transcript, const DerivationLog& universe,
                      ClosureStats* stats, std::size_t step_cap) {
    using crypto::Bytes;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> by_key;
    for (std::size_t i = 0; i < transcript.size(); ++i) {
        by_key[transcript[i].ciphertext.key_id].push_back(i);
    }
    const auto& entries = universe.entries();
    std::unordered_set<Bytes, crypto::BytesHash> values;
    std::unordered_map<Bytes, std::vector<std::size_t>, crypto::BytesHash> mixes, xors;
    for (std::size_t j = 0; j < entries.size(); ++j) {
        const auto& e = entries[j];
        values.insert(e.output);
        for (const auto& in : e.inputs) {
            values.insert(in);
        }
        if (e.op == DerivationOp::mix) {
            mixes[e.inputs[0]].push_back(j);
            if (e.inputs[1] != e.inputs[0]) {
                mixes[e.inputs[1]].push_back(j);
            }
        } else if (e.op == DerivationOp::xor_) {
            xors[e.inputs[0]].push_back(j);
            xors[e.inputs[1]].push_back(j);
            xors[e.output].push_back(j);
        }
    }

    std::vector<bool> opened(transcript.size(), false);
    ClosureStats local;
    for (std::size_t cursor = 0; cursor < kb.size(); ++cursor) {
        if (++local.steps > step_cap) {
            local.capped = true;
            break;
        }
        const Bytes x = kb.atom(cursor);

        // Decrypt every ciphertext whose key id matches.
        if (auto it = by_key.find(crypto::key_id(x)); it != by_key.end()) {
            for (std::size_t m : it->second) {
                if (opened[m]) {
                    continue;
                }
                try {
                    auto payload = crypto::decrypt(x, transcript[m].ciphertext);
                    opened[m] = true;
                    kb.add(payload.bytes, Provenance{AtomSource::decrypted, {cursor}, transcript[m].seq, {}});
                } catch (const WrongKey&) {
                }
            }
        }

        // Blind; iterated blinding only when the result is a live value.
        const Bytes b = crypto::blind_bytes(x);
        if (kb.provenance(cursor).source != AtomSource::blinded || values.contains(b)) {
            kb.add(b, Provenance{AtomSource::blinded, {cursor}, 0, {}});
        }

        if (auto it = mixes.find(x); it != mixes.end()) {
            for (std::size_t j : it->second) {
                const auto& e = entries[j];
                auto l = kb.index_of(e.inputs[0]);
                auto r = kb.index_of(e.inputs[1]);
                if (l && r) {
                    kb.add(e.output, Provenance{AtomSource::mixed, {*l, *r}, 0, {}});
                }
            }
        }

        if (auto it = xors.find(x); it != xors.end()) {
            for (std::size_t j : it->second) {
                const auto& e = entries[j];
                const Bytes* triple[3] = {&e.inputs[0], &e.inputs[1], &e.output};
                std::optional<std::size_t> idx[3];
                int known = 0;
                for (int t = 0; t < 3; ++t) {
                    idx[t] = kb.index_of(*triple[t]);
                    known += idx[t] ? 1 : 0;
                }
                if (known != 2) {
                    continue;
                }
                std::vector<std::size_t> premises;
                int missing = 0;
                for (int t = 0; t < 3; ++t) {
                    if (idx[t]) {
                        premises.push_back(*idx[t]);
                    } else {
                        missing = t;
                    }
                }
                kb.add(*triple[missing], Provenance{AtomSource::xored, premises, 0, {}});
            }
        }
    }
    if (stats) {
        *stats = local;
    }
    return kb;
}

// ---------------------------------------------------------------------------
// Scenarios

std::string AttackOutcome::report() const {
    std::ostringstream out;
    out << "scenario: " << scenario << '\n'
        << "scheme: " << scheme << '\n'
        << "target epoch: " << target_epoch << '\n'
        << "outcome: " << (success ? "SUCCESS" : "RESISTED") << '\n';
    if (!detail.empty()) {
        out << "detail: " << detail << '\n';
    }
    if (success) {
        out << "replay: " << (replayed ? "verified" : "FAILED") << '\n' << "trace:\n";
        for (const auto& line : trace) {
            out << "  " << line << '\n';
        }
    }
    return out.str();
}

KnowledgeBase Scenario::pooled(const std::vector<Colluder>& coalition) const {
    KnowledgeBase kb;
    const auto& snaps = run.knowledge;
    for (const auto& c : coalition) {
        for (std::uint64_t e = c.from; e < snaps.size() && e <= c.to; ++e) {
            auto it = snaps[e].find(c.member);
            if (it != snaps[e].end()) {
                kb.add_initial(it->second, "u" + std::to_string(c.member.value) + " in epoch " + std::to_string(e));
            }
        }
    }
    return kb;
}

AttackOutcome Scenario::attack(const std::string& name, const std::vector<Colluder>& coalition,
                               const std::vector<std::uint64_t>& targets) const {
    AttackOutcome out;
    out.scenario = name;
    out.scheme = to_string(kind);
    out.target_epoch = targets.empty() ? 0 : targets.front();
    ClosureStats stats;
    const auto kb = closure(pooled(coalition), run.transcript.messages, log, &stats);
    for (auto t : targets) {
        const auto& key = run.transcript.epochs.at(t).group_key;
        if (key && kb.knows(key->bits)) {
            out.success = true;
            out.target_epoch = t;
            out.trace = kb.trace(key->bits);
            out.replayed = kb.replay(key->bits, run.transcript.messages);
            break;
        }
    }
    std::ostringstream detail;
    detail << "coalition knowledge closes to " << kb.size() << " atoms";
    if (stats.capped) {
        detail << " (step cap reached)";
    }
    out.detail = detail.str();
    return out;
}

Scenario run_scenario(SchemeKind kind, const EventScript& script, SchemeConfig config) {
    Scenario sc;
    sc.kind = kind;
    sc.script = script;
    auto scheme = make_scheme(kind, config);
    RunOptions opt;
    opt.capture_knowledge = true;
    opt.log = &sc.log;
    sc.run = run_script(*scheme, script, opt);
    return sc;
}

namespace {

EventScript with_founders(std::initializer_list<Event> rest) {
    EventScript s;
    for (std::uint32_t i = 1; i <= 8; ++i) {
        s.events.push_back(Event::join(i));
    }
    s.events.insert(s.events.end(), rest);
    return s;
}

} // namespace

// Founders u1..u8; u5's slot is vacated first so it can be taken again.
// Epoch 10: u3 leaves (t1). Epoch 11: u5 joins the right half (t2).
EventScript horng_script() {
    return with_founders({Event::leave(5), Event::leave(3), Event::join(5, 6)});
}

// Founders u1..u8 with u4 and u5 vacated. Epoch 11: Alice (u1) leaves (t1).
// Epoch 12: Bob (u4) joins, right half in case 1, left half in case 2 (t2).
// Epoch 13: Candy (u5) joins the right half (t3).
EventScript kuchen_script(int which) {
    if (which == 1) {
        return with_founders({Event::leave(4), Event::leave(5), Event::leave(1), Event::join(4, 6), Event::join(5, 7)});
    }
    return with_founders({Event::leave(4), Event::leave(5), Event::leave(1), Event::join(4, 3), Event::join(5, 6)});
}

AttackOutcome run_horng(SchemeKind kind, SchemeConfig config) {
    const auto sc = run_scenario(kind, horng_script(), config);
    return sc.attack("horng", {{MemberId{3}, 0, 9}, {MemberId{5}, 11}}, {10});
}

AttackOutcome run_kuchen(SchemeKind kind, int which, SchemeConfig config) {
    if (which != 1 && which != 2) {
        throw Error("Ku-Chen case must be 1 or 2");
    }
    const auto sc = run_scenario(kind, kuchen_script(which), config);
    if (which == 1) {
        return sc.attack("kuchen1", {{MemberId{1}, 0, 10}, {MemberId{4}, 12}}, {11});
    }
    return sc.attack("kuchen2", {{MemberId{1}, 0, 10}, {MemberId{5}, 13}}, {12});
}

// ---------------------------------------------------------------------------
// Secrecy probes

namespace {

struct Stint {
    MemberId member;
    std::uint64_t from = 0;
    std::uint64_t to = 0;
};

std::vector<Stint> stints(const Transcript& t) {
    std::vector<Stint> out;
    std::map<MemberId, std::size_t> open;
    for (const auto& ep : t.epochs) {
        std::set<MemberId> now(ep.members.begin(), ep.members.end());
        for (auto it = open.begin(); it != open.end();) {
            if (!now.contains(it->first)) {
                it = open.erase(it);
            } else {
                out[it->second].to = ep.epoch;
                ++it;
            }
        }
        for (MemberId m : now) {
            if (!open.contains(m)) {
                open[m] = out.size();
                out.push_back({m, ep.epoch, ep.epoch});
            }
        }
    }
    return out;
}

bool present(const EpochRecord& ep, MemberId m) {
    return std::find(ep.members.begin(), ep.members.end(), m) != ep.members.end();
}

std::vector<std::uint64_t> absent_epochs(const Transcript& t, MemberId m, std::uint64_t lo, std::uint64_t hi) {
    std::vector<std::uint64_t> out;
    for (const auto& ep : t.epochs) {
        if (ep.epoch >= lo && ep.epoch <= hi && ep.group_key && !present(ep, m)) {
            out.push_back(ep.epoch);
        }
    }
    return out;
}

} // namespace

AttackOutcome check_secrecy(const Scenario& sc, Probe probe, MemberId member) {
    const auto& t = sc.run.transcript;
    const std::uint64_t last = t.epochs.empty() ? 0 : t.epochs.back().epoch;
    std::optional<Stint> chosen;
    for (const auto& s : stints(t)) {
        if (s.member != member) {
            continue;
        }
        if (probe == Probe::forward && s.to < last) {
            chosen = s; // last stint that ended in an eviction
        }
        if (probe == Probe::backward && s.from > 0 && !chosen) {
            chosen = s; // first stint that began with a join
        }
    }
    const std::string name = std::string(probe == Probe::forward ? "forward" : "backward") + " secrecy u" +
                             std::to_string(member.value);
    if (!chosen) {
        AttackOutcome out;
        out.scenario = name;
        out.scheme = to_string(sc.kind);
        out.detail = probe == Probe::forward ? "member never evicted" : "member never joined";
        return out;
    }
    const auto targets = probe == Probe::forward ? absent_epochs(t, member, chosen->to + 1, last)
                                                 : absent_epochs(t, member, 0, chosen->from - 1);
    return sc.attack(name, {{member, chosen->from, chosen->to}}, targets);
}

SweepResult secrecy_sweep(SchemeKind kind, const std::vector<std::uint64_t>& seeds, std::size_t scripts_per_seed,
                          std::size_t events_per_script, bool key_independence, SchemeConfig config) {
    SweepResult res;
    auto note = [&res](AttackOutcome o) {
        if (res.counterexamples.size() < 3) {
            res.counterexamples.push_back(std::move(o));
        }
    };
    for (auto seed : seeds) {
        crypto::Rng pick(seed);
        for (std::size_t i = 0; i < scripts_per_seed; ++i) {
            const std::uint64_t script_seed = pick.next();
            const auto initial = static_cast<std::size_t>(2 + pick.uniform(7));
            const auto script = random_script(initial, events_per_script, script_seed, 16);
            SchemeConfig cfg = config;
            cfg.seed = script_seed;
            const auto sc = run_scenario(kind, script, cfg);
            ++res.scripts;

            const auto& t = sc.run.transcript;
            const std::uint64_t last = t.epochs.back().epoch;
            const auto all = stints(t);
            for (const auto& s : all) {
                const auto before = s.from > 0 ? absent_epochs(t, s.member, 0, s.from - 1) : std::vector<std::uint64_t>{};
                const auto after = absent_epochs(t, s.member, s.to + 1, last);
                if (before.empty() && after.empty()) {
                    continue;
                }
                res.probes += 2;
                const auto kb = closure(sc.pooled({{s.member, s.from, s.to}}), t.messages, sc.log);
                for (auto e : before) {
                    if (kb.knows(t.epochs[e].group_key->bits)) {
                        ++res.backward_breaks;
                        note(sc.attack("backward secrecy u" + std::to_string(s.member.value), {{s.member, s.from, s.to}},
                                       {e}));
                        break;
                    }
                }
                for (auto e : after) {
                    if (kb.knows(t.epochs[e].group_key->bits)) {
                        ++res.forward_breaks;
                        note(sc.attack("forward secrecy u" + std::to_string(s.member.value), {{s.member, s.from, s.to}},
                                       {e}));
                        break;
                    }
                }
            }

            if (!key_independence) {
                continue;
            }
            for (const auto& ep : t.epochs) {
                if (!ep.group_key) {
                    continue;
                }
                std::vector<Colluder> coalition;
                for (const auto& s : all) {
                    if (s.to < ep.epoch || s.from > ep.epoch) {
                        coalition.push_back({s.member, s.from, s.to});
                    }
                }
                if (coalition.empty()) {
                    continue;
                }
                ++res.probes;
                const auto kb = closure(sc.pooled(coalition), t.messages, sc.log);
                if (kb.knows(ep.group_key->bits)) {
                    ++res.independence_breaks;
                    note(sc.attack("key independence, outside coalition", coalition, {ep.epoch}));
                }
            }
        }
    }
    return res;
}

} // namespace gkm
