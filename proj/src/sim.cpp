#include "gkm/sim.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace gkm {

Event Event::join(std::uint32_t id, std::optional<std::uint32_t> beside) {
    Event e{Kind::join, MemberId{id}, std::nullopt};
    if (beside) {
        e.beside = MemberId{*beside};
    }
    return e;
}

Event Event::leave(std::uint32_t id) { return Event{Kind::leave, MemberId{id}, std::nullopt}; }

std::string to_string(Event::Kind kind) { return kind == Event::Kind::join ? "join" : "leave"; }

std::string to_string(const Event& e) {
    std::string s = to_string(e.kind) + " " + std::to_string(e.member.value);
    if (e.beside) {
        s += " beside " + std::to_string(e.beside->value);
    }
    return s;
}

// ---------------------------------------------------------------------------
// EventScript

namespace {

std::uint32_t parse_id(const std::string& word, std::size_t line) {
    try {
        std::size_t used = 0;
        const unsigned long v = std::stoul(word, &used);
        if (used == word.size() && v > 0 && v <= 0xffffffffUL) {
            return static_cast<std::uint32_t>(v);
        }
    } catch (const std::exception&) {
    }
    throw InvalidScript("line " + std::to_string(line) + ": bad member id '" + word + "'");
}

} // namespace

EventScript EventScript::parse(std::string_view text) {
    EventScript script;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (auto hash = raw.find('#'); hash != std::string::npos) {
            raw.erase(hash);
        }
        std::istringstream words(raw);
        std::vector<std::string> w;
        for (std::string s; words >> s;) {
            w.push_back(s);
        }
        if (w.empty()) {
            continue;
        }
        if (w[0] == "seed" && w.size() == 2) {
            try {
                script.seed = std::stoull(w[1], nullptr, 0);
            } catch (const std::exception&) {
                throw InvalidScript("line " + std::to_string(line) + ": bad seed '" + w[1] + "'");
            }
        } else if (w[0] == "join" && w.size() == 2) {
            script.events.push_back(Event::join(parse_id(w[1], line)));
        } else if (w[0] == "join" && w.size() == 4 && w[2] == "beside") {
            script.events.push_back(Event::join(parse_id(w[1], line), parse_id(w[3], line)));
        } else if (w[0] == "leave" && w.size() == 2) {
            script.events.push_back(Event::leave(parse_id(w[1], line)));
        } else {
            throw InvalidScript("line " + std::to_string(line) + ": cannot parse '" + raw + "'");
        }
    }
    return script;
}

EventScript EventScript::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidScript("cannot open script " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string EventScript::to_text() const {
    std::ostringstream out;
    if (seed) {
        out << "seed " << *seed << '\n';
    }
    for (const auto& e : events) {
        out << to_string(e) << '\n';
    }
    return out.str();
}

void EventScript::validate(const std::vector<MemberId>& initial) const {
    std::set<MemberId> present(initial.begin(), initial.end());
    for (std::size_t i = 0; i < events.size(); ++i) {
        const Event& e = events[i];
        const std::string where = "event " + std::to_string(i + 1) + " (" + to_string(e) + "): ";
        if (e.kind == Event::Kind::join) {
            if (present.contains(e.member)) {
                throw InvalidScript(where + "member already present");
            }
            if (e.beside && !present.contains(*e.beside)) {
                throw InvalidScript(where + "placement target absent");
            }
            present.insert(e.member);
        } else {
            if (!present.erase(e.member)) {
                throw InvalidScript(where + "member not present");
            }
        }
    }
}

EventScript random_script(std::size_t initial, std::size_t events, std::uint64_t seed, std::size_t max_members) {
    crypto::Rng rng(seed);
    EventScript script;
    script.seed = seed;
    std::vector<std::uint32_t> present;
    std::uint32_t next = 1;
    for (std::size_t i = 0; i < initial; ++i) {
        script.events.push_back(Event::join(next));
        present.push_back(next++);
    }
    for (std::size_t i = 0; i < events; ++i) {
        const bool join = present.empty() || (present.size() < max_members && rng.uniform(2) == 0);
        if (join) {
            script.events.push_back(Event::join(next));
            present.push_back(next++);
        } else {
            const auto pick = static_cast<std::size_t>(rng.uniform(present.size()));
            script.events.push_back(Event::leave(present[pick]));
            present.erase(present.begin() + static_cast<std::ptrdiff_t>(pick));
        }
    }
    return script;
}

// ---------------------------------------------------------------------------
// Transcript and costs

namespace {

std::string node_label(const LocationIndex& loc) {
    return std::to_string(loc.level) + ":" + std::to_string(loc.position);
}

std::string key_label(const KeyRef& ref) {
    if (ref.kind == KeyRef::Kind::individual) {
        return "m" + std::to_string(ref.member.value);
    }
    return node_label(ref.location);
}

} // namespace

std::string Transcript::dump() const {
    std::ostringstream out;
    for (const auto& m : messages) {
        out << m.seq << ',' << m.epoch << ',' << (m.delivery == Delivery::unicast ? 'U' : 'M') << ',';
        for (std::size_t i = 0; i < m.targets.size(); ++i) {
            out << (i ? ";" : "") << m.targets[i].value;
        }
        out << ',' << key_label(m.key) << ',' << crypto::to_string(m.payload_kind()) << ','
            << node_label(m.payload_location) << '\n';
    }
    return out.str();
}

std::string CostReport::csv() const {
    std::ostringstream out;
    out << "scheme,height,event,multicast,unicast,encryptions,formula_prediction\n";
    for (const auto& r : rows) {
        out << r.scheme << ',' << r.height << ',' << r.event << ',' << r.multicast << ',' << r.unicast << ','
            << r.encryptions << ',';
        if (r.formula) {
            out << *r.formula;
        }
        out << '\n';
    }
    return out.str();
}

std::string CostReport::plain() const {
    std::ostringstream out;
    out << std::left << std::setw(14) << "scheme" << std::setw(8) << "height" << std::setw(8) << "event" << std::right
        << std::setw(10) << "multicast" << std::setw(9) << "unicast" << std::setw(13) << "encryptions" << std::setw(15)
        << "transmissions" << std::setw(9) << "formula" << '\n';
    for (const auto& r : rows) {
        out << std::left << std::setw(14) << r.scheme << std::setw(8) << r.height << std::setw(8) << r.event
            << std::right << std::setw(10) << r.multicast << std::setw(9) << r.unicast << std::setw(13)
            << r.encryptions << std::setw(15) << r.transmissions << std::setw(9)
            << (r.formula ? std::to_string(*r.formula) : "-") << '\n';
    }
    return out.str();
}

CostRow CostReport::total() const {
    CostRow t;
    t.event = "total";
    for (const auto& r : rows) {
        t.multicast += r.multicast;
        t.unicast += r.unicast;
        t.encryptions += r.encryptions;
        t.transmissions += r.transmissions;
        if (t.scheme.empty()) {
            t.scheme = r.scheme;
        }
    }
    return t;
}

std::optional<long> formula_encryptions(SchemeKind kind, Event::Kind event, int h, std::size_t n) {
    const bool join = event == Event::Kind::join;
    if (kind == SchemeKind::simple) {
        return static_cast<long>(n);
    }
    if (h <= 0) {
        return std::nullopt;
    }
    switch (kind) {
    case SchemeKind::lkh: return join ? 3L * h : 2L * h;
    case SchemeKind::oft: return join ? 2L * h + 2 : long{h};
    case SchemeKind::oft_secure: return join ? 2L * h + 2 : 5L;
    case SchemeKind::lkh_bottomup: return join ? 2L * h : 2L * h - 2;
    case SchemeKind::simple: break;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Running scripts

namespace {

CostRow row_for(const Scheme& scheme, const RekeyBatch& batch, Event::Kind kind, int h) {
    CostRow r;
    r.scheme = to_string(scheme.kind());
    r.height = h;
    r.event = to_string(kind);
    r.multicast = batch.count(Delivery::multicast);
    r.unicast = batch.count(Delivery::unicast);
    r.encryptions = batch.encryptions();
    r.transmissions = batch.transmissions();
    r.formula = formula_encryptions(scheme.kind(), kind, h, scheme.member_count());
    return r;
}

void check_consistency(const Scheme& scheme, const std::map<MemberId, MemberState>& states, const std::string& where,
                       bool simulate) {
    if (auto err = scheme.check_invariants(); !err.empty()) {
        throw ConsistencyViolation(where + ": " + err);
    }
    if (!simulate) {
        return;
    }
    const auto expected = scheme.group_key();
    std::vector<std::uint32_t> bad;
    for (const auto& [id, state] : states) {
        if (state.group_key() != expected) {
            bad.push_back(id.value);
        }
    }
    if (!bad.empty()) {
        std::ostringstream msg;
        msg << where << ": members";
        for (auto b : bad) {
            msg << ' ' << b;
        }
        msg << " disagree with the server group key";
        throw ConsistencyViolation(msg.str());
    }
}

} // namespace

RunResult run_script(Scheme& scheme, const EventScript& script, const RunOptions& options) {
    script.validate(options.initial_members);
    RunResult res;
    scheme.attach_log(options.log);
    const bool sim = options.simulate_members;

    if (!options.initial_members.empty()) {
        scheme.initialize(options.initial_members);
        if (sim) {
            for (MemberId m : options.initial_members) {
                res.states.emplace(m, scheme.enroll(m));
            }
        }
    }

    auto capture = [&] {
        if (!options.capture_knowledge) {
            return;
        }
        auto& snap = res.knowledge.emplace_back();
        for (const auto& [id, state] : res.states) {
            snap[id] = state.knowledge();
        }
    };

    EpochRecord initial;
    initial.group_key = scheme.group_key();
    initial.members = scheme.members();
    res.transcript.epochs.push_back(initial);
    check_consistency(scheme, res.states, "initial state", sim);
    capture();

    for (std::size_t i = 0; i < script.events.size(); ++i) {
        const Event& e = script.events[i];
        const std::uint64_t epoch = i + 1;
        const std::string where = "event " + std::to_string(epoch) + " (" + to_string(e) + ")";

        RekeyBatch batch;
        int h = 0;
        if (e.kind == Event::Kind::join) {
            batch = scheme.join(e.member, e.beside);
            h = scheme.member_depth(e.member);
            if (sim) {
                res.states.emplace(e.member, MemberState(e.member, scheme.kind(), batch.bootstrap->individual_key));
            }
        } else {
            h = scheme.member_depth(e.member);
            if (sim) {
                res.evicted.emplace(epoch, res.states.at(e.member));
                res.states.erase(e.member);
            }
            batch = scheme.leave(e.member);
        }

        if (sim) {
            for (auto& [id, state] : res.states) {
                state.relocate(scheme.layout_of(id));
            }
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.event = e;
        rec.first_message = res.transcript.messages.size();
        for (auto& msg : batch.messages) {
            msg.seq = res.transcript.messages.size();
            msg.epoch = epoch;
            if (sim) {
                for (MemberId t : msg.targets) {
                    auto it = res.states.find(t);
                    if (it == res.states.end()) {
                        throw ConsistencyViolation(where + ": message " + std::to_string(msg.seq) +
                                                   " addressed to absent member " + std::to_string(t.value));
                    }
                    try {
                        it->second.apply(msg);
                    } catch (const WrongKey& err) {
                        throw ConsistencyViolation(where + ": " + err.what());
                    }
                }
            }
            res.transcript.messages.push_back(msg);
        }
        rec.end_message = res.transcript.messages.size();
        rec.transmissions = batch.transmissions();
        rec.group_key = scheme.group_key();
        rec.members = scheme.members();
        rec.height = h;
        rec.notes = batch.notes;
        res.transcript.epochs.push_back(std::move(rec));
        res.costs.rows.push_back(row_for(scheme, batch, e.kind, h));

        check_consistency(scheme, res.states, where, sim);
        capture();
    }
    return res;
}

CostReport measure_perfect(SchemeKind kind, int h, SchemeConfig config) {
    if (h < 1 || h > 24) {
        throw Error("perfect height must be between 1 and 24");
    }
    auto scheme = make_scheme(kind, config);
    const std::uint32_t n = std::uint32_t{1} << h;
    std::vector<MemberId> ids;
    ids.reserve(n - 1);
    for (std::uint32_t i = 1; i < n; ++i) {
        ids.push_back(MemberId{i});
    }
    scheme->initialize(ids);

    CostReport report;
    const MemberId last{n};
    auto joined = scheme->join(last);
    report.rows.push_back(row_for(*scheme, joined, Event::Kind::join, scheme->member_depth(last)));
    const int depth = scheme->member_depth(last);
    auto left = scheme->leave(last);
    report.rows.push_back(row_for(*scheme, left, Event::Kind::leave, depth));
    return report;
}

CostReport cost_table(SchemeKind kind, const std::vector<int>& heights, SchemeConfig config) {
    CostReport report;
    for (int h : heights) {
        auto part = measure_perfect(kind, h, config);
        report.rows.insert(report.rows.end(), part.rows.begin(), part.rows.end());
    }
    return report;
}

} // namespace gkm
