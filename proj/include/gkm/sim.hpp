#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gkm/scheme.hpp"

namespace gkm {

struct Event {
    enum class Kind : std::uint8_t { join, leave };
    Kind kind = Kind::join;
    MemberId member;
    std::optional<MemberId> beside; // placement hint for joins

    static Event join(std::uint32_t id, std::optional<std::uint32_t> beside = std::nullopt);
    static Event leave(std::uint32_t id);
};

std::string to_string(Event::Kind kind);
std::string to_string(const Event& e);

/// Ordered membership events. Text form: one "join <id> [beside <id>]" or
/// "leave <id>" per line, '#' starts a comment.
struct EventScript {
    std::vector<Event> events;
    std::optional<std::uint64_t> seed;

    /// Throws InvalidScript naming the offending line.
    static EventScript parse(std::string_view text);
    static EventScript load(const std::string& path);
    std::string to_text() const;

    /// Throws InvalidScript on a join of a present member, a leave of an
    /// absent one, or a placement hint naming an absent member.
    void validate(const std::vector<MemberId>& initial = {}) const;
};

/// `events` random joins and leaves starting from members 1..initial.
EventScript random_script(std::size_t initial, std::size_t events, std::uint64_t seed, std::size_t max_members = 16);

struct EpochRecord {
    std::uint64_t epoch = 0;
    std::optional<Event> event; // absent for the initial epoch
    std::optional<crypto::Key> group_key;
    std::vector<MemberId> members;
    std::size_t first_message = 0; // [first_message, end_message) in the transcript
    std::size_t end_message = 0;
    std::size_t transmissions = 0;
    int height = 0; // depth of the event's leaf (formula h)
    std::vector<std::string> notes;
};

struct Transcript {
    std::vector<RekeyMessage> messages;
    std::vector<EpochRecord> epochs;

    /// "seq,epoch,delivery,targets,enc_key,payload_kind,payload_node" lines.
    std::string dump() const;
};

struct CostRow {
    std::string scheme;
    int height = 0;
    std::string event;
    std::size_t multicast = 0;
    std::size_t unicast = 0;
    std::size_t encryptions = 0;
    std::size_t transmissions = 0;
    std::optional<long> formula;
};

struct CostReport {
    std::vector<CostRow> rows;

    /// "scheme,height,event,multicast,unicast,encryptions,formula_prediction".
    std::string csv() const;
    std::string plain() const;
    CostRow total() const;
};

/// Encryption count the published cost formulas predict for a change at a
/// leaf of depth h in a group of n members; absent when none applies.
std::optional<long> formula_encryptions(SchemeKind kind, Event::Kind event, int h, std::size_t n);

struct RunOptions {
    std::vector<MemberId> initial_members; // bulk, out-of-band start
    bool simulate_members = true;
    bool check_consistency = true;
    bool capture_knowledge = false;
    DerivationLog* log = nullptr;
};

struct RunResult {
    Transcript transcript;
    CostReport costs;
    std::map<MemberId, MemberState> states;
    /// knowledge[e][m]: everything member m holds at the end of epoch e.
    std::vector<std::map<MemberId, std::vector<crypto::Bytes>>> knowledge;
    /// Member state snapshots taken just before each leave is applied.
    std::map<std::uint64_t, MemberState> evicted;
};

/// Drives `scheme` through `script`. Throws ConsistencyViolation naming the
/// event and the diverging members.
RunResult run_script(Scheme& scheme, const EventScript& script, const RunOptions& options = {});

/// Bulk set-up of 2^h - 1 members, then member 2^h joins and leaves again;
/// one cost row for each. Members are not simulated.
CostReport measure_perfect(SchemeKind kind, int h, SchemeConfig config = {});
CostReport cost_table(SchemeKind kind, const std::vector<int>& heights, SchemeConfig config = {});

} // namespace gkm
