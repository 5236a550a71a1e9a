#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gkm/derivation_log.hpp"
#include "gkm/scheme.hpp"
#include "gkm/sim.hpp"

namespace gkm {

enum class AtomSource : std::uint8_t { initial, decrypted, blinded, mixed, xored };

std::string to_string(AtomSource s);

/// How an atom entered the knowledge base. Premises index earlier atoms.
struct Provenance {
    AtomSource source = AtomSource::initial;
    std::vector<std::size_t> premises; // decrypt: {key}; blind: {x}; mix: {left, right}; xor: {a, b}
    std::uint64_t message = 0;         // transcript seq for decrypted atoms
    std::string label;                 // who held an initial atom
};

/// Set of known byte-string atoms (keys, blinded keys, nonces) with
/// replayable provenance.
class KnowledgeBase {
public:
    /// False when the atom was already known (the first provenance wins).
    bool add(const crypto::Bytes& atom, Provenance p);
    void add_initial(const std::vector<crypto::Bytes>& atoms, const std::string& label);

    bool knows(const crypto::Bytes& atom) const { return index_.contains(atom); }
    std::optional<std::size_t> index_of(const crypto::Bytes& atom) const;
    std::size_t size() const { return atoms_.size(); }
    const crypto::Bytes& atom(std::size_t i) const { return atoms_[i]; }
    const Provenance& provenance(std::size_t i) const { return provenance_[i]; }

    /// Rule applications that produce `target`, premises first, one per line.
    std::vector<std::string> trace(const crypto::Bytes& target) const;

    /// Recomputes `target` from its initial atoms with the real primitives
    /// and the transcript ciphertexts; true when the bits match.
    bool replay(const crypto::Bytes& target, const std::vector<RekeyMessage>& transcript) const;

private:
    std::vector<crypto::Bytes> atoms_;
    std::vector<Provenance> provenance_;
    std::unordered_map<crypto::Bytes, std::size_t, crypto::BytesHash> index_;
};

struct ClosureStats {
    std::size_t steps = 0;
    bool capped = false;
};

/// Least fixed point of: decrypt with a known key, blind a known atom, mix
/// two known blinded keys, XOR-complete a known triple. Mixing, XOR and
/// repeated blinding only produce values present in `universe`.
KnowledgeBase closure(KnowledgeBase initial, const std::vector<RekeyMessage>& transcript, const DerivationLog& universe,
                      ClosureStats* stats = nullptr, std::size_t step_cap = 5'000'000);

struct AttackOutcome {
    std::string scenario;
    std::string scheme;
    std::uint64_t target_epoch = 0;
    bool success = false;
    bool replayed = false;
    std::vector<std::string> trace;
    std::string detail;

    std::string report() const;
};

/// A coalition member contributes everything it held in epochs [from, to].
struct Colluder {
    MemberId member;
    std::uint64_t from = 0;
    std::uint64_t to = UINT64_MAX;
};

/// A scripted run retaining what the adversary needs.
struct Scenario {
    SchemeKind kind = SchemeKind::oft;
    EventScript script;
    RunResult run;
    DerivationLog log;

    KnowledgeBase pooled(const std::vector<Colluder>& coalition) const;
    /// Closure of the coalition's pooled knowledge against `target` epochs;
    /// success when any target group key is derived.
    AttackOutcome attack(const std::string& name, const std::vector<Colluder>& coalition,
                         const std::vector<std::uint64_t>& targets) const;
};

Scenario run_scenario(SchemeKind kind, const EventScript& script, SchemeConfig config = {});

EventScript horng_script();
EventScript kuchen_script(int which);

AttackOutcome run_horng(SchemeKind kind, SchemeConfig config = {});
AttackOutcome run_kuchen(SchemeKind kind, int which, SchemeConfig config = {});

enum class Probe : std::uint8_t { forward, backward };

/// Forward: the member's knowledge up to its eviction against every later
/// epoch it was absent from. Backward: its knowledge from its join against
/// every earlier epoch it was absent from.
AttackOutcome check_secrecy(const Scenario& sc, Probe probe, MemberId member);

struct SweepResult {
    std::size_t scripts = 0;
    std::size_t probes = 0;
    std::size_t forward_breaks = 0;
    std::size_t backward_breaks = 0;
    std::size_t independence_breaks = 0;
    std::vector<AttackOutcome> counterexamples; // first few

    bool forward_holds() const { return forward_breaks == 0; }
    bool backward_holds() const { return backward_breaks == 0; }
    bool independence_holds() const { return independence_breaks == 0; }
};

/// Random scripts on groups of at most 16 members: forward and backward
/// probes for every membership stint, plus (optionally) the coalition of
/// all outside members against every epoch.
SweepResult secrecy_sweep(SchemeKind kind, const std::vector<std::uint64_t>& seeds, std::size_t scripts_per_seed,
                          std::size_t events_per_script, bool key_independence, SchemeConfig config = {});

} // namespace gkm
