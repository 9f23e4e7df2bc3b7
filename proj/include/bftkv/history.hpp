#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bftkv/messages.hpp"

namespace bftkv {

// ---------------------------------------------------------------------------
// certificate descriptors
//
// The log records the structure of every decision certificate a correct
// participant formed or accepted: decision, evidence kind, and which
// replica said what at which view. Signatures are checked live when the
// certificate is processed; the post-hoc checker re-validates thresholds,
// replica distinctness and shard coverage from the descriptor.

struct CertVoteDesc {
    NodeId replica = 0;
    Decision vote = Decision::Commit;
};

struct CertBundleDesc {
    ShardId shard = 0;
    BundleKind kind = BundleKind::FastCert;
    Decision decision = Decision::Commit;
    std::vector<CertVoteDesc> votes;
    bool via_conflict = false;
    Digest conflict_txn;
};

struct CertP2RDesc {
    NodeId replica = 0;
    Decision decision = Decision::Commit;
    uint32_t view_decision = 0;
};

struct CertDescriptor {
    Decision decision = Decision::Commit;
    bool fast = true;
    bool genesis = false;
    std::vector<CertBundleDesc> bundles;  // fast evidence
    ShardId slow_shard = 0;               // slow evidence
    std::vector<CertP2RDesc> p2rs;
};

CertDescriptor describe(const DecisionCert& cert);

// ---------------------------------------------------------------------------
// events

struct EvRunHeader {
    uint64_t seed = 0;
    uint32_t f = 1;
    uint32_t shards = 1;
    uint32_t clients = 0;
    uint64_t gst = 0;
    uint64_t duration = 0;
    std::vector<NodeId> byz_replicas;
    std::vector<std::string> byz_replica_behaviors;  // parallel to byz_replicas
    std::vector<NodeId> byz_clients;
    std::vector<std::string> byz_client_behaviors;
};

struct EvTxnBegin {
    NodeId client = 0;
    Timestamp ts;
    uint32_t attempt = 0;
};

struct EvTxnMeta {
    NodeId client = 0;
    Digest txn;
    TxnMeta meta;
};

struct EvReadServed {
    NodeId replica = 0;
    NodeId client = 0;
    std::string key;
    Timestamp req_ts;
    Timestamp latest_committed;  // newest committed version < req_ts held at reply time
    std::optional<Timestamp> committed_returned;
    std::optional<Timestamp> prepared_returned;
};

struct EvReadAdopted {
    NodeId client = 0;
    Timestamp txn_ts;
    std::string key;
    Timestamp version;
    Digest writer;  // zero digest for the genesis version
    bool prepared = false;
    std::vector<NodeId> sources;    // replicas whose replies backed the choice
    std::vector<NodeId> contacted;  // replicas the request was sent to
};

struct EvVoteCast {
    NodeId replica = 0;
    Digest txn;
    Decision vote = Decision::Commit;
    bool misbehavior_proof = false;
    std::optional<Digest> conflict;
};

struct EvP2Logged {
    NodeId replica = 0;
    Digest txn;
    Decision decision = Decision::Commit;
    uint32_t view_decision = 0;
};

struct EvFinalized {
    NodeId replica = 0;
    Digest txn;
    Decision decision = Decision::Commit;
};

struct EvDecisionReported {
    NodeId client = 0;
    Digest txn;
    Decision decision = Decision::Commit;
    std::string path;  // fast | slow | recovered | local
    uint64_t latency_commit = 0;
    uint64_t latency_total = 0;
};

struct EvCertFormed {
    NodeId actor = 0;
    Digest txn;
    CertDescriptor cert;
};

struct EvStage2Sent {
    NodeId client = 0;
    Digest txn;
};

struct EvFallbackInvoked {
    NodeId client = 0;
    Digest txn;
    uint32_t views_carried = 0;
};

struct EvRpSent {
    NodeId client = 0;
    Digest txn;
    uint32_t round = 0;
};

struct EvElectSent {
    NodeId replica = 0;
    Digest txn;
    uint32_t view = 0;
    Decision decision = Decision::Commit;
};

struct EvDecFbSent {
    NodeId leader = 0;
    Digest txn;
    uint32_t view = 0;
    Decision decision = Decision::Commit;
};

struct EvDecFbAdopted {
    NodeId replica = 0;
    Digest txn;
    uint32_t view = 0;
    Decision decision = Decision::Commit;
};

struct EvViewChanged {
    NodeId replica = 0;
    Digest txn;
    uint32_t from = 0;
    uint32_t to = 0;
};

struct EvMisbehavior {
    NodeId actor = 0;
    std::string kind;
    Digest txn;
};

struct EvByzAction {
    NodeId client = 0;
    Digest txn;
    std::string behavior;
};

struct EvRunEnd {
    uint64_t admitted = 0;
    uint64_t committed = 0;
    uint64_t aborted = 0;
    uint64_t last_admission_tick = 0;
};

using EventBody =
    std::variant<EvRunHeader, EvTxnBegin, EvTxnMeta, EvReadServed, EvReadAdopted, EvVoteCast,
                 EvP2Logged, EvFinalized, EvDecisionReported, EvCertFormed, EvStage2Sent,
                 EvFallbackInvoked, EvRpSent, EvElectSent, EvDecFbSent, EvDecFbAdopted,
                 EvViewChanged, EvMisbehavior, EvByzAction, EvRunEnd>;

struct Event {
    uint64_t tick = 0;
    EventBody body;
};

/// Append-only record of every observable step of a run, one line per
/// event when serialized. Field names are stable; see docs/wire_format.md.
struct HistoryLog {
    std::vector<Event> events;

    template <typename T>
    void push(uint64_t tick, T&& body) {
        events.push_back(Event{tick, EventBody(std::forward<T>(body))});
    }
};

std::string event_to_json_line(const Event& e);
Event event_from_json_line(const std::string& line);

void write_history(const HistoryLog& log, std::ostream& os);
HistoryLog read_history(std::istream& is);

}  // namespace bftkv
