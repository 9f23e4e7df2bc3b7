#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bftkv/bytes.hpp"
#include "bftkv/crypto.hpp"
#include "bftkv/digest.hpp"
#include "bftkv/ids.hpp"
#include "bftkv/merkle.hpp"
#include "bftkv/timestamp.hpp"

namespace bftkv {

enum class Decision : uint8_t { Commit = 0, Abort = 1 };

inline const char* to_str(Decision d) { return d == Decision::Commit ? "commit" : "abort"; }

// ---------------------------------------------------------------------------
// transaction metadata

struct DepEntry {
    Timestamp version;  // prepared version the read observed
    Digest txn_id;      // transaction that produced it

    auto operator<=>(const DepEntry&) const = default;
};

/// A transaction's timestamp, read set, write set and dependency set.
/// The hash of its canonical encoding is the transaction id. Keys are
/// unique and sorted within each set; dep entries correspond to read-set
/// entries whose version was prepared but not committed at read time.
struct TxnMeta {
    Timestamp ts;
    std::vector<std::pair<std::string, Timestamp>> read_set;    // key -> version read
    std::vector<std::pair<std::string, std::string>> write_set; // key -> value
    std::vector<DepEntry> dep_set;

    bool operator==(const TxnMeta&) const = default;

    /// Sorts the sets into canonical order. Duplicate keys are a caller
    /// bug and throw.
    void normalize();

    /// Shards touched by this transaction, ascending and deduplicated.
    std::vector<ShardId> touched_shards(const Topology& topo) const;
};

Bytes encode(const TxnMeta& m);
Digest txn_id(const TxnMeta& m);

// ---------------------------------------------------------------------------
// certificates (forward declared: Vote and read replies embed them)

struct DecisionCert;
using CertPtr = std::shared_ptr<const DecisionCert>;

// ---------------------------------------------------------------------------
// votes and Stage-1 replies

struct Vote {
    Decision value = Decision::Commit;
    std::optional<Digest> conflict_txn;  // only on Abort
    CertPtr conflict_cert;               // optional commit cert of the conflicting txn

    bool operator==(const Vote& o) const {
        return value == o.value && conflict_txn == o.conflict_txn;
    }
};

/// Replica authentication: either a direct signature over the payload or
/// a batched signature (Merkle root + proof) per the reply-batching
/// optimization.
struct BatchedAuth {
    Digest root;
    Signature root_sig;
    MerkleProof proof;
};

using Auth = std::variant<Signature, BatchedAuth>;

struct P1R {
    Digest txn_id;
    NodeId replica = 0;
    Vote vote;
    Auth auth;
};

Bytes signed_payload(const P1R& m);

// ---------------------------------------------------------------------------
// per-shard Stage-1 outcome

enum class BundleKind : uint8_t { FastCert = 0, SlowTally = 1 };

/// A shard's Stage-1 outcome: a durable vote certificate (fast) or a
/// non-durable vote tally (slow). Thresholds, for fault bound f:
///   FastCert-Commit:  5f+1 matching Commit P1R
///   FastCert-Abort:   >= 3f+1 matching Abort P1R, or one valid
///                     conflicting CommitCert
///   SlowTally-Commit: 3f+1 <= Commit P1R < 5f+1
///   SlowTally-Abort:  f+1  <= Abort  P1R < 3f+1
struct VoteBundle {
    Digest txn_id;
    ShardId shard = 0;
    Decision decision = Decision::Commit;
    BundleKind kind = BundleKind::SlowTally;
    std::vector<P1R> votes;
    CertPtr conflict;  // case (5): abort justified by a conflicting commit cert
};

// ---------------------------------------------------------------------------
// Stage 2

struct P2 {
    Digest txn_id;
    TxnMeta meta;  // carried so the logging shard can check tally coverage
    Decision decision = Decision::Commit;
    std::vector<VoteBundle> tallies;
    uint32_t view = 0;  // 0: issued by a client
    NodeId sender = 0;
    Signature sig;
};

Bytes signed_payload(const P2& m);

struct P2R {
    Digest txn_id;
    Decision decision = Decision::Commit;
    uint32_t view_decision = 0;
    uint32_t view_current = 0;
    NodeId replica = 0;
    Auth auth;
};

Bytes signed_payload(const P2R& m);

// ---------------------------------------------------------------------------
// decision certificates

struct SlowEvidence {
    ShardId shard = 0;  // must be the deterministic logging shard
    std::vector<P2R> p2rs;
};

/// Transferable proof of a transaction's global decision.
/// Fast path: per-shard FastCert bundles (all shards for Commit, a
/// single Abort bundle for Abort). Slow path: the logging shard's set of
/// n-f matching P2R. The genesis cert backs the implicit initial version
/// of every key.
struct DecisionCert {
    Digest txn_id;
    TxnMeta meta;
    Decision decision = Decision::Commit;
    bool genesis = false;
    std::variant<std::vector<VoteBundle>, SlowEvidence> evidence;

    bool is_fast() const { return evidence.index() == 0; }
};

CertPtr make_genesis_cert();

// ---------------------------------------------------------------------------
// execution-phase messages

struct ReadRequest {
    std::string key;
    Timestamp ts;  // reader transaction's timestamp
    NodeId client = 0;
    Signature sig;
};

Bytes signed_payload(const ReadRequest& m);

struct CommittedRead {
    Timestamp version;
    std::string value;
    CertPtr cert;
};

struct PreparedRead {
    Timestamp version;
    std::string value;
    Digest writer;
    std::vector<DepEntry> writer_deps;
};

struct ReadReply {
    std::string key;
    Timestamp req_ts;
    NodeId replica = 0;
    std::optional<CommittedRead> committed;
    std::optional<PreparedRead> prepared;
    Auth auth;
};

Bytes signed_payload(const ReadReply& m);

struct AbortNotice {
    Timestamp ts;  // identifies the transaction; sender must be its owner
    std::vector<std::string> keys;
    NodeId sender = 0;
    Signature sig;
};

Bytes signed_payload(const AbortNotice& m);

// ---------------------------------------------------------------------------
// prepare / recovery requests

/// Stage-1 request; with recovery=true this is a Recovery Prepare (RP)
/// and the replica answers with its most advanced artifact.
struct P1 {
    Digest txn_id;
    TxnMeta meta;
    NodeId sender = 0;
    bool recovery = false;
    Signature sig;
};

Bytes signed_payload(const P1& m);

struct Writeback {
    CertPtr cert;
    NodeId sender = 0;
};

struct FetchTxn {
    Digest txn_id;
    NodeId sender = 0;
};

struct FetchReply {
    Digest txn_id;
    std::optional<TxnMeta> meta;  // self-certifying: hash must equal txn_id
    NodeId replica = 0;
};

// ---------------------------------------------------------------------------
// fallback messages

struct InvokeFB {
    Digest txn_id;
    std::vector<P2R> views;  // signed current-view reports; may be empty
                             // when proposing view 1 under the no-proof rule
    NodeId sender = 0;
};

struct ElectFB {
    Digest txn_id;
    Decision decision = Decision::Commit;
    uint32_t view = 0;
    NodeId replica = 0;
    Signature sig;
};

Bytes signed_payload(const ElectFB& m);

struct DecFB {
    Digest txn_id;
    Decision decision = Decision::Commit;
    uint32_t view_elect = 0;
    NodeId leader = 0;
    Signature leader_sig;
    std::vector<ElectFB> elects;  // exactly 4f+1 with matching views
};

Bytes signed_payload(const DecFB& m);

// ---------------------------------------------------------------------------

using Message = std::variant<ReadRequest, ReadReply, P1, P1R, P2, P2R, Writeback, AbortNotice,
                             FetchTxn, FetchReply, InvokeFB, ElectFB, DecFB>;

/// Canonical encoding of a whole message, auth included. Deterministic
/// and injective over the message universe; exercised by the codec
/// property tests.
Bytes encode(const Message& m);

/// Payload bytes a replica-side batcher treats as one reply leaf.
Bytes reply_payload(const Message& m);

}  // namespace bftkv
