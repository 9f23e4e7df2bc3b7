#pragma once

#include <variant>
#include <vector>

#include "bftkv/messages.hpp"

namespace bftkv {

/// Quorum sizes for fault bound f under n = 5f+1 replication.
struct Thresholds {
    uint32_t f = 1;

    uint32_t n() const { return 5 * f + 1; }
    uint32_t commit_quorum() const { return 3 * f + 1; }  // CQ
    uint32_t abort_quorum() const { return f + 1; }       // AQ
    uint32_t fast_commit() const { return 5 * f + 1; }
    uint32_t fast_abort() const { return 3 * f + 1; }
    uint32_t log_quorum() const { return 4 * f + 1; }    // n - f
    uint32_t elect_quorum() const { return 4 * f + 1; }  // ElectFB messages per election
};

/// Verifies a direct or batched replica signature over payload bytes.
/// Batched verification consults and populates the caller's cache.
bool verify_auth(const Bytes& payload, const Auth& auth, NodeId signer, const KeyStore& keys,
                 SigCache& cache);

struct NeedMore {
    bool operator==(const NeedMore&) const = default;
};

using ClassifyResult = std::variant<VoteBundle, NeedMore>;

/// Decides a shard's Stage-1 outcome from verified P1R replies.
/// Case priority: conflicting-cert abort, fast commit, fast abort, slow
/// commit, slow abort; NeedMore when no threshold is met yet.
/// conflict_cert, when passed, must already have been validated by the
/// caller (the carrying P1R is untrusted transport).
/// Throws std::invalid_argument on duplicate replicas.
ClassifyResult classify_votes(uint32_t f, const Digest& txn, ShardId shard,
                              const std::vector<P1R>& replies, CertPtr conflict_cert);

/// Deterministic logging-shard choice: shards[id mod |shards|], with the
/// id read as a big-endian integer. Shards must be sorted and nonempty.
ShardId logging_shard(const Digest& txn, const std::vector<ShardId>& shards);

/// Structural conflict between two transactions, per the concurrency
/// check's abort conditions: other wrote a key this read below other's
/// timestamp, or other read a key this writes between the versions.
bool conflicts_with(const TxnMeta& txn, const TxnMeta& other);

/// Verifies one vote bundle: signatures, distinct replicas of the right
/// shard, votes matching the bundle decision, and the kind's thresholds.
/// A conflict-cert abort bundle is valid iff the embedded commit cert
/// verifies and genuinely conflicts with txn_meta.
bool verify_bundle(const VoteBundle& b, const Digest& txn, const TxnMeta& txn_meta, uint32_t f,
                   const Topology& topo, const KeyStore& keys, SigCache& cache);

/// Full decision-certificate check: evidence thresholds, signatures, and
/// shard coverage (all shards for fast commit, one abort bundle for fast
/// abort, the logging shard's n-f matching P2R for the slow path).
bool verify_cert(const DecisionCert& cert, uint32_t f, const Topology& topo,
                 const KeyStore& keys, SigCache& cache);

/// Replica-side Stage-2 validation: the 2PC decision is justified by the
/// carried tallies (a commit bundle for every touched shard, or one
/// abort bundle).
bool p2_justified(const P2& p2, uint32_t f, const Topology& topo, const KeyStore& keys,
                  SigCache& cache);

}  // namespace bftkv
