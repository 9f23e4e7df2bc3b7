#include "bftkv/quorums.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace bftkv {

bool verify_auth(const Bytes& payload, const Auth& auth, NodeId signer, const KeyStore& keys,
                 SigCache& cache) {
    if (auto* sig = std::get_if<Signature>(&auth)) return keys.verify(signer, payload, *sig);
    const auto& b = std::get<BatchedAuth>(auth);
    return verify_batched_reply(payload, b.proof, b.root, b.root_sig, signer, keys, cache);
}

ClassifyResult classify_votes(uint32_t f, const Digest& txn, ShardId shard,
                              const std::vector<P1R>& replies, CertPtr conflict_cert) {
    Thresholds th{f};
    std::set<NodeId> seen;
    uint32_t commits = 0, aborts = 0;
    for (const auto& r : replies) {
        if (r.txn_id != txn) throw std::invalid_argument("classify_votes: txn id mismatch");
        if (!seen.insert(r.replica).second)
            throw std::invalid_argument("classify_votes: duplicate replica");
        (r.vote.value == Decision::Commit ? commits : aborts)++;
    }

    auto bundle = [&](Decision d, BundleKind k) {
        VoteBundle b;
        b.txn_id = txn;
        b.shard = shard;
        b.decision = d;
        b.kind = k;
        for (const auto& r : replies)
            if (r.vote.value == d) b.votes.push_back(r);
        return b;
    };

    // case (5): a single abort backed by a conflicting commit cert
    if (conflict_cert) {
        VoteBundle b;
        b.txn_id = txn;
        b.shard = shard;
        b.decision = Decision::Abort;
        b.kind = BundleKind::FastCert;
        b.conflict = std::move(conflict_cert);
        return b;
    }
    if (commits >= th.fast_commit()) return bundle(Decision::Commit, BundleKind::FastCert);
    if (aborts >= th.fast_abort()) return bundle(Decision::Abort, BundleKind::FastCert);
    if (commits >= th.commit_quorum()) return bundle(Decision::Commit, BundleKind::SlowTally);
    if (aborts >= th.abort_quorum()) return bundle(Decision::Abort, BundleKind::SlowTally);
    return NeedMore{};
}

ShardId logging_shard(const Digest& txn, const std::vector<ShardId>& shards) {
    if (shards.empty()) throw std::invalid_argument("logging_shard: empty shard list");
    if (!std::is_sorted(shards.begin(), shards.end()))
        throw std::invalid_argument("logging_shard: shards must be sorted");
    return shards[digest_mod(txn, shards.size())];
}

bool conflicts_with(const TxnMeta& txn, const TxnMeta& other) {
    // other wrote a key txn read, between txn's read version and txn's ts
    for (const auto& [key, rv] : txn.read_set) {
        for (const auto& [wk, _] : other.write_set) {
            if (wk == key && rv < other.ts && other.ts < txn.ts) return true;
        }
    }
    // other read a key txn writes, with txn's ts between the read version
    // and other's ts
    for (const auto& [key, _] : txn.write_set) {
        for (const auto& [rk, rv] : other.read_set) {
            if (rk == key && rv < txn.ts && txn.ts < other.ts) return true;
        }
    }
    return false;
}

bool verify_bundle(const VoteBundle& b, const Digest& txn, const TxnMeta& txn_meta, uint32_t f,
                   const Topology& topo, const KeyStore& keys, SigCache& cache) {
    Thresholds th{f};
    if (b.txn_id != txn) return false;

    if (b.conflict) {
        // conflicting-cert abort: the commit cert alone carries the weight
        if (b.decision != Decision::Abort || b.kind != BundleKind::FastCert) return false;
        if (b.conflict->decision != Decision::Commit || b.conflict->genesis) return false;
        if (!verify_cert(*b.conflict, f, topo, keys, cache)) return false;
        return conflicts_with(txn_meta, b.conflict->meta);
    }

    std::set<NodeId> seen;
    for (const auto& v : b.votes) {
        if (v.txn_id != txn) return false;
        if (!topo.is_replica(v.replica) || topo.shard_of(v.replica) != b.shard) return false;
        if (v.vote.value != b.decision) return false;
        if (!seen.insert(v.replica).second) return false;  // two P1R share a replica
        if (!verify_auth(signed_payload(v), v.auth, v.replica, keys, cache)) return false;
    }
    uint32_t count = uint32_t(b.votes.size());
    if (b.decision == Decision::Commit) {
        if (b.kind == BundleKind::FastCert) return count == th.fast_commit();
        return count >= th.commit_quorum() && count < th.fast_commit();
    }
    if (b.kind == BundleKind::FastCert) return count >= th.fast_abort();
    return count >= th.abort_quorum() && count < th.fast_abort();
}

bool verify_cert(const DecisionCert& cert, uint32_t f, const Topology& topo,
                 const KeyStore& keys, SigCache& cache) {
    if (cert.genesis)
        return cert.decision == Decision::Commit && cert.txn_id.is_zero() && cert.is_fast() &&
               std::get<std::vector<VoteBundle>>(cert.evidence).empty();

    if (txn_id(cert.meta) != cert.txn_id) return false;
    auto shards = cert.meta.touched_shards(topo);
    if (shards.empty()) return false;
    Thresholds th{f};

    if (cert.is_fast()) {
        const auto& bundles = std::get<std::vector<VoteBundle>>(cert.evidence);
        for (const auto& b : bundles) {
            if (b.kind != BundleKind::FastCert) return false;  // tallies are not durable
            if (std::find(shards.begin(), shards.end(), b.shard) == shards.end()) return false;
            if (!verify_bundle(b, cert.txn_id, cert.meta, f, topo, keys, cache)) return false;
        }
        if (cert.decision == Decision::Commit) {
            // every touched shard must be covered by a fast commit bundle
            for (ShardId s : shards) {
                bool covered = std::any_of(bundles.begin(), bundles.end(), [&](const auto& b) {
                    return b.shard == s && b.decision == Decision::Commit;
                });
                if (!covered) return false;
            }
            return true;
        }
        // fast abort: one abort bundle suffices
        return std::any_of(bundles.begin(), bundles.end(),
                           [](const auto& b) { return b.decision == Decision::Abort; });
    }

    const auto& slow = std::get<SlowEvidence>(cert.evidence);
    if (slow.shard != logging_shard(cert.txn_id, shards)) return false;
    if (slow.p2rs.size() < th.log_quorum()) return false;
    std::set<NodeId> seen;
    uint32_t view_decision = slow.p2rs.empty() ? 0 : slow.p2rs.front().view_decision;
    for (const auto& r : slow.p2rs) {
        if (r.txn_id != cert.txn_id) return false;
        if (r.decision != cert.decision) return false;
        if (r.view_decision != view_decision) return false;  // decision views must match
        if (!topo.is_replica(r.replica) || topo.shard_of(r.replica) != slow.shard) return false;
        if (!seen.insert(r.replica).second) return false;
        if (!verify_auth(signed_payload(r), r.auth, r.replica, keys, cache)) return false;
    }
    return true;
}

bool p2_justified(const P2& p2, uint32_t f, const Topology& topo, const KeyStore& keys,
                  SigCache& cache) {
    if (txn_id(p2.meta) != p2.txn_id) return false;
    auto shards = p2.meta.touched_shards(topo);
    if (shards.empty()) return false;

    if (p2.decision == Decision::Commit) {
        // a commit bundle (tally or fast cert) for every touched shard
        for (ShardId s : shards) {
            bool ok = std::any_of(p2.tallies.begin(), p2.tallies.end(), [&](const auto& b) {
                return b.shard == s && b.decision == Decision::Commit &&
                       verify_bundle(b, p2.txn_id, p2.meta, f, topo, keys, cache);
            });
            if (!ok) return false;
        }
        return true;
    }
    // abort: one shard's abort bundle suffices
    return std::any_of(p2.tallies.begin(), p2.tallies.end(), [&](const auto& b) {
        return b.decision == Decision::Abort &&
               std::find(shards.begin(), shards.end(), b.shard) != shards.end() &&
               verify_bundle(b, p2.txn_id, p2.meta, f, topo, keys, cache);
    });
}

}  // namespace bftkv
