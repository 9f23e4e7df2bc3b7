#pragma once

#include <string>
#include <vector>

#include "bftkv/messages.hpp"
#include "bftkv/quorums.hpp"
#include "bftkv/rng.hpp"

namespace bftkv::testing {

/// One shard-world with registered keys for quorum and codec tests.
struct TestWorld {
    Topology topo;
    KeyStore keys;
    SigCache cache;

    explicit TestWorld(uint32_t f = 1, uint32_t shards = 1, uint32_t clients = 4,
                       SigScheme scheme = SigScheme::Mock, uint64_t seed = 7)
        : topo{f, shards, clients}, keys(scheme, seed) {
        for (uint32_t s = 0; s < shards; s++)
            for (uint32_t i = 0; i < topo.n(); i++) keys.register_identity(topo.replica(s, i));
        for (uint32_t c = 0; c < clients; c++) keys.register_identity(topo.client(c));
    }

    P1R make_p1r(const Digest& txn, NodeId replica, Decision vote,
                 std::optional<Digest> conflict = std::nullopt) {
        P1R r;
        r.txn_id = txn;
        r.replica = replica;
        r.vote.value = vote;
        r.vote.conflict_txn = conflict;
        r.auth = keys.sign(replica, signed_payload(r));
        return r;
    }

    P2R make_p2r(const Digest& txn, NodeId replica, Decision d, uint32_t vd, uint32_t vc) {
        P2R r;
        r.txn_id = txn;
        r.decision = d;
        r.view_decision = vd;
        r.view_current = vc;
        r.replica = replica;
        r.auth = keys.sign(replica, signed_payload(r));
        return r;
    }

    ElectFB make_elect(const Digest& txn, NodeId replica, Decision d, uint32_t view) {
        ElectFB e;
        e.txn_id = txn;
        e.decision = d;
        e.view = view;
        e.replica = replica;
        e.sig = keys.sign(replica, signed_payload(e));
        return e;
    }
};

inline TxnMeta simple_meta(uint64_t time, uint64_t client, std::vector<std::string> reads,
                           std::vector<std::string> writes) {
    TxnMeta m;
    m.ts = {time, client};
    for (auto& k : reads) m.read_set.emplace_back(std::move(k), kGenesisTs);
    for (auto& k : writes) m.write_set.emplace_back(std::move(k), "v" + std::to_string(time));
    m.normalize();
    return m;
}

}  // namespace bftkv::testing
