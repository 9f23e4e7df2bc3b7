#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bftkv/crypto.hpp"
#include "bftkv/digest.hpp"

namespace bftkv {

using ShardId = uint32_t;

/// Static layout of one run's participants. Replica node ids are dense:
/// shard s holds ids [s*n, (s+1)*n); clients follow after all replicas.
struct Topology {
    uint32_t f = 1;
    uint32_t shards = 1;
    uint32_t clients = 1;

    uint32_t n() const { return 5 * f + 1; }
    uint32_t replica_count() const { return shards * n(); }

    NodeId replica(ShardId s, uint32_t index) const { return NodeId(s) * n() + index; }
    NodeId client(uint32_t k) const { return NodeId(replica_count()) + k; }

    bool is_replica(NodeId id) const { return id < replica_count(); }
    bool is_client(NodeId id) const {
        return id >= replica_count() && id < replica_count() + clients;
    }
    ShardId shard_of(NodeId replica_id) const { return ShardId(replica_id / n()); }
    uint32_t index_of(NodeId replica_id) const { return uint32_t(replica_id % n()); }
    uint32_t client_index(NodeId id) const { return uint32_t(id - replica_count()); }

    ShardId shard_of_key(const std::string& key) const {
        if (shards == 1) return 0;
        Bytes b(key.begin(), key.end());
        return ShardId(digest_mod(sha256(b), shards));
    }

    std::vector<NodeId> replicas_of(ShardId s) const {
        std::vector<NodeId> out;
        out.reserve(n());
        for (uint32_t i = 0; i < n(); i++) out.push_back(replica(s, i));
        return out;
    }
};

}  // namespace bftkv
