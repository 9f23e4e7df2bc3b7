#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "bftkv/bytes.hpp"
#include "bftkv/digest.hpp"

namespace bftkv {

using NodeId = uint64_t;

enum class SigScheme : uint8_t {
    Mock,     // keyed digest, fast, for simulation campaigns
    Ed25519,  // real asymmetric scheme for end-to-end runs
};

struct Signature {
    NodeId signer = 0;
    Bytes value;

    bool operator==(const Signature& o) const {
        return signer == o.signer && value == o.value;
    }
};

/// Identity table plus signing keys for one run. Keys are derived
/// deterministically from the run seed so that runs are reproducible.
/// Verification against an unknown identity fails, it never throws.
class KeyStore {
  public:
    KeyStore(SigScheme scheme, uint64_t run_seed);

    void register_identity(NodeId id);
    bool known(NodeId id) const { return keys_.count(id) != 0; }

    Signature sign(NodeId id, const Bytes& msg) const;
    bool verify(NodeId id, const Bytes& msg, const Signature& sig) const;

    SigScheme scheme() const { return scheme_; }

    // instrumentation, read by tests and by the batching cache checks
    uint64_t sign_calls() const { return sign_calls_; }
    uint64_t verify_calls() const { return verify_calls_; }
    void reset_counters() {
        sign_calls_ = 0;
        verify_calls_ = 0;
    }

  private:
    struct KeyPair {
        Bytes secret;  // mock: 32-byte key; ed25519: 64-byte secret key
        Bytes pub;     // mock: same as secret; ed25519: 32-byte public key
    };

    SigScheme scheme_;
    uint64_t run_seed_;
    std::map<NodeId, KeyPair> keys_;
    mutable uint64_t sign_calls_ = 0;
    mutable uint64_t verify_calls_ = 0;
};

/// Cache of verified (root hash, signature) pairs for reply batching.
/// A hit means the signature may be declared valid without re-running
/// scheme verification; the Merkle fold is still recomputed by callers.
class SigCache {
  public:
    bool hit(const Digest& root, const Signature& sig) const {
        auto it = cache_.find(root);
        return it != cache_.end() && it->second == sig;
    }

    void put(const Digest& root, const Signature& sig) { cache_[root] = sig; }

    size_t size() const { return cache_.size(); }

  private:
    std::map<Digest, Signature> cache_;
};

}  // namespace bftkv
