#include "bftkv/messages.hpp"

#include <algorithm>
#include <stdexcept>

namespace bftkv {

// Wire tags for signed payloads and hashed structures; every distinct
// payload kind gets its own tag so encodings stay injective across kinds.
// Layouts are documented in docs/wire_format.md.
namespace tag {
constexpr uint8_t kTxnMeta = 0x01;
constexpr uint8_t kReadRequest = 0x10;
constexpr uint8_t kReadReply = 0x11;
constexpr uint8_t kP1 = 0x12;
constexpr uint8_t kP1R = 0x13;
constexpr uint8_t kP2 = 0x14;
constexpr uint8_t kP2R = 0x15;
constexpr uint8_t kAbortNotice = 0x16;
constexpr uint8_t kElectFB = 0x17;
constexpr uint8_t kDecFB = 0x18;
}  // namespace tag

namespace {

void put(ByteWriter& w, const Timestamp& ts) {
    w.u64(ts.time);
    w.u64(ts.client_id);
}

void put(ByteWriter& w, const Digest& d) { w.raw(d.v.data(), d.v.size()); }

void put(ByteWriter& w, const DepEntry& d) {
    put(w, d.version);
    put(w, d.txn_id);
}

void put_meta_body(ByteWriter& w, const TxnMeta& m) {
    w.u8(tag::kTxnMeta);
    put(w, m.ts);
    w.u32(uint32_t(m.read_set.size()));
    for (const auto& [k, v] : m.read_set) {
        w.blob(k);
        put(w, v);
    }
    w.u32(uint32_t(m.write_set.size()));
    for (const auto& [k, v] : m.write_set) {
        w.blob(k);
        w.blob(v);
    }
    w.u32(uint32_t(m.dep_set.size()));
    for (const auto& d : m.dep_set) put(w, d);
}

void put(ByteWriter& w, const Signature& s) {
    w.u64(s.signer);
    w.blob(s.value);
}

void put(ByteWriter& w, const MerkleProof& p) {
    w.u32(p.leaf_index);
    w.u32(uint32_t(p.siblings.size()));
    for (const auto& s : p.siblings) put(w, s);
}

void put(ByteWriter& w, const Auth& a) {
    if (a.index() == 0) {
        w.u8(0);
        put(w, std::get<Signature>(a));
    } else {
        const auto& b = std::get<BatchedAuth>(a);
        w.u8(1);
        put(w, b.root);
        put(w, b.root_sig);
        put(w, b.proof);
    }
}

void put_cert(ByteWriter& w, const DecisionCert& c);

void put(ByteWriter& w, const Vote& v) {
    w.u8(uint8_t(v.value));
    if (v.conflict_txn) {
        w.u8(1);
        put(w, *v.conflict_txn);
    } else {
        w.u8(0);
    }
    if (v.conflict_cert) {
        w.u8(1);
        put_cert(w, *v.conflict_cert);
    } else {
        w.u8(0);
    }
}

void put_p1r(ByteWriter& w, const P1R& m) {
    put(w, m.txn_id);
    w.u64(m.replica);
    put(w, m.vote);
    put(w, m.auth);
}

void put(ByteWriter& w, const VoteBundle& b) {
    put(w, b.txn_id);
    w.u32(b.shard);
    w.u8(uint8_t(b.decision));
    w.u8(uint8_t(b.kind));
    w.u32(uint32_t(b.votes.size()));
    for (const auto& v : b.votes) put_p1r(w, v);
    if (b.conflict) {
        w.u8(1);
        put_cert(w, *b.conflict);
    } else {
        w.u8(0);
    }
}

void put_p2r(ByteWriter& w, const P2R& m) {
    put(w, m.txn_id);
    w.u8(uint8_t(m.decision));
    w.u32(m.view_decision);
    w.u32(m.view_current);
    w.u64(m.replica);
    put(w, m.auth);
}

void put_cert(ByteWriter& w, const DecisionCert& c) {
    put(w, c.txn_id);
    put_meta_body(w, c.meta);
    w.u8(uint8_t(c.decision));
    w.u8(c.genesis ? 1 : 0);
    if (c.is_fast()) {
        w.u8(0);
        const auto& bundles = std::get<std::vector<VoteBundle>>(c.evidence);
        w.u32(uint32_t(bundles.size()));
        for (const auto& b : bundles) put(w, b);
    } else {
        w.u8(1);
        const auto& slow = std::get<SlowEvidence>(c.evidence);
        w.u32(slow.shard);
        w.u32(uint32_t(slow.p2rs.size()));
        for (const auto& r : slow.p2rs) put_p2r(w, r);
    }
}

void put_opt_cert(ByteWriter& w, const CertPtr& c) {
    if (c) {
        w.u8(1);
        put_cert(w, *c);
    } else {
        w.u8(0);
    }
}

}  // namespace

void TxnMeta::normalize() {
    auto by_key = [](const auto& a, const auto& b) { return a.first < b.first; };
    std::sort(read_set.begin(), read_set.end(), by_key);
    std::sort(write_set.begin(), write_set.end(), by_key);
    std::sort(dep_set.begin(), dep_set.end());
    auto dup_key = [](const auto& s) {
        return std::adjacent_find(s.begin(), s.end(), [](const auto& a, const auto& b) {
                   return a.first == b.first;
               }) != s.end();
    };
    if (dup_key(read_set) || dup_key(write_set))
        throw std::invalid_argument("TxnMeta: duplicate key in read or write set");
}

std::vector<ShardId> TxnMeta::touched_shards(const Topology& topo) const {
    std::vector<ShardId> out;
    for (const auto& [k, _] : read_set) out.push_back(topo.shard_of_key(k));
    for (const auto& [k, _] : write_set) out.push_back(topo.shard_of_key(k));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Bytes encode(const TxnMeta& m) {
    ByteWriter w;
    put_meta_body(w, m);
    return w.take();
}

Digest txn_id(const TxnMeta& m) { return sha256(encode(m)); }

CertPtr make_genesis_cert() {
    auto c = std::make_shared<DecisionCert>();
    c->decision = Decision::Commit;
    c->genesis = true;
    c->evidence = std::vector<VoteBundle>{};
    return c;
}

Bytes signed_payload(const ReadRequest& m) {
    ByteWriter w;
    w.u8(tag::kReadRequest);
    w.blob(m.key);
    put(w, m.ts);
    w.u64(m.client);
    return w.take();
}

Bytes signed_payload(const ReadReply& m) {
    ByteWriter w;
    w.u8(tag::kReadReply);
    w.blob(m.key);
    put(w, m.req_ts);
    w.u64(m.replica);
    if (m.committed) {
        w.u8(1);
        put(w, m.committed->version);
        w.blob(m.committed->value);
        // binds which certificate backs the version; the cert itself is
        // carried alongside and verified independently
        put(w, m.committed->cert ? m.committed->cert->txn_id : Digest{});
    } else {
        w.u8(0);
    }
    if (m.prepared) {
        w.u8(1);
        put(w, m.prepared->version);
        w.blob(m.prepared->value);
        put(w, m.prepared->writer);
        w.u32(uint32_t(m.prepared->writer_deps.size()));
        for (const auto& d : m.prepared->writer_deps) put(w, d);
    } else {
        w.u8(0);
    }
    return w.take();
}

Bytes signed_payload(const P1& m) {
    ByteWriter w;
    w.u8(tag::kP1);
    put(w, m.txn_id);
    w.u64(m.sender);
    w.u8(m.recovery ? 1 : 0);
    return w.take();
}

Bytes signed_payload(const P1R& m) {
    ByteWriter w;
    w.u8(tag::kP1R);
    put(w, m.txn_id);
    w.u64(m.replica);
    w.u8(uint8_t(m.vote.value));
    if (m.vote.conflict_txn) {
        w.u8(1);
        put(w, *m.vote.conflict_txn);
    } else {
        w.u8(0);
    }
    return w.take();
}

Bytes signed_payload(const P2& m) {
    ByteWriter w;
    w.u8(tag::kP2);
    put(w, m.txn_id);
    w.u8(uint8_t(m.decision));
    w.u32(m.view);
    w.u64(m.sender);
    return w.take();
}

Bytes signed_payload(const P2R& m) {
    ByteWriter w;
    w.u8(tag::kP2R);
    put(w, m.txn_id);
    w.u8(uint8_t(m.decision));
    w.u32(m.view_decision);
    w.u32(m.view_current);
    w.u64(m.replica);
    return w.take();
}

Bytes signed_payload(const AbortNotice& m) {
    ByteWriter w;
    w.u8(tag::kAbortNotice);
    put(w, m.ts);
    w.u32(uint32_t(m.keys.size()));
    for (const auto& k : m.keys) w.blob(k);
    w.u64(m.sender);
    return w.take();
}

Bytes signed_payload(const ElectFB& m) {
    ByteWriter w;
    w.u8(tag::kElectFB);
    put(w, m.txn_id);
    w.u8(uint8_t(m.decision));
    w.u32(m.view);
    w.u64(m.replica);
    return w.take();
}

Bytes signed_payload(const DecFB& m) {
    ByteWriter w;
    w.u8(tag::kDecFB);
    put(w, m.txn_id);
    w.u8(uint8_t(m.decision));
    w.u32(m.view_elect);
    w.u64(m.leader);
    return w.take();
}

namespace {

struct FullEncoder {
    ByteWriter w;

    Bytes run(const Message& m) {
        w.u8(uint8_t(0x40 + m.index()));  // outer message kind
        std::visit(*this, m);
        return w.take();
    }

    void operator()(const ReadRequest& m) {
        w.blob(signed_payload(m));
        put(w, m.sig);
    }
    void operator()(const ReadReply& m) {
        w.blob(signed_payload(m));
        if (m.committed) put_opt_cert(w, m.committed->cert);
        put(w, m.auth);
    }
    void operator()(const P1& m) {
        w.blob(signed_payload(m));
        put_meta_body(w, m.meta);
        put(w, m.sig);
    }
    void operator()(const P1R& m) {
        w.blob(signed_payload(m));
        put_opt_cert(w, m.vote.conflict_cert);
        put(w, m.auth);
    }
    void operator()(const P2& m) {
        w.blob(signed_payload(m));
        put_meta_body(w, m.meta);
        w.u32(uint32_t(m.tallies.size()));
        for (const auto& t : m.tallies) put(w, t);
        put(w, m.sig);
    }
    void operator()(const P2R& m) {
        w.blob(signed_payload(m));
        put(w, m.auth);
    }
    void operator()(const Writeback& m) {
        w.u64(m.sender);
        put_opt_cert(w, m.cert);
    }
    void operator()(const AbortNotice& m) {
        w.blob(signed_payload(m));
        put(w, m.sig);
    }
    void operator()(const FetchTxn& m) {
        put(w, m.txn_id);
        w.u64(m.sender);
    }
    void operator()(const FetchReply& m) {
        put(w, m.txn_id);
        w.u64(m.replica);
        if (m.meta) {
            w.u8(1);
            put_meta_body(w, *m.meta);
        } else {
            w.u8(0);
        }
    }
    void operator()(const InvokeFB& m) {
        put(w, m.txn_id);
        w.u64(m.sender);
        w.u32(uint32_t(m.views.size()));
        for (const auto& v : m.views) put_p2r(w, v);
    }
    void operator()(const ElectFB& m) {
        w.blob(signed_payload(m));
        put(w, m.sig);
    }
    void operator()(const DecFB& m) {
        w.blob(signed_payload(m));
        put(w, m.leader_sig);
        w.u32(uint32_t(m.elects.size()));
        for (const auto& e : m.elects) {
            w.blob(signed_payload(e));
            put(w, e.sig);
        }
    }
};

}  // namespace

Bytes encode(const Message& m) {
    FullEncoder enc;
    return enc.run(m);
}

Bytes reply_payload(const Message& m) {
    if (auto* r = std::get_if<ReadReply>(&m)) return signed_payload(*r);
    if (auto* r = std::get_if<P1R>(&m)) return signed_payload(*r);
    if (auto* r = std::get_if<P2R>(&m)) return signed_payload(*r);
    throw std::invalid_argument("reply_payload: not a batchable reply");
}

}  // namespace bftkv
