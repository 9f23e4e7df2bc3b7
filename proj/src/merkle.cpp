#include "bftkv/merkle.hpp"

#include <stdexcept>

#include "bftkv/bytes.hpp"

namespace bftkv {

Digest merkle_leaf(const Bytes& reply) {
    Bytes b;
    b.reserve(reply.size() + 1);
    b.push_back(0x00);
    b.insert(b.end(), reply.begin(), reply.end());
    return sha256(b);
}

Digest merkle_node(const Digest& left, const Digest& right) {
    Bytes b;
    b.reserve(65);
    b.push_back(0x01);
    b.insert(b.end(), left.v.begin(), left.v.end());
    b.insert(b.end(), right.v.begin(), right.v.end());
    return sha256(b);
}

Bytes merkle_root_sign_bytes(const Digest& root) {
    Bytes b;
    b.reserve(33);
    b.push_back(0x20);
    b.insert(b.end(), root.v.begin(), root.v.end());
    return b;
}

std::pair<MerkleBatch, std::vector<MerkleProof>> build_batch(const std::vector<Bytes>& replies) {
    if (replies.empty()) throw std::invalid_argument("build_batch: empty reply list");

    MerkleBatch batch;
    batch.leaves.reserve(replies.size());
    for (const auto& r : replies) batch.leaves.push_back(merkle_leaf(r));

    // pad by duplicating the last leaf to the next power of two
    size_t padded = 1;
    while (padded < batch.leaves.size()) padded <<= 1;
    std::vector<Digest> level = batch.leaves;
    level.resize(padded, batch.leaves.back());

    std::vector<MerkleProof> proofs(replies.size());
    for (size_t i = 0; i < replies.size(); i++) proofs[i].leaf_index = uint32_t(i);

    std::vector<uint32_t> pos(replies.size());
    for (size_t i = 0; i < replies.size(); i++) pos[i] = uint32_t(i);

    while (level.size() > 1) {
        for (size_t i = 0; i < replies.size(); i++) {
            uint32_t p = pos[i];
            proofs[i].siblings.push_back(level[p ^ 1]);
            pos[i] = p >> 1;
        }
        std::vector<Digest> next(level.size() / 2);
        for (size_t j = 0; j < next.size(); j++)
            next[j] = merkle_node(level[2 * j], level[2 * j + 1]);
        level = std::move(next);
    }
    batch.root = level[0];
    return {std::move(batch), std::move(proofs)};
}

Digest fold_proof(const Digest& leaf, const MerkleProof& proof) {
    Digest acc = leaf;
    uint32_t idx = proof.leaf_index;
    for (const auto& sib : proof.siblings) {
        acc = (idx & 1) ? merkle_node(sib, acc) : merkle_node(acc, sib);
        idx >>= 1;
    }
    return acc;
}

bool verify_batched_reply(const Bytes& reply, const MerkleProof& proof, const Digest& root,
                          const Signature& sig, NodeId signer, const KeyStore& keys,
                          SigCache& cache) {
    if (fold_proof(merkle_leaf(reply), proof) != root) return false;
    if (cache.hit(root, sig)) return true;
    if (!keys.verify(signer, merkle_root_sign_bytes(root), sig)) return false;
    cache.put(root, sig);
    return true;
}

}  // namespace bftkv
