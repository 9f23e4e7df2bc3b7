#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "bftkv/crypto.hpp"
#include "bftkv/digest.hpp"

namespace bftkv {

/// Sibling path from one leaf to the root. Length is
/// ceil(log2(padded leaf count)).
struct MerkleProof {
    uint32_t leaf_index = 0;
    std::vector<Digest> siblings;

    bool operator==(const MerkleProof&) const = default;
};

/// One signed batch of replies: the root is recomputable from the
/// leaves; a single root signature covers every reply in the batch.
struct MerkleBatch {
    std::vector<Digest> leaves;
    Digest root;
    Signature root_sig;
};

// Leaf and interior nodes are domain-separated by a one-byte prefix
// (0x00 leaf, 0x01 interior) so a leaf cannot be replayed as an
// interior node.
Digest merkle_leaf(const Bytes& reply);
Digest merkle_node(const Digest& left, const Digest& right);

/// Bytes a replica signs to commit to a batch root.
Bytes merkle_root_sign_bytes(const Digest& root);

/// Builds the batch tree over the replies. Leaves are padded by
/// duplicating the last leaf up to the next power of two. The returned
/// batch carries no signature; the caller signs the root once.
/// Throws std::invalid_argument on an empty reply list.
std::pair<MerkleBatch, std::vector<MerkleProof>> build_batch(const std::vector<Bytes>& replies);

/// Folds a leaf digest through the sibling path.
Digest fold_proof(const Digest& leaf, const MerkleProof& proof);

/// True iff the proof reconstructs the root and (root, sig, signer)
/// verifies. On success the (root, sig) pair enters the cache; cached
/// pairs skip scheme verification but the root fold is always redone.
bool verify_batched_reply(const Bytes& reply, const MerkleProof& proof, const Digest& root,
                          const Signature& sig, NodeId signer, const KeyStore& keys,
                          SigCache& cache);

}  // namespace bftkv
