#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bftkv/merkle.hpp"
#include "bftkv/rng.hpp"

using namespace bftkv;

namespace {

std::vector<Bytes> make_replies(size_t n, Rng& rng) {
    std::vector<Bytes> out(n);
    for (auto& r : out) {
        r.resize(rng.range(1, 40));
        for (auto& b : r) b = uint8_t(rng.next_u64());
    }
    return out;
}

// Full-recompute oracle: rebuild the padded tree level by level straight
// from the leaf list, independent of the proof machinery.
Digest oracle_root(const std::vector<Bytes>& replies) {
    std::vector<Digest> level;
    for (const auto& r : replies) level.push_back(merkle_leaf(r));
    size_t padded = 1;
    while (padded < level.size()) padded <<= 1;
    level.resize(padded, level.back());
    while (level.size() > 1) {
        std::vector<Digest> next(level.size() / 2);
        for (size_t i = 0; i < next.size(); i++)
            next[i] = merkle_node(level[2 * i], level[2 * i + 1]);
        level = std::move(next);
    }
    return level[0];
}

size_t ceil_log2(size_t n) {
    size_t bits = 0, p = 1;
    while (p < n) {
        p <<= 1;
        bits++;
    }
    return bits;
}

}  // namespace

TEST_CASE("single-leaf batch: root is the leaf digest, empty proof") {
    Rng rng(1);
    auto replies = make_replies(1, rng);
    auto [batch, proofs] = build_batch(replies);
    CHECK(batch.root == merkle_leaf(replies[0]));
    CHECK(proofs[0].siblings.empty());
}

TEST_CASE("batch of four: every proof has exactly two siblings") {
    Rng rng(2);
    auto replies = make_replies(4, rng);
    auto [batch, proofs] = build_batch(replies);
    for (const auto& p : proofs) CHECK(p.siblings.size() == 2);
    CHECK(batch.root == oracle_root(replies));
}

TEST_CASE("batch of three pads to four and proofs still verify") {
    Rng rng(3);
    auto replies = make_replies(3, rng);
    auto [batch, proofs] = build_batch(replies);
    CHECK(batch.root == oracle_root(replies));
    for (size_t i = 0; i < replies.size(); i++) {
        CHECK(proofs[i].siblings.size() == 2);
        CHECK(fold_proof(merkle_leaf(replies[i]), proofs[i]) == batch.root);
    }
}

TEST_CASE("empty batch rejected") {
    CHECK_THROWS_AS(build_batch({}), std::invalid_argument);
}

TEST_CASE("verify_batched_reply: valid, tampered, cached") {
    KeyStore ks(SigScheme::Mock, 11);
    NodeId replica = 3;
    ks.register_identity(replica);
    Rng rng(4);
    auto replies = make_replies(4, rng);
    auto [batch, proofs] = build_batch(replies);
    Signature sig = ks.sign(replica, merkle_root_sign_bytes(batch.root));

    SigCache cache;
    CHECK(verify_batched_reply(replies[0], proofs[0], batch.root, sig, replica, ks, cache));
    CHECK(cache.size() == 1);

    // tampered sibling
    MerkleProof bad = proofs[1];
    bad.siblings[0].v[0] ^= 1;
    CHECK_FALSE(verify_batched_reply(replies[1], bad, batch.root, sig, replica, ks, cache));

    // second reply from the same batch: no scheme verification performed
    uint64_t before = ks.verify_calls();
    CHECK(verify_batched_reply(replies[1], proofs[1], batch.root, sig, replica, ks, cache));
    CHECK(ks.verify_calls() == before);

    // but a wrong reply under a cached root still fails on the fold
    CHECK_FALSE(verify_batched_reply(replies[2], proofs[1], batch.root, sig, replica, ks, cache));
}

TEST_CASE("soundness and completeness on batches of 1..64") {
    KeyStore ks(SigScheme::Mock, 12);
    NodeId replica = 0;
    ks.register_identity(replica);
    Rng rng(5);

    for (size_t n = 1; n <= 64; n++) {
        auto replies = make_replies(n, rng);
        auto [batch, proofs] = build_batch(replies);
        CHECK(batch.root == oracle_root(replies));

        size_t padded = 1;
        while (padded < n) padded <<= 1;
        Signature sig = ks.sign(replica, merkle_root_sign_bytes(batch.root));

        SigCache cache;
        uint64_t verifies_before = ks.verify_calls();
        for (size_t i = 0; i < n; i++) {
            CHECK(proofs[i].siblings.size() == ceil_log2(padded));
            CHECK(verify_batched_reply(replies[i], proofs[i], batch.root, sig, replica, ks,
                                       cache));
        }
        // warm cache: at most one scheme verification per batch
        CHECK(ks.verify_calls() - verifies_before <= 1);

        // soundness: a proof for one leaf never validates a different reply
        if (n >= 2) {
            size_t i = rng.below(n), j = (i + 1 + rng.below(n - 1)) % n;
            if (replies[i] != replies[j])
                CHECK_FALSE(verify_batched_reply(replies[j], proofs[i], batch.root, sig, replica,
                                                 ks, cache));
        }
    }
}

TEST_CASE("one signature per batch") {
    KeyStore ks(SigScheme::Mock, 13);
    ks.register_identity(9);
    Rng rng(6);
    for (size_t n : {1, 2, 4, 16, 32}) {
        auto replies = make_replies(n, rng);
        auto [batch, proofs] = build_batch(replies);
        uint64_t before = ks.sign_calls();
        batch.root_sig = ks.sign(9, merkle_root_sign_bytes(batch.root));
        CHECK(ks.sign_calls() - before == 1);
    }
}
