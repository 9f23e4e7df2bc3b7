#pragma once

// Exhaustive certificate-exclusion enumeration at f=1, n=6.
//
// Each replica of one shard is assigned Commit, Abort, or
// Equivocate-both (the Byzantine option that signs either vote; at most
// f replicas may equivocate). For every assignment we construct, with
// the real message and verification code, the strongest CommitCert and
// AbortCert an adversary could assemble under that assignment, over all
// certificate forms (fast/slow x fast/slow) and all ways of splitting
// honest Stage-2 logging between the two decisions. The property under
// test: no assignment yields both a verifying CommitCert and a
// verifying AbortCert for one transaction.

#include <optional>
#include <vector>

#include "bftkv/quorums.hpp"
#include "helpers.hpp"

namespace bftkv::testing {

enum class Assign : uint8_t { C, A, E };

struct CertEnumWorld {
    TestWorld w;
    TxnMeta meta;
    Digest txn;

    CertEnumWorld() : w(1, 1, 2) {
        meta = simple_meta(10, 100, {"r1"}, {"w1"});
        txn = txn_id(meta);
    }

    // votes available for decision d under the assignment
    std::vector<P1R> votes_for(const std::vector<Assign>& assign, Decision d) {
        std::vector<P1R> out;
        for (uint32_t i = 0; i < assign.size(); i++) {
            Assign a = assign[i];
            bool can = (a == Assign::E) || (a == Assign::C && d == Decision::Commit) ||
                       (a == Assign::A && d == Decision::Abort);
            if (can) out.push_back(w.make_p1r(txn, w.topo.replica(0, i), d));
        }
        return out;
    }

    std::optional<DecisionCert> fast_cert(const std::vector<Assign>& assign, Decision d) {
        DecisionCert c;
        c.txn_id = txn;
        c.meta = meta;
        c.decision = d;
        VoteBundle b;
        b.txn_id = txn;
        b.shard = 0;
        b.decision = d;
        b.kind = BundleKind::FastCert;
        b.votes = votes_for(assign, d);
        c.evidence = std::vector<VoteBundle>{std::move(b)};
        return c;
    }

    // Builds the commit-quorum (or abort-quorum) tally a client would
    // need to justify a P2 for decision d; nullopt when the assignment
    // cannot produce one.
    std::optional<VoteBundle> tally(const std::vector<Assign>& assign, Decision d) {
        Thresholds th{w.topo.f};
        auto votes = votes_for(assign, d);
        uint32_t need = d == Decision::Commit ? th.commit_quorum() : th.abort_quorum();
        if (votes.size() < need) return std::nullopt;
        VoteBundle b;
        b.txn_id = txn;
        b.shard = 0;
        b.decision = d;
        // keep the tally in slow-tally range
        if (votes.size() >= th.fast_commit()) votes.resize(th.fast_commit() - 1);
        b.kind = (d == Decision::Abort && votes.size() >= th.fast_abort())
                     ? BundleKind::FastCert
                     : BundleKind::SlowTally;
        b.votes = std::move(votes);
        return b;
    }

    // Slow-path cert for decision d: honest loggers from `honest_set`
    // (only legitimate when a justifying tally exists) plus every
    // equivocator.
    DecisionCert slow_cert(const std::vector<Assign>& assign, Decision d,
                           const std::vector<uint32_t>& honest_loggers, bool justified) {
        DecisionCert c;
        c.txn_id = txn;
        c.meta = meta;
        c.decision = d;
        SlowEvidence ev;
        ev.shard = 0;
        if (justified)
            for (uint32_t i : honest_loggers)
                ev.p2rs.push_back(w.make_p2r(txn, w.topo.replica(0, i), d, 0, 0));
        for (uint32_t i = 0; i < assign.size(); i++)
            if (assign[i] == Assign::E)
                ev.p2rs.push_back(w.make_p2r(txn, w.topo.replica(0, i), d, 0, 0));
        c.evidence = std::move(ev);
        return c;
    }

    bool cert_ok(const DecisionCert& c) {
        return verify_cert(c, w.topo.f, w.topo, w.keys, w.cache);
    }
};

/// Runs the full enumeration; returns the number of assignments checked
/// and asserts the exclusion property through `fail(description)`.
template <typename FailFn>
size_t enumerate_cert_exclusion(FailFn&& fail) {
    CertEnumWorld cw;
    const uint32_t n = 6;
    size_t checked = 0;

    std::vector<Assign> assign(n);
    for (uint32_t code = 0; code < 729; code++) {  // 3^6
        uint32_t c = code, equivocators = 0;
        for (uint32_t i = 0; i < n; i++) {
            assign[i] = Assign(c % 3);
            if (assign[i] == Assign::E) equivocators++;
            c /= 3;
        }
        if (equivocators > cw.w.topo.f) continue;  // fault bound
        checked++;

        // fast certs depend only on the vote assignment
        bool fast_commit_ok = cw.cert_ok(*cw.fast_cert(assign, Decision::Commit));
        bool fast_abort_ok = cw.cert_ok(*cw.fast_cert(assign, Decision::Abort));
        if (fast_commit_ok && fast_abort_ok) fail("fast/fast dual certs");

        // slow certs additionally depend on how honest replicas split
        // their one logged decision; one (assignment, split) pair is one
        // possible world. A decision is only loggable by honest replicas
        // when a justifying quorum tally exists.
        bool cq = cw.tally(assign, Decision::Commit).has_value();
        bool aq = cw.tally(assign, Decision::Abort).has_value();
        std::vector<uint32_t> honest;
        for (uint32_t i = 0; i < n; i++)
            if (assign[i] != Assign::E) honest.push_back(i);
        for (size_t split = 0; split <= honest.size(); split++) {
            std::vector<uint32_t> to_c(honest.begin(), honest.begin() + split);
            std::vector<uint32_t> to_a(honest.begin() + split, honest.end());
            bool slow_commit_ok = cw.cert_ok(cw.slow_cert(assign, Decision::Commit, to_c, cq));
            bool slow_abort_ok = cw.cert_ok(cw.slow_cert(assign, Decision::Abort, to_a, aq));
            if ((fast_commit_ok || slow_commit_ok) && (fast_abort_ok || slow_abort_ok))
                fail("assignment produced both cert kinds");
        }
    }
    return checked;
}

/// Lemma-B.3 style enumeration: when >= 2f+1 correct replicas voted
/// Commit for T1, a conflicting T2 can never obtain a CommitCert.
/// Honest replicas that voted Commit for T1 vote Abort for T2 (local
/// serializability); equivocators vote anything.
template <typename FailFn>
size_t enumerate_conflicting_commit(FailFn&& fail) {
    CertEnumWorld cw;
    Thresholds th{1};
    const uint32_t n = 6;
    size_t checked = 0;

    // T2 conflicts with T1: T2 reads the key T1 writes, below T1's ts
    TxnMeta meta1 = cw.meta;  // writes w1 at ts (10,100)
    TxnMeta meta2;
    meta2.ts = {20, 101};
    meta2.read_set = {{"w1", kGenesisTs}};  // read version 0 < ts1 < ts2
    meta2.write_set = {{"w2", "x"}};
    meta2.normalize();
    Digest txn2 = txn_id(meta2);
    if (!conflicts_with(meta2, meta1)) fail("fixture must conflict");

    std::vector<Assign> assign(n);
    for (uint32_t code = 0; code < 729; code++) {
        uint32_t c = code, equivocators = 0, honest_commit_t1 = 0;
        for (uint32_t i = 0; i < n; i++) {
            assign[i] = Assign(c % 3);
            if (assign[i] == Assign::E) equivocators++;
            if (assign[i] == Assign::C) honest_commit_t1++;
            c /= 3;
        }
        if (equivocators > 1) continue;
        if (honest_commit_t1 < 2 * th.f + 1) continue;  // premise: T1 commit-voted by 2f+1 correct
        checked++;

        // votes available for Commit on T2: honest T1-committers vote
        // Abort on T2; the rest may vote Commit
        std::vector<P1R> t2_commit;
        for (uint32_t i = 0; i < n; i++)
            if (assign[i] != Assign::C)
                t2_commit.push_back(cw.w.make_p1r(txn2, cw.w.topo.replica(0, i), Decision::Commit));

        // fast attempt
        DecisionCert fast;
        fast.txn_id = txn2;
        fast.meta = meta2;
        fast.decision = Decision::Commit;
        VoteBundle b;
        b.txn_id = txn2;
        b.shard = 0;
        b.decision = Decision::Commit;
        b.kind = BundleKind::FastCert;
        b.votes = t2_commit;
        fast.evidence = std::vector<VoteBundle>{b};
        if (verify_cert(fast, 1, cw.w.topo, cw.w.keys, cw.w.cache))
            fail("conflicting txn obtained fast CommitCert");

        // slow attempt: loggers = anyone able to see a CQ tally for T2
        bool cq2 = t2_commit.size() >= th.commit_quorum();
        DecisionCert slow;
        slow.txn_id = txn2;
        slow.meta = meta2;
        slow.decision = Decision::Commit;
        SlowEvidence ev;
        ev.shard = 0;
        if (cq2) {
            for (uint32_t i = 0; i < n; i++)
                ev.p2rs.push_back(cw.w.make_p2r(txn2, cw.w.topo.replica(0, i), Decision::Commit, 0, 0));
        } else {
            for (uint32_t i = 0; i < n; i++)
                if (assign[i] == Assign::E)
                    ev.p2rs.push_back(
                        cw.w.make_p2r(txn2, cw.w.topo.replica(0, i), Decision::Commit, 0, 0));
        }
        slow.evidence = ev;
        if (verify_cert(slow, 1, cw.w.topo, cw.w.keys, cw.w.cache))
            fail("conflicting txn obtained slow CommitCert");
    }
    return checked;
}

}  // namespace bftkv::testing
