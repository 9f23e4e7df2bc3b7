#include "bftkv/replica.hpp"

#include <algorithm>
#include <cassert>

namespace bftkv {

const char* to_str(ByzReplicaBehavior b) {
    switch (b) {
        case ByzReplicaBehavior::Mute: return "mute";
        case ByzReplicaBehavior::VoteFlip: return "vote-flip";
        case ByzReplicaBehavior::StaleRead: return "stale-read";
        case ByzReplicaBehavior::BogusVersion: return "bogus-version";
        case ByzReplicaBehavior::EquivocateP1R: return "equivocate-p1r";
        case ByzReplicaBehavior::BadFallbackLeader: return "bad-fallback-leader";
    }
    return "?";
}

namespace {

bool meta_well_formed(const TxnMeta& m) {
    auto sorted_unique = [](const auto& s) {
        for (size_t i = 1; i < s.size(); i++)
            if (!(s[i - 1].first < s[i].first)) return false;
        return true;
    };
    return sorted_unique(m.read_set) && sorted_unique(m.write_set) &&
           std::is_sorted(m.dep_set.begin(), m.dep_set.end()) && !m.ts.is_genesis();
}

}  // namespace

Replica::Replica(const Topology& topo, NodeId id, const KeyStore& keys, HistoryLog* log,
                 ReplicaParams params, int64_t clock_offset)
    : topo_(topo),
      id_(id),
      shard_(topo.shard_of(id)),
      keys_(keys),
      log_(log),
      params_(params),
      clock_offset_(clock_offset),
      store_(make_genesis_cert()) {}

uint32_t Replica::view_of(const Digest& txn) const {
    auto it = txns_.find(txn);
    return it == txns_.end() ? 0 : it->second.view_current;
}

std::optional<Decision> Replica::finalized(const Digest& txn) const {
    auto it = txns_.find(txn);
    return it == txns_.end() ? std::nullopt : it->second.final_decision;
}

std::optional<Vote> Replica::vote_of(const Digest& txn) const {
    auto it = txns_.find(txn);
    return it == txns_.end() ? std::nullopt : it->second.my_vote;
}

std::optional<std::pair<Decision, uint32_t>> Replica::logged_of(const Digest& txn) const {
    auto it = txns_.find(txn);
    return it == txns_.end() ? std::nullopt : it->second.logged;
}

bool Replica::prepared(const Digest& txn) const {
    auto it = txns_.find(txn);
    return it != txns_.end() && it->second.is_prepared;
}

Outbox Replica::handle(const Message& m, uint64_t now) {
    Outbox out;
    out_ = &out;
    std::visit(
        [&](const auto& msg) {
            using T = std::decay_t<decltype(msg)>;
            if constexpr (std::is_same_v<T, ReadRequest>) handle_read(msg, now);
            else if constexpr (std::is_same_v<T, P1>) handle_p1(msg, now);
            else if constexpr (std::is_same_v<T, P2>) handle_p2(msg, now);
            else if constexpr (std::is_same_v<T, Writeback>) handle_writeback(msg, now);
            else if constexpr (std::is_same_v<T, AbortNotice>) handle_abort_notice(msg, now);
            else if constexpr (std::is_same_v<T, FetchTxn>) handle_fetch(msg, now);
            else if constexpr (std::is_same_v<T, InvokeFB>) handle_invoke_fb(msg, now);
            else if constexpr (std::is_same_v<T, ElectFB>) handle_elect_fb(msg, now);
            else if constexpr (std::is_same_v<T, DecFB>) handle_dec_fb(msg, now);
            // replicas do not consume client-bound replies
        },
        m);
    out_ = nullptr;
    return out;
}

Outbox Replica::on_timer(uint64_t token, uint64_t now) {
    Outbox out;
    out_ = &out;
    if (token == batch_epoch_ && !batch_.empty()) flush_batch(now);
    batch_timer_armed_ = false;
    out_ = nullptr;
    return out;
}

// ---------------------------------------------------------------------------
// reply batching

void Replica::send(NodeId to, Message m) {
    if (byz_ == ByzReplicaBehavior::Mute) return;  // unresponsive
    out_->msgs.push_back({to, std::move(m)});
}

void Replica::emit_reply(NodeId to, Message m, uint64_t now) {
    if (byz_ == ByzReplicaBehavior::Mute) return;  // never reaches the wire
    batch_.push_back({to, std::move(m)});
    if (batch_.size() >= params_.batch_size) {
        flush_batch(now);
        return;
    }
    if (!batch_timer_armed_) {
        batch_timer_armed_ = true;
        out_->timers.push_back({now + params_.batch_window, batch_epoch_});
    }
}

void Replica::flush_batch(uint64_t) {
    std::vector<Bytes> payloads;
    payloads.reserve(batch_.size());
    for (const auto& p : batch_) payloads.push_back(reply_payload(p.msg));
    auto [batch, proofs] = build_batch(payloads);
    Signature root_sig = keys_.sign(id_, merkle_root_sign_bytes(batch.root));
    for (size_t i = 0; i < batch_.size(); i++) {
        BatchedAuth auth{batch.root, root_sig, proofs[i]};
        auto& msg = batch_[i].msg;
        if (auto* r = std::get_if<ReadReply>(&msg)) r->auth = auth;
        else if (auto* r1 = std::get_if<P1R>(&msg)) r1->auth = auth;
        else if (auto* r2 = std::get_if<P2R>(&msg)) r2->auth = auth;
        out_->msgs.push_back({batch_[i].to, std::move(msg)});
    }
    batch_.clear();
    batch_epoch_++;  // invalidates any armed flush timer
    batch_timer_armed_ = false;
}

void Replica::emit_p1r(NodeId to, const Digest& id, const TxnState& st, uint64_t now) {
    P1R r;
    r.txn_id = id;
    r.replica = id_;
    r.vote = *st.my_vote;
    if (byz_ == ByzReplicaBehavior::VoteFlip ||
        (byz_ == ByzReplicaBehavior::EquivocateP1R && (to & 1))) {
        r.vote.value = r.vote.value == Decision::Commit ? Decision::Abort : Decision::Commit;
        r.vote.conflict_txn.reset();
        r.vote.conflict_cert.reset();
    }
    emit_reply(to, std::move(r), now);
}

void Replica::emit_p2r(NodeId to, const Digest& id, const TxnState& st, uint64_t now) {
    P2R r;
    r.txn_id = id;
    if (st.logged) {
        r.decision = st.logged->first;
        r.view_decision = st.logged->second;
    } else if (st.final_decision) {
        r.decision = *st.final_decision;
        r.view_decision = 0;
    }
    r.view_current = st.view_current;
    r.replica = id_;
    emit_reply(to, std::move(r), now);
}

// ---------------------------------------------------------------------------
// execution phase

void Replica::handle_read(const ReadRequest& m, uint64_t now) {
    if (!keys_.verify(m.client, signed_payload(m), m.sig)) return;
    if (int64_t(m.ts.time) > local_clock(now) + int64_t(params_.delta)) return;  // ignore
    if (topo_.shard_of_key(m.key) != shard_) return;

    store_.rts_add(m.key, m.ts);

    ReadReply reply;
    reply.key = m.key;
    reply.req_ts = m.ts;
    reply.replica = id_;

    auto [cts, cv] = store_.latest_committed_below(m.key, m.ts);
    reply.committed = CommittedRead{cts, cv->value, cv->cert};

    if (auto p = store_.latest_prepared_below(m.key, m.ts)) {
        auto it = txns_.find(p->second->writer);
        if (it != txns_.end() && it->second.meta) {
            reply.prepared =
                PreparedRead{p->first, p->second->value, p->second->writer,
                             it->second.meta->dep_set};
        }
    }

    if (byz_ == ByzReplicaBehavior::StaleRead) {
        // oldest committed version instead of the latest
        const auto& ks = store_.key(m.key);
        auto first = ks.committed.begin();
        reply.committed = CommittedRead{first->first, first->second.value, first->second.cert};
        reply.prepared.reset();
    } else if (byz_ == ByzReplicaBehavior::BogusVersion) {
        PreparedRead fake;
        fake.version = Timestamp{m.ts.time, m.ts.client_id ? m.ts.client_id - 1 : 0};
        fake.value = "forged";
        ByteWriter w;
        w.blob(m.key);
        w.u64(id_);
        fake.writer = sha256(w.bytes());
        reply.prepared = fake;
    }

    if (log_)
        log_->push(now, EvReadServed{id_, m.client, m.key, m.ts, cts,
                                     reply.committed ? std::optional(reply.committed->version)
                                                     : std::nullopt,
                                     reply.prepared ? std::optional(reply.prepared->version)
                                                    : std::nullopt});
    emit_reply(m.client, std::move(reply), now);
}

// ---------------------------------------------------------------------------
// Algorithm 1

Replica::CheckResult Replica::mvtso_check(const Digest& id, const TxnMeta& meta, uint64_t now) {
    Vote abort{Decision::Abort, std::nullopt, nullptr};

    // (1) timestamp within the local clock bound
    if (int64_t(meta.ts.time) > local_clock(now) + int64_t(params_.delta))
        return {CheckResult::Kind::Vote, abort};

    // (2) dependencies are valid: prepared or committed locally, and the
    // version matches the dependency transaction's write timestamp
    for (const auto& d : meta.dep_set) {
        auto it = txns_.find(d.txn_id);
        bool valid = it != txns_.end() && it->second.meta &&
                     (it->second.is_prepared ||
                      it->second.final_decision == Decision::Commit) &&
                     it->second.meta->ts == d.version;
        if (!valid) return {CheckResult::Kind::Vote, abort};
    }

    // (3) reads did not miss a committed or prepared write
    for (const auto& [key, rv] : meta.read_set) {
        if (topo_.shard_of_key(key) != shard_) continue;
        if (rv > meta.ts) return {CheckResult::Kind::Misbehavior, abort};
        if (auto w = store_.write_between(key, rv, meta.ts)) {
            Vote v{Decision::Abort, w->writer, w->cert};
            return {CheckResult::Kind::Vote, v};
        }
    }

    for (const auto& [key, value] : meta.write_set) {
        if (topo_.shard_of_key(key) != shard_) continue;
        (void)value;
        // (4) the write would invalidate a prepared/committed read
        if (auto r = store_.invalidated_reader(key, meta.ts)) {
            auto it = txns_.find(r->reader);
            Vote v{Decision::Abort, r->reader,
                   it != txns_.end() ? it->second.final_cert : nullptr};
            return {CheckResult::Kind::Vote, v};
        }
        // (5) an ongoing read above our timestamp
        if (auto mr = store_.max_rts(key); mr && *mr > meta.ts)
            return {CheckResult::Kind::Vote, abort};
    }

    // (6) prepare: writes become visible to future reads
    auto& st = txn(id);
    st.is_prepared = true;
    for (const auto& [key, value] : meta.write_set)
        if (topo_.shard_of_key(key) == shard_)
            store_.add_prepared(key, meta.ts, PreparedVersion{value, id});
    for (const auto& [key, rv] : meta.read_set)
        if (topo_.shard_of_key(key) == shard_)
            store_.add_reader(key, ReaderEntry{meta.ts, rv, id});

    // (7) wait for all pending dependencies
    std::set<Digest> waiting;
    for (const auto& d : meta.dep_set)
        if (!txns_[d.txn_id].final_decision) waiting.insert(d.txn_id);
    if (waiting.empty()) return {CheckResult::Kind::Vote, Vote{Decision::Commit, {}, nullptr}};

    st.check_pending = true;
    st.waiting_on = waiting;
    for (const auto& d : waiting) waiters_[d].insert(id);
    return {CheckResult::Kind::Parked, abort};
}

void Replica::finish_vote(const Digest& id, TxnState& st, const Vote& vote, bool misbehavior,
                          uint64_t now) {
    assert(!st.my_vote);
    st.my_vote = vote;
    st.misbehavior = misbehavior;
    Vote logged_vote = vote;
    if (byz_ == ByzReplicaBehavior::VoteFlip)
        logged_vote.value =
            logged_vote.value == Decision::Commit ? Decision::Abort : Decision::Commit;
    if (log_)
        log_->push(now, EvVoteCast{id_, id, logged_vote.value, misbehavior,
                                   logged_vote.conflict_txn});
    std::sort(st.reply_to.begin(), st.reply_to.end());
    st.reply_to.erase(std::unique(st.reply_to.begin(), st.reply_to.end()), st.reply_to.end());
    for (NodeId to : st.reply_to) emit_p1r(to, id, st, now);
    st.reply_to.clear();
}

void Replica::unprepare(const Digest& id, TxnState& st) {
    if (!st.is_prepared || !st.meta) return;
    st.is_prepared = false;
    for (const auto& [key, _] : st.meta->write_set)
        if (topo_.shard_of_key(key) == shard_) store_.remove_prepared(key, st.meta->ts);
    for (const auto& [key, rv] : st.meta->read_set)
        if (topo_.shard_of_key(key) == shard_)
            store_.remove_reader(key, ReaderEntry{st.meta->ts, rv, id});
}

void Replica::handle_p1(const P1& m, uint64_t now) {
    if (!keys_.verify(m.sender, signed_payload(m), m.sig)) return;
    if (!meta_well_formed(m.meta) || txn_id(m.meta) != m.txn_id) {
        if (log_) log_->push(now, EvMisbehavior{m.sender, "p1-id-mismatch", m.txn_id});
        return;
    }

    auto& st = txn(m.txn_id);
    if (!st.meta) st.meta = m.meta;

    if (m.recovery) {
        st.interested.insert(m.sender);
        // answer with the most advanced artifact held
        if (st.final_decision && st.final_cert) {
            send(m.sender, Writeback{st.final_cert, id_});
            return;
        }
        if (st.logged) {
            emit_p2r(m.sender, m.txn_id, st, now);
            return;
        }
    }

    if (st.my_vote) {  // at most once: duplicates get the stored vote
        emit_p1r(m.sender, m.txn_id, st, now);
        return;
    }
    if (st.final_decision) {
        // finalized before ever voting; answer consistently with history
        st.my_vote = Vote{*st.final_decision, {}, nullptr};
        if (log_) log_->push(now, EvVoteCast{id_, m.txn_id, st.my_vote->value, false, {}});
        emit_p1r(m.sender, m.txn_id, st, now);
        return;
    }
    if (st.check_pending) {  // duplicate while deferred by step (7)
        st.reply_to.push_back(m.sender);
        return;
    }

    st.reply_to.push_back(m.sender);
    CheckResult res = mvtso_check(m.txn_id, *st.meta, now);
    switch (res.kind) {
        case CheckResult::Kind::Misbehavior:
            if (log_) log_->push(now, EvMisbehavior{m.sender, "read-version-above-ts", m.txn_id});
            finish_vote(m.txn_id, st, Vote{Decision::Abort, {}, nullptr}, true, now);
            break;
        case CheckResult::Kind::Vote:
            finish_vote(m.txn_id, st, res.vote, false, now);
            break;
        case CheckResult::Kind::Parked:
            break;  // resumed by dependency resolution
    }
}

void Replica::resolve_dependency(const Digest& dep, Decision dep_decision, uint64_t now) {
    auto wit = waiters_.find(dep);
    if (wit == waiters_.end()) return;
    std::set<Digest> waiting = std::move(wit->second);
    waiters_.erase(wit);

    for (const Digest& w : waiting) {
        auto& st = txns_[w];
        if (!st.check_pending) continue;
        if (dep_decision == Decision::Abort) {
            st.check_pending = false;
            st.waiting_on.clear();
            unprepare(w, st);
            finish_vote(w, st, Vote{Decision::Abort, dep, nullptr}, false, now);
        } else {
            st.waiting_on.erase(dep);
            if (st.waiting_on.empty()) {
                st.check_pending = false;
                finish_vote(w, st, Vote{Decision::Commit, {}, nullptr}, false, now);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Stage 2

void Replica::handle_p2(const P2& m, uint64_t now) {
    if (!keys_.verify(m.sender, signed_payload(m), m.sig)) return;
    if (m.view != 0) return;  // client decisions live in view 0
    if (!meta_well_formed(m.meta) || txn_id(m.meta) != m.txn_id) return;

    auto& st = txn(m.txn_id);
    if (!st.meta) st.meta = m.meta;
    st.interested.insert(m.sender);

    if (st.final_decision) {
        emit_p2r(m.sender, m.txn_id, st, now);
        return;
    }
    if (st.logged) {  // never regress; divergence surfaces via non-matching P2R
        emit_p2r(m.sender, m.txn_id, st, now);
        return;
    }
    if (st.view_current > 0) return;  // decisions for past views are not accepted

    if (!p2_justified(m, topo_.f, topo_, keys_, cache_)) return;  // reject

    st.logged = {m.decision, m.view};
    if (log_) log_->push(now, EvP2Logged{id_, m.txn_id, m.decision, m.view});
    emit_p2r(m.sender, m.txn_id, st, now);
}

// ---------------------------------------------------------------------------
// writeback

void Replica::apply_cert(const DecisionCert& cert, CertPtr keep, uint64_t now) {
    auto& st = txn(cert.txn_id);
    if (st.final_decision) return;  // idempotent
    if (!st.meta) st.meta = cert.meta;
    const TxnMeta& meta = *st.meta;

    if (cert.decision == Decision::Commit) {
        st.is_prepared = false;
        for (const auto& [key, value] : meta.write_set)
            if (topo_.shard_of_key(key) == shard_)
                store_.add_committed(key, meta.ts, CommittedVersion{value, keep});
        // committed reads keep guarding the schedule
        for (const auto& [key, rv] : meta.read_set)
            if (topo_.shard_of_key(key) == shard_)
                store_.add_reader(key, ReaderEntry{meta.ts, rv, cert.txn_id});
    } else {
        unprepare(cert.txn_id, st);
    }
    for (const auto& [key, _] : meta.read_set)
        if (topo_.shard_of_key(key) == shard_) store_.rts_remove(key, meta.ts);

    st.final_decision = cert.decision;
    st.final_cert = keep;
    if (log_) log_->push(now, EvFinalized{id_, cert.txn_id, cert.decision});

    resolve_dependency(cert.txn_id, cert.decision, now);
}

void Replica::handle_writeback(const Writeback& m, uint64_t now) {
    if (!m.cert) return;
    if (!verify_cert(*m.cert, topo_.f, topo_, keys_, cache_)) {
        if (log_) log_->push(now, EvMisbehavior{m.sender, "invalid-cert", m.cert->txn_id});
        return;
    }
    apply_cert(*m.cert, m.cert, now);
}

void Replica::handle_abort_notice(const AbortNotice& m, uint64_t now) {
    if (!keys_.verify(m.sender, signed_payload(m), m.sig)) return;
    if (m.ts.client_id != m.sender) {  // only the owner clears its read marks
        if (log_) log_->push(now, EvMisbehavior{m.sender, "abort-notice-not-owner", Digest{}});
        return;
    }
    for (const auto& key : m.keys)
        if (topo_.shard_of_key(key) == shard_) store_.rts_remove(key, m.ts);
}

void Replica::handle_fetch(const FetchTxn& m, uint64_t) {
    FetchReply r;
    r.txn_id = m.txn_id;
    r.replica = id_;
    auto it = txns_.find(m.txn_id);
    if (it != txns_.end() && it->second.meta) r.meta = it->second.meta;
    send(m.sender, std::move(r));
}

// ---------------------------------------------------------------------------
// fallback

uint32_t Replica::leader_index(const Digest& txn, uint32_t view) const {
    return uint32_t((uint64_t(view) + digest_mod(txn, topo_.n())) % topo_.n());
}

void Replica::handle_invoke_fb(const InvokeFB& m, uint64_t now) {
    auto& st = txn(m.txn_id);
    st.interested.insert(m.sender);

    // latest verified signed view per replica
    std::map<NodeId, uint32_t> latest;
    for (const auto& r : m.views) {
        if (r.txn_id != m.txn_id) continue;
        if (!topo_.is_replica(r.replica) || topo_.shard_of(r.replica) != shard_) continue;
        if (!verify_auth(signed_payload(r), r.auth, r.replica, keys_, cache_)) continue;
        auto [it, fresh] = latest.emplace(r.replica, r.view_current);
        if (!fresh) it->second = std::max(it->second, r.view_current);
    }

    Thresholds th{topo_.f};
    // vote subsumption: view v supports every v' <= v
    auto support = [&](uint32_t v) {
        uint32_t c = 0;
        for (const auto& [_, view] : latest)
            if (view >= v) c++;
        return c;
    };

    uint32_t old_view = st.view_current;
    std::optional<uint32_t> new_view;
    std::vector<uint32_t> candidates;
    for (const auto& [_, v] : latest) candidates.push_back(v);
    std::sort(candidates.rbegin(), candidates.rend());
    for (uint32_t v : candidates) {  // R1: largest view with 3f+1 support
        if (support(v) >= th.commit_quorum()) {
            new_view = std::max(v + 1, st.view_current);
            break;
        }
    }
    if (!new_view) {  // R2: largest view above our own with f+1 support
        for (uint32_t v : candidates) {
            if (v > st.view_current && support(v) >= th.abort_quorum()) {
                new_view = v;
                break;
            }
        }
    }
    if (!new_view && m.views.empty() && st.view_current == 0 && params_.view1_no_proof)
        new_view = 1;  // view 1 may be proposed without proof
    if (!new_view) return;

    if (*new_view > st.view_current) {
        st.view_current = *new_view;
        if (log_) log_->push(now, EvViewChanged{id_, m.txn_id, old_view, st.view_current});
    }

    if (st.elect_sent.count(st.view_current)) return;

    // decision carried to the leader: the logged decision if any, else
    // our stage-1 vote; without either we cannot contribute yet
    std::optional<Decision> dec;
    if (st.logged) dec = st.logged->first;
    else if (st.final_decision) dec = *st.final_decision;
    else if (st.my_vote) dec = st.my_vote->value;
    else if (st.meta && !st.check_pending) {
        st.reply_to.clear();
        CheckResult res = mvtso_check(m.txn_id, *st.meta, now);
        if (res.kind == CheckResult::Kind::Vote) {
            finish_vote(m.txn_id, st, res.vote, false, now);
            dec = st.my_vote->value;
        } else if (res.kind == CheckResult::Kind::Misbehavior) {
            finish_vote(m.txn_id, st, Vote{Decision::Abort, {}, nullptr}, true, now);
            dec = Decision::Abort;
        }
        // parked: no contribution until the dependency resolves
    }
    if (!dec) return;

    st.elect_sent.insert(st.view_current);
    ElectFB e;
    e.txn_id = m.txn_id;
    e.decision = *dec;
    e.view = st.view_current;
    e.replica = id_;
    e.sig = keys_.sign(id_, signed_payload(e));
    if (log_) log_->push(now, EvElectSent{id_, m.txn_id, e.view, e.decision});
    send(topo_.replica(shard_, leader_index(m.txn_id, st.view_current)), std::move(e));
}

void Replica::handle_elect_fb(const ElectFB& m, uint64_t now) {
    if (!topo_.is_replica(m.replica) || topo_.shard_of(m.replica) != shard_) return;
    if (!keys_.verify(m.replica, signed_payload(m), m.sig)) return;
    if (leader_index(m.txn_id, m.view) != topo_.index_of(id_)) return;  // not my leadership

    auto& st = txn(m.txn_id);
    st.election[m.view].emplace(m.replica, m);
    run_election(m.txn_id, st, m.view, now);
}

void Replica::run_election(const Digest& txn_id_, TxnState& st, uint32_t view, uint64_t now) {
    Thresholds th{topo_.f};
    auto& buf = st.election[view];
    if (buf.size() < th.elect_quorum() || st.decfb_done.count(view)) return;

    if (byz_ == ByzReplicaBehavior::BadFallbackLeader) {
        // equivocate when two opposing majorities are constructible from
        // the buffered messages, otherwise stay silent
        std::vector<ElectFB> commits, aborts;
        for (const auto& [_, e] : buf)
            (e.decision == Decision::Commit ? commits : aborts).push_back(e);
        uint32_t maj = th.elect_quorum() / 2 + 1;
        if (commits.size() >= maj && aborts.size() >= maj &&
            buf.size() > th.elect_quorum()) {
            auto build = [&](Decision d) {
                DecFB fb;
                fb.txn_id = txn_id_;
                fb.decision = d;
                fb.view_elect = view;
                fb.leader = id_;
                const auto& majors = d == Decision::Commit ? commits : aborts;
                const auto& minors = d == Decision::Commit ? aborts : commits;
                for (uint32_t i = 0; i < maj && i < majors.size(); i++)
                    fb.elects.push_back(majors[i]);
                for (uint32_t i = 0; fb.elects.size() < th.elect_quorum() && i < minors.size();
                     i++)
                    fb.elects.push_back(minors[i]);
                fb.leader_sig = keys_.sign(id_, signed_payload(fb));
                return fb;
            };
            if (build(Decision::Commit).elects.size() == th.elect_quorum() &&
                build(Decision::Abort).elects.size() == th.elect_quorum()) {
                st.decfb_done.insert(view);
                for (uint32_t i = 0; i < topo_.n(); i++) {
                    NodeId to = topo_.replica(shard_, i);
                    send(to, build(i & 1 ? Decision::Abort : Decision::Commit));
                }
            }
        }
        return;  // silent otherwise
    }

    st.decfb_done.insert(view);
    DecFB fb;
    fb.txn_id = txn_id_;
    fb.view_elect = view;
    fb.leader = id_;
    uint32_t commits = 0, aborts = 0;
    for (const auto& [_, e] : buf) {
        if (fb.elects.size() >= th.elect_quorum()) break;
        fb.elects.push_back(e);
        (e.decision == Decision::Commit ? commits : aborts)++;
    }
    fb.decision = commits > aborts ? Decision::Commit : Decision::Abort;
    fb.leader_sig = keys_.sign(id_, signed_payload(fb));
    if (log_) log_->push(now, EvDecFbSent{id_, txn_id_, view, fb.decision});
    for (uint32_t i = 0; i < topo_.n(); i++) send(topo_.replica(shard_, i), fb);
}

void Replica::handle_dec_fb(const DecFB& m, uint64_t now) {
    Thresholds th{topo_.f};
    // proof: correct leader, 4f+1 matching-view elect messages, majority rule
    if (!topo_.is_replica(m.leader) || topo_.shard_of(m.leader) != shard_) return;
    if (leader_index(m.txn_id, m.view_elect) != topo_.index_of(m.leader)) return;
    if (!keys_.verify(m.leader, signed_payload(m), m.leader_sig)) return;
    if (m.elects.size() != th.elect_quorum()) return;
    std::set<NodeId> seen;
    uint32_t commits = 0, aborts = 0;
    for (const auto& e : m.elects) {
        if (e.txn_id != m.txn_id || e.view != m.view_elect) return;
        if (!topo_.is_replica(e.replica) || topo_.shard_of(e.replica) != shard_) return;
        if (!seen.insert(e.replica).second) return;
        if (!keys_.verify(e.replica, signed_payload(e), e.sig)) return;
        (e.decision == Decision::Commit ? commits : aborts)++;
    }
    Decision recomputed = commits > aborts ? Decision::Commit : Decision::Abort;
    if (recomputed != m.decision) return;

    auto& st = txn(m.txn_id);
    if (st.final_decision) return;
    if (st.view_current > m.view_elect) return;  // stale election

    uint32_t old_view = st.view_current;
    st.logged = {m.decision, m.view_elect};
    st.view_current = m.view_elect;
    if (log_) {
        if (st.view_current != old_view)
            log_->push(now, EvViewChanged{id_, m.txn_id, old_view, st.view_current});
        log_->push(now, EvDecFbAdopted{id_, m.txn_id, m.view_elect, m.decision});
    }
    for (NodeId c : st.interested) emit_p2r(c, m.txn_id, st, now);
}

}  // namespace bftkv
