#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>

#include "bftkv/history.hpp"
#include "bftkv/messages.hpp"
#include "bftkv/quorums.hpp"
#include "bftkv/store.hpp"

namespace bftkv {

struct OutMsg {
    NodeId to = 0;
    Message msg;
};

struct TimerReq {
    uint64_t fire_at = 0;
    uint64_t token = 0;
};

struct Outbox {
    std::vector<OutMsg> msgs;
    std::vector<TimerReq> timers;
};

enum class ByzReplicaBehavior {
    Mute,
    VoteFlip,
    StaleRead,
    BogusVersion,
    EquivocateP1R,
    BadFallbackLeader,
};

const char* to_str(ByzReplicaBehavior b);

struct ReplicaParams {
    uint64_t delta = 50;       // read/prepare timestamp bound
    uint32_t batch_size = 1;   // reply batch flush threshold b
    uint64_t batch_window = 2; // flush timer for partial batches
    bool view1_no_proof = true;
};

/// Per-shard replica state machine. Single-threaded and deterministic:
/// one inbound event is processed to completion; Algorithm-1 step-7
/// waiting parks the reply and resumes on dependency resolution.
class Replica {
  public:
    Replica(const Topology& topo, NodeId id, const KeyStore& keys, HistoryLog* log,
            ReplicaParams params, int64_t clock_offset);

    Outbox handle(const Message& m, uint64_t now);
    Outbox on_timer(uint64_t token, uint64_t now);

    void set_byz(ByzReplicaBehavior b) { byz_ = b; }
    std::optional<ByzReplicaBehavior> byz() const { return byz_; }

    // introspection for the simulator's observer and for tests
    uint32_t view_of(const Digest& txn) const;
    std::optional<Decision> finalized(const Digest& txn) const;
    std::optional<Vote> vote_of(const Digest& txn) const;
    std::optional<std::pair<Decision, uint32_t>> logged_of(const Digest& txn) const;
    bool prepared(const Digest& txn) const;
    NodeId id() const { return id_; }
    ShardId shard() const { return shard_; }

  private:
    struct TxnState {
        std::optional<TxnMeta> meta;
        std::optional<Vote> my_vote;  // set at most once, never mutated
        bool misbehavior = false;
        bool is_prepared = false;
        std::optional<std::pair<Decision, uint32_t>> logged;  // decision, view_decision
        std::optional<Decision> final_decision;
        CertPtr final_cert;
        // step-7 parking
        bool check_pending = false;
        std::set<Digest> waiting_on;
        std::vector<NodeId> reply_to;  // requesters awaiting the deferred P1R
        // fallback
        uint32_t view_current = 0;
        std::set<NodeId> interested;
        std::set<uint32_t> elect_sent;  // views this replica endorsed a leader for
        std::map<uint32_t, std::map<NodeId, ElectFB>> election;  // leader role buffers
        std::set<uint32_t> decfb_done;
    };

    struct CheckResult {
        enum class Kind { Vote, Parked, Misbehavior } kind;
        Vote vote;  // valid when kind == Vote
    };

    // message handlers
    void handle_read(const ReadRequest& m, uint64_t now);
    void handle_p1(const P1& m, uint64_t now);
    void handle_p2(const P2& m, uint64_t now);
    void handle_writeback(const Writeback& m, uint64_t now);
    void handle_abort_notice(const AbortNotice& m, uint64_t now);
    void handle_fetch(const FetchTxn& m, uint64_t now);
    void handle_invoke_fb(const InvokeFB& m, uint64_t now);
    void handle_elect_fb(const ElectFB& m, uint64_t now);
    void handle_dec_fb(const DecFB& m, uint64_t now);

    CheckResult mvtso_check(const Digest& id, const TxnMeta& meta, uint64_t now);
    void finish_vote(const Digest& id, TxnState& st, const Vote& vote, bool misbehavior,
                     uint64_t now);
    void resolve_dependency(const Digest& dep, Decision dep_decision, uint64_t now);
    void apply_cert(const DecisionCert& cert, CertPtr keep, uint64_t now);
    void unprepare(const Digest& id, TxnState& st);
    void run_election(const Digest& txn, TxnState& st, uint32_t view, uint64_t now);
    uint32_t leader_index(const Digest& txn, uint32_t view) const;
    int64_t local_clock(uint64_t now) const { return int64_t(now) + clock_offset_; }

    // reply emission through the batcher
    void emit_reply(NodeId to, Message m, uint64_t now);
    void emit_p1r(NodeId to, const Digest& txn, const TxnState& st, uint64_t now);
    void emit_p2r(NodeId to, const Digest& txn, const TxnState& st, uint64_t now);
    void flush_batch(uint64_t now);
    void send(NodeId to, Message m);

    TxnState& txn(const Digest& id) { return txns_[id]; }

    const Topology& topo_;
    NodeId id_;
    ShardId shard_;
    const KeyStore& keys_;
    HistoryLog* log_;
    ReplicaParams params_;
    int64_t clock_offset_;
    std::optional<ByzReplicaBehavior> byz_;

    VersionedStore store_;
    std::map<Digest, TxnState> txns_;
    std::map<Digest, std::set<Digest>> waiters_;  // dep txn -> waiting txns
    SigCache cache_;

    // reply batcher state
    struct PendingReply {
        NodeId to;
        Message msg;
    };
    std::vector<PendingReply> batch_;
    bool batch_timer_armed_ = false;
    uint64_t batch_epoch_ = 0;

    Outbox* out_ = nullptr;  // active outbox during one handle() call
};

}  // namespace bftkv
