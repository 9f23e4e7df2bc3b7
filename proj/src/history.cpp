#include "bftkv/history.hpp"

#include <json.hpp>

#include <istream>
#include <ostream>
#include <stdexcept>

namespace bftkv {

using nlohmann::json;

CertDescriptor describe(const DecisionCert& cert) {
    CertDescriptor d;
    d.decision = cert.decision;
    d.fast = cert.is_fast();
    d.genesis = cert.genesis;
    if (cert.is_fast()) {
        for (const auto& b : std::get<std::vector<VoteBundle>>(cert.evidence)) {
            CertBundleDesc bd;
            bd.shard = b.shard;
            bd.kind = b.kind;
            bd.decision = b.decision;
            if (b.conflict) {
                bd.via_conflict = true;
                bd.conflict_txn = b.conflict->txn_id;
            }
            for (const auto& v : b.votes) bd.votes.push_back({v.replica, v.vote.value});
            d.bundles.push_back(std::move(bd));
        }
    } else {
        const auto& slow = std::get<SlowEvidence>(cert.evidence);
        d.slow_shard = slow.shard;
        for (const auto& r : slow.p2rs) d.p2rs.push_back({r.replica, r.decision, r.view_decision});
    }
    return d;
}

namespace {

json ts_j(const Timestamp& t) { return json::array({t.time, t.client_id}); }
Timestamp ts_p(const json& j) { return Timestamp{j.at(0), j.at(1)}; }

json dec_j(Decision d) { return d == Decision::Commit ? "commit" : "abort"; }
Decision dec_p(const json& j) {
    return j.get<std::string>() == "commit" ? Decision::Commit : Decision::Abort;
}

json meta_j(const TxnMeta& m) {
    json r = json::array(), w = json::array(), d = json::array();
    for (const auto& [k, v] : m.read_set) r.push_back(json::array({k, ts_j(v)}));
    for (const auto& [k, v] : m.write_set) w.push_back(json::array({k, v}));
    for (const auto& e : m.dep_set) d.push_back(json::array({ts_j(e.version), e.txn_id.hex()}));
    return json{{"ts", ts_j(m.ts)}, {"reads", r}, {"writes", w}, {"deps", d}};
}

TxnMeta meta_p(const json& j) {
    TxnMeta m;
    m.ts = ts_p(j.at("ts"));
    for (const auto& e : j.at("reads")) m.read_set.emplace_back(e.at(0), ts_p(e.at(1)));
    for (const auto& e : j.at("writes")) m.write_set.emplace_back(e.at(0), e.at(1));
    for (const auto& e : j.at("deps"))
        m.dep_set.push_back({ts_p(e.at(0)), Digest::from_hex_str(e.at(1).get<std::string>())});
    return m;
}

json cert_j(const CertDescriptor& c) {
    json j{{"decision", dec_j(c.decision)}, {"fast", c.fast}, {"genesis", c.genesis}};
    if (c.fast) {
        json bs = json::array();
        for (const auto& b : c.bundles) {
            json vs = json::array();
            for (const auto& v : b.votes) vs.push_back(json::array({v.replica, dec_j(v.vote)}));
            bs.push_back(json{{"shard", b.shard},
                              {"kind", b.kind == BundleKind::FastCert ? "fast" : "slow"},
                              {"decision", dec_j(b.decision)},
                              {"votes", vs},
                              {"via_conflict", b.via_conflict},
                              {"conflict_txn", b.conflict_txn.hex()}});
        }
        j["bundles"] = bs;
    } else {
        json ps = json::array();
        for (const auto& p : c.p2rs)
            ps.push_back(json::array({p.replica, dec_j(p.decision), p.view_decision}));
        j["slow_shard"] = c.slow_shard;
        j["p2rs"] = ps;
    }
    return j;
}

CertDescriptor cert_p(const json& j) {
    CertDescriptor c;
    c.decision = dec_p(j.at("decision"));
    c.fast = j.at("fast");
    c.genesis = j.at("genesis");
    if (c.fast) {
        for (const auto& b : j.at("bundles")) {
            CertBundleDesc bd;
            bd.shard = b.at("shard");
            bd.kind = b.at("kind") == "fast" ? BundleKind::FastCert : BundleKind::SlowTally;
            bd.decision = dec_p(b.at("decision"));
            bd.via_conflict = b.at("via_conflict");
            bd.conflict_txn = Digest::from_hex_str(b.at("conflict_txn").get<std::string>());
            for (const auto& v : b.at("votes"))
                bd.votes.push_back({v.at(0).get<NodeId>(), dec_p(v.at(1))});
            c.bundles.push_back(std::move(bd));
        }
    } else {
        c.slow_shard = j.at("slow_shard");
        for (const auto& p : j.at("p2rs"))
            c.p2rs.push_back({p.at(0).get<NodeId>(), dec_p(p.at(1)), p.at(2).get<uint32_t>()});
    }
    return c;
}

struct ToJson {
    json j;

    json operator()(const EvRunHeader& e) {
        return {{"type", "run_header"},     {"seed", e.seed},
                {"f", e.f},                 {"shards", e.shards},
                {"clients", e.clients},     {"gst", e.gst},
                {"duration", e.duration},   {"byz_replicas", e.byz_replicas},
                {"byz_replica_behaviors", e.byz_replica_behaviors},
                {"byz_clients", e.byz_clients},
                {"byz_client_behaviors", e.byz_client_behaviors}};
    }
    json operator()(const EvTxnBegin& e) {
        return {{"type", "txn_begin"}, {"client", e.client}, {"ts", ts_j(e.ts)},
                {"attempt", e.attempt}};
    }
    json operator()(const EvTxnMeta& e) {
        return {{"type", "txn_meta"}, {"client", e.client}, {"txn", e.txn.hex()},
                {"meta", meta_j(e.meta)}};
    }
    json operator()(const EvReadServed& e) {
        json j{{"type", "read_served"},
               {"replica", e.replica},
               {"client", e.client},
               {"key", e.key},
               {"req_ts", ts_j(e.req_ts)},
               {"latest_committed", ts_j(e.latest_committed)}};
        if (e.committed_returned) j["committed_returned"] = ts_j(*e.committed_returned);
        if (e.prepared_returned) j["prepared_returned"] = ts_j(*e.prepared_returned);
        return j;
    }
    json operator()(const EvReadAdopted& e) {
        return {{"type", "read_adopted"}, {"client", e.client},   {"txn_ts", ts_j(e.txn_ts)},
                {"key", e.key},           {"version", ts_j(e.version)},
                {"writer", e.writer.hex()}, {"prepared", e.prepared},
                {"sources", e.sources},   {"contacted", e.contacted}};
    }
    json operator()(const EvVoteCast& e) {
        json j{{"type", "vote_cast"},
               {"replica", e.replica},
               {"txn", e.txn.hex()},
               {"vote", dec_j(e.vote)},
               {"misbehavior_proof", e.misbehavior_proof}};
        if (e.conflict) j["conflict"] = e.conflict->hex();
        return j;
    }
    json operator()(const EvP2Logged& e) {
        return {{"type", "p2_logged"}, {"replica", e.replica}, {"txn", e.txn.hex()},
                {"decision", dec_j(e.decision)}, {"view_decision", e.view_decision}};
    }
    json operator()(const EvFinalized& e) {
        return {{"type", "finalized"}, {"replica", e.replica}, {"txn", e.txn.hex()},
                {"decision", dec_j(e.decision)}};
    }
    json operator()(const EvDecisionReported& e) {
        return {{"type", "decision_reported"},
                {"client", e.client},
                {"txn", e.txn.hex()},
                {"decision", dec_j(e.decision)},
                {"path", e.path},
                {"latency_commit", e.latency_commit},
                {"latency_total", e.latency_total}};
    }
    json operator()(const EvCertFormed& e) {
        return {{"type", "cert_formed"}, {"actor", e.actor}, {"txn", e.txn.hex()},
                {"cert", cert_j(e.cert)}};
    }
    json operator()(const EvStage2Sent& e) {
        return {{"type", "stage2_sent"}, {"client", e.client}, {"txn", e.txn.hex()}};
    }
    json operator()(const EvFallbackInvoked& e) {
        return {{"type", "fallback_invoked"}, {"client", e.client}, {"txn", e.txn.hex()},
                {"views_carried", e.views_carried}};
    }
    json operator()(const EvRpSent& e) {
        return {{"type", "rp_sent"}, {"client", e.client}, {"txn", e.txn.hex()},
                {"round", e.round}};
    }
    json operator()(const EvElectSent& e) {
        return {{"type", "elect_sent"}, {"replica", e.replica}, {"txn", e.txn.hex()},
                {"view", e.view}, {"decision", dec_j(e.decision)}};
    }
    json operator()(const EvDecFbSent& e) {
        return {{"type", "decfb_sent"}, {"leader", e.leader}, {"txn", e.txn.hex()},
                {"view", e.view}, {"decision", dec_j(e.decision)}};
    }
    json operator()(const EvDecFbAdopted& e) {
        return {{"type", "decfb_adopted"}, {"replica", e.replica}, {"txn", e.txn.hex()},
                {"view", e.view}, {"decision", dec_j(e.decision)}};
    }
    json operator()(const EvViewChanged& e) {
        return {{"type", "view_changed"}, {"replica", e.replica}, {"txn", e.txn.hex()},
                {"from", e.from}, {"to", e.to}};
    }
    json operator()(const EvMisbehavior& e) {
        return {{"type", "misbehavior"}, {"actor", e.actor}, {"kind", e.kind},
                {"txn", e.txn.hex()}};
    }
    json operator()(const EvByzAction& e) {
        return {{"type", "byz_action"}, {"client", e.client}, {"txn", e.txn.hex()},
                {"behavior", e.behavior}};
    }
    json operator()(const EvRunEnd& e) {
        return {{"type", "run_end"},
                {"admitted", e.admitted},
                {"committed", e.committed},
                {"aborted", e.aborted},
                {"last_admission_tick", e.last_admission_tick}};
    }
};

Digest dig_p(const json& j) { return Digest::from_hex_str(j.get<std::string>()); }

EventBody body_from_json(const json& j) {
    const std::string t = j.at("type");
    if (t == "run_header") {
        EvRunHeader e;
        e.seed = j.at("seed");
        e.f = j.at("f");
        e.shards = j.at("shards");
        e.clients = j.at("clients");
        e.gst = j.at("gst");
        e.duration = j.at("duration");
        e.byz_replicas = j.at("byz_replicas").get<std::vector<NodeId>>();
        e.byz_replica_behaviors = j.at("byz_replica_behaviors").get<std::vector<std::string>>();
        e.byz_clients = j.at("byz_clients").get<std::vector<NodeId>>();
        e.byz_client_behaviors = j.at("byz_client_behaviors").get<std::vector<std::string>>();
        return e;
    }
    if (t == "txn_begin") return EvTxnBegin{j.at("client"), ts_p(j.at("ts")), j.at("attempt")};
    if (t == "txn_meta") return EvTxnMeta{j.at("client"), dig_p(j.at("txn")), meta_p(j.at("meta"))};
    if (t == "read_served") {
        EvReadServed e;
        e.replica = j.at("replica");
        e.client = j.at("client");
        e.key = j.at("key");
        e.req_ts = ts_p(j.at("req_ts"));
        e.latest_committed = ts_p(j.at("latest_committed"));
        if (j.contains("committed_returned")) e.committed_returned = ts_p(j.at("committed_returned"));
        if (j.contains("prepared_returned")) e.prepared_returned = ts_p(j.at("prepared_returned"));
        return e;
    }
    if (t == "read_adopted") {
        EvReadAdopted e;
        e.client = j.at("client");
        e.txn_ts = ts_p(j.at("txn_ts"));
        e.key = j.at("key");
        e.version = ts_p(j.at("version"));
        e.writer = dig_p(j.at("writer"));
        e.prepared = j.at("prepared");
        e.sources = j.at("sources").get<std::vector<NodeId>>();
        e.contacted = j.at("contacted").get<std::vector<NodeId>>();
        return e;
    }
    if (t == "vote_cast") {
        EvVoteCast e;
        e.replica = j.at("replica");
        e.txn = dig_p(j.at("txn"));
        e.vote = dec_p(j.at("vote"));
        e.misbehavior_proof = j.at("misbehavior_proof");
        if (j.contains("conflict")) e.conflict = dig_p(j.at("conflict"));
        return e;
    }
    if (t == "p2_logged")
        return EvP2Logged{j.at("replica"), dig_p(j.at("txn")), dec_p(j.at("decision")),
                          j.at("view_decision")};
    if (t == "finalized")
        return EvFinalized{j.at("replica"), dig_p(j.at("txn")), dec_p(j.at("decision"))};
    if (t == "decision_reported")
        return EvDecisionReported{j.at("client"),        dig_p(j.at("txn")),
                                  dec_p(j.at("decision")), j.at("path"),
                                  j.at("latency_commit"), j.at("latency_total")};
    if (t == "cert_formed")
        return EvCertFormed{j.at("actor"), dig_p(j.at("txn")), cert_p(j.at("cert"))};
    if (t == "stage2_sent") return EvStage2Sent{j.at("client"), dig_p(j.at("txn"))};
    if (t == "fallback_invoked")
        return EvFallbackInvoked{j.at("client"), dig_p(j.at("txn")), j.at("views_carried")};
    if (t == "rp_sent") return EvRpSent{j.at("client"), dig_p(j.at("txn")), j.at("round")};
    if (t == "elect_sent")
        return EvElectSent{j.at("replica"), dig_p(j.at("txn")), j.at("view"),
                           dec_p(j.at("decision"))};
    if (t == "decfb_sent")
        return EvDecFbSent{j.at("leader"), dig_p(j.at("txn")), j.at("view"),
                           dec_p(j.at("decision"))};
    if (t == "decfb_adopted")
        return EvDecFbAdopted{j.at("replica"), dig_p(j.at("txn")), j.at("view"),
                              dec_p(j.at("decision"))};
    if (t == "view_changed")
        return EvViewChanged{j.at("replica"), dig_p(j.at("txn")), j.at("from"), j.at("to")};
    if (t == "misbehavior") return EvMisbehavior{j.at("actor"), j.at("kind"), dig_p(j.at("txn"))};
    if (t == "byz_action")
        return EvByzAction{j.at("client"), dig_p(j.at("txn")), j.at("behavior")};
    if (t == "run_end")
        return EvRunEnd{j.at("admitted"), j.at("committed"), j.at("aborted"),
                        j.at("last_admission_tick")};
    throw std::invalid_argument("unknown event type: " + t);
}

}  // namespace

std::string event_to_json_line(const Event& e) {
    ToJson v;
    json j = std::visit(v, e.body);
    j["tick"] = e.tick;
    return j.dump();
}

Event event_from_json_line(const std::string& line) {
    json j = json::parse(line);
    Event e;
    e.tick = j.at("tick");
    e.body = body_from_json(j);
    return e;
}

void write_history(const HistoryLog& log, std::ostream& os) {
    for (const auto& e : log.events) os << event_to_json_line(e) << '\n';
}

HistoryLog read_history(std::istream& is) {
    HistoryLog log;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        log.events.push_back(event_from_json_line(line));
    }
    return log;
}

}  // namespace bftkv
