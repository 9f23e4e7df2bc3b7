#include "bftkv/store.hpp"

namespace bftkv {

KeyState& VersionedStore::key(const std::string& k) {
    auto it = keys_.find(k);
    if (it == keys_.end()) {
        it = keys_.emplace(k, KeyState{}).first;
        it->second.committed.emplace(kGenesisTs, CommittedVersion{"", genesis_});
    }
    return it->second;
}

const KeyState* VersionedStore::find(const std::string& k) const {
    auto it = keys_.find(k);
    return it == keys_.end() ? nullptr : &it->second;
}

std::pair<Timestamp, const CommittedVersion*> VersionedStore::latest_committed_below(
    const std::string& k, const Timestamp& ts) {
    auto& ks = key(k);
    auto it = ks.committed.lower_bound(ts);
    // genesis guarantees a predecessor for any ts > (0,0)
    if (it == ks.committed.begin()) return {kGenesisTs, &ks.committed.begin()->second};
    --it;
    return {it->first, &it->second};
}

std::optional<std::pair<Timestamp, const PreparedVersion*>> VersionedStore::latest_prepared_below(
    const std::string& k, const Timestamp& ts) {
    auto& ks = key(k);
    auto it = ks.prepared.lower_bound(ts);
    if (it == ks.prepared.begin()) return std::nullopt;
    --it;
    return std::make_pair(it->first, &it->second);
}

std::optional<VersionedStore::WriteBetween> VersionedStore::write_between(const std::string& k,
                                                                          const Timestamp& lo,
                                                                          const Timestamp& hi) {
    auto& ks = key(k);
    auto cit = ks.committed.upper_bound(lo);
    if (cit != ks.committed.end() && cit->first < hi && !cit->first.is_genesis())
        return WriteBetween{cit->first, cit->second.cert ? cit->second.cert->txn_id : Digest{},
                            cit->second.cert};
    auto pit = ks.prepared.upper_bound(lo);
    if (pit != ks.prepared.end() && pit->first < hi)
        return WriteBetween{pit->first, pit->second.writer, nullptr};
    return std::nullopt;
}

std::optional<ReaderEntry> VersionedStore::invalidated_reader(const std::string& k,
                                                              const Timestamp& ts) {
    auto& ks = key(k);
    for (const auto& r : ks.readers) {
        if (r.version < ts && ts < r.reader_ts) return r;
    }
    return std::nullopt;
}

std::optional<Timestamp> VersionedStore::max_rts(const std::string& k) {
    auto& ks = key(k);
    if (ks.rts.empty()) return std::nullopt;
    return *ks.rts.rbegin();
}

void VersionedStore::rts_remove(const std::string& k, const Timestamp& ts) {
    auto it = keys_.find(k);
    if (it != keys_.end()) it->second.rts.erase(ts);
}

void VersionedStore::add_prepared(const std::string& k, const Timestamp& ts, PreparedVersion v) {
    key(k).prepared[ts] = std::move(v);
}

void VersionedStore::remove_prepared(const std::string& k, const Timestamp& ts) {
    auto it = keys_.find(k);
    if (it != keys_.end()) it->second.prepared.erase(ts);
}

void VersionedStore::add_committed(const std::string& k, const Timestamp& ts,
                                   CommittedVersion v) {
    auto& ks = key(k);
    ks.prepared.erase(ts);
    ks.committed[ts] = std::move(v);
}

void VersionedStore::remove_reader(const std::string& k, const ReaderEntry& r) {
    auto it = keys_.find(k);
    if (it != keys_.end()) it->second.readers.erase(r);
}

}  // namespace bftkv
