#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bftkv/messages.hpp"

namespace bftkv {

struct CommittedVersion {
    std::string value;
    CertPtr cert;
};

struct PreparedVersion {
    std::string value;
    Digest writer;
};

/// A read performed by a prepared or committed transaction; consulted by
/// the concurrency check to abort writes that would invalidate it.
struct ReaderEntry {
    Timestamp reader_ts;
    Timestamp version;  // version the reader observed
    Digest reader;

    auto operator<=>(const ReaderEntry&) const = default;
};

struct KeyState {
    std::map<Timestamp, CommittedVersion> committed;
    std::map<Timestamp, PreparedVersion> prepared;
    std::set<Timestamp> rts;
    std::set<ReaderEntry> readers;
};

/// Per-shard multiversioned store. Version order per key equals
/// timestamp order; a version is never simultaneously committed and
/// prepared. Every key implicitly starts with a committed genesis
/// version at timestamp (0,0).
class VersionedStore {
  public:
    explicit VersionedStore(CertPtr genesis_cert) : genesis_(std::move(genesis_cert)) {}

    KeyState& key(const std::string& k);
    const KeyState* find(const std::string& k) const;

    /// Latest committed version strictly below ts (genesis included).
    std::pair<Timestamp, const CommittedVersion*> latest_committed_below(const std::string& k,
                                                                         const Timestamp& ts);

    std::optional<std::pair<Timestamp, const PreparedVersion*>> latest_prepared_below(
        const std::string& k, const Timestamp& ts);

    /// A committed or prepared write to k with lo < version ts < hi, if
    /// any; returns (ts, writer id, cert-or-null).
    struct WriteBetween {
        Timestamp ts;
        Digest writer;
        CertPtr cert;  // set when committed
    };
    std::optional<WriteBetween> write_between(const std::string& k, const Timestamp& lo,
                                              const Timestamp& hi);

    /// A prepared/committed reader of k that read a version below ts but
    /// carries a timestamp above it (its read would be invalidated by a
    /// write at ts).
    std::optional<ReaderEntry> invalidated_reader(const std::string& k, const Timestamp& ts);

    std::optional<Timestamp> max_rts(const std::string& k);

    void rts_add(const std::string& k, const Timestamp& ts) { key(k).rts.insert(ts); }
    void rts_remove(const std::string& k, const Timestamp& ts);

    void add_prepared(const std::string& k, const Timestamp& ts, PreparedVersion v);
    void remove_prepared(const std::string& k, const Timestamp& ts);
    void add_committed(const std::string& k, const Timestamp& ts, CommittedVersion v);

    void add_reader(const std::string& k, const ReaderEntry& r) { key(k).readers.insert(r); }
    void remove_reader(const std::string& k, const ReaderEntry& r);

  private:
    CertPtr genesis_;
    std::map<std::string, KeyState> keys_;
};

}  // namespace bftkv
