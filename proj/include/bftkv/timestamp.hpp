#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace bftkv {

/// Transaction timestamp: total order is lexicographic (time, client_id).
/// Unique per transaction because client ids are unique and each client's
/// time values are strictly increasing per transaction.
struct Timestamp {
    uint64_t time = 0;
    uint64_t client_id = 0;

    auto operator<=>(const Timestamp&) const = default;

    bool is_genesis() const { return time == 0 && client_id == 0; }

    std::string str() const {
        return std::to_string(time) + "." + std::to_string(client_id);
    }
};

inline constexpr Timestamp kGenesisTs{0, 0};

}  // namespace bftkv
