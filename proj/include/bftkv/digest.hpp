#pragma once

#include <array>
#include <compare>
#include <cstdint>

#include "bftkv/bytes.hpp"

namespace bftkv {

/// Fixed 256-bit hash output. Used for transaction ids and Merkle nodes.
/// Equality is byte equality; ordering is lexicographic.
struct Digest {
    std::array<uint8_t, 32> v{};

    auto operator<=>(const Digest&) const = default;

    bool is_zero() const {
        for (auto b : v)
            if (b) return false;
        return true;
    }

    std::string hex() const { return to_hex(v.data(), v.size()); }

    static Digest from_hex_str(std::string_view s) {
        Bytes b = from_hex(s);
        if (b.size() != 32) throw std::invalid_argument("digest hex must be 32 bytes");
        Digest d;
        std::copy(b.begin(), b.end(), d.v.begin());
        return d;
    }
};

Digest sha256(const uint8_t* p, size_t n);
inline Digest sha256(const Bytes& b) { return sha256(b.data(), b.size()); }

/// Interprets the digest as a big-endian integer and reduces it mod m.
/// Used for deterministic logging-shard selection and fallback leader
/// indices.
uint64_t digest_mod(const Digest& d, uint64_t m);

}  // namespace bftkv
