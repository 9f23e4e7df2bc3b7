#pragma once

#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bftkv {

using Bytes = std::vector<uint8_t>;

/// Canonical byte writer: fixed-width big-endian integers, u32
/// length-prefixed variable fields, fixed field order. Every signed or
/// hashed payload in the protocol goes through this writer so that equal
/// logical values always produce identical bytes and distinct values
/// produce distinct bytes. Layouts are documented in docs/wire_format.md.
class ByteWriter {
  public:
    void u8(uint8_t v) { buf_.push_back(v); }

    void u32(uint32_t v) {
        buf_.push_back(uint8_t(v >> 24));
        buf_.push_back(uint8_t(v >> 16));
        buf_.push_back(uint8_t(v >> 8));
        buf_.push_back(uint8_t(v));
    }

    void u64(uint64_t v) {
        u32(uint32_t(v >> 32));
        u32(uint32_t(v));
    }

    void raw(const uint8_t* p, size_t n) { buf_.insert(buf_.end(), p, p + n); }

    void blob(std::string_view s) {
        if (s.size() > UINT32_MAX) throw std::length_error("blob too large");
        u32(uint32_t(s.size()));
        raw(reinterpret_cast<const uint8_t*>(s.data()), s.size());
    }

    void blob(const Bytes& b) {
        if (b.size() > UINT32_MAX) throw std::length_error("blob too large");
        u32(uint32_t(b.size()));
        raw(b.data(), b.size());
    }

    const Bytes& bytes() const { return buf_; }
    Bytes take() { return std::move(buf_); }

  private:
    Bytes buf_;
};

/// Mirror reader for the same layout. Throws on truncated input.
class ByteReader {
  public:
    explicit ByteReader(const Bytes& b) : p_(b.data()), end_(b.data() + b.size()) {}
    ByteReader(const uint8_t* p, size_t n) : p_(p), end_(p + n) {}

    uint8_t u8() {
        need(1);
        return *p_++;
    }

    uint32_t u32() {
        need(4);
        uint32_t v = (uint32_t(p_[0]) << 24) | (uint32_t(p_[1]) << 16) |
                     (uint32_t(p_[2]) << 8) | uint32_t(p_[3]);
        p_ += 4;
        return v;
    }

    uint64_t u64() {
        uint64_t hi = u32();
        return (hi << 32) | u32();
    }

    std::string str() {
        uint32_t n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(p_), n);
        p_ += n;
        return s;
    }

    Bytes blob() {
        uint32_t n = u32();
        need(n);
        Bytes b(p_, p_ + n);
        p_ += n;
        return b;
    }

    void raw(uint8_t* out, size_t n) {
        need(n);
        std::memcpy(out, p_, n);
        p_ += n;
    }

    bool done() const { return p_ == end_; }
    size_t remaining() const { return size_t(end_ - p_); }

  private:
    void need(size_t n) {
        if (remaining() < n) throw std::out_of_range("byte reader underrun");
    }
    const uint8_t* p_;
    const uint8_t* end_;
};

inline std::string to_hex(const uint8_t* p, size_t n) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(2 * n);
    for (size_t i = 0; i < n; i++) {
        s.push_back(digits[p[i] >> 4]);
        s.push_back(digits[p[i] & 0xf]);
    }
    return s;
}

inline std::string to_hex(const Bytes& b) { return to_hex(b.data(), b.size()); }

inline Bytes from_hex(std::string_view s) {
    auto nib = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw std::invalid_argument("bad hex digit");
    };
    if (s.size() % 2) throw std::invalid_argument("odd hex length");
    Bytes out(s.size() / 2);
    for (size_t i = 0; i < out.size(); i++)
        out[i] = uint8_t((nib(s[2 * i]) << 4) | nib(s[2 * i + 1]));
    return out;
}

}  // namespace bftkv
