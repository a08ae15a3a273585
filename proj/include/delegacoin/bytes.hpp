#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "delegacoin/errors.hpp"

namespace delegacoin {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

inline Bytes to_bytes(ByteView v) {
    return Bytes(v.begin(), v.end());
}

template <size_t N>
inline std::array<uint8_t, N> to_array(ByteView v) {
    if (v.size() != N) throw Error(ErrorCode::MalformedMessage, "bad field length");
    std::array<uint8_t, N> out{};
    std::memcpy(out.data(), v.data(), N);
    return out;
}

std::string to_hex(ByteView b);
Bytes from_hex(std::string_view s);

// Constant-pattern check used by confinement tests and integrity code.
inline bool contains_subsequence(ByteView haystack, ByteView needle) {
    if (needle.empty() || haystack.size() < needle.size()) return false;
    for (size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
        if (std::memcmp(haystack.data() + i, needle.data(), needle.size()) == 0) return true;
    }
    return false;
}

// Serialization helpers. Multi-field records use little-endian u32 length
// prefixes per field; fixed-width integers are little-endian.
class ByteWriter {
public:
    ByteWriter() = default;

    void u8(uint8_t v) { out_.push_back(v); }

    void u32le(uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }

    void u64le(uint64_t v) {
        for (int i = 0; i < 8; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }

    void raw(ByteView b) {
        if (b.empty()) return;
        out_.insert(out_.end(), b.data(), b.data() + b.size());
    }

    void field(ByteView b) {  // length-prefixed
        u32le(static_cast<uint32_t>(b.size()));
        raw(b);
    }

    Bytes take() { return std::move(out_); }
    const Bytes& peek() const { return out_; }

private:
    Bytes out_;
};

class ByteReader {
public:
    explicit ByteReader(ByteView in) : in_(in) {}

    uint8_t u8() {
        need(1);
        return in_[pos_++];
    }

    uint32_t u32le() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(in_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }

    uint64_t u64le() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(in_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }

    ByteView raw(size_t n) {
        need(n);
        ByteView v = in_.subspan(pos_, n);
        pos_ += n;
        return v;
    }

    ByteView field() {  // length-prefixed
        uint32_t n = u32le();
        return raw(n);
    }

    size_t remaining() const { return in_.size() - pos_; }

    void expect_end() const {
        if (pos_ != in_.size()) throw Error(ErrorCode::MalformedMessage, "trailing bytes");
    }

private:
    void need(size_t n) const {
        if (in_.size() - pos_ < n) throw Error(ErrorCode::MalformedMessage, "truncated message");
    }

    ByteView in_;
    size_t pos_ = 0;
};

}  // namespace delegacoin
