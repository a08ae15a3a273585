#include "delegacoin/crypto/address.hpp"

#include <algorithm>
#include <cstring>

namespace delegacoin::crypto {

static constexpr char kAlphabet[] = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";

std::string base58_encode(ByteView data) {
    size_t zeros = 0;
    while (zeros < data.size() && data[zeros] == 0) ++zeros;

    // Repeated division, as for any base conversion of a big-endian integer.
    std::vector<uint8_t> digits;
    std::vector<uint8_t> num(data.begin() + zeros, data.end());
    while (!num.empty()) {
        uint32_t rem = 0;
        std::vector<uint8_t> next;
        for (uint8_t byte : num) {
            uint32_t acc = (rem << 8) | byte;
            uint8_t q = static_cast<uint8_t>(acc / 58);
            rem = acc % 58;
            if (!next.empty() || q != 0) next.push_back(q);
        }
        digits.push_back(static_cast<uint8_t>(rem));
        num = std::move(next);
    }

    std::string out(zeros, '1');
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) out.push_back(kAlphabet[*it]);
    return out;
}

Bytes base58_decode(std::string_view text) {
    static const auto value_of = [] {
        std::array<int8_t, 128> t;
        t.fill(-1);
        for (int i = 0; i < 58; ++i) t[static_cast<size_t>(kAlphabet[i])] = static_cast<int8_t>(i);
        return t;
    }();

    size_t zeros = 0;
    while (zeros < text.size() && text[zeros] == '1') ++zeros;

    std::vector<uint8_t> num;
    for (size_t i = zeros; i < text.size(); ++i) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        int8_t v = (c < 128) ? value_of[c] : -1;
        if (v < 0) throw Error(ErrorCode::BadAddress, "bad base58 symbol");
        // num = num * 58 + v
        uint32_t carry = static_cast<uint32_t>(v);
        for (auto it = num.rbegin(); it != num.rend(); ++it) {
            uint32_t acc = static_cast<uint32_t>(*it) * 58 + carry;
            *it = static_cast<uint8_t>(acc & 0xFF);
            carry = acc >> 8;
        }
        while (carry) {
            num.insert(num.begin(), static_cast<uint8_t>(carry & 0xFF));
            carry >>= 8;
        }
    }

    Bytes out(zeros, 0);
    out.insert(out.end(), num.begin(), num.end());
    return out;
}

static std::array<uint8_t, 4> checksum_of(uint8_t version, const Digest20& payload) {
    ByteWriter w;
    w.u8(version);
    w.raw(payload);
    Digest32 d = sha256(sha256(w.peek()));
    std::array<uint8_t, 4> c{};
    std::memcpy(c.data(), d.data(), 4);
    return c;
}

std::array<uint8_t, kAddressRawLen> Address::raw() const {
    std::array<uint8_t, kAddressRawLen> out{};
    out[0] = version;
    std::memcpy(out.data() + 1, payload.data(), payload.size());
    std::memcpy(out.data() + 21, checksum.data(), checksum.size());
    return out;
}

std::string Address::text() const { return base58_encode(raw()); }

Address Address::from_raw(ByteView raw25) {
    if (raw25.size() != kAddressRawLen) throw Error(ErrorCode::BadAddress, "bad address length");
    Address a;
    a.version = raw25[0];
    std::memcpy(a.payload.data(), raw25.data() + 1, a.payload.size());
    std::memcpy(a.checksum.data(), raw25.data() + 21, a.checksum.size());
    if (a.checksum != checksum_of(a.version, a.payload)) {
        throw Error(ErrorCode::BadAddress, "checksum mismatch");
    }
    return a;
}

Address Address::parse(std::string_view text) {
    Bytes raw = base58_decode(text);
    return from_raw(raw);
}

Address derive_address(const PubKey& pk) {
    Address a;
    a.version = Address::kTestnetP2pkhVersion;
    a.payload = hash160(pk);
    a.checksum = checksum_of(a.version, a.payload);
    return a;
}

}  // namespace delegacoin::crypto
