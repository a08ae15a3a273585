#pragma once

#include <array>
#include <compare>
#include <string>

#include "delegacoin/crypto/suite.hpp"

namespace delegacoin::crypto {

inline constexpr size_t kAddressRawLen = 25;  // version(1) || hash160(20) || checksum(4)

// Testnet pay-to-pubkey-hash address. The checksum is the first four bytes
// of SHA256(SHA256(version || payload)); the text form is Base58.
struct Address {
    static constexpr uint8_t kTestnetP2pkhVersion = 0x6F;

    uint8_t version = kTestnetP2pkhVersion;
    Digest20 payload{};
    std::array<uint8_t, 4> checksum{};

    std::array<uint8_t, kAddressRawLen> raw() const;
    std::string text() const;

    // Both parsers reject a checksum that does not match version || payload.
    static Address from_raw(ByteView raw25);
    static Address parse(std::string_view text);

    auto operator<=>(const Address&) const = default;
};

Address derive_address(const PubKey& pk);

std::string base58_encode(ByteView data);
Bytes base58_decode(std::string_view text);  // throws Error(BadAddress) on bad symbol

}  // namespace delegacoin::crypto
