#pragma once

#include <array>

#include "delegacoin/crypto/address.hpp"
#include "delegacoin/crypto/suite.hpp"

namespace delegacoin {

// Recipient, amount in uBTC, and an 8-byte uniqueness nonce so repeated
// equal-amount delegations are distinct chain objects.
struct TxMetadata {
    crypto::Address recipient;
    uint64_t amount = 0;
    std::array<uint8_t, 8> nonce{};

    bool operator==(const TxMetadata&) const = default;
};

// Canonical wire bytes: addr(25) || pk_tx(33) || recipient(25) || amount(8) ||
// nonce(8) || sigma(64). The signature covers everything before sigma.
struct Transaction {
    crypto::Address addr;
    crypto::PubKey pk_tx{};
    TxMetadata metadata;
    crypto::Signature sigma{};

    static constexpr size_t kWireLen = 25 + 33 + 25 + 8 + 8 + 64;

    Bytes signed_payload() const;
    Bytes wire() const;
    static Transaction parse(ByteView in);  // throws Error(MalformedTx)

    bool verify_signature(const crypto::Signer& sig) const;
    crypto::Digest32 txid() const { return crypto::sha256(wire()); }

    bool operator==(const Transaction&) const = default;
};

// One sealed balance snapshot persisted outside the enclave.
// Frame: "DSEAL1" || addr(25) || seq(8) || len(4) || ciphertext.
struct SealedRecord {
    static constexpr std::string_view kMagic = "DSEAL1";

    crypto::Address addr;
    uint64_t seq = 0;
    crypto::SymCiphertext c_update;

    Bytes frame() const;
    static SealedRecord read(ByteReader& r);  // throws Error(MalformedMessage)
    static SealedRecord parse_frame(ByteView in);

    bool operator==(const SealedRecord&) const = default;
};

}  // namespace delegacoin
