#pragma once

#include <array>
#include <cstdint>

#include "delegacoin/bytes.hpp"
#include "delegacoin/rng.hpp"

namespace delegacoin::crypto {

inline constexpr size_t kSymKeyLen = 32;
inline constexpr size_t kSymNonceLen = 12;
inline constexpr size_t kSymTagLen = 16;
inline constexpr size_t kSigSecretLen = 32;
inline constexpr size_t kPubKeyLen = 33;   // compressed secp256k1 point
inline constexpr size_t kSignatureLen = 64;  // compact r||s

using Digest32 = std::array<uint8_t, 32>;
using Digest20 = std::array<uint8_t, 20>;
using PubKey = std::array<uint8_t, kPubKeyLen>;
using SecretScalar = std::array<uint8_t, kSigSecretLen>;

struct SymKey {
    std::array<uint8_t, kSymKeyLen> bytes{};
    bool operator==(const SymKey&) const = default;
};

// Wire form: nonce(12) || body || tag(16).
struct SymCiphertext {
    std::array<uint8_t, kSymNonceLen> nonce{};
    Bytes body;
    std::array<uint8_t, kSymTagLen> tag{};

    Bytes wire() const;
    static SymCiphertext parse(ByteView in);
    bool operator==(const SymCiphertext&) const = default;
};

struct Signature {
    std::array<uint8_t, kSignatureLen> bytes{};
    bool operator==(const Signature&) const = default;
};

struct SigKeypair {
    SecretScalar sk{};
    PubKey vk{};
};

struct PkeKeypair {
    SecretScalar sk{};
    PubKey pk{};
};

// Wire form: ephemeral(33) || sealed (body || tag for the honest backend).
struct PkeCiphertext {
    PubKey ephemeral{};
    Bytes sealed;

    Bytes wire() const;
    static PkeCiphertext parse(ByteView in);
    bool operator==(const PkeCiphertext&) const = default;
};

// Symmetric authenticated encryption. dec() throws Error(IntegrityFailure)
// on a wrong key or any ciphertext mutation.
class SymCipher {
public:
    virtual ~SymCipher() = default;
    virtual SymKey kgen(RandomSource& rng) const = 0;
    virtual SymCiphertext enc(const SymKey& key, ByteView msg, RandomSource& rng) const = 0;
    virtual Bytes dec(const SymKey& key, const SymCiphertext& ct) const = 0;
};

// Signature scheme. verify() returns false on any mismatch and throws
// Error(InvalidKey) only for a structurally malformed verification key.
class Signer {
public:
    virtual ~Signer() = default;
    virtual SigKeypair keygen(RandomSource& rng) const = 0;
    virtual Signature sign(const SecretScalar& sk, ByteView msg) const = 0;
    virtual bool verify(const PubKey& vk, const Signature& sig, ByteView msg) const = 0;
};

// Public-key encryption. dec() throws Error(DecryptFailure) on tampering or
// a wrong secret key.
class Pke {
public:
    virtual ~Pke() = default;
    virtual PkeKeypair keygen(RandomSource& rng) const = 0;
    virtual PkeCiphertext enc(const PubKey& pk, ByteView msg, RandomSource& rng) const = 0;
    virtual Bytes dec(const SecretScalar& sk, const PkeCiphertext& ct) const = 0;
};

struct Suite {
    const SymCipher* se;
    const Signer* sig;
    const Pke* pke;
};

// OpenSSL-backed defaults: AES-256-GCM, ECDSA/secp256k1 with deterministic
// nonces, and an ECDH hybrid over the same curve.
Suite default_suite();

Digest32 sha256(ByteView data);
Digest20 hash160(ByteView data);  // RIPEMD160(SHA256(data))
Digest32 hmac_sha256(ByteView key, ByteView msg);

// Low-level curve helpers for alternative backends and tests.
PubKey derive_pubkey(const SecretScalar& sk);                    // throws InvalidKey
Digest32 ecdh_shared(const SecretScalar& sk, const PubKey& pk);  // sha256 of shared point

}  // namespace delegacoin::crypto
