// OpenSSL-backed default suite: AES-256-GCM, ECDSA over secp256k1 with
// deterministic (RFC 6979 style) nonces, and an ECDH hybrid PKE on the same
// curve. Deterministic signing keeps enclave executions replayable from a
// snapshotted DRBG.

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/obj_mac.h>
#include <openssl/provider.h>

#include <cstring>
#include <memory>
#include <mutex>

#include "delegacoin/crypto/suite.hpp"
#include "delegacoin/errors.hpp"

namespace delegacoin::crypto {

namespace {

struct BnDeleter {
    void operator()(BIGNUM* p) const { BN_free(p); }
};
struct BnCtxDeleter {
    void operator()(BN_CTX* p) const { BN_CTX_free(p); }
};
struct PointDeleter {
    void operator()(EC_POINT* p) const { EC_POINT_free(p); }
};
using BnPtr = std::unique_ptr<BIGNUM, BnDeleter>;
using BnCtxPtr = std::unique_ptr<BN_CTX, BnCtxDeleter>;
using PointPtr = std::unique_ptr<EC_POINT, PointDeleter>;

[[noreturn]] void backend_fail(const char* what) {
    throw std::runtime_error(std::string("openssl failure: ") + what);
}

const EC_GROUP* curve() {
    static EC_GROUP* g = [] {
        EC_GROUP* grp = EC_GROUP_new_by_curve_name(NID_secp256k1);
        if (!grp) backend_fail("secp256k1 group");
        return grp;
    }();
    return g;
}

const BIGNUM* curve_order() { return EC_GROUP_get0_order(curve()); }

const BIGNUM* curve_half_order() {
    static BIGNUM* h = [] {
        BIGNUM* v = BN_dup(curve_order());
        if (!v || !BN_rshift1(v, v)) backend_fail("half order");
        return v;
    }();
    return h;
}

BnPtr bn_from(ByteView b) {
    BIGNUM* v = BN_bin2bn(b.data(), static_cast<int>(b.size()), nullptr);
    if (!v) backend_fail("BN_bin2bn");
    return BnPtr(v);
}

std::array<uint8_t, 32> bn_to32(const BIGNUM* v) {
    std::array<uint8_t, 32> out{};
    if (BN_bn2binpad(v, out.data(), 32) != 32) backend_fail("BN_bn2binpad");
    return out;
}

PubKey compress_point(const EC_POINT* p, BN_CTX* ctx) {
    PubKey out{};
    if (EC_POINT_point2oct(curve(), p, POINT_CONVERSION_COMPRESSED, out.data(), out.size(), ctx) !=
        out.size()) {
        backend_fail("point2oct");
    }
    return out;
}

PointPtr parse_point(const PubKey& pk, BN_CTX* ctx, ErrorCode on_bad) {
    PointPtr p(EC_POINT_new(curve()));
    if (!p) backend_fail("EC_POINT_new");
    if (EC_POINT_oct2point(curve(), p.get(), pk.data(), pk.size(), ctx) != 1) {
        throw Error(on_bad, "not a valid curve point");
    }
    return p;
}

bool scalar_in_range(const BIGNUM* k) {
    return !BN_is_zero(k) && BN_cmp(k, curve_order()) < 0;
}

// Draws scalars from rng until one lands in [1, n).
BnPtr random_scalar(RandomSource& rng) {
    for (;;) {
        auto raw = rng.array<32>();
        BnPtr k = bn_from(raw);
        if (scalar_in_range(k.get())) return k;
    }
}

PubKey scalar_base_mul(const BIGNUM* k, BN_CTX* ctx) {
    PointPtr p(EC_POINT_new(curve()));
    if (!p || EC_POINT_mul(curve(), p.get(), k, nullptr, nullptr, ctx) != 1) {
        backend_fail("base mul");
    }
    return compress_point(p.get(), ctx);
}

Digest32 hmac256(ByteView key, ByteView msg) {
    Digest32 out{};
    unsigned int len = 0;
    if (!HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), msg.data(), msg.size(),
              out.data(), &len) ||
        len != 32) {
        backend_fail("HMAC");
    }
    return out;
}

// RFC 6979 deterministic nonce for SHA-256 / 256-bit curves.
BnPtr rfc6979_nonce(const SecretScalar& x, const Digest32& h1, unsigned retry) {
    BnPtr z = bn_from(h1);
    BnPtr zmod(BN_new());
    BnCtxPtr ctx(BN_CTX_new());
    if (!zmod || !ctx || !BN_mod(zmod.get(), z.get(), curve_order(), ctx.get())) {
        backend_fail("bits2octets");
    }
    auto h1mod = bn_to32(zmod.get());

    std::array<uint8_t, 32> V{}, K{};
    V.fill(0x01);
    K.fill(0x00);

    auto step = [&](uint8_t sep) {
        ByteWriter w;
        w.raw(V);
        w.u8(sep);
        w.raw(x);
        w.raw(h1mod);
        K = hmac256(K, w.peek());
        V = hmac256(K, V);
    };
    step(0x00);
    step(0x01);

    for (;;) {
        V = hmac256(K, V);
        BnPtr k = bn_from(V);
        if (scalar_in_range(k.get())) {
            if (retry == 0) return k;
            --retry;
        }
        ByteWriter w;
        w.raw(V);
        w.u8(0x00);
        K = hmac256(K, w.peek());
        V = hmac256(K, V);
    }
}

struct GcmResult {
    Bytes body;
    std::array<uint8_t, kSymTagLen> tag{};
};

GcmResult gcm_encrypt(ByteView key, ByteView nonce, ByteView aad, ByteView msg) {
    EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
    if (!ctx) backend_fail("cipher ctx");
    GcmResult r;
    r.body.resize(msg.size());
    int len = 0;
    bool ok = EVP_EncryptInit_ex(ctx, EVP_aes_256_gcm(), nullptr, nullptr, nullptr) == 1 &&
              EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_SET_IVLEN, static_cast<int>(nonce.size()),
                                  nullptr) == 1 &&
              EVP_EncryptInit_ex(ctx, nullptr, nullptr, key.data(), nonce.data()) == 1;
    if (ok && !aad.empty()) {
        ok = EVP_EncryptUpdate(ctx, nullptr, &len, aad.data(), static_cast<int>(aad.size())) == 1;
    }
    if (ok && !msg.empty()) {
        ok = EVP_EncryptUpdate(ctx, r.body.data(), &len, msg.data(),
                               static_cast<int>(msg.size())) == 1;
    }
    ok = ok && EVP_EncryptFinal_ex(ctx, r.body.data() + r.body.size(), &len) == 1 &&
         EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_GET_TAG, kSymTagLen, r.tag.data()) == 1;
    EVP_CIPHER_CTX_free(ctx);
    if (!ok) backend_fail("gcm encrypt");
    return r;
}

bool gcm_decrypt(ByteView key, ByteView nonce, ByteView aad, ByteView body,
                 ByteView tag, Bytes& out) {
    EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
    if (!ctx) backend_fail("cipher ctx");
    out.assign(body.size(), 0);
    int len = 0;
    bool ok = EVP_DecryptInit_ex(ctx, EVP_aes_256_gcm(), nullptr, nullptr, nullptr) == 1 &&
              EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_SET_IVLEN, static_cast<int>(nonce.size()),
                                  nullptr) == 1 &&
              EVP_DecryptInit_ex(ctx, nullptr, nullptr, key.data(), nonce.data()) == 1;
    if (ok && !aad.empty()) {
        ok = EVP_DecryptUpdate(ctx, nullptr, &len, aad.data(), static_cast<int>(aad.size())) == 1;
    }
    if (ok && !body.empty()) {
        ok = EVP_DecryptUpdate(ctx, out.data(), &len, body.data(),
                               static_cast<int>(body.size())) == 1;
    }
    ok = ok &&
         EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_SET_TAG, kSymTagLen,
                             const_cast<uint8_t*>(tag.data())) == 1 &&
         EVP_DecryptFinal_ex(ctx, out.data() + out.size(), &len) == 1;
    EVP_CIPHER_CTX_free(ctx);
    return ok;
}

class AesGcmCipher final : public SymCipher {
public:
    SymKey kgen(RandomSource& rng) const override {
        SymKey k;
        rng.fill(k.bytes);
        return k;
    }

    SymCiphertext enc(const SymKey& key, ByteView msg, RandomSource& rng) const override {
        SymCiphertext ct;
        rng.fill(ct.nonce);
        GcmResult r = gcm_encrypt(key.bytes, ct.nonce, {}, msg);
        ct.body = std::move(r.body);
        ct.tag = r.tag;
        return ct;
    }

    Bytes dec(const SymKey& key, const SymCiphertext& ct) const override {
        Bytes out;
        if (!gcm_decrypt(key.bytes, ct.nonce, {}, ct.body, ct.tag, out)) {
            throw Error(ErrorCode::IntegrityFailure, "symmetric decryption failed");
        }
        return out;
    }
};

class EcdsaSecp256k1Signer final : public Signer {
public:
    SigKeypair keygen(RandomSource& rng) const override {
        BnCtxPtr ctx(BN_CTX_new());
        if (!ctx) backend_fail("bn ctx");
        BnPtr d = random_scalar(rng);
        SigKeypair kp;
        kp.sk = bn_to32(d.get());
        kp.vk = scalar_base_mul(d.get(), ctx.get());
        return kp;
    }

    Signature sign(const SecretScalar& sk, ByteView msg) const override {
        BnCtxPtr ctx(BN_CTX_new());
        if (!ctx) backend_fail("bn ctx");
        BnPtr x = bn_from(sk);
        if (!scalar_in_range(x.get())) throw Error(ErrorCode::InvalidKey, "signing scalar");

        const Digest32 h1 = sha256(msg);
        BnPtr z = bn_from(h1);
        const BIGNUM* n = curve_order();

        BnPtr r(BN_new()), s(BN_new()), tmp(BN_new());
        if (!r || !s || !tmp) backend_fail("bn alloc");

        for (unsigned retry = 0;; ++retry) {
            BnPtr k = rfc6979_nonce(sk, h1, retry);
            PointPtr R(EC_POINT_new(curve()));
            if (!R || EC_POINT_mul(curve(), R.get(), k.get(), nullptr, nullptr, ctx.get()) != 1) {
                backend_fail("nonce mul");
            }
            BnPtr rx(BN_new());
            if (!rx ||
                EC_POINT_get_affine_coordinates(curve(), R.get(), rx.get(), nullptr, ctx.get()) !=
                    1) {
                backend_fail("affine x");
            }
            if (!BN_mod(r.get(), rx.get(), n, ctx.get())) backend_fail("r mod n");
            if (BN_is_zero(r.get())) continue;

            // s = k^-1 (z + r x) mod n
            if (!BN_mod_mul(tmp.get(), r.get(), x.get(), n, ctx.get()) ||
                !BN_mod_add(tmp.get(), tmp.get(), z.get(), n, ctx.get())) {
                backend_fail("s numerator");
            }
            BnPtr kinv(BN_mod_inverse(nullptr, k.get(), n, ctx.get()));
            if (!kinv) backend_fail("k inverse");
            if (!BN_mod_mul(s.get(), tmp.get(), kinv.get(), n, ctx.get())) backend_fail("s");
            if (BN_is_zero(s.get())) continue;

            if (BN_cmp(s.get(), curve_half_order()) > 0) {
                if (!BN_sub(s.get(), n, s.get())) backend_fail("low-s");
            }
            Signature sig;
            auto rb = bn_to32(r.get()), sb = bn_to32(s.get());
            std::memcpy(sig.bytes.data(), rb.data(), 32);
            std::memcpy(sig.bytes.data() + 32, sb.data(), 32);
            return sig;
        }
    }

    bool verify(const PubKey& vk, const Signature& sig, ByteView msg) const override {
        BnCtxPtr ctx(BN_CTX_new());
        if (!ctx) backend_fail("bn ctx");
        PointPtr Q = parse_point(vk, ctx.get(), ErrorCode::InvalidKey);

        const BIGNUM* n = curve_order();
        BnPtr r = bn_from(ByteView(sig.bytes).first(32));
        BnPtr s = bn_from(ByteView(sig.bytes).subspan(32));
        if (BN_is_zero(r.get()) || BN_cmp(r.get(), n) >= 0) return false;
        if (BN_is_zero(s.get()) || BN_cmp(s.get(), curve_half_order()) > 0) return false;

        BnPtr z = bn_from(sha256(msg));
        BnPtr sinv(BN_mod_inverse(nullptr, s.get(), n, ctx.get()));
        if (!sinv) return false;
        BnPtr u1(BN_new()), u2(BN_new());
        if (!u1 || !u2 || !BN_mod_mul(u1.get(), z.get(), sinv.get(), n, ctx.get()) ||
            !BN_mod_mul(u2.get(), r.get(), sinv.get(), n, ctx.get())) {
            backend_fail("verify scalars");
        }
        PointPtr R(EC_POINT_new(curve()));
        if (!R || EC_POINT_mul(curve(), R.get(), u1.get(), Q.get(), u2.get(), ctx.get()) != 1) {
            backend_fail("verify mul");
        }
        if (EC_POINT_is_at_infinity(curve(), R.get())) return false;
        BnPtr rx(BN_new());
        if (!rx ||
            EC_POINT_get_affine_coordinates(curve(), R.get(), rx.get(), nullptr, ctx.get()) != 1) {
            backend_fail("verify affine");
        }
        BnPtr v(BN_new());
        if (!v || !BN_mod(v.get(), rx.get(), n, ctx.get())) backend_fail("verify mod");
        return BN_cmp(v.get(), r.get()) == 0;
    }
};

// ECDH + AES-256-GCM. The nonce is fixed to zero: the symmetric key is unique
// per message because the ephemeral scalar is fresh.
class EciesPke final : public Pke {
public:
    PkeKeypair keygen(RandomSource& rng) const override {
        BnCtxPtr ctx(BN_CTX_new());
        if (!ctx) backend_fail("bn ctx");
        BnPtr d = random_scalar(rng);
        PkeKeypair kp;
        kp.sk = bn_to32(d.get());
        kp.pk = scalar_base_mul(d.get(), ctx.get());
        return kp;
    }

    PkeCiphertext enc(const PubKey& pk, ByteView msg, RandomSource& rng) const override {
        BnCtxPtr ctx(BN_CTX_new());
        if (!ctx) backend_fail("bn ctx");
        PointPtr recipient = parse_point(pk, ctx.get(), ErrorCode::InvalidKey);
        BnPtr eph = random_scalar(rng);

        PkeCiphertext ct;
        ct.ephemeral = scalar_base_mul(eph.get(), ctx.get());
        SymKey key = shared_key(eph.get(), recipient.get(), ct.ephemeral, pk, ctx.get());

        constexpr std::array<uint8_t, kSymNonceLen> zero_nonce{};
        GcmResult r = gcm_encrypt(key.bytes, zero_nonce, ct.ephemeral, msg);
        ct.sealed = std::move(r.body);
        ct.sealed.insert(ct.sealed.end(), r.tag.begin(), r.tag.end());
        return ct;
    }

    Bytes dec(const SecretScalar& sk, const PkeCiphertext& ct) const override {
        if (ct.sealed.size() < kSymTagLen) {
            throw Error(ErrorCode::DecryptFailure, "ciphertext too short");
        }
        BnCtxPtr ctx(BN_CTX_new());
        if (!ctx) backend_fail("bn ctx");
        BnPtr d = bn_from(sk);
        if (!scalar_in_range(d.get())) throw Error(ErrorCode::DecryptFailure, "bad secret key");

        PointPtr eph = [&] {
            try {
                return parse_point(ct.ephemeral, ctx.get(), ErrorCode::DecryptFailure);
            } catch (const Error&) {
                throw Error(ErrorCode::DecryptFailure, "bad ephemeral point");
            }
        }();

        // Recover own public key to keep the KDF transcript identical.
        PubKey own_pk = scalar_base_mul(d.get(), ctx.get());
        SymKey key = shared_key(d.get(), eph.get(), ct.ephemeral, own_pk, ctx.get());

        constexpr std::array<uint8_t, kSymNonceLen> zero_nonce{};
        ByteView sealed(ct.sealed);
        Bytes out;
        if (!gcm_decrypt(key.bytes, zero_nonce, ct.ephemeral,
                         sealed.first(sealed.size() - kSymTagLen),
                         sealed.subspan(sealed.size() - kSymTagLen), out)) {
            throw Error(ErrorCode::DecryptFailure, "hybrid decryption failed");
        }
        return out;
    }

private:
    static SymKey shared_key(const BIGNUM* scalar, const EC_POINT* peer,
                             const PubKey& ephemeral, const PubKey& recipient, BN_CTX* ctx) {
        PointPtr shared(EC_POINT_new(curve()));
        if (!shared ||
            EC_POINT_mul(curve(), shared.get(), nullptr, peer, scalar, ctx) != 1) {
            backend_fail("ecdh");
        }
        if (EC_POINT_is_at_infinity(curve(), shared.get())) {
            throw Error(ErrorCode::DecryptFailure, "degenerate shared point");
        }
        PubKey sp = compress_point(shared.get(), ctx);
        ByteWriter w;
        w.raw(to_bytes(std::string_view("delegacoin.ecies.v1")));
        w.raw(sp);
        w.raw(ephemeral);
        w.raw(recipient);
        SymKey key;
        key.bytes = sha256(w.peek());
        return key;
    }
};

}  // namespace

Bytes SymCiphertext::wire() const {
    ByteWriter w;
    w.raw(nonce);
    w.raw(body);
    w.raw(tag);
    return w.take();
}

SymCiphertext SymCiphertext::parse(ByteView in) {
    if (in.size() < kSymNonceLen + kSymTagLen) {
        throw Error(ErrorCode::MalformedMessage, "ciphertext too short");
    }
    SymCiphertext ct;
    std::memcpy(ct.nonce.data(), in.data(), kSymNonceLen);
    ct.body.assign(in.begin() + kSymNonceLen, in.end() - kSymTagLen);
    std::memcpy(ct.tag.data(), in.data() + in.size() - kSymTagLen, kSymTagLen);
    return ct;
}

Bytes PkeCiphertext::wire() const {
    ByteWriter w;
    w.raw(ephemeral);
    w.raw(sealed);
    return w.take();
}

PkeCiphertext PkeCiphertext::parse(ByteView in) {
    if (in.size() < kPubKeyLen) throw Error(ErrorCode::MalformedMessage, "pke ciphertext too short");
    PkeCiphertext ct;
    std::memcpy(ct.ephemeral.data(), in.data(), kPubKeyLen);
    ct.sealed.assign(in.begin() + kPubKeyLen, in.end());
    return ct;
}

Suite default_suite() {
    static const AesGcmCipher se;
    static const EcdsaSecp256k1Signer sig;
    static const EciesPke pke;
    return Suite{&se, &sig, &pke};
}

Digest32 sha256(ByteView data) {
    Digest32 out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != 32) {
        backend_fail("sha256");
    }
    return out;
}

Digest20 hash160(ByteView data) {
    // RIPEMD160 lives in OpenSSL 3.0's legacy provider.
    static std::once_flag once;
    static const EVP_MD* ripemd = nullptr;
    std::call_once(once, [] {
        OSSL_PROVIDER_load(nullptr, "legacy");
        ripemd = EVP_MD_fetch(nullptr, "RIPEMD160", nullptr);
    });
    if (!ripemd) backend_fail("ripemd160 unavailable");

    Digest32 inner = sha256(data);
    Digest20 out{};
    unsigned int len = 0;
    if (EVP_Digest(inner.data(), inner.size(), out.data(), &len, ripemd, nullptr) != 1 ||
        len != 20) {
        backend_fail("ripemd160");
    }
    return out;
}

Digest32 hmac_sha256(ByteView key, ByteView msg) { return hmac256(key, msg); }

PubKey derive_pubkey(const SecretScalar& sk) {
    BnCtxPtr ctx(BN_CTX_new());
    if (!ctx) backend_fail("bn ctx");
    BnPtr d = bn_from(sk);
    if (!scalar_in_range(d.get())) throw Error(ErrorCode::InvalidKey, "scalar out of range");
    return scalar_base_mul(d.get(), ctx.get());
}

Digest32 ecdh_shared(const SecretScalar& sk, const PubKey& pk) {
    BnCtxPtr ctx(BN_CTX_new());
    if (!ctx) backend_fail("bn ctx");
    BnPtr d = bn_from(sk);
    if (!scalar_in_range(d.get())) throw Error(ErrorCode::InvalidKey, "scalar out of range");
    PointPtr peer = parse_point(pk, ctx.get(), ErrorCode::InvalidKey);
    PointPtr shared(EC_POINT_new(curve()));
    if (!shared || EC_POINT_mul(curve(), shared.get(), nullptr, peer.get(), d.get(), ctx.get()) != 1) {
        backend_fail("ecdh");
    }
    if (EC_POINT_is_at_infinity(curve(), shared.get())) {
        throw Error(ErrorCode::InvalidKey, "degenerate shared point");
    }
    return sha256(compress_point(shared.get(), ctx.get()));
}

}  // namespace delegacoin::crypto
