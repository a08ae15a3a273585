#include <catch2/catch_amalgamated.hpp>

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/ecdsa.h>
#include <openssl/obj_mac.h>

#include <set>
#include <string>

#include "delegacoin/crypto/address.hpp"
#include "delegacoin/crypto/suite.hpp"
#include "delegacoin/rng.hpp"

using namespace delegacoin;
using namespace delegacoin::crypto;

namespace {

Drbg test_rng(uint64_t seed = 7) { return Drbg(seed); }

bool is_error(const std::function<void()>& f, ErrorCode code) {
    try {
        f();
    } catch (const Error& e) {
        return e.code() == code;
    }
    return false;
}

// Independent base58check route: big-integer division via OpenSSL BN instead
// of the library's byte-array long division.
std::string bn_base58(ByteView data) {
    static const char* alphabet = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";
    size_t zeros = 0;
    while (zeros < data.size() && data[zeros] == 0) ++zeros;

    BIGNUM* num = BN_bin2bn(data.data(), static_cast<int>(data.size()), nullptr);
    BIGNUM* base = BN_new();
    BIGNUM* rem = BN_new();
    BN_CTX* ctx = BN_CTX_new();
    BN_set_word(base, 58);
    std::string digits;
    while (!BN_is_zero(num)) {
        BN_div(num, rem, num, base, ctx);
        digits.push_back(alphabet[BN_get_word(rem)]);
    }
    BN_free(num);
    BN_free(base);
    BN_free(rem);
    BN_CTX_free(ctx);

    std::string out(zeros, '1');
    out.append(digits.rbegin(), digits.rend());
    return out;
}

// Independent ECDSA verification route through OpenSSL's own implementation.
bool openssl_ecdsa_verify(const PubKey& vk, const Signature& sig, ByteView msg) {
    Digest32 digest = sha256(msg);
    EC_KEY* key = EC_KEY_new_by_curve_name(NID_secp256k1);
    const EC_GROUP* group = EC_KEY_get0_group(key);
    EC_POINT* q = EC_POINT_new(group);
    REQUIRE(EC_POINT_oct2point(group, q, vk.data(), vk.size(), nullptr) == 1);
    REQUIRE(EC_KEY_set_public_key(key, q) == 1);

    ECDSA_SIG* s = ECDSA_SIG_new();
    BIGNUM* r_bn = BN_bin2bn(sig.bytes.data(), 32, nullptr);
    BIGNUM* s_bn = BN_bin2bn(sig.bytes.data() + 32, 32, nullptr);
    ECDSA_SIG_set0(s, r_bn, s_bn);
    int ok = ECDSA_do_verify(digest.data(), digest.size(), s, key);
    ECDSA_SIG_free(s);
    EC_POINT_free(q);
    EC_KEY_free(key);
    return ok == 1;
}

}  // namespace

TEST_CASE("symmetric key generation") {
    auto suite = default_suite();
    auto rng = test_rng();

    SECTION("independent draws give distinct keys") {
        SymKey a = suite.se->kgen(rng);
        SymKey b = suite.se->kgen(rng);
        CHECK(a.bytes != b.bytes);
    }

    SECTION("fixed seed reproduces the key") {
        Drbg r1(0), r2(0);
        CHECK(suite.se->kgen(r1).bytes == suite.se->kgen(r2).bytes);
    }

    SECTION("key length is 32 bytes across 1000 draws") {
        for (int i = 0; i < 1000; ++i) {
            SymKey k = suite.se->kgen(rng);
            REQUIRE(k.bytes.size() == 32);
        }
    }
}

TEST_CASE("symmetric encryption") {
    auto suite = default_suite();
    auto rng = test_rng(11);
    SymKey k = suite.se->kgen(rng);

    SECTION("round trip over 1000 random messages") {
        for (int i = 0; i < 1000; ++i) {
            Bytes msg = rng.bytes(rng.below(120));
            SymCiphertext ct = suite.se->enc(k, msg, rng);
            CHECK(suite.se->dec(k, ct) == msg);
        }
    }

    SECTION("nonces are fresh per call") {
        Bytes msg = to_bytes(std::string_view("same message"));
        std::set<Bytes> seen;
        for (int i = 0; i < 100; ++i) {
            seen.insert(suite.se->enc(k, msg, rng).wire());
        }
        CHECK(seen.size() == 100);
    }

    SECTION("empty message round-trips") {
        SymCiphertext ct = suite.se->enc(k, {}, rng);
        CHECK(suite.se->dec(k, ct).empty());
    }

    SECTION("wrong key fails with IntegrityFailure") {
        SymCiphertext ct = suite.se->enc(k, to_bytes(std::string_view("payload")), rng);
        SymKey other = suite.se->kgen(rng);
        CHECK(is_error([&] { suite.se->dec(other, ct); }, ErrorCode::IntegrityFailure));
    }

    SECTION("every single-byte mutation fails") {
        Bytes msg = to_bytes(std::string_view("short secret"));
        SymCiphertext ct = suite.se->enc(k, msg, rng);
        Bytes wire = ct.wire();
        for (size_t i = 0; i < wire.size(); ++i) {
            Bytes mutated = wire;
            mutated[i] ^= 0x01;
            SymCiphertext bad = SymCiphertext::parse(mutated);
            CHECK(is_error([&] { suite.se->dec(k, bad); }, ErrorCode::IntegrityFailure));
        }
    }
}

TEST_CASE("signatures") {
    auto suite = default_suite();
    auto rng = test_rng(13);
    SigKeypair kp = suite.sig->keygen(rng);
    Bytes msg = to_bytes(std::string_view("delegate 200 to the kid"));

    SECTION("honest triple verifies") {
        Signature sig = suite.sig->sign(kp.sk, msg);
        CHECK(suite.sig->verify(kp.vk, sig, msg));
    }

    SECTION("appending a byte to the message fails") {
        Signature sig = suite.sig->sign(kp.sk, msg);
        Bytes extended = msg;
        extended.push_back(0x00);
        CHECK_FALSE(suite.sig->verify(kp.vk, sig, extended));
    }

    SECTION("all 512 single-bit signature mutations fail") {
        Signature sig = suite.sig->sign(kp.sk, msg);
        for (size_t bit = 0; bit < kSignatureLen * 8; ++bit) {
            Signature bad = sig;
            bad.bytes[bit / 8] ^= static_cast<uint8_t>(1u << (bit % 8));
            CHECK_FALSE(suite.sig->verify(kp.vk, bad, msg));
        }
    }

    SECTION("256 single-bit message mutations fail") {
        Bytes m32 = rng.bytes(32);
        Signature sig = suite.sig->sign(kp.sk, m32);
        for (size_t bit = 0; bit < 256; ++bit) {
            Bytes bad = m32;
            bad[bit / 8] ^= static_cast<uint8_t>(1u << (bit % 8));
            CHECK_FALSE(suite.sig->verify(kp.vk, sig, bad));
        }
    }

    SECTION("signing is deterministic per (key, message)") {
        CHECK(suite.sig->sign(kp.sk, msg) == suite.sig->sign(kp.sk, msg));
        CHECK_FALSE(suite.sig->sign(kp.sk, msg) ==
                    suite.sig->sign(kp.sk, to_bytes(std::string_view("other"))));
    }

    SECTION("malformed verification key raises InvalidKey") {
        PubKey bad = kp.vk;
        bad[0] = 0x05;  // not a valid compressed-point prefix
        Signature sig = suite.sig->sign(kp.sk, msg);
        CHECK(is_error([&] { (void)suite.sig->verify(bad, sig, msg); }, ErrorCode::InvalidKey));
    }

    SECTION("scalar one maps to the known generator point") {
        SecretScalar one{};
        one[31] = 1;
        // Derive the public key by signing round-trip: keygen is rng-driven,
        // so check via a fixed-scalar signature verifying under G.
        Drbg fixed(Drbg::State{.seed = {}, .counter = 0});
        (void)fixed;
        Signature sig = suite.sig->sign(one, msg);
        PubKey g_compressed = to_array<33>(
            from_hex("0279be667ef9dcbbac55a06295ce870b07029bfcdb2dce28d959f2815b16f81798"));
        CHECK(suite.sig->verify(g_compressed, sig, msg));
    }

    SECTION("cross-check against an independent ECDSA implementation") {
        for (int i = 0; i < 20; ++i) {
            Bytes m = rng.bytes(40);
            Signature sig = suite.sig->sign(kp.sk, m);
            CHECK(openssl_ecdsa_verify(kp.vk, sig, m));
        }
    }
}

TEST_CASE("public-key encryption") {
    auto suite = default_suite();
    auto rng = test_rng(17);
    PkeKeypair kp = suite.pke->keygen(rng);

    SECTION("round trip on random 32-byte message") {
        Bytes msg = rng.bytes(32);
        PkeCiphertext ct = suite.pke->enc(kp.pk, msg, rng);
        CHECK(suite.pke->dec(kp.sk, ct) == msg);
    }

    SECTION("100 random mutations all fail to decrypt") {
        Bytes msg = rng.bytes(48);
        PkeCiphertext ct = suite.pke->enc(kp.pk, msg, rng);
        Bytes wire = ct.wire();
        for (int i = 0; i < 100; ++i) {
            Bytes mutated = wire;
            size_t pos = rng.below(mutated.size());
            uint8_t mask = static_cast<uint8_t>(1 + rng.below(255));
            mutated[pos] ^= mask;
            PkeCiphertext bad = PkeCiphertext::parse(mutated);
            CHECK(is_error([&] { suite.pke->dec(kp.sk, bad); }, ErrorCode::DecryptFailure));
        }
    }

    SECTION("unrelated secret key fails") {
        PkeKeypair other = suite.pke->keygen(rng);
        PkeCiphertext ct = suite.pke->enc(kp.pk, rng.bytes(16), rng);
        CHECK(is_error([&] { suite.pke->dec(other.sk, ct); }, ErrorCode::DecryptFailure));
    }

    SECTION("round trip across 200 random messages") {
        for (int i = 0; i < 200; ++i) {
            Bytes msg = rng.bytes(rng.below(96));
            PkeCiphertext ct = suite.pke->enc(kp.pk, msg, rng);
            CHECK(suite.pke->dec(kp.sk, ct) == msg);
        }
    }
}

TEST_CASE("hashing") {
    SECTION("sha256 empty-input standard vector") {
        CHECK(to_hex(sha256({})) ==
              "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    SECTION("sha256 'abc' standard vector") {
        CHECK(to_hex(sha256(to_bytes(std::string_view("abc")))) ==
              "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    SECTION("sha256 is deterministic") {
        Bytes in = to_bytes(std::string_view("same input"));
        CHECK(sha256(in) == sha256(in));
    }

    SECTION("hash160 output is 20 bytes") {
        CHECK(hash160(to_bytes(std::string_view("x"))).size() == 20);
    }
}

TEST_CASE("address derivation") {
    auto suite = default_suite();
    auto rng = test_rng(19);

    SECTION("testnet text prefix, against the independent base58 route") {
        for (int i = 0; i < 50; ++i) {
            SigKeypair kp = suite.sig->keygen(rng);
            Address a = derive_address(kp.vk);
            std::string text = a.text();
            CHECK((text[0] == 'm' || text[0] == 'n'));
            CHECK(text == bn_base58(a.raw()));
        }
    }

    SECTION("same key derives the same address") {
        SigKeypair kp = suite.sig->keygen(rng);
        CHECK(derive_address(kp.vk) == derive_address(kp.vk));
    }

    SECTION("corrupted checksum is rejected") {
        SigKeypair kp = suite.sig->keygen(rng);
        auto raw = derive_address(kp.vk).raw();
        raw[21] ^= 0xFF;
        CHECK(is_error([&] { Address::from_raw(raw); }, ErrorCode::BadAddress));
    }

    SECTION("text round trip over 1000 random keys") {
        for (int i = 0; i < 1000; ++i) {
            SigKeypair kp = suite.sig->keygen(rng);
            Address a = derive_address(kp.vk);
            CHECK(Address::parse(a.text()) == a);
        }
    }
}

TEST_CASE("drbg determinism and forking") {
    SECTION("same seed, same stream") {
        Drbg a(99), b(99);
        CHECK(a.bytes(64) == b.bytes(64));
    }

    SECTION("snapshot and restore replays the stream") {
        Drbg a(5);
        (void)a.bytes(17);
        Drbg::State snap = a.state();
        Bytes first = a.bytes(40);
        a.restore(snap);
        CHECK(a.bytes(40) == first);
    }

    SECTION("forked streams are independent of parent position") {
        Drbg a(5), b(5);
        Drbg fa = a.fork("child");
        Drbg fb = b.fork("child");
        CHECK(fa.bytes(16) == fb.bytes(16));
        CHECK(fa.bytes(16) != a.bytes(16));
    }
}
