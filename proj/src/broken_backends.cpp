#include "delegacoin/errors.hpp"
#include "delegacoin/harness/broken.hpp"

namespace delegacoin::harness {

namespace {

using namespace delegacoin::crypto;

Bytes keystream(ByteView seed, size_t len) {
    Bytes out;
    out.reserve(len + 32);
    uint64_t counter = 0;
    while (out.size() < len) {
        ByteWriter w;
        w.raw(seed);
        w.u64le(counter++);
        Digest32 block = sha256(w.peek());
        out.insert(out.end(), block.begin(), block.end());
    }
    out.resize(len);
    return out;
}

void xor_into(Bytes& data, ByteView pad) {
    for (size_t i = 0; i < data.size(); ++i) data[i] ^= pad[i];
}

class FixedNonceCipher final : public SymCipher {
public:
    SymKey kgen(RandomSource& rng) const override {
        SymKey k;
        rng.fill(k.bytes);
        return k;
    }

    SymCiphertext enc(const SymKey& key, ByteView msg, RandomSource&) const override {
        SymCiphertext ct;
        ct.nonce.fill(0);  // the defect under test
        ct.body = to_bytes(msg);
        xor_into(ct.body, keystream(key.bytes, ct.body.size()));
        ByteWriter mac;
        mac.raw(key.bytes);
        mac.raw(ct.body);
        Digest32 tag = sha256(mac.peek());
        std::copy_n(tag.begin(), kSymTagLen, ct.tag.begin());
        return ct;
    }

    Bytes dec(const SymKey& key, const SymCiphertext& ct) const override {
        ByteWriter mac;
        mac.raw(key.bytes);
        mac.raw(ct.body);
        Digest32 tag = sha256(mac.peek());
        if (!std::equal(ct.tag.begin(), ct.tag.end(), tag.begin())) {
            throw Error(ErrorCode::IntegrityFailure, "bad tag");
        }
        Bytes out = ct.body;
        xor_into(out, keystream(key.bytes, out.size()));
        return out;
    }
};

class KeylessSigner final : public Signer {
public:
    SigKeypair keygen(RandomSource& rng) const override {
        SigKeypair kp;
        rng.fill(kp.sk);
        kp.vk[0] = 0x02;
        Digest32 h = sha256(kp.sk);
        std::copy(h.begin(), h.end(), kp.vk.begin() + 1);
        return kp;
    }

    Signature sign(const SecretScalar&, ByteView msg) const override {
        Signature sig;
        Digest32 a = sha256(msg);
        ByteWriter w;
        w.raw(a);
        w.raw(to_bytes(std::string_view("2")));
        Digest32 b = sha256(w.peek());
        std::copy(a.begin(), a.end(), sig.bytes.begin());
        std::copy(b.begin(), b.end(), sig.bytes.begin() + 32);
        return sig;
    }

    bool verify(const PubKey&, const Signature& sig, ByteView msg) const override {
        return sign({}, msg) == sig;
    }
};

class MalleablePke final : public Pke {
public:
    PkeKeypair keygen(RandomSource& rng) const override {
        for (;;) {
            PkeKeypair kp;
            rng.fill(kp.sk);
            try {
                kp.pk = derive_pubkey(kp.sk);
                return kp;
            } catch (const Error&) {
            }
        }
    }

    PkeCiphertext enc(const PubKey& pk, ByteView msg, RandomSource& rng) const override {
        PkeKeypair eph = keygen(rng);
        PkeCiphertext ct;
        ct.ephemeral = eph.pk;
        ct.sealed = to_bytes(msg);
        xor_into(ct.sealed, keystream(ecdh_shared(eph.sk, pk), ct.sealed.size()));
        return ct;
    }

    Bytes dec(const SecretScalar& sk, const PkeCiphertext& ct) const override {
        Digest32 shared = [&] {
            try {
                return ecdh_shared(sk, ct.ephemeral);
            } catch (const Error&) {
                throw Error(ErrorCode::DecryptFailure, "bad ephemeral point");
            }
        }();
        Bytes out = ct.sealed;
        xor_into(out, keystream(shared, out.size()));
        return out;  // no integrity check: mutations pass through
    }
};

}  // namespace

const crypto::SymCipher& broken_fixed_nonce_cipher() {
    static const FixedNonceCipher c;
    return c;
}

const crypto::Signer& broken_keyless_signer() {
    static const KeylessSigner s;
    return s;
}

const crypto::Pke& broken_malleable_pke() {
    static const MalleablePke p;
    return p;
}

}  // namespace delegacoin::harness
