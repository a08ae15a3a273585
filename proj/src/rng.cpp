#include "delegacoin/rng.hpp"

#include <openssl/rand.h>

#include <cstring>

#include "delegacoin/crypto/suite.hpp"
#include "delegacoin/errors.hpp"

namespace delegacoin {

uint64_t RandomSource::below(uint64_t bound) {
    if (bound == 0) throw Error(ErrorCode::LengthMismatch, "below(0)");
    // Rejection sampling keeps the draw uniform.
    const uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    for (;;) {
        uint64_t v = u64();
        if (v < limit) return v % bound;
    }
}

void SystemRandom::fill(std::span<uint8_t> out) {
    if (out.empty()) return;
    if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
        throw std::runtime_error("system randomness unavailable");
    }
}

Drbg::Drbg(uint64_t seed64) {
    Bytes tag = to_bytes(std::string_view("delegacoin.drbg.seed64"));
    ByteWriter w;
    w.raw(tag);
    w.u64le(seed64);
    state_.seed = crypto::sha256(w.peek());
}

void Drbg::fill(std::span<uint8_t> out) {
    size_t off = 0;
    while (off < out.size()) {
        ByteWriter w;
        w.raw(state_.seed);
        w.u64le(state_.counter++);
        crypto::Digest32 block = crypto::sha256(w.peek());
        size_t n = std::min<size_t>(32, out.size() - off);
        std::memcpy(out.data() + off, block.data(), n);
        off += n;
    }
}

Drbg Drbg::fork(std::string_view label) {
    ByteWriter w;
    w.raw(state_.seed);
    w.u64le(state_.counter++);
    w.raw(to_bytes(label));
    return Drbg(crypto::sha256(w.peek()));
}

}  // namespace delegacoin
