#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "delegacoin/bytes.hpp"

namespace delegacoin {

// All randomness in the library flows through this interface so runs can be
// made fully deterministic by injecting a seeded source.
class RandomSource {
public:
    virtual ~RandomSource() = default;
    virtual void fill(std::span<uint8_t> out) = 0;

    Bytes bytes(size_t n) {
        Bytes b(n);
        fill(b);
        return b;
    }

    template <size_t N>
    std::array<uint8_t, N> array() {
        std::array<uint8_t, N> a{};
        fill(a);
        return a;
    }

    uint64_t u64() {
        auto a = array<8>();
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(a[i]) << (8 * i);
        return v;
    }

    // Uniform in [0, bound) via rejection sampling.
    uint64_t below(uint64_t bound);
};

// OS-backed randomness.
class SystemRandom final : public RandomSource {
public:
    void fill(std::span<uint8_t> out) override;
};

// SHA-256 counter DRBG. Deterministic given (seed, counter); the state is
// snapshotable so enclave executions can be replayed byte for byte.
class Drbg final : public RandomSource {
public:
    struct State {
        std::array<uint8_t, 32> seed{};
        uint64_t counter = 0;
        bool operator==(const State&) const = default;
    };

    explicit Drbg(const std::array<uint8_t, 32>& seed) { state_.seed = seed; }
    explicit Drbg(const State& s) : state_(s) {}
    explicit Drbg(uint64_t seed64);  // convenience for tests and the CLI

    void fill(std::span<uint8_t> out) override;

    const State& state() const { return state_; }
    void restore(const State& s) { state_ = s; }

    // Derives an independent child stream, used to hand each enclave its own
    // DRBG without coupling their positions.
    Drbg fork(std::string_view label);

private:
    State state_;
};

}  // namespace delegacoin
