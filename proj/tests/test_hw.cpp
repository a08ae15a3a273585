#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "delegacoin/hw/emulator.hpp"

using namespace delegacoin;
using namespace delegacoin::hw;

namespace {

// Minimal stateful program: bumps a counter per run and mixes in DRBG bytes,
// so determinism and state isolation are observable from outputs alone.
class CounterProgram final : public EnclaveProgram {
public:
    std::string_view identity() const override { return "test.counter/v1"; }

    Bytes handle(EnclaveContext& ctx, ByteView input) override {
        ++count_;
        ByteWriter w;
        w.u64le(count_);
        w.field(input);
        w.raw(ctx.rng().bytes(16));
        return w.take();
    }

    std::unique_ptr<EnclaveProgram> clone() const override {
        return std::make_unique<CounterProgram>(*this);
    }

private:
    uint64_t count_ = 0;
};

class EchoProgram final : public EnclaveProgram {
public:
    std::string_view identity() const override { return "test.echo/v1"; }
    Bytes handle(EnclaveContext&, ByteView input) override { return to_bytes(input); }
    std::unique_ptr<EnclaveProgram> clone() const override {
        return std::make_unique<EchoProgram>(*this);
    }
};

struct EmulatorFixture {
    Drbg rng;
    HwEmulator hw;
    explicit EmulatorFixture(uint64_t seed = 1) : rng(seed), hw(128, rng) {
        hw.register_program([] { return std::make_unique<CounterProgram>(); });
        hw.register_program([] { return std::make_unique<EchoProgram>(); });
    }
};

}  // namespace

TEST_CASE("hardware setup") {
    Drbg rng(3);

    SECTION("rejects unsupported security parameter") {
        CHECK_THROWS_AS(HwEmulator(7, rng), Error);
    }

    SECTION("two setups produce distinct attestation keys") {
        HwEmulator a(128, rng), b(128, rng);
        CHECK(a.params().vk_quote != b.params().vk_quote);
    }

    SECTION("params verify quotes issued by the same emulator") {
        EmulatorFixture fx;
        auto& hw = fx.hw;
        EnclaveId id = hw.load("test.echo/v1");
        Quote q = hw.run_quote(id, to_bytes(std::string_view("ping")));
        CHECK(HwEmulator::quote_verify(hw.params(), q));
    }
}

TEST_CASE("enclave loading") {
    EmulatorFixture fx;
    auto& hw = fx.hw;

    SECTION("same program loads with equal measurement, distinct handles") {
        EnclaveId a = hw.load("test.counter/v1");
        EnclaveId b = hw.load("test.counter/v1");
        CHECK(a != b);
        Quote qa = hw.run_quote(a, {});
        Quote qb = hw.run_quote(b, {});
        CHECK(qa.tag_p == qb.tag_p);
    }

    SECTION("different programs have different measurements") {
        CHECK(hw.measurement_of("test.counter/v1") != hw.measurement_of("test.echo/v1"));
    }

    SECTION("unregistered program is rejected") {
        CHECK_THROWS_MATCHES(hw.load("test.nothing/v1"), Error,
                             Catch::Matchers::MessageMatches(
                                 Catch::Matchers::ContainsSubstring("UnknownProgram")));
    }
}

TEST_CASE("enclave execution") {
    EmulatorFixture fx;
    auto& hw = fx.hw;

    SECTION("destroyed handle is unknown") {
        EnclaveId id = hw.load("test.echo/v1");
        hw.destroy(id);
        try {
            hw.run(id, {});
            FAIL("expected UnknownHandle");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::UnknownHandle);
        }
    }

    SECTION("snapshot replay reproduces output byte for byte") {
        EnclaveId id = hw.load("test.counter/v1");
        (void)hw.run(id, to_bytes(std::string_view("warmup")));
        EnclaveSnapshot snap = hw.snapshot(id);
        Bytes first = hw.run(id, to_bytes(std::string_view("probe")));
        hw.restore(snap);
        Bytes replay = hw.run(id, to_bytes(std::string_view("probe")));
        CHECK(first == replay);
    }

    SECTION("state is isolated between handles") {
        EnclaveId a = hw.load("test.counter/v1");
        EnclaveId b = hw.load("test.counter/v1");
        auto count_of = [](const Bytes& out) { return ByteReader(out).u64le(); };
        CHECK(count_of(hw.run(a, {})) == 1);
        CHECK(count_of(hw.run(a, {})) == 2);
        CHECK(count_of(hw.run(b, {})) == 1);  // untouched by a's runs
        CHECK(count_of(hw.run(a, {})) == 3);
        CHECK(count_of(hw.run(b, {})) == 2);
    }
}

TEST_CASE("quote verification") {
    EmulatorFixture fx;
    auto& hw = fx.hw;
    EnclaveId id = hw.load("test.echo/v1");
    Quote q = hw.run_quote(id, to_bytes(std::string_view("attest me")));

    SECTION("honest quote verifies") {
        CHECK(HwEmulator::quote_verify(hw.params(), q));
        CHECK(HwEmulator::quote_verify_wire(hw.params(), q.wire()));
    }

    SECTION("zeroed output field fails") {
        Quote bad = q;
        bad.output.assign(bad.output.size(), 0);
        CHECK_FALSE(HwEmulator::quote_verify(hw.params(), bad));
    }

    SECTION("quote does not verify under another emulator's params") {
        EmulatorFixture other(99);
        CHECK_FALSE(HwEmulator::quote_verify(other.hw.params(), q));
    }

    SECTION("all single-bit mutations of the wire fail") {
        Bytes wire = q.wire();
        size_t bits = std::min<size_t>(wire.size() * 8, 1024);
        size_t rejected = 0;
        for (size_t bit = 0; bit < bits; ++bit) {
            Bytes mutated = wire;
            mutated[bit / 8] ^= static_cast<uint8_t>(1u << (bit % 8));
            if (!HwEmulator::quote_verify_wire(hw.params(), mutated)) ++rejected;
        }
        CHECK(rejected == bits);
    }

    SECTION("swapped input/output fields fail") {
        EnclaveId counter = hw.load("test.counter/v1");
        Quote qc = hw.run_quote(counter, to_bytes(std::string_view("attest me")));
        REQUIRE(qc.input != qc.output);
        Quote swapped = qc;
        std::swap(swapped.input, swapped.output);
        CHECK_FALSE(HwEmulator::quote_verify(hw.params(), swapped));
    }

    SECTION("malformed wire never throws") {
        CHECK_FALSE(HwEmulator::quote_verify_wire(hw.params(), to_bytes(std::string_view("junk"))));
        CHECK_FALSE(HwEmulator::quote_verify_wire(hw.params(), {}));
        Bytes trailing = q.wire();
        trailing.push_back(0x00);
        CHECK_FALSE(HwEmulator::quote_verify_wire(hw.params(), trailing));
    }

    SECTION("spliced fields from two honest quotes fail") {
        Quote q2 = hw.run_quote(id, to_bytes(std::string_view("second")));
        Quote spliced = q;
        spliced.output = q2.output;
        CHECK_FALSE(HwEmulator::quote_verify(hw.params(), spliced));
        Quote resigned = q;
        resigned.sigma = q2.sigma;
        CHECK_FALSE(HwEmulator::quote_verify(hw.params(), resigned));
    }
}

TEST_CASE("hw params wire round trip") {
    EmulatorFixture fx;
    auto& hw = fx.hw;
    Bytes wire = hw.params().wire();
    CHECK(HwParams::parse(wire) == hw.params());
}
