#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "delegacoin/enclave/delegatee.hpp"
#include "delegacoin/enclave/owner.hpp"

using namespace delegacoin;
using namespace delegacoin::enclave;
using delegacoin::hw::HwEmulator;
using delegacoin::hw::Quote;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::MalformedMessage;
}

struct PairFixture {
    Drbg rng;
    HwEmulator hw;
    crypto::Suite suite = crypto::default_suite();
    hw::EnclaveId o = 0, d = 0;
    delegatee_cmd::InitOutput dinit;
    owner_cmd::InitOutput oinit;
    Quote quote;
    crypto::SigKeypair receipt_key;

    explicit PairFixture(uint64_t seed = 777) : rng(seed), hw(128, rng) {
        hw.register_program([] { return std::make_unique<OwnerProgram>(); });
        hw.register_program([] { return std::make_unique<DelegateeProgram>(); });
        d = hw.load(DelegateeProgram::kIdentity);
        o = hw.load(OwnerProgram::kIdentity);
        receipt_key = suite.sig->keygen(rng);
    }

    void delegatee_init() {
        dinit = delegatee_cmd::InitOutput::parse(hw.run(d, delegatee_cmd::init_setup()));
    }

    void owner_init_quote() {
        quote = hw.run_quote(o, owner_cmd::init_setup(dinit.sid, dinit.vk_sign));
        oinit = owner_cmd::InitOutput::parse(quote.output);
    }

    ProvisionMessage provision() {
        return ProvisionMessage::parse(
            hw.run(d, delegatee_cmd::provision(quote, oinit.pk_o, hw.params())));
    }

    void full_setup() {
        delegatee_init();
        owner_init_quote();
        ProvisionMessage m = provision();
        hw.run(o, owner_cmd::complete_setup(m.sid, m.ct_r, m.sigma_r));
    }

    owner_cmd::AddressOutput gen_address() {
        return owner_cmd::AddressOutput::parse(hw.run(o, owner_cmd::address_generation()));
    }

    void notify_deposit(const crypto::Address& addr, uint64_t amount) {
        crypto::Signature sig =
            suite.sig->sign(receipt_key.sk, owner_cmd::receipt_payload(addr, amount));
        hw.run(o, owner_cmd::deposit_notification(addr, amount, receipt_key.vk, sig));
    }

    crypto::Address fund(uint64_t amount) {
        auto out = gen_address();
        notify_deposit(out.addr, amount);
        return out.addr;
    }

    const OwnerState& owner_state() {
        return dynamic_cast<OwnerProgram&>(hw.program_of(o)).state();
    }

    const DelegateeState& delegatee_state() {
        return dynamic_cast<DelegateeProgram&>(hw.program_of(d)).state();
    }

    crypto::Address random_recipient() {
        return crypto::derive_address(suite.sig->keygen(rng).vk);
    }
};

// Brute-force balance ledger replayed alongside the enclave; the independent
// check for conservation and over-delegation.
struct LedgerOracle {
    uint64_t balance = 0;
    uint64_t delegated_total = 0;

    void deposit(uint64_t amount) { balance += amount; }

    bool delegate(uint64_t amount) {
        if (amount == 0 || amount > balance) return false;
        balance -= amount;
        delegated_total += amount;
        return true;
    }
};

}  // namespace

TEST_CASE("owner init setup") {
    PairFixture fx;
    fx.delegatee_init();

    SECTION("output carries pk_O and echoes the session") {
        fx.owner_init_quote();
        CHECK(fx.oinit.sid == fx.dinit.sid);
        CHECK(fx.oinit.vk_sign == fx.dinit.vk_sign);
        // The decryption key never leaves the enclave.
        CHECK_FALSE(contains_subsequence(fx.quote.output, fx.owner_state().pke.sk));
        CHECK(fx.oinit.pk_o == fx.owner_state().pke.pk);
    }

    SECTION("second init is rejected") {
        fx.owner_init_quote();
        CHECK(code_of([&] {
                  fx.hw.run(fx.o, owner_cmd::init_setup(fx.dinit.sid, fx.dinit.vk_sign));
              }) == ErrorCode::AlreadyInitialized);
    }
}

TEST_CASE("setup key agreement") {
    PairFixture fx;
    fx.delegatee_init();
    fx.owner_init_quote();
    ProvisionMessage m = fx.provision();

    SECTION("honest completion stores the delegatee's key") {
        fx.hw.run(fx.o, owner_cmd::complete_setup(m.sid, m.ct_r, m.sigma_r));
        REQUIRE(fx.owner_state().provision_key.has_value());
        REQUIRE(fx.delegatee_state().provision_key.has_value());
        CHECK(fx.owner_state().provision_key->bytes == fx.delegatee_state().provision_key->bytes);
    }

    SECTION("signature over altered ct_r is rejected") {
        crypto::PkeCiphertext altered = m.ct_r;
        altered.sealed[0] ^= 0x40;
        CHECK(code_of([&] {
                  fx.hw.run(fx.o, owner_cmd::complete_setup(m.sid, altered, m.sigma_r));
              }) == ErrorCode::BadSignature);
    }

    SECTION("wrong sid is an unknown session") {
        SessionId wrong = m.sid;
        wrong[0] ^= 0xFF;
        CHECK(code_of([&] {
                  fx.hw.run(fx.o, owner_cmd::complete_setup(wrong, m.ct_r, m.sigma_r));
              }) == ErrorCode::UnknownSession);
    }
}

TEST_CASE("address generation") {
    PairFixture fx;
    fx.full_setup();

    SECTION("address derives from the returned key") {
        auto out = fx.gen_address();
        CHECK(out.addr == crypto::derive_address(out.pk_tx));
    }

    SECTION("signing key stays inside") {
        Bytes raw = fx.hw.run(fx.o, owner_cmd::address_generation());
        CHECK_FALSE(contains_subsequence(raw, fx.owner_state().tx_key->sk));
    }

    SECTION("second generation is rejected") {
        fx.gen_address();
        CHECK(code_of([&] { fx.hw.run(fx.o, owner_cmd::address_generation()); }) ==
              ErrorCode::AlreadyGenerated);
    }
}

TEST_CASE("deposit notification") {
    PairFixture fx;
    fx.full_setup();
    auto out = fx.gen_address();

    SECTION("valid receipt credits the balance") {
        fx.notify_deposit(out.addr, 500);
        CHECK(fx.owner_state().balance == 500);
    }

    SECTION("zero deposit is rejected") {
        crypto::Signature sig =
            fx.suite.sig->sign(fx.receipt_key.sk, owner_cmd::receipt_payload(out.addr, 0));
        CHECK(code_of([&] {
                  fx.hw.run(fx.o, owner_cmd::deposit_notification(out.addr, 0, fx.receipt_key.vk,
                                                                  sig));
              }) == ErrorCode::ZeroAmount);
    }

    SECTION("bad receipt signature is rejected") {
        crypto::Signature sig =
            fx.suite.sig->sign(fx.receipt_key.sk, owner_cmd::receipt_payload(out.addr, 999));
        CHECK(code_of([&] {
                  fx.hw.run(fx.o, owner_cmd::deposit_notification(out.addr, 500, fx.receipt_key.vk,
                                                                  sig));
              }) == ErrorCode::BadReceipt);
    }

    SECTION("receipt authority cannot change once pinned") {
        fx.notify_deposit(out.addr, 500);
        crypto::SigKeypair other = fx.suite.sig->keygen(fx.rng);
        crypto::Signature sig =
            fx.suite.sig->sign(other.sk, owner_cmd::receipt_payload(out.addr, 100));
        CHECK(code_of([&] {
                  fx.hw.run(fx.o, owner_cmd::deposit_notification(out.addr, 100, other.vk, sig));
              }) == ErrorCode::BadReceipt);
    }
}

TEST_CASE("state update") {
    PairFixture fx;
    fx.full_setup();
    crypto::Address addr = fx.fund(500);

    auto update = [&](uint64_t amount) {
        Bytes out = fx.hw.run(fx.o, owner_cmd::state_update(addr, amount));
        return ByteReader(out).u64le();
    };

    SECTION("subtracts exactly") { CHECK(update(200) == 300); }

    SECTION("boundary spend-all is allowed") {
        CHECK(update(200) == 300);
        CHECK(update(300) == 0);
    }

    SECTION("overdraft is rejected and balance unchanged") {
        CHECK(code_of([&] { update(600); }) == ErrorCode::InsufficientBalance);
        CHECK(fx.owner_state().balance == 500);
    }

    SECTION("zero amount is rejected") {
        CHECK(code_of([&] { update(0); }) == ErrorCode::ZeroAmount);
    }
}

TEST_CASE("transaction generation") {
    PairFixture fx;
    fx.full_setup();
    crypto::Address addr = fx.fund(500);
    crypto::Address recipient = fx.random_recipient();

    SECTION("produced transaction verifies under its own key") {
        fx.hw.run(fx.o, owner_cmd::state_update(addr, 200));
        Bytes wire = fx.hw.run(fx.o, owner_cmd::transaction_generation(addr, 200, recipient));
        Transaction tx = Transaction::parse(wire);
        CHECK(tx.verify_signature(*fx.suite.sig));
        CHECK(tx.metadata.amount == 200);
        CHECK(tx.addr == addr);
        CHECK(crypto::derive_address(tx.pk_tx) == addr);
    }

    SECTION("equal amounts give distinct nonces and signatures") {
        fx.hw.run(fx.o, owner_cmd::state_update(addr, 100));
        Transaction a = Transaction::parse(
            fx.hw.run(fx.o, owner_cmd::transaction_generation(addr, 100, recipient)));
        fx.hw.run(fx.o, owner_cmd::state_update(addr, 100));
        Transaction b = Transaction::parse(
            fx.hw.run(fx.o, owner_cmd::transaction_generation(addr, 100, recipient)));
        CHECK(a.metadata.nonce != b.metadata.nonce);
        CHECK(a.sigma.bytes != b.sigma.bytes);
    }

    SECTION("requires a preceding state update") {
        CHECK(code_of([&] {
                  fx.hw.run(fx.o, owner_cmd::transaction_generation(addr, 200, recipient));
              }) == ErrorCode::NoPendingUpdate);
    }
}

TEST_CASE("transaction generation before address generation") {
    PairFixture fx;
    fx.full_setup();
    crypto::Address other = fx.random_recipient();
    CHECK(code_of([&] {
              fx.hw.run(fx.o, owner_cmd::transaction_generation(other, 200, other));
          }) == ErrorCode::NoAddress);
}

TEST_CASE("start delegation") {
    PairFixture fx;
    fx.full_setup();
    crypto::Address addr = fx.fund(500);
    crypto::Address recipient = fx.random_recipient();

    SECTION("ciphertext decrypts to the generated transaction under r") {
        fx.hw.run(fx.o, owner_cmd::state_update(addr, 200));
        Bytes tx_wire = fx.hw.run(fx.o, owner_cmd::transaction_generation(addr, 200, recipient));
        Bytes ct_wire = fx.hw.run(fx.o, owner_cmd::start_delegation(addr));
        crypto::SymCiphertext ct = crypto::SymCiphertext::parse(ct_wire);
        Bytes plain = fx.suite.se->dec(*fx.owner_state().provision_key, ct);
        CHECK(plain == tx_wire);
    }

    SECTION("without a pending transaction") {
        CHECK(code_of([&] { fx.hw.run(fx.o, owner_cmd::start_delegation(addr)); }) ==
              ErrorCode::NoPendingTx);
    }
}

TEST_CASE("start delegation before setup completes") {
    PairFixture fx;
    fx.delegatee_init();
    fx.owner_init_quote();  // no provision/complete: r absent
    auto out = fx.gen_address();
    fx.notify_deposit(out.addr, 500);
    fx.hw.run(fx.o, owner_cmd::state_update(out.addr, 100));
    fx.hw.run(fx.o, owner_cmd::transaction_generation(out.addr, 100, out.addr));
    CHECK(code_of([&] { fx.hw.run(fx.o, owner_cmd::start_delegation(out.addr)); }) ==
          ErrorCode::NoProvisionKey);
}

TEST_CASE("state seal and retrieval") {
    PairFixture fx;
    fx.full_setup();
    crypto::Address addr = fx.fund(500);

    auto seal = [&] {
        return SealedRecord::parse_frame(fx.hw.run(fx.o, owner_cmd::state_seal(addr)));
    };
    auto retrieve = [&](const std::optional<SealedRecord>& rec) {
        return owner_cmd::RetrievalOutput::parse(
            fx.hw.run(fx.o, owner_cmd::state_retrieval(fx.dinit.sid, rec)));
    };

    SECTION("no record yields zero balance") {
        auto out = retrieve(std::nullopt);
        CHECK(out.balance == 0);
        CHECK_FALSE(out.address_restored);
    }

    SECTION("seal round-trips the balance") {
        fx.hw.run(fx.o, owner_cmd::state_update(addr, 200));
        SealedRecord rec = seal();
        auto out = retrieve(rec);
        CHECK(out.balance == 300);
        CHECK(out.address_restored);
    }

    SECTION("sequence increments by one per seal") {
        SealedRecord a = seal();
        SealedRecord b = seal();
        CHECK(b.seq == a.seq + 1);
    }

    SECTION("every mutation of the record fails retrieval") {
        SealedRecord rec = seal();
        Bytes frame = rec.frame();
        size_t rejected = 0;
        for (size_t i = 0; i < frame.size(); ++i) {
            Bytes bad = frame;
            bad[i] ^= 0x01;
            try {
                SealedRecord parsed = SealedRecord::parse_frame(bad);
                fx.hw.run(fx.o, owner_cmd::state_retrieval(fx.dinit.sid, parsed));
            } catch (const Error&) {
                ++rejected;
                continue;
            }
            FAIL("mutation at byte " << i << " was accepted");
        }
        CHECK(rejected == frame.size());
    }

    SECTION("retrieval with wrong sid") {
        SessionId wrong = fx.dinit.sid;
        wrong[3] ^= 0x10;
        CHECK(code_of([&] {
                  fx.hw.run(fx.o, owner_cmd::state_retrieval(wrong, std::nullopt));
              }) == ErrorCode::UnknownSession);
    }
}

TEST_CASE("atomic delegation") {
    PairFixture fx;
    fx.full_setup();
    crypto::Address addr = fx.fund(500);
    crypto::Address recipient = fx.random_recipient();

    auto& program = dynamic_cast<OwnerProgram&>(fx.hw.program_of(fx.o));

    SECTION("success emits ciphertext and sealed balance") {
        Bytes out = fx.hw.run(fx.o, owner_cmd::delegate_atomic(addr, 200, recipient));
        auto atomic = owner_cmd::AtomicOutput::parse(out);
        CHECK(fx.owner_state().balance == 300);
        Bytes plain = fx.suite.se->dec(fx.owner_state().key_seal, atomic.record.c_update);
        CHECK(ByteReader(plain).u64le() == 300);
        Bytes tx_plain = fx.suite.se->dec(*fx.owner_state().provision_key, atomic.ct_tx);
        Transaction tx = Transaction::parse(tx_plain);
        CHECK(tx.metadata.amount == 200);
        CHECK(tx.verify_signature(*fx.suite.sig));
    }

    SECTION("overdraft leaves the balance untouched") {
        CHECK(code_of([&] {
                  fx.hw.run(fx.o, owner_cmd::delegate_atomic(addr, 600, recipient));
              }) == ErrorCode::InsufficientBalance);
        CHECK(fx.owner_state().balance == 500);
    }

    SECTION("a fault at any internal step aborts without state change") {
        auto points = {OwnerFault::AfterStateUpdate, OwnerFault::AfterTransactionGeneration,
                       OwnerFault::AfterEncryption, OwnerFault::AfterSealBuild};
        uint64_t seq_before = fx.owner_state().seal_seq;
        for (OwnerFault p : points) {
            program.arm_fault(p);
            CHECK_THROWS_AS(fx.hw.run(fx.o, owner_cmd::delegate_atomic(addr, 200, recipient)),
                            SimulatedCrash);
            CHECK(fx.owner_state().balance == 500);
            CHECK(fx.owner_state().seal_seq == seq_before);
            CHECK_FALSE(fx.owner_state().pending_tx.has_value());
        }
        // After the faults clear, the same delegation goes through.
        Bytes out = fx.hw.run(fx.o, owner_cmd::delegate_atomic(addr, 200, recipient));
        CHECK(fx.owner_state().balance == 300);
        CHECK(owner_cmd::AtomicOutput::parse(out).record.seq == seq_before + 1);
    }
}

TEST_CASE("conservation against the ledger oracle") {
    // Random schedules replayed against a brute-force ledger.
    for (uint64_t trial = 0; trial < 50; ++trial) {
        PairFixture fx(1000 + trial);
        fx.full_setup();
        uint64_t deposit = 100 + fx.rng.below(900);
        crypto::Address addr = fx.fund(deposit);
        crypto::Address recipient = fx.random_recipient();

        LedgerOracle oracle;
        oracle.deposit(deposit);

        uint64_t steps = 1 + fx.rng.below(12);
        for (uint64_t i = 0; i < steps; ++i) {
            uint64_t amount = fx.rng.below(deposit / 2 + 2);
            bool oracle_ok = oracle.delegate(amount);
            bool enclave_ok = true;
            try {
                fx.hw.run(fx.o, owner_cmd::delegate_atomic(addr, amount, recipient));
            } catch (const Error&) {
                enclave_ok = false;
            }
            REQUIRE(enclave_ok == oracle_ok);
            REQUIRE(fx.owner_state().balance == oracle.balance);
        }
        REQUIRE(oracle.delegated_total + fx.owner_state().balance == deposit);
    }
}

TEST_CASE("secret confinement across handler outputs") {
    PairFixture fx;
    fx.delegatee_init();

    std::vector<Bytes> outputs;
    fx.quote = fx.hw.run_quote(fx.o, owner_cmd::init_setup(fx.dinit.sid, fx.dinit.vk_sign));
    fx.oinit = owner_cmd::InitOutput::parse(fx.quote.output);
    outputs.push_back(fx.quote.wire());
    Bytes provision_wire = fx.hw.run(fx.d, delegatee_cmd::provision(fx.quote, fx.oinit.pk_o,
                                                                    fx.hw.params()));
    outputs.push_back(provision_wire);
    ProvisionMessage m = ProvisionMessage::parse(provision_wire);
    outputs.push_back(fx.hw.run(fx.o, owner_cmd::complete_setup(m.sid, m.ct_r, m.sigma_r)));

    Bytes addr_out = fx.hw.run(fx.o, owner_cmd::address_generation());
    outputs.push_back(addr_out);
    crypto::Address addr = owner_cmd::AddressOutput::parse(addr_out).addr;
    crypto::Signature rsig =
        fx.suite.sig->sign(fx.receipt_key.sk, owner_cmd::receipt_payload(addr, 500));
    outputs.push_back(
        fx.hw.run(fx.o, owner_cmd::deposit_notification(addr, 500, fx.receipt_key.vk, rsig)));
    outputs.push_back(fx.hw.run(fx.o, owner_cmd::delegate_atomic(addr, 150, addr)));
    outputs.push_back(fx.hw.run(fx.o, owner_cmd::state_seal(addr)));

    const OwnerState& ost = fx.owner_state();
    const DelegateeState& dst = fx.delegatee_state();
    std::vector<Bytes> secrets = {
        to_bytes(ByteView(ost.pke.sk)),
        to_bytes(ByteView(ost.key_seal.bytes)),
        to_bytes(ByteView(ost.tx_key->sk)),
        to_bytes(ByteView(ost.provision_key->bytes)),
        to_bytes(ByteView(dst.pke.sk)),
        to_bytes(ByteView(dst.sign_key.sk)),
    };
    for (const Bytes& out : outputs) {
        for (const Bytes& secret : secrets) {
            CHECK_FALSE(contains_subsequence(out, secret));
        }
    }
}

TEST_CASE("delegatee init") {
    SECTION("distinct enclaves draw distinct session ids") {
        PairFixture fx;
        fx.delegatee_init();
        hw::EnclaveId d2 = fx.hw.load(DelegateeProgram::kIdentity);
        auto second = delegatee_cmd::InitOutput::parse(fx.hw.run(d2, delegatee_cmd::init_setup()));
        CHECK(second.sid != fx.dinit.sid);
    }

    SECTION("repeat init is rejected") {
        PairFixture fx;
        fx.delegatee_init();
        CHECK(code_of([&] { fx.hw.run(fx.d, delegatee_cmd::init_setup()); }) ==
              ErrorCode::AlreadyInitialized);
    }

    SECTION("published vk_sign verifies the provision signature") {
        PairFixture fx;
        fx.delegatee_init();
        fx.owner_init_quote();
        ProvisionMessage m = fx.provision();
        CHECK(fx.suite.sig->verify(fx.dinit.vk_sign, m.sigma_r, m.signed_payload()));
    }
}

TEST_CASE("provision quote gating") {
    PairFixture fx;
    fx.delegatee_init();
    fx.owner_init_quote();

    SECTION("wrong program measurement is rejected even with a valid signature") {
        // A quote honestly signed by the platform, but over the delegatee
        // program itself.
        hw::EnclaveId d2 = fx.hw.load(DelegateeProgram::kIdentity);
        Quote foreign = fx.hw.run_quote(d2, delegatee_cmd::init_setup());
        REQUIRE(HwEmulator::quote_verify(fx.hw.params(), foreign));
        CHECK(code_of([&] {
                  fx.hw.run(fx.d, delegatee_cmd::provision(foreign, fx.oinit.pk_o, fx.hw.params()));
              }) == ErrorCode::WrongMeasurement);
    }

    SECTION("right measurement with a broken signature is rejected") {
        Quote bad = fx.quote;
        bad.sigma.bytes[10] ^= 0x08;
        CHECK(code_of([&] {
                  fx.hw.run(fx.d, delegatee_cmd::provision(bad, fx.oinit.pk_o, fx.hw.params()));
              }) == ErrorCode::BadQuote);
    }

    SECTION("bit-flipped quote signatures never pass") {
        for (size_t bit = 0; bit < 64; ++bit) {
            Quote bad = fx.quote;
            bad.sigma.bytes[bit] ^= 0x01;
            CHECK(code_of([&] {
                      fx.hw.run(fx.d,
                                delegatee_cmd::provision(bad, fx.oinit.pk_o, fx.hw.params()));
                  }) == ErrorCode::BadQuote);
        }
    }

    SECTION("quote for another session is rejected") {
        // An owner enclave initialized against a different delegatee.
        PairFixture other(4242);
        other.delegatee_init();
        other.owner_init_quote();
        // Same platform params are required for the signature to verify, so
        // re-issue the foreign session's quote on this fixture's platform.
        hw::EnclaveId o2 = fx.hw.load(OwnerProgram::kIdentity);
        Quote q2 = fx.hw.run_quote(o2, owner_cmd::init_setup(other.dinit.sid, other.dinit.vk_sign));
        auto o2init = owner_cmd::InitOutput::parse(q2.output);
        CHECK(code_of([&] {
                  fx.hw.run(fx.d, delegatee_cmd::provision(q2, o2init.pk_o, fx.hw.params()));
              }) == ErrorCode::SessionMismatch);
    }

    SECTION("provision keys are fresh across sessions") {
        std::set<std::array<uint8_t, 32>> keys;
        for (int i = 0; i < 200; ++i) {
            PairFixture s(9000 + i);
            s.full_setup();
            keys.insert(s.delegatee_state().provision_key->bytes);
        }
        CHECK(keys.size() == 200);
    }
}

TEST_CASE("complete delegation") {
    PairFixture fx;
    fx.full_setup();
    crypto::Address addr = fx.fund(500);
    crypto::Address recipient = fx.random_recipient();
    Bytes atomic_out = fx.hw.run(fx.o, owner_cmd::delegate_atomic(addr, 200, recipient));
    auto atomic = owner_cmd::AtomicOutput::parse(atomic_out);

    SECTION("returns the owner's exact transaction") {
        Bytes tx_wire = fx.hw.run(fx.d, delegatee_cmd::complete_delegation(atomic.ct_tx));
        Transaction tx = Transaction::parse(tx_wire);
        CHECK(tx.verify_signature(*fx.suite.sig));
        CHECK(tx.metadata.amount == 200);
        CHECK(tx.metadata.recipient == recipient);
    }

    SECTION("mutated ciphertext fails integrity") {
        Bytes wire = atomic.ct_tx.wire();
        for (int i = 0; i < 32; ++i) {
            Bytes bad = wire;
            bad[fx.rng.below(bad.size())] ^= static_cast<uint8_t>(1 + fx.rng.below(255));
            if (bad == wire) continue;
            crypto::SymCiphertext ct = crypto::SymCiphertext::parse(bad);
            CHECK(code_of([&] {
                      fx.hw.run(fx.d, delegatee_cmd::complete_delegation(ct));
                  }) == ErrorCode::IntegrityFailure);
        }
    }

    SECTION("decrypting garbage that is not a transaction") {
        crypto::SymCiphertext ct = fx.suite.se->enc(*fx.delegatee_state().provision_key,
                                                    to_bytes(std::string_view("not a tx")), fx.rng);
        CHECK(code_of([&] { fx.hw.run(fx.d, delegatee_cmd::complete_delegation(ct)); }) ==
              ErrorCode::MalformedTx);
    }
}

TEST_CASE("complete delegation before provision") {
    PairFixture fx;
    fx.delegatee_init();
    crypto::SymCiphertext ct;
    ct.body = fx.rng.bytes(40);
    CHECK(code_of([&] { fx.hw.run(fx.d, delegatee_cmd::complete_delegation(ct)); }) ==
          ErrorCode::NoKey);
}
