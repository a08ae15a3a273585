#pragma once

#include <optional>

#include "delegacoin/hw/emulator.hpp"
#include "delegacoin/transaction.hpp"

namespace delegacoin::enclave {

using SessionId = std::array<uint8_t, 16>;

// Fault points inside the atomic delegation command; armed by the harness to
// model a crash between internal steps. One-shot: firing clears the arm.
enum class OwnerFault : uint8_t {
    None,
    AfterStateUpdate,
    AfterTransactionGeneration,
    AfterEncryption,
    AfterSealBuild,
};

struct OwnerState {
    bool initialized = false;
    crypto::PkeKeypair pke;  // (pk_O, sk_O)
    crypto::SymKey key_seal;
    SessionId sid{};
    crypto::PubKey vk_sign{};  // delegatee identity, fixed at init
    std::optional<crypto::SymKey> provision_key;  // r
    std::optional<crypto::SigKeypair> tx_key;     // (sk_Tx, pk_Tx), never exported
    std::optional<crypto::Address> addr;
    uint64_t balance = 0;  // uBTC
    uint64_t seal_seq = 0;
    bool pending_seal = false;
    std::optional<uint64_t> pending_amount;
    std::optional<Transaction> pending_tx;
    std::optional<crypto::PubKey> receipt_vk;  // pinned deposit authority
};

// The owner-side enclave program: session setup, deposit accounting, and
// atomic delegation under the balance-sufficiency policy.
class OwnerProgram final : public hw::EnclaveProgram {
public:
    static constexpr std::string_view kIdentity = "delegacoin.owner/v1";

    enum class Op : uint8_t {
        InitSetup = 0x01,
        CompleteSetup = 0x02,
        StateRetrieval = 0x03,
        AddressGeneration = 0x04,
        StateUpdate = 0x05,
        TransactionGeneration = 0x06,
        StartDelegation = 0x07,
        StateSeal = 0x08,
        DelegateAtomic = 0x09,
        DepositNotification = 0x0A,
        OracleSign = 0x0B,
    };

    explicit OwnerProgram(crypto::Suite suite = crypto::default_suite()) : suite_(suite) {}

    std::string_view identity() const override { return kIdentity; }
    Bytes handle(hw::EnclaveContext& ctx, ByteView input) override;
    std::unique_ptr<hw::EnclaveProgram> clone() const override {
        return std::make_unique<OwnerProgram>(*this);
    }

    void arm_fault(OwnerFault f) { fault_ = f; }
    const OwnerState& state() const { return st_; }

private:
    Bytes init_setup(hw::EnclaveContext& ctx, ByteReader& r);
    Bytes complete_setup(ByteReader& r);
    Bytes state_retrieval(ByteReader& r);
    Bytes address_generation(hw::EnclaveContext& ctx);
    Bytes state_update(ByteReader& r);
    Bytes transaction_generation(hw::EnclaveContext& ctx, ByteReader& r);
    Bytes start_delegation(hw::EnclaveContext& ctx, ByteReader& r);
    Bytes state_seal(hw::EnclaveContext& ctx, ByteReader& r);
    Bytes delegate_atomic(hw::EnclaveContext& ctx, ByteReader& r);
    Bytes deposit_notification(ByteReader& r);
    Bytes oracle_sign(ByteReader& r);

    // Internal steps shared by the single-step commands and the atomic
    // composition; they mutate the passed state only.
    uint64_t do_state_update(OwnerState& st, const crypto::Address& addr, uint64_t amount) const;
    Transaction do_transaction_generation(OwnerState& st, RandomSource& rng,
                                          const crypto::Address& addr, uint64_t amount,
                                          const crypto::Address& recipient) const;
    crypto::SymCiphertext do_start_delegation(OwnerState& st, RandomSource& rng) const;
    SealedRecord do_state_seal(OwnerState& st, RandomSource& rng) const;

    crypto::Suite suite_;
    OwnerState st_;
    OwnerFault fault_ = OwnerFault::None;
};

// Client-side command builders and output parsers (the host speaks exactly
// this wire format through hw_run / hw_run_quote).
namespace owner_cmd {

struct InitOutput {
    crypto::PubKey pk_o{};
    SessionId sid{};
    crypto::PubKey vk_sign{};

    Bytes wire() const;
    static InitOutput parse(ByteView in);
};

struct AddressOutput {
    crypto::PubKey pk_tx{};
    crypto::Address addr;
    static AddressOutput parse(ByteView in);
};

struct RetrievalOutput {
    uint64_t balance = 0;
    bool address_restored = false;
    static RetrievalOutput parse(ByteView in);
};

struct AtomicOutput {
    crypto::SymCiphertext ct_tx;
    SealedRecord record;
    static AtomicOutput parse(ByteView in);
};

Bytes init_setup(const SessionId& sid, const crypto::PubKey& vk_sign);
Bytes complete_setup(const SessionId& sid, const crypto::PkeCiphertext& ct_r,
                     const crypto::Signature& sigma_r);
Bytes state_retrieval(const SessionId& sid, const std::optional<SealedRecord>& record);
Bytes address_generation();
Bytes state_update(const crypto::Address& addr, uint64_t amount);
Bytes transaction_generation(const crypto::Address& addr, uint64_t amount,
                             const crypto::Address& recipient);
Bytes start_delegation(const crypto::Address& addr);
Bytes state_seal(const crypto::Address& addr);
Bytes delegate_atomic(const crypto::Address& addr, uint64_t amount,
                      const crypto::Address& recipient);
Bytes deposit_notification(const crypto::Address& addr, uint64_t amount,
                           const crypto::PubKey& receipt_vk, const crypto::Signature& receipt_sig);
Bytes oracle_sign(ByteView addr_bytes);

// Payload a deposit receipt signature covers.
Bytes receipt_payload(const crypto::Address& addr, uint64_t amount);

}  // namespace owner_cmd

}  // namespace delegacoin::enclave
