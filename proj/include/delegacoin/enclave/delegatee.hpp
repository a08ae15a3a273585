#pragma once

#include <optional>

#include "delegacoin/enclave/owner.hpp"
#include "delegacoin/hw/emulator.hpp"
#include "delegacoin/transaction.hpp"

namespace delegacoin::enclave {

// Signed key-provision response: (sid, ct_r, sigma_r) with sigma_r covering
// sid || ct_r.
struct ProvisionMessage {
    SessionId sid{};
    crypto::PkeCiphertext ct_r;
    crypto::Signature sigma_r{};

    Bytes signed_payload() const;
    Bytes wire() const;
    static ProvisionMessage parse(ByteView in);
};

struct DelegateeState {
    bool initialized = false;
    SessionId sid{};
    crypto::PkeKeypair pke;        // (pk_D, sk_D)
    crypto::SigKeypair sign_key;   // (vk_sign, sk_sign), never exported
    std::optional<crypto::SymKey> provision_key;  // r, generated once per session
};

// The delegatee-side enclave program: session creation, quote-gated key
// provision, and delegated-transaction decryption.
class DelegateeProgram final : public hw::EnclaveProgram {
public:
    static constexpr std::string_view kIdentity = "delegacoin.delegatee/v1";

    enum class Op : uint8_t {
        InitSetup = 0x01,
        Provision = 0x02,
        CompleteDelegation = 0x03,
    };

    // expected_owner_tag pins the owner program measurement at build time.
    explicit DelegateeProgram(crypto::Suite suite = crypto::default_suite(),
                              hw::Measurement expected_owner_tag =
                                  hw::measure_program_identity(OwnerProgram::kIdentity))
        : suite_(suite), expected_owner_tag_(expected_owner_tag) {}

    std::string_view identity() const override { return kIdentity; }
    Bytes handle(hw::EnclaveContext& ctx, ByteView input) override;
    std::unique_ptr<hw::EnclaveProgram> clone() const override {
        return std::make_unique<DelegateeProgram>(*this);
    }

    const DelegateeState& state() const { return st_; }

private:
    Bytes init_setup(hw::EnclaveContext& ctx, ByteReader& r);
    Bytes provision(hw::EnclaveContext& ctx, ByteReader& r);
    Bytes complete_delegation(ByteReader& r);

    crypto::Suite suite_;
    hw::Measurement expected_owner_tag_;
    DelegateeState st_;
};

namespace delegatee_cmd {

struct InitOutput {
    SessionId sid{};
    crypto::PubKey pk_d{};
    crypto::PubKey vk_sign{};
    static InitOutput parse(ByteView in);
};

Bytes init_setup();
Bytes provision(const hw::Quote& quote, const crypto::PubKey& pk_o, const hw::HwParams& pms);
Bytes complete_delegation(const crypto::SymCiphertext& ct_tx);

}  // namespace delegatee_cmd

}  // namespace delegacoin::enclave
