#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "delegacoin/crypto/suite.hpp"
#include "delegacoin/rng.hpp"

namespace delegacoin::hw {

using EnclaveId = uint64_t;
using Measurement = crypto::Digest32;

// Public parameters published at setup; the attestation signing key stays
// inside the emulator.
struct HwParams {
    crypto::PubKey vk_quote{};
    std::string suite_id;
    uint32_t lambda = 0;

    Bytes wire() const;
    static HwParams parse(ByteView in);
    bool operator==(const HwParams&) const = default;
};

// Attestation evidence binding an enclave identity to one execution.
// Wire form: id(8) || tag_P(32) || len(in) || in || len(out) || out || sigma(64).
struct Quote {
    EnclaveId hdl = 0;
    Measurement tag_p{};
    Bytes input;
    Bytes output;
    crypto::Signature sigma{};

    Bytes signed_payload() const;
    Bytes wire() const;
    static Quote parse(ByteView in);
    bool operator==(const Quote&) const = default;
};

// Facilities the emulator exposes to a running program: its DRBG, its
// measurement, and an identity-derived sealing key (same program identity on
// the same platform derives the same key, so re-initiated enclaves can read
// their own sealed state).
class EnclaveContext {
public:
    virtual ~EnclaveContext() = default;
    virtual RandomSource& rng() = 0;
    virtual crypto::SymKey seal_key() = 0;
    virtual const Measurement& measurement() const = 0;
};

class EnclaveProgram {
public:
    virtual ~EnclaveProgram() = default;
    virtual std::string_view identity() const = 0;
    virtual Bytes handle(EnclaveContext& ctx, ByteView input) = 0;
    virtual std::unique_ptr<EnclaveProgram> clone() const = 0;
};

inline Measurement measure_program_identity(std::string_view identity) {
    return crypto::sha256(to_bytes(identity));
}

struct EnclaveSnapshot {
    EnclaveId id = 0;
    Measurement tag_p{};
    Drbg::State drbg;
    std::unique_ptr<EnclaveProgram> program;
};

using ProgramFactory = std::function<std::unique_ptr<EnclaveProgram>()>;

class HwEmulator {
public:
    // hw setup: lambda must be 128 (throws UnsupportedParam otherwise).
    HwEmulator(uint32_t lambda, RandomSource& boot_rng,
               crypto::Suite suite = crypto::default_suite());

    const HwParams& params() const { return params_; }

    void register_program(ProgramFactory factory);
    bool has_program(std::string_view identity) const;
    Measurement measurement_of(std::string_view identity) const;

    EnclaveId load(std::string_view program_identity);
    Bytes run(EnclaveId hdl, ByteView input);
    Quote run_quote(EnclaveId hdl, ByteView input);
    void destroy(EnclaveId hdl);

    // Never throws: any malformed or mismatched quote verifies to false.
    static bool quote_verify(const HwParams& params, const Quote& quote);
    static bool quote_verify_wire(const HwParams& params, ByteView quote_wire);

    // Snapshot/restore of a live enclave, for replay determinism checks and
    // crash simulation. restore() reinstates the snapshot under its original
    // handle, replacing any live enclave with that id.
    EnclaveSnapshot snapshot(EnclaveId hdl) const;
    void restore(const EnclaveSnapshot& snap);

    // Direct program access for the harness (fault arming, state inspection).
    EnclaveProgram& program_of(EnclaveId hdl);

    // Planted-leak hook for the attestation-unforgeability sensitivity game.
    const crypto::SecretScalar& attestation_key_for_harness() const { return sk_quote_; }

private:
    struct Enclave {
        EnclaveId id;
        Measurement tag_p;
        Drbg drbg;
        std::unique_ptr<EnclaveProgram> program;
        std::mutex lock;

        Enclave(EnclaveId i, Measurement t, Drbg d, std::unique_ptr<EnclaveProgram> p)
            : id(i), tag_p(t), drbg(std::move(d)), program(std::move(p)) {}
    };

    std::shared_ptr<Enclave> find(EnclaveId hdl) const;

    crypto::Suite suite_;
    HwParams params_;
    crypto::SecretScalar sk_quote_{};
    std::array<uint8_t, 32> seal_master_{};
    Drbg boot_drbg_;

    mutable std::mutex registry_lock_;
    std::map<std::string, ProgramFactory, std::less<>> programs_;
    std::map<EnclaveId, std::shared_ptr<Enclave>> enclaves_;
    EnclaveId next_id_ = 1;
};

}  // namespace delegacoin::hw
