#pragma once

#include <map>

#include "delegacoin/enclave/delegatee.hpp"
#include "delegacoin/enclave/owner.hpp"

namespace delegacoin::harness {

// Memoization sets backing the honest-party oracles; they only ever grow.
struct OracleSets {
    std::map<Bytes, crypto::Signature> r1;  // addr bytes -> sigma_tx
    std::map<Bytes, hw::Quote> r2;          // vk_sign -> quote
    std::map<Bytes, Bytes> c;               // quote wire -> provision message wire
};

// Honest owner oracle: adversaries reach the owner enclave only through these
// two instructions. Responses are memoized exactly (a repeated input returns
// the stored value without touching the enclave again).
class OwnerOracle {
public:
    OwnerOracle(hw::HwEmulator& hw, RandomSource& rng);

    // (signature creation; addr)
    crypto::Signature signature_creation(ByteView addr_bytes);
    // (quote generation; vk_sign) — each new identity gets a fresh enclave's
    // setup quote, since init runs once per enclave.
    const hw::Quote& quote_generation(const crypto::PubKey& vk_sign);

    const OracleSets& sets() const { return sets_; }
    uint64_t backend_calls() const { return backend_calls_; }

private:
    hw::HwEmulator& hw_;
    enclave::SessionId oracle_sid_{};
    hw::EnclaveId signing_enclave_ = 0;
    OracleSets sets_;
    uint64_t backend_calls_ = 0;
};

// Honest delegatee oracle for (key provision; quote).
class DelegateeOracle {
public:
    DelegateeOracle(hw::HwEmulator& hw, RandomSource& rng);

    const Bytes& key_provision(const hw::Quote& quote);  // provision errors propagate

    const enclave::delegatee_cmd::InitOutput& identity() const { return identity_; }
    const OracleSets& sets() const { return sets_; }
    uint64_t backend_calls() const { return backend_calls_; }

private:
    hw::HwEmulator& hw_;
    hw::EnclaveId enclave_ = 0;
    enclave::delegatee_cmd::InitOutput identity_;
    OracleSets sets_;
    uint64_t backend_calls_ = 0;
};

}  // namespace delegacoin::harness
