#include "delegacoin/harness/oracles.hpp"

#include "delegacoin/errors.hpp"

namespace delegacoin::harness {

namespace owner_cmd = enclave::owner_cmd;
namespace delegatee_cmd = enclave::delegatee_cmd;

OwnerOracle::OwnerOracle(hw::HwEmulator& hw, RandomSource& rng) : hw_(hw) {
    rng.fill(oracle_sid_);
    crypto::PubKey placeholder_vk = crypto::default_suite().sig->keygen(rng).vk;
    signing_enclave_ = hw_.load(enclave::OwnerProgram::kIdentity);
    hw_.run(signing_enclave_, owner_cmd::init_setup(oracle_sid_, placeholder_vk));
    hw_.run(signing_enclave_, owner_cmd::address_generation());
}

crypto::Signature OwnerOracle::signature_creation(ByteView addr_bytes) {
    Bytes key = to_bytes(addr_bytes);
    if (auto it = sets_.r1.find(key); it != sets_.r1.end()) return it->second;

    ++backend_calls_;
    Bytes out = hw_.run(signing_enclave_, owner_cmd::oracle_sign(addr_bytes));
    ByteReader r(out);
    crypto::Signature sig;
    sig.bytes = to_array<crypto::kSignatureLen>(r.field());
    r.expect_end();
    sets_.r1.emplace(std::move(key), sig);
    return sig;
}

const hw::Quote& OwnerOracle::quote_generation(const crypto::PubKey& vk_sign) {
    Bytes key = to_bytes(ByteView(vk_sign));
    if (auto it = sets_.r2.find(key); it != sets_.r2.end()) return it->second;

    ++backend_calls_;
    hw::EnclaveId fresh = hw_.load(enclave::OwnerProgram::kIdentity);
    hw::Quote quote = hw_.run_quote(fresh, owner_cmd::init_setup(oracle_sid_, vk_sign));
    return sets_.r2.emplace(std::move(key), std::move(quote)).first->second;
}

DelegateeOracle::DelegateeOracle(hw::HwEmulator& hw, RandomSource&) : hw_(hw) {
    enclave_ = hw_.load(enclave::DelegateeProgram::kIdentity);
    identity_ = delegatee_cmd::InitOutput::parse(hw_.run(enclave_, delegatee_cmd::init_setup()));
}

const Bytes& DelegateeOracle::key_provision(const hw::Quote& quote) {
    Bytes key = quote.wire();
    if (auto it = sets_.c.find(key); it != sets_.c.end()) return it->second;

    crypto::PubKey pk_o{};
    try {
        pk_o = owner_cmd::InitOutput::parse(quote.output).pk_o;
    } catch (const Error&) {
        // Leave zeroed; the enclave rejects the quote on its own terms.
    }
    ++backend_calls_;
    Bytes out = hw_.run(enclave_, delegatee_cmd::provision(quote, pk_o, hw_.params()));
    return sets_.c.emplace(std::move(key), std::move(out)).first->second;
}

}  // namespace delegacoin::harness
