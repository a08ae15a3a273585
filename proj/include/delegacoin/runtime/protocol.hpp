#pragma once

#include <filesystem>
#include <set>

#include "delegacoin/chain/sim.hpp"
#include "delegacoin/enclave/delegatee.hpp"
#include "delegacoin/enclave/owner.hpp"
#include "delegacoin/runtime/transport.hpp"

namespace delegacoin::runtime {

// Append-only file of sealed-record frames. Appends are flushed (and fsynced
// when durable) before returning; the protocol releases ct_tx only after the
// covering record is durably on disk.
class SealStore {
public:
    explicit SealStore(std::filesystem::path path, bool durable = true);

    void append(const SealedRecord& rec);
    std::vector<SealedRecord> read_all() const;
    std::optional<SealedRecord> highest() const;
    uint64_t file_bytes() const;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    bool durable_;
};

struct EnvOptions {
    uint32_t confirmation_depth = 6;
    bool durable_seals = true;
    FaultPlan faults;
};

// Shared wiring for one simulation run: the emulated platform, the simulated
// chain behind an instrumented handle, the duplex transport, and the
// transcript. Everything is derived from one seed.
class ProtocolEnv {
public:
    explicit ProtocolEnv(uint64_t seed, EnvOptions opts = {});

    hw::HwEmulator& hw() { return hw_; }
    const hw::HwParams& pms() const { return hw_.params(); }
    chain::InstrumentedChain& chain() { return chain_; }
    chain::ChainSim& chain_state() { return *chain_sim_; }
    DuplexTransport& transport() { return transport_; }
    TranscriptLog& transcript() { return transcript_; }
    Drbg& host_rng() { return host_rng_; }
    crypto::Suite suite() const { return suite_; }
    const EnvOptions& options() const { return opts_; }

    crypto::Address fresh_recipient();

private:
    crypto::Suite suite_ = crypto::default_suite();
    EnvOptions opts_;
    Drbg master_;
    Drbg host_rng_;
    Drbg boot_rng_;
    hw::HwEmulator hw_;
    std::shared_ptr<chain::ChainSim> chain_sim_;
    chain::InstrumentedChain chain_;
    TranscriptLog transcript_;
    DuplexTransport transport_;
};

struct DelegateeNode {
    explicit DelegateeNode(ProtocolEnv& env);

    ProtocolEnv& env;
    hw::EnclaveId hdl = 0;
    Bytes identity_wire;  // init_setup output as announced
    enclave::delegatee_cmd::InitOutput identity;
    std::vector<std::pair<uint64_t, Bytes>> pending;  // (seq, ct_tx wire), arrival order
    std::set<uint64_t> seen_seqs;
    bool session_ready = false;
};

struct OwnerNode {
    OwnerNode(ProtocolEnv& env, std::filesystem::path seal_path);

    ProtocolEnv& env;
    hw::EnclaveId hdl = 0;
    SealStore store;
    crypto::SigKeypair receipt_key;  // signs deposit receipts toward the enclave
    std::optional<enclave::delegatee_cmd::InitOutput> peer;
    std::optional<crypto::Address> addr;
    uint64_t balance = 0;  // node-side mirror of the enclave balance
    std::map<uint64_t, Bytes> sent_cts;  // idempotent resend by seal seq
    bool alive = true;

    const SessionId& sid() const;
    void require_alive() const;
};

// Four-message session establishment, decomposed so adversarial tests and
// threaded runs can interpose between steps.
void delegatee_announce(DelegateeNode& d);
void owner_setup_from_announcement(OwnerNode& o);
void delegatee_provision_step(DelegateeNode& d);
void owner_complete_step(OwnerNode& o);
void delegatee_confirm_step(DelegateeNode& d);
void run_setup(OwnerNode& o, DelegateeNode& d);

struct DepositResult {
    crypto::Address addr;
    uint64_t enclave_balance = 0;
};
DepositResult run_deposit(OwnerNode& o, uint64_t amount);

enum class CrashPoint : uint8_t {
    None,
    EnclaveAfterStateUpdate,
    EnclaveAfterTransactionGeneration,
    EnclaveAfterEncryption,
    EnclaveAfterSealBuild,
    BeforeDurableWrite,
    AfterDurableWrite,
};

struct DelegationResult {
    uint64_t seq = 0;
    Bytes ct_wire;
};
// Owner-side delegation: atomic enclave step, durable seal, then send. Makes
// zero chain calls (asserted via the instrumented handle). On a simulated
// crash the enclave is destroyed and SimulatedCrash propagates.
DelegationResult run_delegation(OwnerNode& o, uint64_t amount, const crypto::Address& recipient,
                                CrashPoint crash = CrashPoint::None);
void resend_delegation(OwnerNode& o, uint64_t seq);

// Drains the delegatee's inbox into pending, deduplicating by seq.
size_t delegatee_pump(DelegateeNode& d);

struct SpendResult {
    Transaction tx;
    chain::SubmitResult submit;
};
SpendResult run_spend(DelegateeNode& d, uint64_t seq);
SpendResult run_spend_ct(DelegateeNode& d, ByteView ct_wire);

// Loads a fresh owner enclave, re-establishes the session with the surviving
// delegatee, and replays the highest durable sealed record.
std::unique_ptr<OwnerNode> recover_owner(ProtocolEnv& env, std::filesystem::path seal_path,
                                         DelegateeNode& d);

}  // namespace delegacoin::runtime
