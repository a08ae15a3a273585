#include "delegacoin/runtime/protocol.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <fstream>

#include "delegacoin/errors.hpp"

namespace delegacoin::runtime {

using enclave::DelegateeProgram;
using enclave::OwnerProgram;
using enclave::ProvisionMessage;
namespace owner_cmd = enclave::owner_cmd;
namespace delegatee_cmd = enclave::delegatee_cmd;

SealStore::SealStore(std::filesystem::path path, bool durable)
    : path_(std::move(path)), durable_(durable) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
}

void SealStore::append(const SealedRecord& rec) {
    Bytes frame = rec.frame();
    int fd = ::open(path_.c_str(), O_CREAT | O_WRONLY | O_APPEND, 0644);
    if (fd < 0) throw std::runtime_error("cannot open seal store: " + path_.string());
    ssize_t n = ::write(fd, frame.data(), frame.size());
    bool ok = n == static_cast<ssize_t>(frame.size());
    if (ok && durable_) ok = ::fsync(fd) == 0;
    ::close(fd);
    if (!ok) throw std::runtime_error("seal store append failed: " + path_.string());
}

std::vector<SealedRecord> SealStore::read_all() const {
    std::vector<SealedRecord> out;
    std::ifstream in(path_, std::ios::binary);
    if (!in) return out;
    Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    ByteReader r(bytes);
    while (r.remaining() > 0) {
        out.push_back(SealedRecord::read(r));
    }
    return out;
}

std::optional<SealedRecord> SealStore::highest() const {
    std::optional<SealedRecord> best;
    for (SealedRecord& rec : read_all()) {
        if (!best || rec.seq > best->seq) best = std::move(rec);
    }
    return best;
}

uint64_t SealStore::file_bytes() const {
    std::error_code ec;
    auto size = std::filesystem::file_size(path_, ec);
    return ec ? 0 : static_cast<uint64_t>(size);
}

ProtocolEnv::ProtocolEnv(uint64_t seed, EnvOptions opts)
    : opts_(std::move(opts)),
      master_(seed),
      host_rng_(master_.fork("host")),
      boot_rng_(master_.fork("hw-boot")),
      hw_(128, boot_rng_, suite_),
      chain_sim_(std::make_shared<chain::ChainSim>(suite_, opts_.confirmation_depth)),
      chain_(chain_sim_),
      transport_(&transcript_) {
    hw_.register_program([suite = suite_] { return std::make_unique<OwnerProgram>(suite); });
    hw_.register_program([suite = suite_] { return std::make_unique<DelegateeProgram>(suite); });
    transport_.set_fault_plan(opts_.faults);
}

crypto::Address ProtocolEnv::fresh_recipient() {
    return crypto::derive_address(suite_.sig->keygen(host_rng_).vk);
}

DelegateeNode::DelegateeNode(ProtocolEnv& e) : env(e) {
    hdl = env.hw().load(DelegateeProgram::kIdentity);
    identity_wire = env.hw().run(hdl, delegatee_cmd::init_setup());
    identity = delegatee_cmd::InitOutput::parse(identity_wire);
}

OwnerNode::OwnerNode(ProtocolEnv& e, std::filesystem::path seal_path)
    : env(e), store(std::move(seal_path), e.options().durable_seals) {
    hdl = env.hw().load(OwnerProgram::kIdentity);
    receipt_key = env.suite().sig->keygen(env.host_rng());
}

const SessionId& OwnerNode::sid() const {
    if (!peer) throw Error(ErrorCode::UnknownSession, "setup has not run");
    return peer->sid;
}

void OwnerNode::require_alive() const {
    if (!alive) throw Error(ErrorCode::SessionAborted, "owner node crashed");
}

namespace {

using Dir = DuplexTransport::Direction;

Envelope expect_phase(Envelope e, Phase want) {
    if (e.phase != want) {
        throw Error(ErrorCode::SessionAborted,
                    std::string("expected ") + std::string(phase_name(want)) + ", got " +
                        std::string(phase_name(e.phase)));
    }
    return e;
}

void kill_owner(OwnerNode& o) {
    if (o.alive) {
        o.env.hw().destroy(o.hdl);
        o.alive = false;
    }
}

enclave::OwnerFault to_enclave_fault(CrashPoint p) {
    switch (p) {
        case CrashPoint::EnclaveAfterStateUpdate: return enclave::OwnerFault::AfterStateUpdate;
        case CrashPoint::EnclaveAfterTransactionGeneration:
            return enclave::OwnerFault::AfterTransactionGeneration;
        case CrashPoint::EnclaveAfterEncryption: return enclave::OwnerFault::AfterEncryption;
        case CrashPoint::EnclaveAfterSealBuild: return enclave::OwnerFault::AfterSealBuild;
        default: return enclave::OwnerFault::None;
    }
}

}  // namespace

void delegatee_announce(DelegateeNode& d) {
    d.env.transport().send(Dir::ToOwner,
                           Envelope{Phase::Setup1, d.identity.sid, d.identity_wire});
}

void owner_setup_from_announcement(OwnerNode& o) {
    o.require_alive();
    Envelope e = expect_phase(o.env.transport().recv_required(Dir::ToOwner), Phase::Setup1);
    auto ident = delegatee_cmd::InitOutput::parse(e.body);
    o.peer = ident;
    hw::Quote quote =
        o.env.hw().run_quote(o.hdl, owner_cmd::init_setup(ident.sid, ident.vk_sign));
    o.env.transport().send(Dir::ToDelegatee, Envelope{Phase::Setup2, ident.sid, quote.wire()});
}

void delegatee_provision_step(DelegateeNode& d) {
    Envelope e = expect_phase(d.env.transport().recv_required(Dir::ToDelegatee), Phase::Setup2);
    hw::Quote quote = hw::Quote::parse(e.body);
    // The node is untrusted plumbing: extract pk_O opportunistically and let
    // the enclave's own checks reject anything that does not hold together.
    crypto::PubKey pk_o{};
    try {
        pk_o = owner_cmd::InitOutput::parse(quote.output).pk_o;
    } catch (const Error&) {
    }
    Bytes provision = d.env.hw().run(d.hdl, delegatee_cmd::provision(quote, pk_o, d.env.pms()));
    d.env.transport().send(Dir::ToOwner, Envelope{Phase::Setup3, d.identity.sid, provision});
}

void owner_complete_step(OwnerNode& o) {
    o.require_alive();
    Envelope e = expect_phase(o.env.transport().recv_required(Dir::ToOwner), Phase::Setup3);
    ProvisionMessage m = ProvisionMessage::parse(e.body);
    o.env.hw().run(o.hdl, owner_cmd::complete_setup(m.sid, m.ct_r, m.sigma_r));
    o.env.transport().send(Dir::ToDelegatee, Envelope{Phase::Setup4, o.sid(), Bytes{}});
}

void delegatee_confirm_step(DelegateeNode& d) {
    Envelope e = expect_phase(d.env.transport().recv_required(Dir::ToDelegatee), Phase::Setup4);
    if (e.session != d.identity.sid) {
        throw Error(ErrorCode::SessionMismatch, "setup acknowledgement for a foreign session");
    }
    d.session_ready = true;
}

void run_setup(OwnerNode& o, DelegateeNode& d) {
    delegatee_announce(d);
    owner_setup_from_announcement(o);
    delegatee_provision_step(d);
    owner_complete_step(o);
    delegatee_confirm_step(d);
}

DepositResult run_deposit(OwnerNode& o, uint64_t amount) {
    o.require_alive();
    std::optional<SealedRecord> rec = o.store.highest();
    Bytes out = o.env.hw().run(o.hdl, owner_cmd::state_retrieval(o.sid(), rec));
    auto retrieval = owner_cmd::RetrievalOutput::parse(out);
    o.balance = retrieval.balance;
    if (retrieval.address_restored) {
        o.addr = rec->addr;
    }

    if (!o.addr) {
        auto generated = owner_cmd::AddressOutput::parse(
            o.env.hw().run(o.hdl, owner_cmd::address_generation()));
        o.addr = generated.addr;
    }

    o.env.chain().deposit(*o.addr, amount);
    o.env.chain().advance_blocks(o.env.chain().confirmation_depth());

    crypto::Signature receipt_sig =
        o.env.suite().sig->sign(o.receipt_key.sk, owner_cmd::receipt_payload(*o.addr, amount));
    Bytes notify = o.env.hw().run(o.hdl, owner_cmd::deposit_notification(*o.addr, amount,
                                                                         o.receipt_key.vk,
                                                                         receipt_sig));
    o.balance = ByteReader(notify).u64le();

    // Seal immediately so a crash cannot forget a confirmed deposit.
    SealedRecord sealed =
        SealedRecord::parse_frame(o.env.hw().run(o.hdl, owner_cmd::state_seal(*o.addr)));
    o.store.append(sealed);
    return DepositResult{*o.addr, o.balance};
}

DelegationResult run_delegation(OwnerNode& o, uint64_t amount, const crypto::Address& recipient,
                                CrashPoint crash) {
    o.require_alive();
    if (!o.addr) throw Error(ErrorCode::NoAddress, "deposit before delegating");
    uint64_t chain_calls_before = o.env.chain().total_calls();

    if (enclave::OwnerFault f = to_enclave_fault(crash); f != enclave::OwnerFault::None) {
        dynamic_cast<OwnerProgram&>(o.env.hw().program_of(o.hdl)).arm_fault(f);
    }

    Bytes out;
    try {
        out = o.env.hw().run(o.hdl, owner_cmd::delegate_atomic(*o.addr, amount, recipient));
    } catch (const SimulatedCrash&) {
        kill_owner(o);
        throw;
    }
    auto atomic = owner_cmd::AtomicOutput::parse(out);

    if (crash == CrashPoint::BeforeDurableWrite) {
        kill_owner(o);
        throw SimulatedCrash("owner before durable seal write");
    }
    o.store.append(atomic.record);
    if (crash == CrashPoint::AfterDurableWrite) {
        kill_owner(o);
        throw SimulatedCrash("owner after durable seal write");
    }

    o.balance -= amount;
    Bytes ct_wire = atomic.ct_tx.wire();
    o.sent_cts[atomic.record.seq] = ct_wire;

    ByteWriter body;
    body.u64le(atomic.record.seq);
    body.field(ct_wire);
    o.env.transport().send(Dir::ToDelegatee, Envelope{Phase::Delegate, o.sid(), body.take()});

    if (o.env.chain().total_calls() != chain_calls_before) {
        throw std::logic_error("delegation phase touched the chain");
    }
    return DelegationResult{atomic.record.seq, std::move(ct_wire)};
}

void resend_delegation(OwnerNode& o, uint64_t seq) {
    o.require_alive();
    auto it = o.sent_cts.find(seq);
    if (it == o.sent_cts.end()) throw Error(ErrorCode::NoPendingTx, "no such delegation");
    ByteWriter body;
    body.u64le(seq);
    body.field(it->second);
    o.env.transport().send(Dir::ToDelegatee, Envelope{Phase::Delegate, o.sid(), body.take()});
}

size_t delegatee_pump(DelegateeNode& d) {
    size_t fresh = 0;
    while (auto e = d.env.transport().recv(Dir::ToDelegatee)) {
        if (e->phase != Phase::Delegate) continue;  // stray duplicates of setup traffic
        ByteReader r(e->body);
        uint64_t seq = r.u64le();
        Bytes ct = to_bytes(r.field());
        r.expect_end();
        if (!d.seen_seqs.insert(seq).second) continue;  // idempotency key (sid, seq)
        d.pending.emplace_back(seq, std::move(ct));
        ++fresh;
    }
    return fresh;
}

SpendResult run_spend_ct(DelegateeNode& d, ByteView ct_wire) {
    Bytes cmd = [&] {
        crypto::SymCiphertext ct = crypto::SymCiphertext::parse(ct_wire);
        return delegatee_cmd::complete_delegation(ct);
    }();
    Bytes tx_wire = d.env.hw().run(d.hdl, cmd);
    Transaction tx = Transaction::parse(tx_wire);

    d.env.transcript().record(Envelope{Phase::Spend, d.identity.sid, tx_wire});
    chain::SubmitResult res = d.env.chain().submit(tx);
    return SpendResult{tx, res};
}

SpendResult run_spend(DelegateeNode& d, uint64_t seq) {
    for (const auto& [s, ct] : d.pending) {
        if (s == seq) return run_spend_ct(d, ct);
    }
    throw Error(ErrorCode::NoPendingTx, "no delivered delegation with that seq");
}

std::unique_ptr<OwnerNode> recover_owner(ProtocolEnv& env, std::filesystem::path seal_path,
                                         DelegateeNode& d) {
    delegatee_pump(d);  // drain in-flight delegations before re-handshaking
    auto node = std::make_unique<OwnerNode>(env, std::move(seal_path));
    run_setup(*node, d);

    std::optional<SealedRecord> rec = node->store.highest();
    Bytes out = env.hw().run(node->hdl, owner_cmd::state_retrieval(node->sid(), rec));
    auto retrieval = owner_cmd::RetrievalOutput::parse(out);
    node->balance = retrieval.balance;
    if (retrieval.address_restored) node->addr = rec->addr;
    return node;
}

}  // namespace delegacoin::runtime
