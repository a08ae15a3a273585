#include "delegacoin/enclave/owner.hpp"

#include <utility>

#include "delegacoin/errors.hpp"

namespace delegacoin::enclave {

namespace {

crypto::Address read_address(ByteReader& r) {
    return crypto::Address::from_raw(r.field());
}

// Sealed payload layout (authenticated under key_seal):
// balance(8) || seq(8) || has_tx_key(1) || [sk_tx(32) || pk_tx(33)] || addr(25).
// seq and addr also appear plaintext in the frame; the sealed copies are the
// authoritative ones and retrieval cross-checks them.
Bytes sealed_payload(const OwnerState& st, uint64_t seq) {
    ByteWriter w;
    w.u64le(st.balance);
    w.u64le(seq);
    if (st.tx_key) {
        w.u8(1);
        w.raw(st.tx_key->sk);
        w.raw(st.tx_key->vk);
    } else {
        w.u8(0);
    }
    if (st.addr) {
        w.raw(st.addr->raw());
    }
    return w.take();
}

}  // namespace

Bytes OwnerProgram::handle(hw::EnclaveContext& ctx, ByteView input) {
    ByteReader r(input);
    auto op = static_cast<Op>(r.u8());
    switch (op) {
        case Op::InitSetup: return init_setup(ctx, r);
        case Op::CompleteSetup: return complete_setup(r);
        case Op::StateRetrieval: return state_retrieval(r);
        case Op::AddressGeneration: return address_generation(ctx);
        case Op::StateUpdate: return state_update(r);
        case Op::TransactionGeneration: return transaction_generation(ctx, r);
        case Op::StartDelegation: return start_delegation(ctx, r);
        case Op::StateSeal: return state_seal(ctx, r);
        case Op::DelegateAtomic: return delegate_atomic(ctx, r);
        case Op::DepositNotification: return deposit_notification(r);
        case Op::OracleSign: return oracle_sign(r);
    }
    throw Error(ErrorCode::MalformedMessage, "unknown owner opcode");
}

Bytes OwnerProgram::init_setup(hw::EnclaveContext& ctx, ByteReader& r) {
    if (st_.initialized) throw Error(ErrorCode::AlreadyInitialized, "owner enclave");
    SessionId sid = to_array<16>(r.field());
    crypto::PubKey vk = to_array<crypto::kPubKeyLen>(r.field());
    r.expect_end();

    st_.pke = suite_.pke->keygen(ctx.rng());
    st_.key_seal = ctx.seal_key();
    st_.sid = sid;
    st_.vk_sign = vk;
    st_.initialized = true;

    owner_cmd::InitOutput out{st_.pke.pk, st_.sid, st_.vk_sign};
    return out.wire();
}

Bytes OwnerProgram::complete_setup(ByteReader& r) {
    SessionId sid = to_array<16>(r.field());
    crypto::PkeCiphertext ct_r = crypto::PkeCiphertext::parse(r.field());
    crypto::Signature sigma;
    sigma.bytes = to_array<crypto::kSignatureLen>(r.field());
    r.expect_end();

    if (!st_.initialized || sid != st_.sid) {
        throw Error(ErrorCode::UnknownSession, "no entry for sid");
    }
    ByteWriter signed_msg;
    signed_msg.raw(sid);
    signed_msg.raw(ct_r.wire());
    if (!suite_.sig->verify(st_.vk_sign, sigma, signed_msg.peek())) {
        throw Error(ErrorCode::BadSignature, "provision message signature");
    }
    Bytes key = suite_.pke->dec(st_.pke.sk, ct_r);
    if (key.size() != crypto::kSymKeyLen) {
        throw Error(ErrorCode::DecryptFailure, "provision key has wrong length");
    }
    crypto::SymKey provision;
    std::copy(key.begin(), key.end(), provision.bytes.begin());
    st_.provision_key = provision;
    return {};
}

Bytes OwnerProgram::state_retrieval(ByteReader& r) {
    SessionId sid = to_array<16>(r.field());
    bool has_record = r.u8() == 1;
    std::optional<SealedRecord> record;
    if (has_record) record = SealedRecord::parse_frame(r.field());
    r.expect_end();

    if (!st_.initialized || sid != st_.sid) {
        throw Error(ErrorCode::UnknownSession, "no entry for sid");
    }

    bool restored_addr = false;
    if (record) {
        Bytes plain = suite_.se->dec(st_.key_seal, record->c_update);
        ByteReader pr(plain);
        uint64_t balance = pr.u64le();
        uint64_t sealed_seq = pr.u64le();
        if (sealed_seq != record->seq) {
            throw Error(ErrorCode::IntegrityFailure, "sealed record sequence mismatch");
        }
        if (pr.u8() == 1) {
            crypto::SigKeypair key;
            key.sk = to_array<crypto::kSigSecretLen>(pr.raw(crypto::kSigSecretLen));
            key.vk = to_array<crypto::kPubKeyLen>(pr.raw(crypto::kPubKeyLen));
            st_.tx_key = key;
        }
        if (pr.remaining() > 0) {
            crypto::Address addr = crypto::Address::from_raw(pr.raw(crypto::kAddressRawLen));
            // The frame address is plaintext; the sealed copy is the
            // authenticated one and must agree.
            if (addr != record->addr) {
                throw Error(ErrorCode::IntegrityFailure, "sealed record address mismatch");
            }
            st_.addr = addr;
            restored_addr = true;
        }
        pr.expect_end();
        st_.balance = balance;
        st_.seal_seq = record->seq;
    } else {
        st_.balance = 0;
    }

    ByteWriter w;
    w.u64le(st_.balance);
    w.u8(restored_addr ? 1 : 0);
    return w.take();
}

Bytes OwnerProgram::address_generation(hw::EnclaveContext& ctx) {
    if (!st_.initialized) throw Error(ErrorCode::UnknownSession, "not initialized");
    if (st_.addr) throw Error(ErrorCode::AlreadyGenerated, "one deposit address per enclave");
    crypto::SigKeypair key = suite_.sig->keygen(ctx.rng());
    st_.tx_key = key;
    st_.addr = crypto::derive_address(key.vk);

    ByteWriter w;
    w.field(key.vk);
    w.field(st_.addr->raw());
    return w.take();
}

uint64_t OwnerProgram::do_state_update(OwnerState& st, const crypto::Address& addr,
                                       uint64_t amount) const {
    if (!st.addr || addr != *st.addr) throw Error(ErrorCode::NoAddress, "unknown deposit address");
    if (amount == 0) throw Error(ErrorCode::ZeroAmount, "zero-value delegation");
    if (amount > st.balance) {
        throw Error(ErrorCode::InsufficientBalance, "balance below delegation amount");
    }
    st.balance -= amount;
    st.pending_amount = amount;
    st.pending_seal = true;
    return st.balance;
}

Bytes OwnerProgram::state_update(ByteReader& r) {
    crypto::Address addr = read_address(r);
    uint64_t amount = r.u64le();
    r.expect_end();
    uint64_t updated = do_state_update(st_, addr, amount);
    ByteWriter w;
    w.u64le(updated);
    return w.take();
}

Transaction OwnerProgram::do_transaction_generation(OwnerState& st, RandomSource& rng,
                                                    const crypto::Address& addr, uint64_t amount,
                                                    const crypto::Address& recipient) const {
    if (!st.tx_key || !st.addr) throw Error(ErrorCode::NoAddress, "no transaction key");
    if (addr != *st.addr) throw Error(ErrorCode::NoAddress, "unknown deposit address");
    if (!st.pending_amount || *st.pending_amount != amount) {
        throw Error(ErrorCode::NoPendingUpdate, "state update must precede generation");
    }
    Transaction tx;
    tx.addr = *st.addr;
    tx.pk_tx = st.tx_key->vk;
    tx.metadata.recipient = recipient;
    tx.metadata.amount = amount;
    rng.fill(tx.metadata.nonce);
    tx.sigma = suite_.sig->sign(st.tx_key->sk, tx.signed_payload());
    st.pending_tx = tx;
    return tx;
}

Bytes OwnerProgram::transaction_generation(hw::EnclaveContext& ctx, ByteReader& r) {
    crypto::Address addr = read_address(r);
    uint64_t amount = r.u64le();
    crypto::Address recipient = read_address(r);
    r.expect_end();
    return do_transaction_generation(st_, ctx.rng(), addr, amount, recipient).wire();
}

crypto::SymCiphertext OwnerProgram::do_start_delegation(OwnerState& st, RandomSource& rng) const {
    if (!st.provision_key) throw Error(ErrorCode::NoProvisionKey, "setup not completed");
    if (!st.pending_tx) throw Error(ErrorCode::NoPendingTx, "no generated transaction");
    return suite_.se->enc(*st.provision_key, st.pending_tx->wire(), rng);
}

Bytes OwnerProgram::start_delegation(hw::EnclaveContext& ctx, ByteReader& r) {
    crypto::Address addr = read_address(r);
    r.expect_end();
    if (st_.addr && addr != *st_.addr) throw Error(ErrorCode::NoAddress, "unknown deposit address");
    return do_start_delegation(st_, ctx.rng()).wire();
}

SealedRecord OwnerProgram::do_state_seal(OwnerState& st, RandomSource& rng) const {
    if (!st.addr) throw Error(ErrorCode::NoAddress, "nothing to seal yet");
    SealedRecord rec;
    rec.addr = *st.addr;
    rec.seq = st.seal_seq + 1;
    rec.c_update = suite_.se->enc(st.key_seal, sealed_payload(st, rec.seq), rng);
    st.seal_seq = rec.seq;
    st.pending_seal = false;
    st.pending_amount.reset();
    st.pending_tx.reset();
    return rec;
}

Bytes OwnerProgram::state_seal(hw::EnclaveContext& ctx, ByteReader& r) {
    crypto::Address addr = read_address(r);
    r.expect_end();
    if (st_.addr && addr != *st_.addr) throw Error(ErrorCode::NoAddress, "unknown deposit address");
    return do_state_seal(st_, ctx.rng()).frame();
}

Bytes OwnerProgram::delegate_atomic(hw::EnclaveContext& ctx, ByteReader& r) {
    crypto::Address addr = read_address(r);
    uint64_t amount = r.u64le();
    crypto::Address recipient = read_address(r);
    r.expect_end();

    // Stage every step on a copy; commit only if all of them finish. A crash
    // (armed fault) between steps therefore leaves the live state untouched.
    // The arm covers exactly this attempt: it is consumed up front so an
    // attempt that fails before the fault point cannot leave it dangling.
    OwnerFault armed = std::exchange(fault_, OwnerFault::None);
    auto crash_at = [&](OwnerFault point) {
        if (armed == point) throw SimulatedCrash("owner delegate_atomic");
    };

    OwnerState staged = st_;
    do_state_update(staged, addr, amount);
    crash_at(OwnerFault::AfterStateUpdate);
    do_transaction_generation(staged, ctx.rng(), addr, amount, recipient);
    crash_at(OwnerFault::AfterTransactionGeneration);
    crypto::SymCiphertext ct_tx = do_start_delegation(staged, ctx.rng());
    crash_at(OwnerFault::AfterEncryption);
    SealedRecord record = do_state_seal(staged, ctx.rng());
    crash_at(OwnerFault::AfterSealBuild);
    st_ = staged;

    ByteWriter w;
    w.field(ct_tx.wire());
    w.field(record.frame());
    return w.take();
}

Bytes OwnerProgram::deposit_notification(ByteReader& r) {
    crypto::Address addr = read_address(r);
    uint64_t amount = r.u64le();
    crypto::PubKey vk = to_array<crypto::kPubKeyLen>(r.field());
    crypto::Signature sig;
    sig.bytes = to_array<crypto::kSignatureLen>(r.field());
    r.expect_end();

    if (!st_.addr || addr != *st_.addr) throw Error(ErrorCode::NoAddress, "unknown deposit address");
    if (amount == 0) throw Error(ErrorCode::ZeroAmount, "zero deposit");
    if (st_.receipt_vk && *st_.receipt_vk != vk) {
        throw Error(ErrorCode::BadReceipt, "receipt authority changed");
    }
    if (!suite_.sig->verify(vk, sig, owner_cmd::receipt_payload(addr, amount))) {
        throw Error(ErrorCode::BadReceipt, "receipt signature invalid");
    }
    if (UINT64_MAX - st_.balance < amount) {
        throw Error(ErrorCode::BadReceipt, "deposit overflows balance");
    }
    st_.receipt_vk = vk;
    st_.balance += amount;

    ByteWriter w;
    w.u64le(st_.balance);
    return w.take();
}

Bytes OwnerProgram::oracle_sign(ByteReader& r) {
    Bytes addr_bytes = to_bytes(r.field());
    r.expect_end();
    if (!st_.tx_key) throw Error(ErrorCode::NoAddress, "no transaction key");
    ByteWriter msg;
    msg.field(addr_bytes);
    msg.u64le(st_.pending_amount.value_or(0));
    crypto::Signature sig = suite_.sig->sign(st_.tx_key->sk, msg.peek());
    ByteWriter w;
    w.field(sig.bytes);
    return w.take();
}

namespace owner_cmd {

Bytes InitOutput::wire() const {
    ByteWriter w;
    w.field(pk_o);
    w.field(sid);
    w.field(vk_sign);
    return w.take();
}

InitOutput InitOutput::parse(ByteView in) {
    ByteReader r(in);
    InitOutput out;
    out.pk_o = to_array<crypto::kPubKeyLen>(r.field());
    out.sid = to_array<16>(r.field());
    out.vk_sign = to_array<crypto::kPubKeyLen>(r.field());
    r.expect_end();
    return out;
}

AddressOutput AddressOutput::parse(ByteView in) {
    ByteReader r(in);
    AddressOutput out;
    out.pk_tx = to_array<crypto::kPubKeyLen>(r.field());
    out.addr = crypto::Address::from_raw(r.field());
    r.expect_end();
    return out;
}

RetrievalOutput RetrievalOutput::parse(ByteView in) {
    ByteReader r(in);
    RetrievalOutput out;
    out.balance = r.u64le();
    out.address_restored = r.u8() == 1;
    r.expect_end();
    return out;
}

AtomicOutput AtomicOutput::parse(ByteView in) {
    ByteReader r(in);
    AtomicOutput out;
    out.ct_tx = crypto::SymCiphertext::parse(r.field());
    out.record = SealedRecord::parse_frame(r.field());
    r.expect_end();
    return out;
}

Bytes init_setup(const SessionId& sid, const crypto::PubKey& vk_sign) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(OwnerProgram::Op::InitSetup));
    w.field(sid);
    w.field(vk_sign);
    return w.take();
}

Bytes complete_setup(const SessionId& sid, const crypto::PkeCiphertext& ct_r,
                     const crypto::Signature& sigma_r) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(OwnerProgram::Op::CompleteSetup));
    w.field(sid);
    w.field(ct_r.wire());
    w.field(sigma_r.bytes);
    return w.take();
}

Bytes state_retrieval(const SessionId& sid, const std::optional<SealedRecord>& record) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(OwnerProgram::Op::StateRetrieval));
    w.field(sid);
    w.u8(record ? 1 : 0);
    if (record) w.field(record->frame());
    return w.take();
}

Bytes address_generation() {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(OwnerProgram::Op::AddressGeneration));
    return w.take();
}

Bytes state_update(const crypto::Address& addr, uint64_t amount) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(OwnerProgram::Op::StateUpdate));
    w.field(addr.raw());
    w.u64le(amount);
    return w.take();
}

Bytes transaction_generation(const crypto::Address& addr, uint64_t amount,
                             const crypto::Address& recipient) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(OwnerProgram::Op::TransactionGeneration));
    w.field(addr.raw());
    w.u64le(amount);
    w.field(recipient.raw());
    return w.take();
}

Bytes start_delegation(const crypto::Address& addr) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(OwnerProgram::Op::StartDelegation));
    w.field(addr.raw());
    return w.take();
}

Bytes state_seal(const crypto::Address& addr) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(OwnerProgram::Op::StateSeal));
    w.field(addr.raw());
    return w.take();
}

Bytes delegate_atomic(const crypto::Address& addr, uint64_t amount,
                      const crypto::Address& recipient) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(OwnerProgram::Op::DelegateAtomic));
    w.field(addr.raw());
    w.u64le(amount);
    w.field(recipient.raw());
    return w.take();
}

Bytes deposit_notification(const crypto::Address& addr, uint64_t amount,
                           const crypto::PubKey& receipt_vk,
                           const crypto::Signature& receipt_sig) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(OwnerProgram::Op::DepositNotification));
    w.field(addr.raw());
    w.u64le(amount);
    w.field(receipt_vk);
    w.field(receipt_sig.bytes);
    return w.take();
}

Bytes oracle_sign(ByteView addr_bytes) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(OwnerProgram::Op::OracleSign));
    w.field(addr_bytes);
    return w.take();
}

Bytes receipt_payload(const crypto::Address& addr, uint64_t amount) {
    ByteWriter w;
    w.raw(to_bytes(std::string_view("deposit-receipt.v1")));
    w.raw(addr.raw());
    w.u64le(amount);
    return w.take();
}

}  // namespace owner_cmd

}  // namespace delegacoin::enclave
