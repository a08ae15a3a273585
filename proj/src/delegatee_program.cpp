#include "delegacoin/enclave/delegatee.hpp"

#include "delegacoin/errors.hpp"

namespace delegacoin::enclave {

Bytes ProvisionMessage::signed_payload() const {
    ByteWriter w;
    w.raw(sid);
    w.raw(ct_r.wire());
    return w.take();
}

Bytes ProvisionMessage::wire() const {
    ByteWriter w;
    w.field(sid);
    w.field(ct_r.wire());
    w.field(sigma_r.bytes);
    return w.take();
}

ProvisionMessage ProvisionMessage::parse(ByteView in) {
    ByteReader r(in);
    ProvisionMessage m;
    m.sid = to_array<16>(r.field());
    m.ct_r = crypto::PkeCiphertext::parse(r.field());
    m.sigma_r.bytes = to_array<crypto::kSignatureLen>(r.field());
    r.expect_end();
    return m;
}

Bytes DelegateeProgram::handle(hw::EnclaveContext& ctx, ByteView input) {
    ByteReader r(input);
    auto op = static_cast<Op>(r.u8());
    switch (op) {
        case Op::InitSetup: return init_setup(ctx, r);
        case Op::Provision: return provision(ctx, r);
        case Op::CompleteDelegation: return complete_delegation(r);
    }
    throw Error(ErrorCode::MalformedMessage, "unknown delegatee opcode");
}

Bytes DelegateeProgram::init_setup(hw::EnclaveContext& ctx, ByteReader& r) {
    r.expect_end();
    if (st_.initialized) throw Error(ErrorCode::AlreadyInitialized, "delegatee enclave");
    ctx.rng().fill(st_.sid);
    st_.pke = suite_.pke->keygen(ctx.rng());
    st_.sign_key = suite_.sig->keygen(ctx.rng());
    st_.initialized = true;

    ByteWriter w;
    w.field(st_.sid);
    w.field(st_.pke.pk);
    w.field(st_.sign_key.vk);
    return w.take();
}

Bytes DelegateeProgram::provision(hw::EnclaveContext& ctx, ByteReader& r) {
    Bytes quote_wire = to_bytes(r.field());
    crypto::PubKey pk_o = to_array<crypto::kPubKeyLen>(r.field());
    hw::HwParams pms = hw::HwParams::parse(r.field());
    r.expect_end();

    if (!st_.initialized) throw Error(ErrorCode::UnknownSession, "not initialized");

    hw::Quote quote = [&] {
        try {
            return hw::Quote::parse(quote_wire);
        } catch (const Error&) {
            throw Error(ErrorCode::BadQuote, "quote does not parse");
        }
    }();

    if (quote.tag_p != expected_owner_tag_) {
        throw Error(ErrorCode::WrongMeasurement, "quote is not from the owner program");
    }
    if (!hw::HwEmulator::quote_verify(pms, quote)) {
        throw Error(ErrorCode::BadQuote, "attestation signature invalid");
    }

    owner_cmd::InitOutput out = [&] {
        try {
            return owner_cmd::InitOutput::parse(quote.output);
        } catch (const Error&) {
            throw Error(ErrorCode::SessionMismatch, "quoted output is not a setup record");
        }
    }();
    if (out.sid != st_.sid || out.pk_o != pk_o || out.vk_sign != st_.sign_key.vk) {
        throw Error(ErrorCode::SessionMismatch, "quoted setup does not match this session");
    }

    // r is generated exactly once per session; a later valid quote for the
    // same sid (a recovered owner enclave with a fresh pk_O) receives the
    // same key re-encrypted.
    if (!st_.provision_key) {
        crypto::SymKey key;
        ctx.rng().fill(key.bytes);
        st_.provision_key = key;
    }

    ProvisionMessage msg;
    msg.sid = st_.sid;
    msg.ct_r = suite_.pke->enc(pk_o, st_.provision_key->bytes, ctx.rng());
    msg.sigma_r = suite_.sig->sign(st_.sign_key.sk, msg.signed_payload());
    return msg.wire();
}

Bytes DelegateeProgram::complete_delegation(ByteReader& r) {
    Bytes ct_wire = to_bytes(r.field());
    r.expect_end();

    if (!st_.provision_key) throw Error(ErrorCode::NoKey, "provision key not established");
    crypto::SymCiphertext ct = [&] {
        try {
            return crypto::SymCiphertext::parse(ct_wire);
        } catch (const Error&) {
            throw Error(ErrorCode::IntegrityFailure, "ciphertext does not parse");
        }
    }();
    Bytes plain = suite_.se->dec(*st_.provision_key, ct);
    Transaction tx = Transaction::parse(plain);  // MalformedTx on schema failure
    return tx.wire();
}

namespace delegatee_cmd {

InitOutput InitOutput::parse(ByteView in) {
    ByteReader r(in);
    InitOutput out;
    out.sid = to_array<16>(r.field());
    out.pk_d = to_array<crypto::kPubKeyLen>(r.field());
    out.vk_sign = to_array<crypto::kPubKeyLen>(r.field());
    r.expect_end();
    return out;
}

Bytes init_setup() {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(DelegateeProgram::Op::InitSetup));
    return w.take();
}

Bytes provision(const hw::Quote& quote, const crypto::PubKey& pk_o, const hw::HwParams& pms) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(DelegateeProgram::Op::Provision));
    w.field(quote.wire());
    w.field(pk_o);
    w.field(pms.wire());
    return w.take();
}

Bytes complete_delegation(const crypto::SymCiphertext& ct_tx) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(DelegateeProgram::Op::CompleteDelegation));
    w.field(ct_tx.wire());
    return w.take();
}

}  // namespace delegatee_cmd

}  // namespace delegacoin::enclave
