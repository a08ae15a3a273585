#include "delegacoin/transaction.hpp"

namespace delegacoin {

Bytes Transaction::signed_payload() const {
    ByteWriter w;
    w.raw(addr.raw());
    w.raw(pk_tx);
    w.raw(metadata.recipient.raw());
    w.u64le(metadata.amount);
    w.raw(metadata.nonce);
    return w.take();
}

Bytes Transaction::wire() const {
    Bytes out = signed_payload();
    out.insert(out.end(), sigma.bytes.begin(), sigma.bytes.end());
    return out;
}

Transaction Transaction::parse(ByteView in) {
    try {
        ByteReader r(in);
        Transaction tx;
        tx.addr = crypto::Address::from_raw(r.raw(crypto::kAddressRawLen));
        tx.pk_tx = to_array<crypto::kPubKeyLen>(r.raw(crypto::kPubKeyLen));
        tx.metadata.recipient = crypto::Address::from_raw(r.raw(crypto::kAddressRawLen));
        tx.metadata.amount = r.u64le();
        tx.metadata.nonce = to_array<8>(r.raw(8));
        tx.sigma.bytes = to_array<crypto::kSignatureLen>(r.raw(crypto::kSignatureLen));
        r.expect_end();
        return tx;
    } catch (const Error&) {
        throw Error(ErrorCode::MalformedTx, "transaction bytes do not parse");
    }
}

bool Transaction::verify_signature(const crypto::Signer& sig) const {
    try {
        return sig.verify(pk_tx, sigma, signed_payload());
    } catch (const Error&) {
        return false;  // malformed embedded key cannot authorize anything
    }
}

Bytes SealedRecord::frame() const {
    ByteWriter w;
    w.raw(to_bytes(kMagic));
    w.raw(addr.raw());
    w.u64le(seq);
    w.field(c_update.wire());
    return w.take();
}

SealedRecord SealedRecord::read(ByteReader& r) {
    ByteView magic = r.raw(kMagic.size());
    if (to_bytes(magic) != to_bytes(kMagic)) {
        throw Error(ErrorCode::MalformedMessage, "bad sealed record magic");
    }
    SealedRecord rec;
    try {
        rec.addr = crypto::Address::from_raw(r.raw(crypto::kAddressRawLen));
    } catch (const Error&) {
        throw Error(ErrorCode::MalformedMessage, "bad sealed record address");
    }
    rec.seq = r.u64le();
    rec.c_update = crypto::SymCiphertext::parse(r.field());
    return rec;
}

SealedRecord SealedRecord::parse_frame(ByteView in) {
    ByteReader r(in);
    SealedRecord rec = read(r);
    r.expect_end();
    return rec;
}

}  // namespace delegacoin
