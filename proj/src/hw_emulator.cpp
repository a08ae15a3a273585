#include "delegacoin/hw/emulator.hpp"

#include "delegacoin/errors.hpp"

namespace delegacoin::hw {

Bytes HwParams::wire() const {
    ByteWriter w;
    w.raw(vk_quote);
    w.field(to_bytes(suite_id));
    w.u32le(lambda);
    return w.take();
}

HwParams HwParams::parse(ByteView in) {
    ByteReader r(in);
    HwParams p;
    p.vk_quote = to_array<crypto::kPubKeyLen>(r.raw(crypto::kPubKeyLen));
    ByteView suite = r.field();
    p.suite_id.assign(suite.begin(), suite.end());
    p.lambda = r.u32le();
    r.expect_end();
    return p;
}

Bytes Quote::signed_payload() const {
    ByteWriter w;
    w.u64le(hdl);
    w.raw(tag_p);
    w.field(input);
    w.field(output);
    return w.take();
}

Bytes Quote::wire() const {
    Bytes out = signed_payload();
    out.insert(out.end(), sigma.bytes.begin(), sigma.bytes.end());
    return out;
}

Quote Quote::parse(ByteView in) {
    ByteReader r(in);
    Quote q;
    q.hdl = r.u64le();
    q.tag_p = to_array<32>(r.raw(32));
    q.input = to_bytes(r.field());
    q.output = to_bytes(r.field());
    q.sigma.bytes = to_array<crypto::kSignatureLen>(r.raw(crypto::kSignatureLen));
    r.expect_end();
    return q;
}

namespace {

constexpr std::string_view kSuiteId = "secp256k1/sha256/aes256gcm";

class ContextImpl final : public EnclaveContext {
public:
    ContextImpl(Drbg& drbg, const Measurement& tag, ByteView seal_master)
        : drbg_(drbg), tag_(tag), seal_master_(seal_master) {}

    RandomSource& rng() override { return drbg_; }

    crypto::SymKey seal_key() override {
        ByteWriter w;
        w.raw(to_bytes(std::string_view("seal-key.v1")));
        w.raw(tag_);
        crypto::SymKey k;
        k.bytes = crypto::hmac_sha256(seal_master_, w.peek());
        return k;
    }

    const Measurement& measurement() const override { return tag_; }

private:
    Drbg& drbg_;
    const Measurement& tag_;
    ByteView seal_master_;
};

}  // namespace

HwEmulator::HwEmulator(uint32_t lambda, RandomSource& boot_rng, crypto::Suite suite)
    : suite_(suite), boot_drbg_(boot_rng.array<32>()) {
    if (lambda != 128) {
        throw Error(ErrorCode::UnsupportedParam, "unsupported security parameter");
    }
    crypto::SigKeypair att = suite_.sig->keygen(boot_drbg_);
    sk_quote_ = att.sk;
    boot_drbg_.fill(seal_master_);
    params_.vk_quote = att.vk;
    params_.suite_id = std::string(kSuiteId);
    params_.lambda = lambda;
}

void HwEmulator::register_program(ProgramFactory factory) {
    auto probe = factory();
    std::scoped_lock g(registry_lock_);
    programs_.emplace(std::string(probe->identity()), std::move(factory));
}

bool HwEmulator::has_program(std::string_view identity) const {
    std::scoped_lock g(registry_lock_);
    return programs_.find(identity) != programs_.end();
}

Measurement HwEmulator::measurement_of(std::string_view identity) const {
    return measure_program_identity(identity);
}

EnclaveId HwEmulator::load(std::string_view program_identity) {
    std::scoped_lock g(registry_lock_);
    auto it = programs_.find(program_identity);
    if (it == programs_.end()) {
        throw Error(ErrorCode::UnknownProgram, std::string(program_identity));
    }
    EnclaveId id = next_id_++;
    ByteWriter label;
    label.raw(to_bytes(std::string_view("enclave-drbg")));
    label.u64le(id);
    enclaves_.emplace(id, std::make_shared<Enclave>(
                              id, measure_program_identity(program_identity),
                              boot_drbg_.fork(to_hex(label.peek())), it->second()));
    return id;
}

std::shared_ptr<HwEmulator::Enclave> HwEmulator::find(EnclaveId hdl) const {
    std::scoped_lock g(registry_lock_);
    auto it = enclaves_.find(hdl);
    if (it == enclaves_.end()) throw Error(ErrorCode::UnknownHandle, "no such enclave");
    return it->second;
}

Bytes HwEmulator::run(EnclaveId hdl, ByteView input) {
    auto e = find(hdl);
    std::scoped_lock g(e->lock);
    ContextImpl ctx(e->drbg, e->tag_p, seal_master_);
    return e->program->handle(ctx, input);
}

Quote HwEmulator::run_quote(EnclaveId hdl, ByteView input) {
    auto e = find(hdl);
    std::scoped_lock g(e->lock);
    ContextImpl ctx(e->drbg, e->tag_p, seal_master_);
    Quote q;
    q.hdl = e->id;
    q.tag_p = e->tag_p;
    q.input = to_bytes(input);
    q.output = e->program->handle(ctx, input);
    q.sigma = suite_.sig->sign(sk_quote_, q.signed_payload());
    return q;
}

void HwEmulator::destroy(EnclaveId hdl) {
    std::scoped_lock g(registry_lock_);
    if (enclaves_.erase(hdl) == 0) throw Error(ErrorCode::UnknownHandle, "no such enclave");
}

bool HwEmulator::quote_verify(const HwParams& params, const Quote& quote) {
    try {
        return crypto::default_suite().sig->verify(params.vk_quote, quote.sigma,
                                                   quote.signed_payload());
    } catch (...) {
        return false;
    }
}

bool HwEmulator::quote_verify_wire(const HwParams& params, ByteView quote_wire) {
    try {
        return quote_verify(params, Quote::parse(quote_wire));
    } catch (...) {
        return false;
    }
}

EnclaveSnapshot HwEmulator::snapshot(EnclaveId hdl) const {
    auto e = find(hdl);
    std::scoped_lock g(e->lock);
    EnclaveSnapshot s;
    s.id = e->id;
    s.tag_p = e->tag_p;
    s.drbg = e->drbg.state();
    s.program = e->program->clone();
    return s;
}

void HwEmulator::restore(const EnclaveSnapshot& snap) {
    std::scoped_lock g(registry_lock_);
    enclaves_[snap.id] = std::make_shared<Enclave>(snap.id, snap.tag_p, Drbg(snap.drbg),
                                                   snap.program->clone());
    if (snap.id >= next_id_) next_id_ = snap.id + 1;
}

EnclaveProgram& HwEmulator::program_of(EnclaveId hdl) { return *find(hdl)->program; }

}  // namespace delegacoin::hw
