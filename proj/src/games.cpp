#include "delegacoin/harness/games.hpp"

#include <optional>
#include <set>

#include "delegacoin/errors.hpp"

namespace delegacoin::harness {

using namespace delegacoin::crypto;

GameResult play_ind_cpa(const SymCipher& se, IndCpaAdversary& adv, uint64_t trials,
                        RandomSource& rng) {
    GameResult result{trials, 0, 0.5};
    for (uint64_t t = 0; t < trials; ++t) {
        SymKey key = se.kgen(rng);
        EncOracle enc = [&](ByteView m) { return se.enc(key, m, rng); };

        int b = static_cast<int>(rng.below(2));
        auto [m0, m1] = adv.choose(enc, rng);
        if (m0.size() != m1.size()) {
            throw Error(ErrorCode::LengthMismatch, "challenge messages differ in length");
        }
        SymCiphertext challenge = se.enc(key, b == 0 ? m0 : m1, rng);
        int guess = adv.guess(challenge, enc, rng);
        if (guess == b) ++result.wins;
    }
    return result;
}

std::pair<Bytes, Bytes> RandomGuessCpa::choose(EncOracle&, RandomSource& rng) {
    return {rng.bytes(32), rng.bytes(32)};
}
int RandomGuessCpa::guess(const SymCiphertext&, EncOracle&, RandomSource& rng) {
    return static_cast<int>(rng.below(2));
}

std::pair<Bytes, Bytes> EqualMessagesCpa::choose(EncOracle&, RandomSource& rng) {
    Bytes m = rng.bytes(32);
    return {m, m};
}
int EqualMessagesCpa::guess(const SymCiphertext&, EncOracle&, RandomSource& rng) {
    return static_cast<int>(rng.below(2));
}

std::pair<Bytes, Bytes> DeterminismExploitCpa::choose(EncOracle&, RandomSource&) {
    return {Bytes(32, 0x00), Bytes(32, 0xFF)};
}
int DeterminismExploitCpa::guess(const SymCiphertext& challenge, EncOracle& enc, RandomSource&) {
    SymCiphertext again = enc(Bytes(32, 0x00));
    return again.wire() == challenge.wire() ? 0 : 1;
}

GameResult play_euf_cma(const Signer& sig, EufCmaAdversary& adv, uint64_t trials,
                        RandomSource& rng) {
    GameResult result{trials, 0, 0.0};
    for (uint64_t t = 0; t < trials; ++t) {
        SigKeypair kp = sig.keygen(rng);
        std::set<Bytes> queried;
        SignOracle oracle = [&](ByteView m) {
            queried.insert(to_bytes(m));
            return sig.sign(kp.sk, m);
        };
        Forgery f = adv.forge(kp.vk, oracle, rng);
        bool fresh = queried.find(f.message) == queried.end();
        bool valid = false;
        try {
            valid = sig.verify(kp.vk, f.sigma, f.message);
        } catch (const Error&) {
            valid = false;
        }
        if (fresh && valid) ++result.wins;
    }
    return result;
}

Forgery ReplayForger::forge(const PubKey&, SignOracle& sign, RandomSource& rng) {
    Bytes m = rng.bytes(24);
    return Forgery{m, sign(m)};
}

Forgery BitFlipForger::forge(const PubKey&, SignOracle& sign, RandomSource& rng) {
    Bytes m = rng.bytes(24);
    Signature sig = sign(m);
    Bytes fresh = m;
    fresh[rng.below(fresh.size())] ^= static_cast<uint8_t>(1u << rng.below(8));
    if (fresh == m) fresh[0] ^= 0x01;
    return Forgery{fresh, sig};
}

Forgery KeylessForger::forge(const PubKey&, SignOracle&, RandomSource& rng) {
    Bytes m = rng.bytes(24);
    return Forgery{m, scheme_.sign({}, m)};
}

GameResult play_ind_cca2(const Pke& pke, IndCca2Adversary& adv, uint64_t trials,
                         RandomSource& rng) {
    GameResult result{trials, 0, 0.5};
    for (uint64_t t = 0; t < trials; ++t) {
        PkeKeypair kp = pke.keygen(rng);
        std::optional<Bytes> challenge_wire;
        DecOracle dec = [&](const PkeCiphertext& ct) {
            if (challenge_wire && ct.wire() == *challenge_wire) {
                throw Error(ErrorCode::ChallengeQueried, "decryption oracle refuses c*");
            }
            return pke.dec(kp.sk, ct);
        };

        int b = static_cast<int>(rng.below(2));
        auto [m0, m1] = adv.choose(dec, rng);
        if (m0.size() != m1.size()) {
            throw Error(ErrorCode::LengthMismatch, "challenge messages differ in length");
        }
        PkeCiphertext challenge = pke.enc(kp.pk, b == 0 ? m0 : m1, rng);
        challenge_wire = challenge.wire();
        int guess = adv.guess(challenge, dec, rng);
        if (guess == b) ++result.wins;
    }
    return result;
}

std::pair<Bytes, Bytes> RandomGuessCca2::choose(DecOracle&, RandomSource& rng) {
    return {rng.bytes(32), rng.bytes(32)};
}
int RandomGuessCca2::guess(const PkeCiphertext&, DecOracle&, RandomSource& rng) {
    return static_cast<int>(rng.below(2));
}

std::pair<Bytes, Bytes> MalleationCca2::choose(DecOracle&, RandomSource&) {
    m0_ = Bytes(32, 0x00);
    m1_ = Bytes(32, 0xFF);
    return {m0_, m1_};
}

int MalleationCca2::guess(const PkeCiphertext& challenge, DecOracle& dec, RandomSource& rng) {
    PkeCiphertext mauled = challenge;
    if (mauled.sealed.empty()) return static_cast<int>(rng.below(2));
    size_t pos = mauled.sealed.size() - 1;
    mauled.sealed[pos] ^= 0x01;
    try {
        Bytes answer = dec(mauled);
        if (answer.size() == 32) {
            answer[pos] ^= 0x01;  // undo the maul on the plaintext side
            if (answer == m0_) return 0;
            if (answer == m1_) return 1;
        }
    } catch (const Error&) {
        // A sound scheme rejects the mauled ciphertext; nothing was learned.
    }
    return static_cast<int>(rng.below(2));
}

std::pair<Bytes, Bytes> ChallengeEchoCca2::choose(DecOracle&, RandomSource& rng) {
    Bytes m = rng.bytes(16);
    return {m, m};
}
int ChallengeEchoCca2::guess(const PkeCiphertext& challenge, DecOracle& dec, RandomSource&) {
    (void)dec(challenge);  // must throw ChallengeQueried
    return 0;
}

namespace {

class GameEchoProgram final : public hw::EnclaveProgram {
public:
    std::string_view identity() const override { return kGameProgramIdentity; }
    Bytes handle(hw::EnclaveContext&, ByteView input) override {
        ByteWriter w;
        w.raw(crypto::sha256(input));
        return w.take();
    }
    std::unique_ptr<hw::EnclaveProgram> clone() const override {
        return std::make_unique<GameEchoProgram>(*this);
    }
};

}  // namespace

GameResult play_rem_att_unf(RemAttAdversary& adv, uint64_t trials, RandomSource& rng) {
    GameResult result{trials, 0, 0.0};
    for (uint64_t t = 0; t < trials; ++t) {
        hw::HwEmulator hw(128, rng);
        hw.register_program([] { return std::make_unique<GameEchoProgram>(); });
        hw::EnclaveId hdl = hw.load(kGameProgramIdentity);

        std::vector<hw::Quote> issued;
        std::set<Bytes> issued_wires;
        QuoteOracle oracle = [&](ByteView in) -> const hw::Quote& {
            issued.push_back(hw.run_quote(hdl, in));
            issued_wires.insert(issued.back().wire());
            return issued.back();
        };

        AttestationForgery f = adv.forge(hw.params(), oracle, hw, rng);
        bool fresh = issued_wires.find(f.quote.wire()) == issued_wires.end();
        if (fresh && hw::HwEmulator::quote_verify(hw.params(), f.quote)) ++result.wins;
    }
    return result;
}

AttestationForgery ReplayAttForger::forge(const hw::HwParams&, QuoteOracle& oracle,
                                          hw::HwEmulator&, RandomSource& rng) {
    Bytes in = rng.bytes(16);
    hw::Quote q = oracle(in);
    return AttestationForgery{in, q};
}

AttestationForgery SpliceAttForger::forge(const hw::HwParams&, QuoteOracle& oracle,
                                          hw::HwEmulator&, RandomSource& rng) {
    hw::Quote a = oracle(rng.bytes(16));
    hw::Quote b = oracle(rng.bytes(16));
    hw::Quote spliced = a;
    switch (rng.below(3)) {
        case 0: spliced.output = b.output; break;
        case 1: spliced.input = b.input; break;
        default: spliced.sigma = b.sigma; break;
    }
    return AttestationForgery{spliced.input, spliced};
}

AttestationForgery MutationAttForger::forge(const hw::HwParams&, QuoteOracle& oracle,
                                            hw::HwEmulator&, RandomSource& rng) {
    hw::Quote q = oracle(rng.bytes(16));
    switch (rng.below(4)) {
        case 0: q.tag_p[rng.below(32)] ^= static_cast<uint8_t>(1u << rng.below(8)); break;
        case 1:
            if (q.input.empty()) q.input.push_back(0x01);
            q.input[rng.below(q.input.size())] ^= 0x01;
            break;
        case 2:
            if (q.output.empty()) q.output.push_back(0x01);
            q.output[rng.below(q.output.size())] ^= 0x01;
            break;
        default: q.sigma.bytes[rng.below(64)] ^= static_cast<uint8_t>(1u << rng.below(8)); break;
    }
    return AttestationForgery{q.input, q};
}

AttestationForgery SelfKeyAttForger::forge(const hw::HwParams&, QuoteOracle&, hw::HwEmulator&,
                                           RandomSource& rng) {
    auto suite = crypto::default_suite();
    SigKeypair own = suite.sig->keygen(rng);
    hw::Quote q;
    q.hdl = 1;
    q.tag_p = hw::measure_program_identity(kGameProgramIdentity);
    q.input = rng.bytes(16);
    q.output = to_bytes(ByteView(crypto::sha256(q.input)));
    q.sigma = suite.sig->sign(own.sk, q.signed_payload());
    return AttestationForgery{q.input, q};
}

AttestationForgery LeakedKeyAttForger::forge(const hw::HwParams&, QuoteOracle&,
                                             hw::HwEmulator& hw, RandomSource& rng) {
    auto suite = crypto::default_suite();
    hw::Quote q;
    q.hdl = 7;
    q.tag_p = hw::measure_program_identity(kGameProgramIdentity);
    q.input = rng.bytes(16);
    q.output = to_bytes(ByteView(crypto::sha256(q.input)));
    q.sigma = suite.sig->sign(hw.attestation_key_for_harness(), q.signed_payload());
    return AttestationForgery{q.input, q};
}

}  // namespace delegacoin::harness
