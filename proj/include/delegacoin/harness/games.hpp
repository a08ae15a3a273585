#pragma once

#include <cmath>
#include <functional>

#include "delegacoin/crypto/suite.hpp"
#include "delegacoin/hw/emulator.hpp"

namespace delegacoin::harness {

// Statistical estimate of a distinguishing/forging advantage. For guessing
// games the baseline is 1/2; for forgery games it is 0 and the 4-sigma bound
// degenerates to "zero wins".
struct GameResult {
    uint64_t trials = 0;
    uint64_t wins = 0;
    double baseline = 0.5;

    double advantage() const {
        return std::abs(static_cast<double>(wins) / static_cast<double>(trials) - baseline);
    }
    double sigma() const {
        return std::sqrt(baseline * (1.0 - baseline) / static_cast<double>(trials));
    }
    bool within_4_sigma() const { return advantage() <= 4.0 * sigma() + 1e-12; }
};

// ---- IND-CPA -------------------------------------------------------------

using EncOracle = std::function<crypto::SymCiphertext(ByteView)>;

class IndCpaAdversary {
public:
    virtual ~IndCpaAdversary() = default;
    virtual std::pair<Bytes, Bytes> choose(EncOracle& enc, RandomSource& rng) = 0;
    virtual int guess(const crypto::SymCiphertext& challenge, EncOracle& enc,
                      RandomSource& rng) = 0;
};

GameResult play_ind_cpa(const crypto::SymCipher& se, IndCpaAdversary& adv, uint64_t trials,
                        RandomSource& rng);

// Random messages, random guess.
class RandomGuessCpa final : public IndCpaAdversary {
public:
    std::pair<Bytes, Bytes> choose(EncOracle&, RandomSource& rng) override;
    int guess(const crypto::SymCiphertext&, EncOracle&, RandomSource& rng) override;
};

// m0 == m1, so the advantage is zero by construction.
class EqualMessagesCpa final : public IndCpaAdversary {
public:
    std::pair<Bytes, Bytes> choose(EncOracle&, RandomSource& rng) override;
    int guess(const crypto::SymCiphertext&, EncOracle&, RandomSource& rng) override;
};

// Re-encrypts m0 and compares: breaks any deterministic cipher.
class DeterminismExploitCpa final : public IndCpaAdversary {
public:
    std::pair<Bytes, Bytes> choose(EncOracle&, RandomSource& rng) override;
    int guess(const crypto::SymCiphertext& challenge, EncOracle& enc, RandomSource& rng) override;
};

// ---- EUF-CMA ---------------------------------------------------------------

using SignOracle = std::function<crypto::Signature(ByteView)>;

struct Forgery {
    Bytes message;
    crypto::Signature sigma;
};

class EufCmaAdversary {
public:
    virtual ~EufCmaAdversary() = default;
    virtual Forgery forge(const crypto::PubKey& vk, SignOracle& sign, RandomSource& rng) = 0;
};

GameResult play_euf_cma(const crypto::Signer& sig, EufCmaAdversary& adv, uint64_t trials,
                        RandomSource& rng);

// Returns a queried pair verbatim; excluded because the message is in L.
class ReplayForger final : public EufCmaAdversary {
public:
    Forgery forge(const crypto::PubKey&, SignOracle& sign, RandomSource& rng) override;
};

// Keeps a queried signature but flips one message bit.
class BitFlipForger final : public EufCmaAdversary {
public:
    Forgery forge(const crypto::PubKey&, SignOracle& sign, RandomSource& rng) override;
};

// Recomputes the keyless scheme's signature for a fresh message.
class KeylessForger final : public EufCmaAdversary {
public:
    explicit KeylessForger(const crypto::Signer& scheme) : scheme_(scheme) {}
    Forgery forge(const crypto::PubKey&, SignOracle&, RandomSource& rng) override;

private:
    const crypto::Signer& scheme_;
};

// ---- IND-CCA2 --------------------------------------------------------------

using DecOracle = std::function<Bytes(const crypto::PkeCiphertext&)>;

class IndCca2Adversary {
public:
    virtual ~IndCca2Adversary() = default;
    virtual std::pair<Bytes, Bytes> choose(DecOracle& dec, RandomSource& rng) = 0;
    virtual int guess(const crypto::PkeCiphertext& challenge, DecOracle& dec,
                      RandomSource& rng) = 0;
};

GameResult play_ind_cca2(const crypto::Pke& pke, IndCca2Adversary& adv, uint64_t trials,
                         RandomSource& rng);

class RandomGuessCca2 final : public IndCca2Adversary {
public:
    std::pair<Bytes, Bytes> choose(DecOracle&, RandomSource& rng) override;
    int guess(const crypto::PkeCiphertext&, DecOracle&, RandomSource& rng) override;
};

// Flips one ciphertext byte, queries the oracle (legal: it is not the
// challenge), and un-flips the answer. Wins against malleable schemes.
class MalleationCca2 final : public IndCca2Adversary {
public:
    std::pair<Bytes, Bytes> choose(DecOracle&, RandomSource& rng) override;
    int guess(const crypto::PkeCiphertext& challenge, DecOracle& dec, RandomSource& rng) override;

private:
    Bytes m0_, m1_;
};

// Submits the untouched challenge to the oracle; used to show the refusal
// path surfaces ChallengeQueried.
class ChallengeEchoCca2 final : public IndCca2Adversary {
public:
    std::pair<Bytes, Bytes> choose(DecOracle&, RandomSource& rng) override;
    int guess(const crypto::PkeCiphertext& challenge, DecOracle& dec, RandomSource& rng) override;
};

// ---- Remote attestation unforgeability -------------------------------------

// RunQuote oracle over adversary-chosen inputs; issued quotes land in Q.
using QuoteOracle = std::function<const hw::Quote&(ByteView)>;

struct AttestationForgery {
    Bytes input;
    hw::Quote quote;
};

class RemAttAdversary {
public:
    virtual ~RemAttAdversary() = default;
    virtual AttestationForgery forge(const hw::HwParams& pms, QuoteOracle& oracle,
                                     hw::HwEmulator& hw, RandomSource& rng) = 0;
};

GameResult play_rem_att_unf(RemAttAdversary& adv, uint64_t trials, RandomSource& rng);

class ReplayAttForger final : public RemAttAdversary {
public:
    AttestationForgery forge(const hw::HwParams&, QuoteOracle& oracle, hw::HwEmulator&,
                             RandomSource& rng) override;
};

class SpliceAttForger final : public RemAttAdversary {
public:
    AttestationForgery forge(const hw::HwParams&, QuoteOracle& oracle, hw::HwEmulator&,
                             RandomSource& rng) override;
};

class MutationAttForger final : public RemAttAdversary {
public:
    AttestationForgery forge(const hw::HwParams&, QuoteOracle& oracle, hw::HwEmulator&,
                             RandomSource& rng) override;
};

// Signs a self-made quote with its own key pair.
class SelfKeyAttForger final : public RemAttAdversary {
public:
    AttestationForgery forge(const hw::HwParams&, QuoteOracle&, hw::HwEmulator&,
                             RandomSource& rng) override;
};

// Planted leak: reads the platform attestation key out of the emulator.
class LeakedKeyAttForger final : public RemAttAdversary {
public:
    AttestationForgery forge(const hw::HwParams&, QuoteOracle&, hw::HwEmulator& hw,
                             RandomSource& rng) override;
};

// Program identity the attestation game loads.
inline constexpr std::string_view kGameProgramIdentity = "harness.echo/v1";

}  // namespace delegacoin::harness
