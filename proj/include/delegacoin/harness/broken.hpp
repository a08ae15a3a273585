#pragma once

#include "delegacoin/crypto/suite.hpp"

namespace delegacoin::harness {

// Deliberately weakened backends, planted to show the security games are
// sensitive rather than vacuous. Never wire these into the protocol.

// Fixed nonce and a key-derived keystream: encryption is deterministic, so
// equal plaintexts produce equal ciphertexts.
const crypto::SymCipher& broken_fixed_nonce_cipher();

// Signatures depend only on the message; anyone can forge for any message.
const crypto::Signer& broken_keyless_signer();

// ECDH hybrid without integrity: flipping a ciphertext byte flips the same
// plaintext byte, so a decryption oracle leaks the challenge.
const crypto::Pke& broken_malleable_pke();

}  // namespace delegacoin::harness
