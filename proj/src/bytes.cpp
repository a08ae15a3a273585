#include "delegacoin/bytes.hpp"

namespace delegacoin {

static constexpr char kHexDigits[] = "0123456789abcdef";

std::string to_hex(ByteView b) {
    std::string s;
    s.reserve(b.size() * 2);
    for (uint8_t v : b) {
        s.push_back(kHexDigits[v >> 4]);
        s.push_back(kHexDigits[v & 0x0F]);
    }
    return s;
}

static int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

Bytes from_hex(std::string_view s) {
    if (s.size() % 2 != 0) throw Error(ErrorCode::MalformedMessage, "odd hex length");
    Bytes out;
    out.reserve(s.size() / 2);
    for (size_t i = 0; i < s.size(); i += 2) {
        int hi = hex_nibble(s[i]), lo = hex_nibble(s[i + 1]);
        if (hi < 0 || lo < 0) throw Error(ErrorCode::MalformedMessage, "bad hex digit");
        out.push_back(static_cast<uint8_t>((hi << 4) | lo));
    }
    return out;
}

std::string_view error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::IntegrityFailure: return "IntegrityFailure";
        case ErrorCode::DecryptFailure: return "DecryptFailure";
        case ErrorCode::InvalidKey: return "InvalidKey";
        case ErrorCode::BadAddress: return "BadAddress";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::UnsupportedParam: return "UnsupportedParam";
        case ErrorCode::UnknownProgram: return "UnknownProgram";
        case ErrorCode::UnknownHandle: return "UnknownHandle";
        case ErrorCode::AlreadyInitialized: return "AlreadyInitialized";
        case ErrorCode::UnknownSession: return "UnknownSession";
        case ErrorCode::BadSignature: return "BadSignature";
        case ErrorCode::AlreadyGenerated: return "AlreadyGenerated";
        case ErrorCode::InsufficientBalance: return "InsufficientBalance";
        case ErrorCode::ZeroAmount: return "ZeroAmount";
        case ErrorCode::NoAddress: return "NoAddress";
        case ErrorCode::NoPendingUpdate: return "NoPendingUpdate";
        case ErrorCode::NoProvisionKey: return "NoProvisionKey";
        case ErrorCode::NoPendingTx: return "NoPendingTx";
        case ErrorCode::WrongMeasurement: return "WrongMeasurement";
        case ErrorCode::BadQuote: return "BadQuote";
        case ErrorCode::SessionMismatch: return "SessionMismatch";
        case ErrorCode::NoKey: return "NoKey";
        case ErrorCode::MalformedTx: return "MalformedTx";
        case ErrorCode::BadReceipt: return "BadReceipt";
        case ErrorCode::MalformedMessage: return "MalformedMessage";
        case ErrorCode::ChallengeQueried: return "ChallengeQueried";
        case ErrorCode::UnknownScenario: return "UnknownScenario";
        case ErrorCode::SessionAborted: return "SessionAborted";
        case ErrorCode::TransportClosed: return "TransportClosed";
    }
    return "UnknownError";
}

}  // namespace delegacoin
