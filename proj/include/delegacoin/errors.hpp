#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace delegacoin {

enum class ErrorCode {
    // crypto layer
    IntegrityFailure,
    DecryptFailure,
    InvalidKey,
    BadAddress,
    LengthMismatch,
    // secure hardware emulation
    UnsupportedParam,
    UnknownProgram,
    UnknownHandle,
    // enclave programs
    AlreadyInitialized,
    UnknownSession,
    BadSignature,
    AlreadyGenerated,
    InsufficientBalance,
    ZeroAmount,
    NoAddress,
    NoPendingUpdate,
    NoProvisionKey,
    NoPendingTx,
    WrongMeasurement,
    BadQuote,
    SessionMismatch,
    NoKey,
    MalformedTx,
    BadReceipt,
    // wire / persistence
    MalformedMessage,
    // harness
    ChallengeQueried,
    UnknownScenario,
    // runtime
    SessionAborted,
    TransportClosed,
};

std::string_view error_code_name(ErrorCode c);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    explicit Error(ErrorCode code) : Error(code, "") {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

// Thrown by fault-injection hooks to model a process/enclave crash. Distinct
// from Error so protocol error handling never swallows a simulated crash.
class SimulatedCrash : public std::runtime_error {
public:
    explicit SimulatedCrash(const std::string& where)
        : std::runtime_error("simulated crash at " + where) {}
};

}  // namespace delegacoin
