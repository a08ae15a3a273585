#pragma once

#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include "delegacoin/enclave/owner.hpp"

namespace delegacoin::runtime {

using enclave::SessionId;

enum class Phase : uint8_t {
    Setup1 = 1,  // delegatee identity (sid, pk_D, vk_sign)
    Setup2,      // owner attestation quote
    Setup3,      // provision message (sid, ct_r, sigma_r)
    Setup4,      // owner setup-complete acknowledgement
    Delegate,    // encrypted transaction ct_tx
    Spend,       // plaintext transaction forwarded to the chain
};

std::string_view phase_name(Phase p);

struct Envelope {
    Phase phase = Phase::Setup1;
    SessionId session{};
    Bytes body;

    Bytes wire() const;
    static Envelope parse(ByteView in);
    bool operator==(const Envelope&) const = default;
};

// Ordered record of every envelope the nodes emitted; one hex line each.
class TranscriptLog {
public:
    void record(const Envelope& e);
    std::vector<Envelope> envelopes() const;
    std::vector<std::string> lines() const;
    void clear();

private:
    mutable std::mutex lock_;
    std::vector<Envelope> log_;
};

// Honest-run shape: the four setup phases in order, then delegations and
// spends with no spend outrunning the delegations that precede it.
bool transcript_conforms(const std::vector<Envelope>& envelopes);

struct FaultAction {
    enum class Kind : uint8_t { Drop, Duplicate, CorruptByte, Reorder };
    Kind kind = Kind::Drop;
    size_t byte_index = 0;
    uint8_t xor_mask = 0x01;
};

// Keyed by global send index (counted across both directions).
class FaultPlan {
public:
    void add(size_t msg_index, FaultAction action);
    std::optional<FaultAction> action_for(size_t msg_index) const;
    bool empty() const { return actions_.empty(); }

    // Comma-separated: "drop@2", "dup@0", "corrupt@1:17", "reorder@3".
    static FaultPlan parse(std::string_view spec);

private:
    std::map<size_t, FaultAction> actions_;
};

// In-process duplex queue between the owner and delegatee nodes with
// injectable faults. A reordered message is held back and delivered after the
// next send in the same direction.
class DuplexTransport {
public:
    enum class Direction { ToDelegatee, ToOwner };

    explicit DuplexTransport(TranscriptLog* transcript = nullptr) : transcript_(transcript) {}

    void set_fault_plan(FaultPlan plan) { plan_ = std::move(plan); }

    void send(Direction dir, const Envelope& e);
    std::optional<Envelope> recv(Direction dir);
    // Blocks up to the receive timeout, then throws Error(SessionAborted).
    Envelope recv_required(Direction dir);

    void set_recv_timeout_ms(uint64_t ms) { timeout_ms_ = ms; }
    size_t messages_sent() const;

private:
    std::deque<Envelope>& queue_for(Direction dir) {
        return dir == Direction::ToDelegatee ? to_delegatee_ : to_owner_;
    }
    std::optional<Envelope>& held_for(Direction dir) {
        return dir == Direction::ToDelegatee ? held_to_delegatee_ : held_to_owner_;
    }

    mutable std::mutex lock_;
    std::condition_variable cv_;
    uint64_t timeout_ms_ = 2000;
    std::deque<Envelope> to_delegatee_;
    std::deque<Envelope> to_owner_;
    std::optional<Envelope> held_to_delegatee_;
    std::optional<Envelope> held_to_owner_;
    FaultPlan plan_;
    size_t send_index_ = 0;
    TranscriptLog* transcript_;
};

}  // namespace delegacoin::runtime
