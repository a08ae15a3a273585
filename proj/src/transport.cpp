#include "delegacoin/runtime/transport.hpp"

#include <charconv>
#include <chrono>

#include "delegacoin/errors.hpp"

namespace delegacoin::runtime {

std::string_view phase_name(Phase p) {
    switch (p) {
        case Phase::Setup1: return "setup1.delegatee-identity";
        case Phase::Setup2: return "setup2.owner-quote";
        case Phase::Setup3: return "setup3.provision";
        case Phase::Setup4: return "setup4.complete";
        case Phase::Delegate: return "delegate.ct-tx";
        case Phase::Spend: return "spend.tx";
    }
    return "unknown";
}

Bytes Envelope::wire() const {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(phase));
    w.raw(session);
    w.field(body);
    return w.take();
}

Envelope Envelope::parse(ByteView in) {
    ByteReader r(in);
    Envelope e;
    uint8_t p = r.u8();
    if (p < 1 || p > 6) throw Error(ErrorCode::MalformedMessage, "bad envelope phase");
    e.phase = static_cast<Phase>(p);
    e.session = to_array<16>(r.raw(16));
    e.body = to_bytes(r.field());
    r.expect_end();
    return e;
}

void TranscriptLog::record(const Envelope& e) {
    std::scoped_lock g(lock_);
    log_.push_back(e);
}

std::vector<Envelope> TranscriptLog::envelopes() const {
    std::scoped_lock g(lock_);
    return log_;
}

std::vector<std::string> TranscriptLog::lines() const {
    std::scoped_lock g(lock_);
    std::vector<std::string> out;
    out.reserve(log_.size());
    for (const Envelope& e : log_) {
        out.push_back(std::string(phase_name(e.phase)) + " " + to_hex(e.wire()));
    }
    return out;
}

void TranscriptLog::clear() {
    std::scoped_lock g(lock_);
    log_.clear();
}

bool transcript_conforms(const std::vector<Envelope>& envelopes) {
    static constexpr Phase setup[] = {Phase::Setup1, Phase::Setup2, Phase::Setup3, Phase::Setup4};
    if (envelopes.size() < 4) return false;
    for (size_t i = 0; i < 4; ++i) {
        if (envelopes[i].phase != setup[i]) return false;
        if (envelopes[i].session != envelopes[0].session) return false;
    }
    size_t delegations = 0, spends = 0;
    for (size_t i = 4; i < envelopes.size(); ++i) {
        switch (envelopes[i].phase) {
            case Phase::Delegate: ++delegations; break;
            case Phase::Spend:
                if (++spends > delegations) return false;
                break;
            default: return false;  // a second setup or stray phase
        }
    }
    return true;
}

void FaultPlan::add(size_t msg_index, FaultAction action) { actions_[msg_index] = action; }

std::optional<FaultAction> FaultPlan::action_for(size_t msg_index) const {
    auto it = actions_.find(msg_index);
    if (it == actions_.end()) return std::nullopt;
    return it->second;
}

FaultPlan FaultPlan::parse(std::string_view spec) {
    FaultPlan plan;
    size_t pos = 0;
    auto parse_num = [](std::string_view s) -> size_t {
        size_t v = 0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
            throw Error(ErrorCode::MalformedMessage, "bad fault index");
        }
        return v;
    };
    while (pos < spec.size()) {
        size_t comma = spec.find(',', pos);
        std::string_view item = spec.substr(pos, comma == std::string_view::npos ? spec.size() - pos
                                                                                 : comma - pos);
        pos = comma == std::string_view::npos ? spec.size() : comma + 1;
        if (item.empty()) continue;

        size_t at = item.find('@');
        if (at == std::string_view::npos) {
            throw Error(ErrorCode::MalformedMessage, "fault item needs '@'");
        }
        std::string_view kind = item.substr(0, at);
        std::string_view rest = item.substr(at + 1);
        FaultAction action;
        if (kind == "drop") {
            action.kind = FaultAction::Kind::Drop;
        } else if (kind == "dup") {
            action.kind = FaultAction::Kind::Duplicate;
        } else if (kind == "reorder") {
            action.kind = FaultAction::Kind::Reorder;
        } else if (kind == "corrupt") {
            action.kind = FaultAction::Kind::CorruptByte;
            size_t colon = rest.find(':');
            if (colon != std::string_view::npos) {
                action.byte_index = parse_num(rest.substr(colon + 1));
                rest = rest.substr(0, colon);
            }
        } else {
            throw Error(ErrorCode::MalformedMessage, "unknown fault kind");
        }
        plan.add(parse_num(rest), action);
    }
    return plan;
}

void DuplexTransport::send(Direction dir, const Envelope& e) {
    std::scoped_lock g(lock_);
    if (transcript_) transcript_->record(e);
    struct Notify {
        std::condition_variable& cv;
        ~Notify() { cv.notify_all(); }
    } notify{cv_};
    size_t index = send_index_++;

    auto& queue = queue_for(dir);
    auto deliver = [&](Envelope env) {
        queue.push_back(std::move(env));
        if (auto& held = held_for(dir); held.has_value()) {
            queue.push_back(std::move(*held));
            held.reset();
        }
    };

    std::optional<FaultAction> action = plan_.action_for(index);
    if (!action) {
        deliver(e);
        return;
    }
    switch (action->kind) {
        case FaultAction::Kind::Drop:
            break;
        case FaultAction::Kind::Duplicate:
            deliver(e);
            deliver(e);
            break;
        case FaultAction::Kind::CorruptByte: {
            Bytes wire = e.wire();
            wire[action->byte_index % wire.size()] ^= action->xor_mask ? action->xor_mask : 0x01;
            try {
                deliver(Envelope::parse(wire));
            } catch (const Error&) {
                // Corruption destroyed the framing; the message is lost.
            }
            break;
        }
        case FaultAction::Kind::Reorder:
            held_for(dir) = e;
            break;
    }
}

std::optional<Envelope> DuplexTransport::recv(Direction dir) {
    std::scoped_lock g(lock_);
    auto& queue = queue_for(dir);
    if (queue.empty()) return std::nullopt;
    Envelope e = std::move(queue.front());
    queue.pop_front();
    return e;
}

Envelope DuplexTransport::recv_required(Direction dir) {
    std::unique_lock lk(lock_);
    auto& queue = queue_for(dir);
    bool arrived = cv_.wait_for(lk, std::chrono::milliseconds(timeout_ms_),
                                [&] { return !queue.empty(); });
    if (!arrived) throw Error(ErrorCode::SessionAborted, "expected message never arrived");
    Envelope e = std::move(queue.front());
    queue.pop_front();
    return e;
}

size_t DuplexTransport::messages_sent() const {
    std::scoped_lock g(lock_);
    return send_index_;
}

}  // namespace delegacoin::runtime
