#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <vector>

#include "delegacoin/transaction.hpp"

namespace delegacoin::chain {

enum class RejectReason : uint8_t {
    None = 0,
    BadSig,
    AddrMismatch,
    DoubleSpend,
    Overdraft,
    NotFound,
};

std::string_view reject_reason_name(RejectReason r);

struct SubmitResult {
    bool accepted = false;
    RejectReason reason = RejectReason::None;
};

struct DepositReceipt {
    crypto::Address addr;
    uint64_t amount = 0;
    uint64_t submitted_height = 0;
};

struct TxStatus {
    enum class State : uint8_t { Pending, Confirmed, Rejected };
    State state = State::Rejected;
    uint64_t height = 0;              // meaningful when confirmed
    RejectReason reason = RejectReason::NotFound;
};

class IChain {
public:
    virtual ~IChain() = default;

    virtual DepositReceipt deposit(const crypto::Address& addr, uint64_t amount) = 0;
    virtual SubmitResult submit(const Transaction& tx) = 0;
    // Adversarial ingress: models a transaction arriving via another node.
    // Signature and address derivation are still checked; mempool conflict
    // accounting is not, so confirm-time ordering resolves the race.
    virtual SubmitResult broadcast_raw(const Transaction& tx) = 0;
    virtual uint64_t advance_blocks(uint64_t n) = 0;
    virtual uint64_t balance_of(const crypto::Address& addr) const = 0;
    virtual TxStatus tx_status(const Transaction& tx) const = 0;
    virtual uint64_t height() const = 0;
    virtual uint32_t confirmation_depth() const = 0;
};

// Account-balance chain with per-transaction (addr, nonce) uniqueness and a
// deterministic block schedule driven by advance_blocks. Spendable balances
// escrow submitted amounts immediately; confirmed spends credit recipients in
// a separate received-funds view that is not re-spendable.
class ChainSim final : public IChain {
public:
    explicit ChainSim(crypto::Suite suite = crypto::default_suite(), uint32_t depth = 6);

    DepositReceipt deposit(const crypto::Address& addr, uint64_t amount) override;
    SubmitResult submit(const Transaction& tx) override;
    SubmitResult broadcast_raw(const Transaction& tx) override;
    uint64_t advance_blocks(uint64_t n) override;
    uint64_t balance_of(const crypto::Address& addr) const override;
    TxStatus tx_status(const Transaction& tx) const override;
    uint64_t height() const override;
    uint32_t confirmation_depth() const override { return depth_; }

    uint64_t received_of(const crypto::Address& addr) const;
    std::vector<std::pair<Transaction, uint64_t>> confirmed() const;

    struct Totals {
        uint64_t deposits_confirmed = 0;
        uint64_t spends_confirmed = 0;
        uint64_t balances_sum = 0;
        uint64_t mempool_escrowed = 0;
    };
    Totals totals() const;
    bool conservation_holds() const;

    // Versioned binary state image for offline inspection.
    void dump(const std::filesystem::path& path) const;
    static std::unique_ptr<ChainSim> load(const std::filesystem::path& path,
                                          crypto::Suite suite = crypto::default_suite());

private:
    struct MempoolEntry {
        Transaction tx;
        uint64_t submit_height = 0;
        bool escrowed = false;
    };

    SubmitResult ingress(const Transaction& tx, bool full_checks);
    void confirm_block();
    bool conservation_locked() const;
    Bytes spend_key(const Transaction& tx) const;

    crypto::Suite suite_;
    uint32_t depth_;

    mutable std::mutex lock_;
    uint64_t height_ = 0;
    std::map<crypto::Address, uint64_t> balances_;
    std::map<crypto::Address, uint64_t> received_;
    std::vector<MempoolEntry> mempool_;
    std::vector<std::pair<Transaction, uint64_t>> confirmed_;
    std::set<Bytes> spent_;  // addr.raw() || nonce
    std::map<crypto::Digest32, TxStatus> statuses_;
    struct PendingDeposit {
        crypto::Address addr;
        uint64_t amount;
        uint64_t submit_height;
    };
    std::vector<PendingDeposit> pending_deposits_;
    uint64_t deposits_confirmed_ = 0;
    uint64_t spends_confirmed_ = 0;
};

// Call-counting decorator used to assert the offline property of delegation.
class InstrumentedChain final : public IChain {
public:
    explicit InstrumentedChain(std::shared_ptr<IChain> inner) : inner_(std::move(inner)) {}

    DepositReceipt deposit(const crypto::Address& addr, uint64_t amount) override {
        ++calls_;
        return inner_->deposit(addr, amount);
    }
    SubmitResult submit(const Transaction& tx) override {
        ++calls_;
        return inner_->submit(tx);
    }
    SubmitResult broadcast_raw(const Transaction& tx) override {
        ++calls_;
        return inner_->broadcast_raw(tx);
    }
    uint64_t advance_blocks(uint64_t n) override {
        ++calls_;
        return inner_->advance_blocks(n);
    }
    uint64_t balance_of(const crypto::Address& addr) const override {
        ++calls_;
        return inner_->balance_of(addr);
    }
    TxStatus tx_status(const Transaction& tx) const override {
        ++calls_;
        return inner_->tx_status(tx);
    }
    uint64_t height() const override {
        ++calls_;
        return inner_->height();
    }
    uint32_t confirmation_depth() const override {
        ++calls_;
        return inner_->confirmation_depth();
    }

    uint64_t total_calls() const { return calls_.load(); }
    IChain& inner() { return *inner_; }

private:
    std::shared_ptr<IChain> inner_;
    mutable std::atomic<uint64_t> calls_{0};
};

}  // namespace delegacoin::chain
