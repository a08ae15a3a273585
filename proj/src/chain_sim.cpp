#include "delegacoin/chain/sim.hpp"

#include <fstream>

#include "delegacoin/errors.hpp"

namespace delegacoin::chain {

std::string_view reject_reason_name(RejectReason r) {
    switch (r) {
        case RejectReason::None: return "None";
        case RejectReason::BadSig: return "BadSig";
        case RejectReason::AddrMismatch: return "AddrMismatch";
        case RejectReason::DoubleSpend: return "DoubleSpend";
        case RejectReason::Overdraft: return "Overdraft";
        case RejectReason::NotFound: return "NotFound";
    }
    return "Unknown";
}

ChainSim::ChainSim(crypto::Suite suite, uint32_t depth) : suite_(suite), depth_(depth) {}

Bytes ChainSim::spend_key(const Transaction& tx) const {
    ByteWriter w;
    w.raw(tx.addr.raw());
    w.raw(tx.metadata.nonce);
    return w.take();
}

DepositReceipt ChainSim::deposit(const crypto::Address& addr, uint64_t amount) {
    if (amount == 0) throw Error(ErrorCode::ZeroAmount, "zero deposit");
    std::scoped_lock g(lock_);
    pending_deposits_.push_back({addr, amount, height_});
    return DepositReceipt{addr, amount, height_};
}

SubmitResult ChainSim::ingress(const Transaction& tx, bool full_checks) {
    if (!tx.verify_signature(*suite_.sig)) {
        return {false, RejectReason::BadSig};
    }
    if (crypto::derive_address(tx.pk_tx) != tx.addr) {
        return {false, RejectReason::AddrMismatch};
    }

    std::scoped_lock g(lock_);
    Bytes key = spend_key(tx);
    if (spent_.count(key)) {
        statuses_[tx.txid()] = {TxStatus::State::Rejected, 0, RejectReason::DoubleSpend};
        return {false, RejectReason::DoubleSpend};
    }

    if (full_checks) {
        for (const MempoolEntry& e : mempool_) {
            if (spend_key(e.tx) == key) {
                statuses_[tx.txid()] = {TxStatus::State::Rejected, 0, RejectReason::DoubleSpend};
                return {false, RejectReason::DoubleSpend};
            }
        }
        auto it = balances_.find(tx.addr);
        uint64_t spendable = it == balances_.end() ? 0 : it->second;
        if (tx.metadata.amount > spendable) {
            statuses_[tx.txid()] = {TxStatus::State::Rejected, 0, RejectReason::Overdraft};
            return {false, RejectReason::Overdraft};
        }
        balances_[tx.addr] = spendable - tx.metadata.amount;  // escrow
    }

    mempool_.push_back({tx, height_, full_checks});
    statuses_[tx.txid()] = {TxStatus::State::Pending, 0, RejectReason::None};
    return {true, RejectReason::None};
}

SubmitResult ChainSim::submit(const Transaction& tx) { return ingress(tx, true); }

SubmitResult ChainSim::broadcast_raw(const Transaction& tx) { return ingress(tx, false); }

void ChainSim::confirm_block() {
    // Called under lock_, once per block after height_ was bumped.
    for (auto it = pending_deposits_.begin(); it != pending_deposits_.end();) {
        if (it->submit_height + depth_ <= height_) {
            balances_[it->addr] += it->amount;
            deposits_confirmed_ += it->amount;
            it = pending_deposits_.erase(it);
        } else {
            ++it;
        }
    }

    for (auto it = mempool_.begin(); it != mempool_.end();) {
        if (it->submit_height + depth_ > height_) {
            ++it;
            continue;
        }
        const Transaction& tx = it->tx;
        Bytes key = spend_key(tx);
        if (spent_.count(key)) {
            if (it->escrowed) balances_[tx.addr] += tx.metadata.amount;  // refund escrow
            statuses_[tx.txid()] = {TxStatus::State::Rejected, 0, RejectReason::DoubleSpend};
            it = mempool_.erase(it);
            continue;
        }
        if (!it->escrowed) {
            uint64_t available = balances_[tx.addr];
            if (available < tx.metadata.amount) {
                statuses_[tx.txid()] = {TxStatus::State::Rejected, 0, RejectReason::Overdraft};
                it = mempool_.erase(it);
                continue;
            }
            balances_[tx.addr] = available - tx.metadata.amount;
        }
        spent_.insert(key);
        received_[tx.metadata.recipient] += tx.metadata.amount;
        spends_confirmed_ += tx.metadata.amount;
        confirmed_.emplace_back(tx, height_);
        statuses_[tx.txid()] = {TxStatus::State::Confirmed, height_, RejectReason::None};
        it = mempool_.erase(it);
    }
}

uint64_t ChainSim::advance_blocks(uint64_t n) {
    if (n == 0) throw Error(ErrorCode::ZeroAmount, "advance of zero blocks");
    std::scoped_lock g(lock_);
    for (uint64_t i = 0; i < n; ++i) {
        ++height_;
        confirm_block();
        if (!conservation_locked()) {
            throw std::logic_error("chain conservation violated");  // internal invariant
        }
    }
    return height_;
}

uint64_t ChainSim::balance_of(const crypto::Address& addr) const {
    std::scoped_lock g(lock_);
    auto it = balances_.find(addr);
    return it == balances_.end() ? 0 : it->second;
}

uint64_t ChainSim::received_of(const crypto::Address& addr) const {
    std::scoped_lock g(lock_);
    auto it = received_.find(addr);
    return it == received_.end() ? 0 : it->second;
}

TxStatus ChainSim::tx_status(const Transaction& tx) const {
    std::scoped_lock g(lock_);
    auto it = statuses_.find(tx.txid());
    if (it == statuses_.end()) return TxStatus{TxStatus::State::Rejected, 0, RejectReason::NotFound};
    return it->second;
}

uint64_t ChainSim::height() const {
    std::scoped_lock g(lock_);
    return height_;
}

std::vector<std::pair<Transaction, uint64_t>> ChainSim::confirmed() const {
    std::scoped_lock g(lock_);
    return confirmed_;
}

ChainSim::Totals ChainSim::totals() const {
    std::scoped_lock g(lock_);
    Totals t;
    t.deposits_confirmed = deposits_confirmed_;
    t.spends_confirmed = spends_confirmed_;
    for (const auto& [addr, v] : balances_) t.balances_sum += v;
    for (const MempoolEntry& e : mempool_) {
        if (e.escrowed) t.mempool_escrowed += e.tx.metadata.amount;
    }
    return t;
}

bool ChainSim::conservation_locked() const {
    uint64_t balances_sum = 0;
    for (const auto& [addr, v] : balances_) balances_sum += v;
    uint64_t escrowed = 0;
    for (const MempoolEntry& e : mempool_) {
        if (e.escrowed) escrowed += e.tx.metadata.amount;
    }
    return balances_sum + escrowed == deposits_confirmed_ - spends_confirmed_;
}

bool ChainSim::conservation_holds() const {
    std::scoped_lock g(lock_);
    return conservation_locked();
}

namespace {
constexpr std::string_view kDumpMagic = "DCHAIN1";
}

void ChainSim::dump(const std::filesystem::path& path) const {
    std::scoped_lock g(lock_);
    ByteWriter w;
    w.raw(to_bytes(kDumpMagic));
    w.u32le(1);  // format version
    w.u32le(depth_);
    w.u64le(height_);
    w.u64le(deposits_confirmed_);
    w.u64le(spends_confirmed_);

    w.u32le(static_cast<uint32_t>(balances_.size()));
    for (const auto& [addr, v] : balances_) {
        w.raw(addr.raw());
        w.u64le(v);
    }
    w.u32le(static_cast<uint32_t>(received_.size()));
    for (const auto& [addr, v] : received_) {
        w.raw(addr.raw());
        w.u64le(v);
    }
    w.u32le(static_cast<uint32_t>(spent_.size()));
    for (const Bytes& k : spent_) w.raw(k);
    w.u32le(static_cast<uint32_t>(confirmed_.size()));
    for (const auto& [tx, h] : confirmed_) {
        w.field(tx.wire());
        w.u64le(h);
    }
    w.u32le(static_cast<uint32_t>(mempool_.size()));
    for (const MempoolEntry& e : mempool_) {
        w.field(e.tx.wire());
        w.u64le(e.submit_height);
        w.u8(e.escrowed ? 1 : 0);
    }
    w.u32le(static_cast<uint32_t>(pending_deposits_.size()));
    for (const PendingDeposit& d : pending_deposits_) {
        w.raw(d.addr.raw());
        w.u64le(d.amount);
        w.u64le(d.submit_height);
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write chain dump: " + path.string());
    Bytes bytes = w.take();
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::unique_ptr<ChainSim> ChainSim::load(const std::filesystem::path& path,
                                         crypto::Suite suite) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read chain dump: " + path.string());
    Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    ByteReader r(bytes);
    if (to_bytes(r.raw(kDumpMagic.size())) != to_bytes(kDumpMagic)) {
        throw Error(ErrorCode::MalformedMessage, "bad chain dump magic");
    }
    if (r.u32le() != 1) throw Error(ErrorCode::MalformedMessage, "unsupported chain dump version");

    uint32_t depth = r.u32le();
    auto owned = std::make_unique<ChainSim>(suite, depth);
    ChainSim& c = *owned;
    c.height_ = r.u64le();
    c.deposits_confirmed_ = r.u64le();
    c.spends_confirmed_ = r.u64le();

    for (uint32_t i = 0, n = r.u32le(); i < n; ++i) {
        crypto::Address a = crypto::Address::from_raw(r.raw(crypto::kAddressRawLen));
        c.balances_[a] = r.u64le();
    }
    for (uint32_t i = 0, n = r.u32le(); i < n; ++i) {
        crypto::Address a = crypto::Address::from_raw(r.raw(crypto::kAddressRawLen));
        c.received_[a] = r.u64le();
    }
    for (uint32_t i = 0, n = r.u32le(); i < n; ++i) {
        c.spent_.insert(to_bytes(r.raw(crypto::kAddressRawLen + 8)));
    }
    for (uint32_t i = 0, n = r.u32le(); i < n; ++i) {
        Transaction tx = Transaction::parse(r.field());
        uint64_t h = r.u64le();
        c.confirmed_.emplace_back(tx, h);
        c.statuses_[tx.txid()] = {TxStatus::State::Confirmed, h, RejectReason::None};
    }
    for (uint32_t i = 0, n = r.u32le(); i < n; ++i) {
        MempoolEntry e;
        e.tx = Transaction::parse(r.field());
        e.submit_height = r.u64le();
        e.escrowed = r.u8() == 1;
        c.statuses_[e.tx.txid()] = {TxStatus::State::Pending, 0, RejectReason::None};
        c.mempool_.push_back(std::move(e));
    }
    for (uint32_t i = 0, n = r.u32le(); i < n; ++i) {
        PendingDeposit d;
        d.addr = crypto::Address::from_raw(r.raw(crypto::kAddressRawLen));
        d.amount = r.u64le();
        d.submit_height = r.u64le();
        c.pending_deposits_.push_back(d);
    }
    r.expect_end();
    return owned;
}

}  // namespace delegacoin::chain
