#include "delegacoin/harness/scenarios.hpp"

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <map>
#include <sstream>

#include "delegacoin/errors.hpp"
#include "delegacoin/runtime/protocol.hpp"

namespace delegacoin::harness {

using namespace delegacoin::runtime;
namespace delegatee_cmd = enclave::delegatee_cmd;

namespace {

std::filesystem::path scenario_store(std::string_view name, uint64_t seed) {
    static std::atomic<int> n{0};
    std::ostringstream os;
    os << "delegacoin_scenario_" << name << "_" << seed << "_" << ::getpid() << "_" << n++;
    auto dir = std::filesystem::temp_directory_path() / os.str();
    std::filesystem::remove_all(dir);
    return dir / "owner.seals";
}

struct Script {
    ScenarioVerdict verdict;

    void note(const std::string& line) { verdict.transcript.push_back(line); }

    void defense(const std::string& what) { note("defense: " + what); }

    void attack_succeeded(const std::string& what) {
        verdict.defended = false;
        note("BREACH: " + what);
    }

    // Runs an attack step that must fail with the given error code.
    void expect_error(const std::string& what, ErrorCode want,
                      const std::function<void()>& step) {
        try {
            step();
            attack_succeeded(what + " was accepted");
        } catch (const Error& e) {
            if (e.code() == want) {
                defense(what + " stopped by " + std::string(error_code_name(want)));
            } else {
                note(std::string("note: ") + what + " failed differently: " + e.what());
                defense(what + " still rejected");
            }
        }
    }

    void expect_rejected(const std::string& what, chain::RejectReason want,
                         const chain::SubmitResult& res) {
        if (res.accepted) {
            attack_succeeded(what + " was accepted by the chain");
        } else if (res.reason == want) {
            defense(what + " rejected: " + std::string(chain::reject_reason_name(res.reason)));
        } else {
            note("note: " + what + " rejected with unexpected reason " +
                 std::string(chain::reject_reason_name(res.reason)));
            defense(what + " still rejected");
        }
    }
};

struct Stack {
    ProtocolEnv env;
    DelegateeNode d;
    std::unique_ptr<OwnerNode> o;
    crypto::Address merchant;

    Stack(std::string_view name, uint64_t seed)
        : env(seed), d(env), o(std::make_unique<OwnerNode>(env, scenario_store(name, seed))) {
        run_setup(*o, d);
        merchant = env.fresh_recipient();
    }
};

void check_chain_safety(Script& s, Stack& st, uint64_t deposit) {
    st.env.chain().advance_blocks(st.env.chain().confirmation_depth());
    uint64_t confirmed_total = 0;
    std::map<Bytes, int> per_spend;
    for (const auto& [tx, h] : st.env.chain_state().confirmed()) {
        confirmed_total += tx.metadata.amount;
        ByteWriter w;
        w.raw(tx.addr.raw());
        w.raw(tx.metadata.nonce);
        ++per_spend[w.take()];
    }
    for (const auto& [key, count] : per_spend) {
        if (count > 1) s.attack_succeeded("a delegated amount confirmed more than once");
    }
    if (confirmed_total > deposit) {
        s.attack_succeeded("confirmed spends exceed the deposit");
    } else {
        s.note("invariant: confirmed spends (" + std::to_string(confirmed_total) +
               ") within deposit (" + std::to_string(deposit) + ")");
    }
    if (!st.env.chain_state().conservation_holds()) {
        s.attack_succeeded("chain conservation violated");
    }
}

ScenarioVerdict double_delegate_two_delegatees(uint64_t seed) {
    Script s;
    Stack st("ddtd", seed);
    run_deposit(*st.o, 500);
    s.note("owner deposited 500 and delegates 200 to delegatee-1");
    DelegationResult del = run_delegation(*st.o, 200, st.merchant);
    delegatee_pump(st.d);

    // The malicious owner replays the same ciphertext to a second delegatee.
    DelegateeNode d2(st.env);
    s.note("malicious owner replays ct_tx to delegatee-2 (foreign session)");
    s.expect_error("replayed ciphertext at delegatee-2", ErrorCode::IntegrityFailure, [&] {
        crypto::SymCiphertext ct = crypto::SymCiphertext::parse(del.ct_wire);
        st.env.hw().run(d2.hdl, delegatee_cmd::complete_delegation(ct));
    });

    // Delegatee-1 colludes and hands the decrypted transaction over; both
    // race to spend it.
    SpendResult first = run_spend(st.d, del.seq);
    s.note("delegatee-1 decrypts and spends the transaction");
    if (!first.submit.accepted) s.attack_succeeded("honest spend was rejected");
    s.expect_rejected("delegatee-2 resubmission of the same transaction",
                      chain::RejectReason::DoubleSpend, st.env.chain().submit(first.tx));

    check_chain_safety(s, st, 500);
    return s.verdict;
}

ScenarioVerdict owner_front_run(uint64_t seed) {
    Script s;
    Stack st("ofr", seed);
    run_deposit(*st.o, 500);
    s.note("owner deposited 500 and delegates the full balance");
    DelegationResult del = run_delegation(*st.o, 500, st.merchant);
    delegatee_pump(st.d);

    s.note("malicious owner tries to delegate the already-delegated balance again");
    s.expect_error("second delegation of spent balance", ErrorCode::InsufficientBalance,
                   [&] { run_delegation(*st.o, 500, st.env.fresh_recipient()); });
    s.expect_error("front-running even one coin", ErrorCode::InsufficientBalance,
                   [&] { run_delegation(*st.o, 1, st.env.fresh_recipient()); });

    SpendResult spend = run_spend(st.d, del.seq);
    if (spend.submit.accepted) {
        s.note("delegatee's spend of the delegated 500 is accepted");
    } else {
        s.attack_succeeded("delegatee could not spend the delegated amount");
    }
    check_chain_safety(s, st, 500);
    return s.verdict;
}

ScenarioVerdict delegatee_forge_amount(uint64_t seed) {
    Script s;
    Stack st("dfa", seed);
    run_deposit(*st.o, 500);
    DelegationResult del = run_delegation(*st.o, 200, st.merchant);
    delegatee_pump(st.d);

    SpendResult honest = run_spend(st.d, del.seq);
    if (!honest.submit.accepted) s.attack_succeeded("honest spend was rejected");
    s.note("delegatee decrypted a 200 transaction and forges the amount to 450");

    Transaction forged = honest.tx;
    forged.metadata.amount = 450;
    forged.metadata.nonce[0] ^= 0xA5;  // fresh nonce to dodge the duplicate check
    s.expect_rejected("forged-amount transaction", chain::RejectReason::BadSig,
                      st.env.chain().submit(forged));

    check_chain_safety(s, st, 500);
    return s.verdict;
}

ScenarioVerdict ct_tx_replay(uint64_t seed) {
    Script s;
    Stack st("replay", seed);
    run_deposit(*st.o, 500);
    DelegationResult del = run_delegation(*st.o, 200, st.merchant);
    delegatee_pump(st.d);

    SpendResult first = run_spend(st.d, del.seq);
    if (!first.submit.accepted) s.attack_succeeded("honest spend was rejected");
    s.note("delegatee replays the same ct_tx and resubmits the decrypted transaction");

    SpendResult replay = run_spend_ct(st.d, del.ct_wire);
    s.expect_rejected("replayed transaction", chain::RejectReason::DoubleSpend, replay.submit);
    s.expect_rejected("direct resubmission after confirmation wait",
                      chain::RejectReason::DoubleSpend, st.env.chain().submit(first.tx));

    check_chain_safety(s, st, 500);
    return s.verdict;
}

}  // namespace

std::vector<std::string> scenario_names() {
    return {"double-delegate-two-delegatees", "owner-front-run", "delegatee-forge-amount",
            "ct-tx-replay"};
}

ScenarioVerdict run_attack_scenario(std::string_view name, uint64_t seed) {
    if (name == "double-delegate-two-delegatees") return double_delegate_two_delegatees(seed);
    if (name == "owner-front-run") return owner_front_run(seed);
    if (name == "delegatee-forge-amount") return delegatee_forge_amount(seed);
    if (name == "ct-tx-replay") return ct_tx_replay(seed);
    throw Error(ErrorCode::UnknownScenario, std::string(name));
}

}  // namespace delegacoin::harness
