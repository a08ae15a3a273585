#include "delegacoin/cli/commands.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "delegacoin/errors.hpp"
#include "delegacoin/harness/scenarios.hpp"
#include "delegacoin/runtime/protocol.hpp"

namespace delegacoin::cli {

using namespace delegacoin::runtime;

namespace {

uint64_t parse_u64(std::string_view s) {
    uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw Error(ErrorCode::MalformedMessage, "bad number: " + std::string(s));
    }
    return v;
}

// Demo fault items: transport faults go to the FaultPlan; "crash@i:step"
// items crash delegation i (0-based) at the named step.
struct DemoFaults {
    FaultPlan transport;
    std::map<uint64_t, CrashPoint> crashes;
};

CrashPoint crash_point_from(std::string_view step) {
    if (step == "update") return CrashPoint::EnclaveAfterStateUpdate;
    if (step == "txgen") return CrashPoint::EnclaveAfterTransactionGeneration;
    if (step == "encrypt") return CrashPoint::EnclaveAfterEncryption;
    if (step == "seal") return CrashPoint::EnclaveAfterSealBuild;
    if (step == "write") return CrashPoint::BeforeDurableWrite;
    if (step == "sent") return CrashPoint::AfterDurableWrite;
    throw Error(ErrorCode::MalformedMessage, "unknown crash step: " + std::string(step));
}

DemoFaults split_faults(const std::string& spec) {
    DemoFaults out;
    std::string transport_items;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        if (item.starts_with("crash@")) {
            std::string rest = item.substr(6);
            size_t colon = rest.find(':');
            if (colon == std::string::npos) {
                throw Error(ErrorCode::MalformedMessage, "crash fault needs a step");
            }
            out.crashes[parse_u64(rest.substr(0, colon))] =
                crash_point_from(rest.substr(colon + 1));
        } else {
            if (!transport_items.empty()) transport_items += ',';
            transport_items += item;
        }
    }
    out.transport = FaultPlan::parse(transport_items);
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

double mean_ms(const std::function<void()>& op, int iterations) {
    using clock = std::chrono::steady_clock;
    auto start = clock::now();
    for (int i = 0; i < iterations; ++i) op();
    auto elapsed = std::chrono::duration<double, std::milli>(clock::now() - start);
    return elapsed.count() / iterations;
}

struct LinearFit {
    double slope = 0, intercept = 0, r2 = 0;
};

LinearFit fit_line(const std::vector<std::pair<uint64_t, uint64_t>>& points) {
    const double n = static_cast<double>(points.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [x, y] : points) {
        sx += static_cast<double>(x);
        sy += static_cast<double>(y);
        sxx += static_cast<double>(x) * static_cast<double>(x);
        sxy += static_cast<double>(x) * static_cast<double>(y);
    }
    LinearFit f;
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / n;
    double mean_y = sy / n;
    double ss_res = 0, ss_tot = 0;
    for (auto [x, y] : points) {
        double pred = f.slope * static_cast<double>(x) + f.intercept;
        ss_res += (static_cast<double>(y) - pred) * (static_cast<double>(y) - pred);
        ss_tot += (static_cast<double>(y) - mean_y) * (static_cast<double>(y) - mean_y);
    }
    f.r2 = ss_tot == 0 ? 1.0 : 1.0 - ss_res / ss_tot;
    return f;
}

}  // namespace

std::vector<uint64_t> parse_schedule(const std::string& csv) {
    std::vector<uint64_t> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(parse_u64(item));
    }
    if (out.empty()) throw Error(ErrorCode::MalformedMessage, "empty schedule");
    return out;
}

CommandOutcome cmd_demo(const RunConfig& config) {
    std::ostringstream out;
    int exit_code = 0;

    DemoFaults faults = split_faults(config.faults);
    EnvOptions opts;
    opts.confirmation_depth = config.depth;
    opts.faults = faults.transport;

    std::filesystem::create_directories(config.out_dir);
    std::filesystem::path store_path = config.out_dir / "owner.seals";
    std::filesystem::remove(store_path);

    ProtocolEnv env(config.seed, opts);
    DelegateeNode delegatee(env);
    auto owner = std::make_unique<OwnerNode>(env, store_path);

    out << "demo seed=" << config.seed << " deposit=" << config.deposit << " depth="
        << config.depth << "\n";

    run_setup(*owner, delegatee);
    out << "setup: session established, sid=" << to_hex(delegatee.identity.sid) << "\n";

    DepositResult dep = run_deposit(*owner, config.deposit);
    out << "deposit: " << config.deposit << " uBTC confirmed at " << dep.addr.text()
        << ", enclave balance " << dep.enclave_balance << "\n";

    struct Delivered {
        uint64_t seq;
        uint64_t amount;
        crypto::Address recipient;
    };
    std::vector<Delivered> delivered;

    for (size_t i = 0; i < config.schedule.size(); ++i) {
        uint64_t amount = config.schedule[i];
        crypto::Address recipient = env.fresh_recipient();
        CrashPoint crash = CrashPoint::None;
        if (auto it = faults.crashes.find(i); it != faults.crashes.end()) crash = it->second;

        try {
            DelegationResult res = run_delegation(*owner, amount, recipient, crash);
            delegatee_pump(delegatee);
            bool arrived = delegatee.seen_seqs.count(res.seq) > 0;
            out << "delegation " << i + 1 << ": " << amount << " uBTC -> seq " << res.seq
                << (arrived ? ", delivered" : ", lost in transit") << "\n";
            if (!arrived) {
                resend_delegation(*owner, res.seq);
                delegatee_pump(delegatee);
                out << "delegation " << i + 1 << ": resent, delivered="
                    << (delegatee.seen_seqs.count(res.seq) > 0 ? "true" : "false") << "\n";
            }
            if (delegatee.seen_seqs.count(res.seq)) {
                delivered.push_back({res.seq, amount, recipient});
            }
        } catch (const SimulatedCrash& c) {
            out << "delegation " << i + 1 << ": crashed (" << c.what() << "), recovering\n";
            owner = recover_owner(env, store_path, delegatee);
            out << "recovery: balance restored to " << owner->balance << "\n";
            exit_code = 1;
        } catch (const Error& e) {
            out << "delegation " << i + 1 << ": failed: " << e.what() << "\n";
            exit_code = 1;
        }
    }

    for (const Delivered& d : delivered) {
        SpendResult res = run_spend(delegatee, d.seq);
        out << "spend seq " << d.seq << ": "
            << (res.submit.accepted
                    ? "accepted"
                    : "rejected " + std::string(chain::reject_reason_name(res.submit.reason)))
            << "\n";
    }
    env.chain().advance_blocks(config.depth);

    out << "final: owner enclave balance " << owner->balance << ", chain balance "
        << env.chain().balance_of(dep.addr) << ", confirmed spends "
        << env.chain_state().confirmed().size() << "\n";
    for (const Delivered& d : delivered) {
        out << "  recipient " << d.recipient.text() << " received "
            << env.chain_state().received_of(d.recipient) << "\n";
    }
    out << "conservation: " << (env.chain_state().conservation_holds() ? "ok" : "VIOLATED")
        << "\n";

    std::ostringstream transcript;
    for (const std::string& line : env.transcript().lines()) transcript << line << "\n";
    write_file(config.out_dir / "transcript.txt", transcript.str());
    env.chain_state().dump(config.out_dir / "chain.bin");

    return CommandOutcome{exit_code, out.str()};
}

CommandOutcome cmd_bench(const RunConfig& config) {
    constexpr int kIterations = 500;
    std::ostringstream tsv;
    tsv << "phase\toperation\tmean_ms\n";

    auto suite = crypto::default_suite();
    Drbg rng(config.seed);

    EnvOptions opts;
    opts.confirmation_depth = config.depth;
    std::filesystem::create_directories(config.out_dir);
    std::filesystem::path store_path = config.out_dir / "bench.seals";
    std::filesystem::remove(store_path);

    ProtocolEnv env(config.seed, opts);
    DelegateeNode delegatee(env);
    OwnerNode owner(env, store_path);
    run_setup(owner, delegatee);
    run_deposit(owner, static_cast<uint64_t>(kIterations) * 4);
    crypto::Address addr = *owner.addr;
    crypto::Address recipient = env.fresh_recipient();
    namespace owner_cmd = enclave::owner_cmd;

    auto row = [&](std::string_view phase, std::string_view op, double ms) {
        std::ostringstream line;
        line.setf(std::ios::fixed);
        line.precision(6);
        line << phase << "\t" << op << "\t" << ms;
        tsv << line.str() << "\n";
    };

    row("system-setup", "enclave-initiation", mean_ms([&] {
            env.hw().load(enclave::OwnerProgram::kIdentity);
        }, kIterations));

    crypto::SigKeypair kp = suite.sig->keygen(rng);
    row("system-setup", "public-key-generation-tx",
        mean_ms([&] { (void)crypto::derive_pubkey(kp.sk); }, kIterations));
    crypto::SecretScalar sk_sample{};
    row("system-setup", "private-key-generation-tx",
        mean_ms([&] { sk_sample = rng.array<32>(); }, kIterations));
    (void)sk_sample;

    row("coin-deposit", "address-creation",
        mean_ms([&] { (void)crypto::derive_address(kp.vk); }, kIterations));

    {
        chain::ChainSim bench_chain(suite, config.depth);
        row("coin-deposit", "coin-deposit", mean_ms([&] {
                bench_chain.deposit(addr, 1);
                bench_chain.advance_blocks(config.depth);
            }, kIterations));
    }

    row("coin-delegation", "transaction-generation", mean_ms([&] {
            env.hw().run(owner.hdl, owner_cmd::state_update(addr, 1));
            env.hw().run(owner.hdl, owner_cmd::transaction_generation(addr, 1, recipient));
            env.hw().run(owner.hdl, owner_cmd::state_seal(addr));
        }, kIterations));

    row("coin-delegation", "remote-attestation", mean_ms([&] {
            hw::Quote q = env.hw().run_quote(owner.hdl, owner_cmd::state_seal(addr));
            if (!hw::HwEmulator::quote_verify(env.pms(), q)) {
                throw std::logic_error("benchmark quote failed to verify");
            }
        }, kIterations));

    row("coin-delegation", "state-update", mean_ms([&] {
            env.hw().run(owner.hdl, owner_cmd::state_update(addr, 1));
        }, kIterations));

    row("coin-delegation", "state-seal", mean_ms([&] {
            env.hw().run(owner.hdl, owner_cmd::state_seal(addr));
        }, kIterations));

    // Aggregate: the whole offline delegation path including the durable
    // seal write and the transport send.
    {
        std::filesystem::path path2 = config.out_dir / "bench_path.seals";
        std::filesystem::remove(path2);
        ProtocolEnv env2(config.seed + 1, opts);
        DelegateeNode d2(env2);
        OwnerNode o2(env2, path2);
        run_setup(o2, d2);
        run_deposit(o2, kIterations);
        crypto::Address r2 = env2.fresh_recipient();
        double path_ms = mean_ms([&] { run_delegation(o2, 1, r2); }, kIterations);
        delegatee_pump(d2);
        row("coin-delegation", "full-delegation-path", path_ms);
        std::filesystem::remove(path2);
    }

    std::string table = tsv.str();
    write_file(config.out_dir / "bench.tsv", table);
    std::filesystem::remove(store_path);
    return CommandOutcome{0, table};
}

CommandOutcome cmd_diskgrowth(const RunConfig& config) {
    static constexpr uint64_t kSetSizes[] = {1, 10, 100, 200, 400, 600, 800, 1000};

    std::filesystem::create_directories(config.out_dir);
    std::vector<std::pair<uint64_t, uint64_t>> points;
    std::ostringstream csv;
    csv << "transactions,bytes\n";

    EnvOptions opts;
    opts.confirmation_depth = config.depth;

    for (uint64_t n : kSetSizes) {
        std::filesystem::path store_path =
            config.out_dir / ("diskgrowth_" + std::to_string(n) + ".seals");
        std::filesystem::remove(store_path);

        ProtocolEnv env(config.seed + n, opts);
        DelegateeNode delegatee(env);
        OwnerNode owner(env, store_path);
        run_setup(owner, delegatee);
        run_deposit(owner, n);
        crypto::Address recipient = env.fresh_recipient();
        for (uint64_t i = 0; i < n; ++i) {
            run_delegation(owner, 1, recipient);
        }
        delegatee_pump(delegatee);
        uint64_t bytes = owner.store.file_bytes();
        points.emplace_back(n, bytes);
        csv << n << "," << bytes << "\n";
        std::filesystem::remove(store_path);
    }

    LinearFit fit = fit_line(points);
    std::string csv_text = csv.str();
    write_file(config.out_dir / "diskgrowth.csv", csv_text);

    std::ostringstream out;
    out << csv_text;
    out.setf(std::ios::fixed);
    out.precision(6);
    out << "linear fit: slope=" << fit.slope << " bytes/tx, intercept=" << fit.intercept
        << ", r2=" << fit.r2 << "\n";
    return CommandOutcome{0, out.str()};
}

CommandOutcome cmd_attack(const std::string& name, uint64_t seed) {
    std::ostringstream out;
    try {
        harness::ScenarioVerdict v = harness::run_attack_scenario(name, seed);
        for (const std::string& line : v.transcript) out << line << "\n";
        out << "verdict: " << (v.defended ? "defended" : "breached") << "\n";
        return CommandOutcome{v.defended ? 0 : 1, out.str()};
    } catch (const Error& e) {
        if (e.code() == ErrorCode::UnknownScenario) {
            out << "unknown scenario: " << name << "\nregistered scenarios:\n";
            for (const std::string& s : harness::scenario_names()) out << "  " << s << "\n";
            return CommandOutcome{2, out.str()};
        }
        throw;
    }
}

}  // namespace delegacoin::cli
