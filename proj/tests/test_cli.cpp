#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "delegacoin/cli/commands.hpp"
#include "delegacoin/errors.hpp"

using namespace delegacoin;
using namespace delegacoin::cli;

namespace {

std::filesystem::path temp_out(const std::string& tag) {
    static std::atomic<int> n{0};
    auto dir = std::filesystem::temp_directory_path() /
               ("delegacoin_cli_" + tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(n++));
    std::filesystem::remove_all(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("demo runs the full flow") {
    RunConfig config;
    config.seed = 11;
    config.deposit = 500;
    config.schedule = {200};
    config.out_dir = temp_out("demo");

    CommandOutcome res = cmd_demo(config);
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("final: owner enclave balance 300") != std::string::npos);
    CHECK(res.output.find("confirmed spends 1") != std::string::npos);
    CHECK(res.output.find("conservation: ok") != std::string::npos);
    CHECK(std::filesystem::exists(config.out_dir / "transcript.txt"));
    CHECK(std::filesystem::exists(config.out_dir / "chain.bin"));
}

TEST_CASE("demo reports partial failure with exit code 1") {
    RunConfig config;
    config.seed = 12;
    config.deposit = 500;
    config.schedule = {200, 400};
    config.out_dir = temp_out("partial");

    CommandOutcome res = cmd_demo(config);
    CHECK(res.exit_code == 1);
    CHECK(res.output.find("InsufficientBalance") != std::string::npos);
    // The first delegation still went through.
    CHECK(res.output.find("delegation 1: 200 uBTC") != std::string::npos);
}

TEST_CASE("demo is reproducible for a fixed config") {
    RunConfig config;
    config.seed = 13;
    config.schedule = {100, 50};

    config.out_dir = temp_out("det-a");
    CommandOutcome a = cmd_demo(config);
    std::string transcript_a = slurp(config.out_dir / "transcript.txt");

    config.out_dir = temp_out("det-b");
    CommandOutcome b = cmd_demo(config);
    std::string transcript_b = slurp(config.out_dir / "transcript.txt");

    CHECK(a.output == b.output);
    CHECK(transcript_a == transcript_b);
    CHECK_FALSE(transcript_a.empty());
}

TEST_CASE("demo survives an injected crash and recovers") {
    RunConfig config;
    config.seed = 14;
    config.deposit = 500;
    config.schedule = {200, 100};
    config.faults = "crash@0:seal";
    config.out_dir = temp_out("crash");

    CommandOutcome res = cmd_demo(config);
    CHECK(res.exit_code == 1);
    CHECK(res.output.find("crashed") != std::string::npos);
    CHECK(res.output.find("recovery: balance restored to 500") != std::string::npos);
    // The second delegation proceeds on the recovered enclave.
    CHECK(res.output.find("delegation 2: 100 uBTC") != std::string::npos);
}

TEST_CASE("demo transport drop is resent") {
    RunConfig config;
    config.seed = 15;
    config.schedule = {150};
    config.faults = "drop@4";  // the first delegate envelope (after 4 setup sends)
    config.out_dir = temp_out("drop");

    CommandOutcome res = cmd_demo(config);
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("lost in transit") != std::string::npos);
    CHECK(res.output.find("resent, delivered=true") != std::string::npos);
    CHECK(res.output.find("confirmed spends 1") != std::string::npos);
}

TEST_CASE("bench emits the expected table") {
    RunConfig config;
    config.seed = 16;
    config.out_dir = temp_out("bench");

    CommandOutcome res = cmd_bench(config);
    CHECK(res.exit_code == 0);

    std::istringstream lines(res.output);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "phase\toperation\tmean_ms");

    std::vector<std::string> ops;
    std::map<std::string, double> means;
    std::string line;
    while (std::getline(lines, line)) {
        std::istringstream cells(line);
        std::string phase, op, ms;
        std::getline(cells, phase, '\t');
        std::getline(cells, op, '\t');
        std::getline(cells, ms, '\t');
        ops.push_back(op);
        means[op] = std::stod(ms);
    }

    std::vector<std::string> expected = {
        "enclave-initiation", "public-key-generation-tx", "private-key-generation-tx",
        "address-creation",   "coin-deposit",             "transaction-generation",
        "remote-attestation", "state-update",             "state-seal",
        "full-delegation-path"};
    CHECK(ops == expected);
    CHECK(means["state-update"] < means["state-seal"]);
    CHECK(means["full-delegation-path"] < 50.0);
    CHECK(slurp(config.out_dir / "bench.tsv") == res.output);
}

TEST_CASE("attack subcommand") {
    CommandOutcome ok = cmd_attack("owner-front-run", 3);
    CHECK(ok.exit_code == 0);
    CHECK(ok.output.find("verdict: defended") != std::string::npos);

    CommandOutcome unknown = cmd_attack("nosuch", 3);
    CHECK(unknown.exit_code == 2);
    CHECK(unknown.output.find("registered scenarios") != std::string::npos);
}

TEST_CASE("schedule parsing") {
    CHECK(parse_schedule("200") == std::vector<uint64_t>{200});
    CHECK(parse_schedule("1,2,3") == std::vector<uint64_t>{1, 2, 3});
    CHECK_THROWS_AS(parse_schedule(""), Error);
    CHECK_THROWS_AS(parse_schedule("12a"), Error);
}
