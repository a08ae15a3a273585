#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace delegacoin::cli {

struct RunConfig {
    uint64_t seed = 42;
    uint64_t deposit = 500;              // uBTC
    std::vector<uint64_t> schedule = {200};
    uint32_t depth = 6;
    std::string faults;                  // e.g. "drop@4,crash@1:seal"
    std::filesystem::path out_dir = ".";
};

struct CommandOutcome {
    int exit_code = 0;  // 0 success, 1 protocol error, 2 usage error
    std::string output;
};

// Full setup -> deposit -> delegate -> spend run. Writes transcript.txt and
// chain.bin under out_dir; identical configs produce identical outputs.
CommandOutcome cmd_demo(const RunConfig& config);

// Per-operation timing table (500 iterations each) plus the aggregate
// delegation path. Writes bench.tsv under out_dir.
CommandOutcome cmd_bench(const RunConfig& config);

// Seal-store bytes for 1, 10, 100, 200, 400, 600, 800, 1000 delegations plus
// a least-squares fit. Writes diskgrowth.csv under out_dir.
CommandOutcome cmd_diskgrowth(const RunConfig& config);

CommandOutcome cmd_attack(const std::string& name, uint64_t seed);

std::vector<uint64_t> parse_schedule(const std::string& csv);  // throws Error(MalformedMessage)

}  // namespace delegacoin::cli
