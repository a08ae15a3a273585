#pragma once

#include <string>
#include <vector>

namespace delegacoin::harness {

struct ScenarioVerdict {
    bool defended = true;
    std::vector<std::string> transcript;
};

std::vector<std::string> scenario_names();

// Runs a scripted malicious owner/delegatee against the full stack. Breached
// means a safety invariant (conservation, single confirmation per delegated
// amount) was actually violated; the transcript names the check that stopped
// each attack step. Throws Error(UnknownScenario) for unregistered names.
ScenarioVerdict run_attack_scenario(std::string_view name, uint64_t seed = 1);

}  // namespace delegacoin::harness
