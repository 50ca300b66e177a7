#pragma once

#include <cstdint>
#include <string_view>

namespace itcb {

enum class Agent { ThompsonSampling, Ucb };

constexpr std::string_view agent_name(Agent agent) noexcept {
    return agent == Agent::ThompsonSampling ? "ts" : "ucb";
}

/// One period (bandit) or one episode (MDP) of a run.
///
/// For MDPs `action` is the first action of the episode and `outcome` the
/// episode return; regret and information gain are per episode.
struct StepRecord {
    std::int64_t period = 0;  // 1-based
    std::int64_t action = 0;
    double outcome = 0.0;
    double regret = 0.0;
    double info_gain = 0.0;
    /// Regret-to-information rate Γ reported for this period.
    double width = 0.0;
    /// Information budget for the first `period` periods.
    double budget = 0.0;
};

}  // namespace itcb
