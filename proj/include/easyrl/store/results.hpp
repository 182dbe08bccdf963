#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "easyrl/engine/events.hpp"

namespace easyrl::store {

inline constexpr std::string_view kResultsHeader =
    "episode,total_reward,mean_loss,epsilon,steps,wall_clock_ms";

// One row per metric event, in order. Reals use the shortest form that
// round-trips; absent optionals are empty cells.
std::string formatResultsCsv(const std::vector<engine::MetricEvent>& events);
void writeResultsCsv(const std::vector<engine::MetricEvent>& events,
                     const std::filesystem::path& path);

// Inverse of formatResultsCsv. sessionId is left empty.
std::vector<engine::MetricEvent> parseResultsCsv(std::string_view text);

}  // namespace easyrl::store
