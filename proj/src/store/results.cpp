#include "easyrl/store/results.hpp"

#include <charconv>
#include <sstream>

#include "easyrl/common/error.hpp"
#include "easyrl/store/model_store.hpp"

namespace easyrl::store {
namespace {

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

template <typename T>
T parseCell(std::string_view cell, std::size_t line, const char* column) {
  T value{};
  auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || end != cell.data() + cell.size()) {
    fail(ErrorCode::Format, "results line " + std::to_string(line) + ": bad " + column + " '" +
                                std::string(cell) + "'");
  }
  return value;
}

std::optional<double> parseOptional(std::string_view cell, std::size_t line, const char* column) {
  if (cell.empty()) return std::nullopt;
  return parseCell<double>(cell, line, column);
}

}  // namespace

std::string formatResultsCsv(const std::vector<engine::MetricEvent>& events) {
  std::string out(kResultsHeader);
  out += '\n';
  for (const auto& e : events) {
    out += std::to_string(e.episodeIndex);
    out += ',';
    out += shortest(e.totalReward);
    out += ',';
    if (e.meanLoss) out += shortest(*e.meanLoss);
    out += ',';
    if (e.epsilon) out += shortest(*e.epsilon);
    out += ',';
    out += std::to_string(e.stepsInEpisode);
    out += ',';
    out += std::to_string(e.wallClockMs);
    out += '\n';
  }
  return out;
}

void writeResultsCsv(const std::vector<engine::MetricEvent>& events,
                     const std::filesystem::path& path) {
  const std::string text = formatResultsCsv(events);
  writeFileAtomic(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

std::vector<engine::MetricEvent> parseResultsCsv(std::string_view text) {
  std::vector<engine::MetricEvent> out;
  std::size_t lineNo = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (lineNo == 1) {
      if (line != kResultsHeader) fail(ErrorCode::Format, "unexpected results header");
      continue;
    }
    if (line.empty()) continue;

    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
      auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 6) {
      fail(ErrorCode::Format, "results line " + std::to_string(lineNo) + " has " +
                                  std::to_string(cells.size()) + " cells, want 6");
    }
    engine::MetricEvent e;
    e.episodeIndex = parseCell<std::size_t>(cells[0], lineNo, "episode");
    e.totalReward = parseCell<double>(cells[1], lineNo, "total_reward");
    e.meanLoss = parseOptional(cells[2], lineNo, "mean_loss");
    e.epsilon = parseOptional(cells[3], lineNo, "epsilon");
    e.stepsInEpisode = parseCell<std::size_t>(cells[4], lineNo, "steps");
    e.wallClockMs = parseCell<std::int64_t>(cells[5], lineNo, "wall_clock_ms");
    out.push_back(std::move(e));
  }
  if (lineNo == 0) fail(ErrorCode::Format, "empty results file");
  return out;
}

}  // namespace easyrl::store
