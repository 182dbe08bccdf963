#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "easyrl/agents/builtin.hpp"
#include "easyrl/common/error.hpp"
#include "easyrl/engine/engine.hpp"
#include "easyrl/common/rng.hpp"
#include "easyrl/store/model_store.hpp"
#include "easyrl/store/results.hpp"

using namespace easyrl;
using namespace easyrl::store;
namespace fs = std::filesystem;

namespace {

// bitwise reflected CRC-32, poly 0xEDB88320
std::uint32_t crcOracle(const std::vector<std::uint8_t>& bytes) {
  std::uint32_t c = 0xFFFFFFFFu;
  for (auto b : bytes) {
    c ^= b;
    for (int k = 0; k < 8; ++k) c = (c & 1) ? (c >> 1) ^ 0xEDB88320u : c >> 1;
  }
  return ~c;
}

ErrorCode codeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::Internal;
}

std::string envFor(const std::string& agentId) {
  if (agentId == "qlearning" || agentId == "sarsa") return "FrozenLakeSlippery-v0";
  if (agentId == "drqn" || agentId == "adrqn") return "EMarket-v0";
  return "CartPole-v1";
}

ModelArtifact trained(engine::Engine& eng, const std::string& agentId, std::size_t episodes = 3) {
  engine::SessionConfig c;
  c.envId = envFor(agentId);
  c.agentId = agentId;
  c.hyperparameters = agents::findBuiltinAgent(agentId)->defaults;
  c.hyperparameters.episodes = episodes;
  c.hyperparameters.hiddenLayers = {8};
  c.hyperparameters.batchSize = 8;
  c.timing = engine::Timing::None;
  auto id = eng.createSession(c).sessionId;
  eng.run(id);
  return eng.exportModel(id);
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("easyrl_store_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::uint64_t metaLength(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t n;
  std::memcpy(&n, bytes.data() + 8, 8);
  return n;
}

nlohmann::json metadataOf(const std::vector<std::uint8_t>& bytes) {
  return nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + metaLength(bytes));
}

}  // namespace

TEST_SUITE("store") {

TEST_CASE("crc32 matches the reference") {
  const std::string check = "123456789";
  std::vector<std::uint8_t> v(check.begin(), check.end());
  CHECK(crc32(v) == 0xCBF43926u);
  CHECK(crcOracle(v) == 0xCBF43926u);
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::uint8_t> bytes(rng.uniformInt(300));
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.uniformInt(256));
    CHECK(crc32(bytes) == crcOracle(bytes));
  }
}

TEST_CASE("file layout") {
  engine::Engine eng({1});
  auto a = trained(eng, "qlearning");
  auto bytes = encodeModel(a);
  CHECK(std::memcmp(bytes.data(), "EZRL", 4) == 0);
  std::uint32_t version;
  std::memcpy(&version, bytes.data() + 4, 4);
  CHECK(version == 1);
  const auto len = metaLength(bytes);
  auto meta = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + len);
  CHECK(meta["agentId"] == "qlearning");
  CHECK(meta["envId"] == "FrozenLakeSlippery-v0");
  CHECK(meta["episodesCompleted"] == 3);
  REQUIRE(meta["sections"].size() == 1);
  CHECK(meta["sections"][0]["shape"] == nlohmann::json::array({16, 4}));
  CHECK(meta["sections"][0]["byteLength"] == 16 * 4 * 8);
  CHECK(bytes.size() - 16 - len == 512);
  std::vector<std::uint8_t> blobs(bytes.begin() + 16 + len, bytes.end());
  CHECK(meta["checksum"] == crcOracle(blobs));
  // doubles are little-endian in section order
  double first;
  std::memcpy(&first, blobs.data(), 8);
  CHECK(first == a.sections[0].values[0]);
}

TEST_CASE("save and load round trip") {
  TempDir dir;
  engine::Engine eng({1});
  auto a = trained(eng, "dqn");
  const auto path = dir.path / "m.ezrl";
  saveModel(a, path);
  auto bytes = readFile(path);
  CHECK(bytes == encodeModel(a));
  auto b = loadModel(path);
  CHECK(b.agentId == a.agentId);
  CHECK(b.envId == a.envId);
  CHECK(b.env == a.env);
  CHECK(b.createdAt == a.createdAt);
  CHECK(b.episodesCompleted == a.episodesCompleted);
  CHECK(b.sections == a.sections);
  CHECK(nlohmann::json(b.hyperparameters) == nlohmann::json(a.hyperparameters));
  for (const auto& e : fs::directory_iterator(dir.path)) CHECK(e.path().filename() == "m.ezrl");

  // saving again differs only in the timestamp
  auto later = a;
  later.createdAt = "2031-01-01T00:00:00.000Z";
  auto laterBytes = encodeModel(later);
  auto x = metadataOf(bytes), y = metadataOf(laterBytes);
  CHECK(x != y);
  x.erase("createdAt");
  y.erase("createdAt");
  CHECK(x == y);
  CHECK(std::vector<std::uint8_t>(bytes.end() - 200, bytes.end()) ==
        std::vector<std::uint8_t>(laterBytes.end() - 200, laterBytes.end()));

  CHECK((codeOf([&] { saveModel(a, dir.path / "missing" / "m.ezrl"); }) == ErrorCode::Io));
  CHECK((codeOf([&] { loadModel(dir.path / "nope.ezrl"); }) == ErrorCode::Io));
}

TEST_CASE("save load save is byte identical for every agent") {
  engine::Engine eng({1});
  for (const auto& d : agents::builtinAgents()) {
    CAPTURE(d.id);
    auto a = trained(eng, d.id);
    auto first = encodeModel(a);
    auto second = encodeModel(decodeModel(first));
    CHECK(first == second);
    // a rebuilt agent serializes to the same sections
    auto agent = agents::createBuiltinAgent(a.agentId, eng.catalog().environment(a.envId), a.hyperparameters);
    agent->deserialize(a.sections);
    CHECK(agent->serialize() == a.sections);
  }
}

TEST_CASE("damaged files are rejected") {
  engine::Engine eng({1});
  auto bytes = encodeModel(trained(eng, "ddqn"));
  const auto len = metaLength(bytes);

  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{10}, std::size_t{16},
                          std::size_t{16 + len / 2}, std::size_t{16 + len},
                          bytes.size() - 8, bytes.size() - 1}) {
    CAPTURE(cut);
    std::vector<std::uint8_t> t(bytes.begin(), bytes.begin() + cut);
    CHECK((codeOf([&] { decodeModel(t); }) == ErrorCode::Corruption));
  }
  auto flipped = bytes;
  flipped[bytes.size() - 3] ^= 0x10;
  try {
    decodeModel(flipped);
    FAIL("expected corruption");
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::Corruption));
    CHECK(std::string(e.what()).find("checksum") != std::string::npos);
  }
  auto grown = bytes;
  grown.push_back(0);
  CHECK((codeOf([&] { decodeModel(grown); }) == ErrorCode::Corruption));
  auto magic = bytes;
  magic[0] = 'X';
  CHECK((codeOf([&] { decodeModel(magic); }) == ErrorCode::Format));
  auto version = bytes;
  version[4] = 2;
  CHECK((codeOf([&] { decodeModel(version); }) == ErrorCode::Format));
  auto meta = bytes;
  meta[16] = '[';
  CHECK((codeOf([&] { decodeModel(meta); }) == ErrorCode::Corruption));
}

TEST_CASE("artifact compatibility") {
  engine::Engine eng({1});
  auto lake = trained(eng, "qlearning");
  CHECK_NOTHROW(checkArtifactCompatible(lake, eng.catalog().environment("FrozenLake-v0")));
  CHECK((codeOf([&] { checkArtifactCompatible(lake, eng.catalog().environment("CartPole-v1")); }) ==
         ErrorCode::Incompatible));
  auto pole = trained(eng, "dqn");
  auto twoAction = eng.catalog().environment("CartPole-v1");
  auto fourAction = twoAction;
  fourAction.actionCount = 4;
  pole.env = fourAction;
  CHECK((codeOf([&] { checkArtifactCompatible(pole, twoAction); }) == ErrorCode::Incompatible));
}

TEST_CASE("results csv layout") {
  std::vector<engine::MetricEvent> events = {
      {"s", 0, 1.0, std::nullopt, 0.5, 10, 7},
      {"s", 1, -0.125, 0.1, std::nullopt, 3, 0},
      {"s", 2, 200.0, 1e-300, 0.05, 200, 12345},
  };
  const auto text = formatResultsCsv(events);
  CHECK(text ==
        "episode,total_reward,mean_loss,epsilon,steps,wall_clock_ms\n"
        "0,1,,0.5,10,7\n"
        "1,-0.125,0.1,,3,0\n"
        "2,200,1e-300,0.05,200,12345\n");
  auto back = parseResultsCsv(text);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    events[i].sessionId.clear();
    CHECK(back[i] == events[i]);
  }
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
  CHECK((codeOf([] { parseResultsCsv("episode,reward\n"); }) == ErrorCode::Format));
  CHECK((codeOf([] { parseResultsCsv(std::string(kResultsHeader) + "\n0,x,,,1,0\n"); }) ==
         ErrorCode::Format));
}

TEST_CASE("results parse back for real sessions") {
  engine::Engine eng({1});
  for (const std::string agentId : {"sarsa", "ppo", "adrqn"}) {
    engine::SessionConfig c;
    c.envId = envFor(agentId);
    c.agentId = agentId;
    c.hyperparameters = agents::findBuiltinAgent(agentId)->defaults;
    c.hyperparameters.episodes = 6;
    c.hyperparameters.hiddenLayers = {8};
    auto id = eng.createSession(c).sessionId;
    eng.run(id);
    auto original = eng.metrics(id);
    auto parsed = parseResultsCsv(eng.resultsCsv(id));
    REQUIRE(parsed.size() == original.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
      original[i].sessionId.clear();
      CHECK(parsed[i] == original[i]);
    }
    // the tabular agent reports a loss
    if (agentId == "sarsa") CHECK(original.back().meanLoss.has_value());
  }
}

}
