#include "easyrl/store/model_store.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <unistd.h>

#include <boost/crc.hpp>

#include "easyrl/common/error.hpp"

namespace easyrl::store {
namespace {

using Json = nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "EZRL writer assumes a little-endian host");
static_assert(sizeof(double) == 8);

template <typename T>
void putLe(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  out.insert(out.end(), raw, raw + sizeof(T));
}

template <typename T>
T getLe(std::span<const std::uint8_t> bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

std::size_t shapeProduct(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

constexpr std::size_t kHeaderSize = 4 + 4 + 8;

}  // namespace

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

std::vector<std::uint8_t> encodeModel(const ModelArtifact& artifact) {
  std::vector<std::uint8_t> blobs;
  Json sections = Json::array();
  for (const auto& s : artifact.sections) {
    Json meta = {{"name", s.name}};
    if (s.opaque) {
      meta["encoding"] = "bytes";
      meta["byteLength"] = s.bytes.size();
      blobs.insert(blobs.end(), s.bytes.begin(), s.bytes.end());
    } else {
      if (shapeProduct(s.shape) != s.values.size()) {
        fail(ErrorCode::Shape, "section '" + s.name + "' shape does not match its values");
      }
      meta["encoding"] = "f64le";
      meta["shape"] = s.shape;
      meta["byteLength"] = s.values.size() * 8;
      for (double v : s.values) putLe(blobs, v);
    }
    sections.push_back(std::move(meta));
  }

  Json metadata = {{"agentId", artifact.agentId},
                   {"envId", artifact.envId},
                   {"env", artifact.env},
                   {"hyperparameters", artifact.hyperparameters},
                   {"episodesCompleted", artifact.episodesCompleted},
                   {"createdAt", artifact.createdAt},
                   {"checksum", crc32(blobs)},
                   {"sections", sections}};
  const std::string text = metadata.dump();

  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  putLe<std::uint32_t>(out, kFormatVersion);
  putLe<std::uint64_t>(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), blobs.begin(), blobs.end());
  return out;
}

ModelArtifact decodeModel(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) {
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) != 0) {
      fail(ErrorCode::Format, "not an EZRL file (bad magic)");
    }
    fail(ErrorCode::Corruption, "model file truncated inside the header");
  }
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) fail(ErrorCode::Format, "not an EZRL file (bad magic)");
  const auto version = getLe<std::uint32_t>(bytes, 4);
  if (version != kFormatVersion) {
    fail(ErrorCode::Format, "unsupported EZRL version " + std::to_string(version));
  }
  const auto metaLen = getLe<std::uint64_t>(bytes, 8);
  if (metaLen > bytes.size() - kHeaderSize) {
    fail(ErrorCode::Corruption, "model file truncated inside the metadata");
  }
  const auto* metaBegin = reinterpret_cast<const char*>(bytes.data() + kHeaderSize);
  const auto blobs = bytes.subspan(kHeaderSize + metaLen);

  ModelArtifact a;
  try {
    const Json meta = Json::parse(metaBegin, metaBegin + metaLen);
    a.agentId = meta.at("agentId").get<std::string>();
    a.envId = meta.at("envId").get<std::string>();
    a.env = meta.at("env").get<env::EnvDescriptor>();
    agents::applyJson(a.hyperparameters, meta.at("hyperparameters"));
    a.episodesCompleted = meta.at("episodesCompleted").get<std::size_t>();
    a.createdAt = meta.at("createdAt").get<std::string>();
    const auto checksum = meta.at("checksum").get<std::uint32_t>();

    std::size_t total = 0;
    for (const auto& s : meta.at("sections")) total += s.at("byteLength").get<std::size_t>();
    if (total != blobs.size()) {
      fail(ErrorCode::Corruption, "weight data is " + std::to_string(blobs.size()) +
                                      " bytes, metadata declares " + std::to_string(total));
    }
    if (crc32(blobs) != checksum) fail(ErrorCode::Corruption, "checksum mismatch");

    std::size_t offset = 0;
    for (const auto& s : meta.at("sections")) {
      agents::WeightSection w;
      w.name = s.at("name").get<std::string>();
      const auto len = s.at("byteLength").get<std::size_t>();
      const auto encoding = s.at("encoding").get<std::string>();
      if (encoding == "bytes") {
        w.opaque = true;
        w.bytes.assign(blobs.begin() + offset, blobs.begin() + offset + len);
      } else if (encoding == "f64le") {
        w.shape = s.at("shape").get<std::vector<std::size_t>>();
        if (shapeProduct(w.shape) * 8 != len) {
          fail(ErrorCode::Corruption, "section '" + w.name + "' shape disagrees with its length");
        }
        w.values.resize(len / 8);
        for (std::size_t i = 0; i < w.values.size(); ++i) {
          w.values[i] = getLe<double>(blobs, offset + 8 * i);
        }
      } else {
        fail(ErrorCode::Corruption, "unknown section encoding '" + encoding + "'");
      }
      offset += len;
      a.sections.push_back(std::move(w));
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::Corruption, std::string("unreadable model metadata: ") + e.what());
  }
  return a;
}

std::vector<std::uint8_t> readFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::Io, "cannot read '" + path.string() + "'");
  return bytes;
}

void writeFileAtomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot write '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      fail(ErrorCode::Io, "cannot write '" + path.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorCode::Io, "cannot replace '" + path.string() + "': " + ec.message());
  }
}

void saveModel(const ModelArtifact& artifact, const std::filesystem::path& path) {
  writeFileAtomic(path, encodeModel(artifact));
}

ModelArtifact loadModel(const std::filesystem::path& path) { return decodeModel(readFile(path)); }

void checkArtifactCompatible(const ModelArtifact& artifact, const env::EnvDescriptor& target) {
  if (!(artifact.env.obsKind == target.obsKind) ||
      artifact.env.actionCount != target.actionCount) {
    fail(ErrorCode::Incompatible,
         "model for '" + artifact.envId + "' (" + env::toString(artifact.env.obsKind) + ", " +
             std::to_string(artifact.env.actionCount) + " actions) cannot run on '" + target.id +
             "' (" + env::toString(target.obsKind) + ", " + std::to_string(target.actionCount) +
             " actions)");
  }
}

}  // namespace easyrl::store
