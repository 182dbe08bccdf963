#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "easyrl/agents/agent.hpp"

namespace easyrl::store {

inline constexpr char kMagic[4] = {'E', 'Z', 'R', 'L'};
inline constexpr std::uint32_t kFormatVersion = 1;

// In-memory form of an EZRL file:
//   "EZRL" | u32 LE version | u64 LE metadata length | metadata JSON | blobs
// Blob sections are f64 little-endian arrays, or raw bytes for opaque
// (plugin) sections. The metadata carries a CRC-32 over all blob bytes.
struct ModelArtifact {
  std::string agentId;
  std::string envId;
  env::EnvDescriptor env;
  agents::Hyperparameters hyperparameters;
  std::size_t episodesCompleted = 0;
  std::string createdAt;
  std::vector<agents::WeightSection> sections;
};

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encodeModel(const ModelArtifact& artifact);
// Format error for bad magic or version; Corruption for truncation, a
// checksum mismatch, or metadata that disagrees with the blobs.
ModelArtifact decodeModel(std::span<const std::uint8_t> bytes);

// Atomic: writes a sibling temp file then renames over path.
void saveModel(const ModelArtifact& artifact, const std::filesystem::path& path);
ModelArtifact loadModel(const std::filesystem::path& path);

// Incompatible unless target has the recorded observation kind and action count.
void checkArtifactCompatible(const ModelArtifact& artifact, const env::EnvDescriptor& target);

// Shared file helpers.
std::vector<std::uint8_t> readFile(const std::filesystem::path& path);
void writeFileAtomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace easyrl::store
