#include "easyrl/replay/replay_buffer.hpp"

#include "easyrl/common/error.hpp"

namespace easyrl::replay {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : slots_(capacity) {
  if (capacity == 0) fail(ErrorCode::Argument, "replay capacity must be positive");
}

void ReplayBuffer::push(Transition transition, std::uint64_t episodeId) {
  if (size_ > 0 && episodeId < episodeAt(size_ - 1)) {
    fail(ErrorCode::Argument, "replay episode ids must be non-decreasing");
  }
  if (size_ < slots_.size()) {
    slots_[physical(size_)] = Slot{std::move(transition), episodeId};
    ++size_;
  } else {
    slots_[head_] = Slot{std::move(transition), episodeId};
    head_ = (head_ + 1) % slots_.size();
  }
  ++inserted_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) fail(ErrorCode::Argument, "replay index out of range");
  return slots_[physical(i)].transition;
}

std::uint64_t ReplayBuffer::episodeAt(std::size_t i) const {
  return slots_[physical(i)].episode;
}

std::vector<const Transition*> ReplayBuffer::sampleUniform(std::size_t batchSize,
                                                           Rng& rng) const {
  if (size_ < batchSize || size_ == 0) {
    fail(ErrorCode::NotReady, "replay holds " + std::to_string(size_) +
                                  " transitions, batch needs " +
                                  std::to_string(batchSize));
  }
  std::vector<const Transition*> batch;
  batch.reserve(batchSize);
  for (std::size_t i = 0; i < batchSize; ++i) {
    batch.push_back(&slots_[physical(rng.uniformInt(size_))].transition);
  }
  return batch;
}

bool ReplayBuffer::validStart(std::size_t start, std::size_t seqLen) const {
  // Ids are non-decreasing, so equal endpoints imply one episode throughout.
  return episodeAt(start) == episodeAt(start + seqLen - 1);
}

std::vector<std::size_t> ReplayBuffer::validSequenceStarts(std::size_t seqLen) const {
  std::vector<std::size_t> starts;
  if (seqLen == 0 || seqLen > size_) return starts;
  for (std::size_t s = 0; s + seqLen <= size_; ++s) {
    if (validStart(s, seqLen)) starts.push_back(s);
  }
  return starts;
}

std::vector<std::vector<const Transition*>> ReplayBuffer::sampleSequences(
    std::size_t batchSize, std::size_t seqLen, Rng& rng) const {
  if (seqLen == 0) fail(ErrorCode::Argument, "sequence length must be positive");
  if (seqLen > size_) {
    fail(ErrorCode::NotReady, "no stored episode spans " + std::to_string(seqLen) + " steps");
  }
  const std::size_t span = size_ - seqLen + 1;
  std::vector<std::size_t> enumerated;
  bool enumeratedReady = false;
  auto drawStart = [&]() -> std::size_t {
    // Rejection sampling is exactly uniform over valid starts; fall back to
    // enumeration when valid windows are rare.
    for (int attempt = 0; attempt < 64; ++attempt) {
      const std::size_t s = rng.uniformInt(span);
      if (validStart(s, seqLen)) return s;
    }
    if (!enumeratedReady) {
      enumerated = validSequenceStarts(seqLen);
      enumeratedReady = true;
    }
    if (enumerated.empty()) {
      fail(ErrorCode::NotReady, "no stored episode spans " + std::to_string(seqLen) + " steps");
    }
    return enumerated[rng.uniformInt(enumerated.size())];
  };
  std::vector<std::vector<const Transition*>> batch(batchSize);
  for (auto& seq : batch) {
    const std::size_t start = drawStart();
    seq.reserve(seqLen);
    for (std::size_t k = 0; k < seqLen; ++k) {
      seq.push_back(&slots_[physical(start + k)].transition);
    }
  }
  return batch;
}

void ReplayBuffer::clear() {
  head_ = 0;
  size_ = 0;
}

}  // namespace easyrl::replay
