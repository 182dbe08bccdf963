#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "easyrl/common/rng.hpp"
#include "easyrl/env/types.hpp"

namespace easyrl::replay {

using env::Transition;

// Fixed-capacity ring of transitions tagged with the episode they came from.
// Episode ids must be non-decreasing in insertion order.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition transition, std::uint64_t episodeId);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return slots_.size(); }
  std::uint64_t inserted() const { return inserted_; }

  // Logical index 0 is the oldest stored transition.
  const Transition& at(std::size_t i) const;
  std::uint64_t episodeAt(std::size_t i) const;

  // Uniform with replacement. Throws NotReady when size() < batchSize.
  std::vector<const Transition*> sampleUniform(std::size_t batchSize, Rng& rng) const;

  // seqLen consecutive transitions from one episode per sequence, uniform
  // over every valid start offset. Throws NotReady if no stored episode is
  // long enough.
  std::vector<std::vector<const Transition*>> sampleSequences(
      std::size_t batchSize, std::size_t seqLen, Rng& rng) const;

  // Logical indices at which a full window of seqLen fits in one episode.
  std::vector<std::size_t> validSequenceStarts(std::size_t seqLen) const;

  void clear();

 private:
  std::size_t physical(std::size_t logical) const {
    return (head_ + logical) % slots_.size();
  }
  bool validStart(std::size_t start, std::size_t seqLen) const;

  struct Slot {
    Transition transition;
    std::uint64_t episode = 0;
  };
  std::vector<Slot> slots_;
  std::size_t head_ = 0;  // physical index of the oldest slot
  std::size_t size_ = 0;
  std::uint64_t inserted_ = 0;
};

}  // namespace easyrl::replay
