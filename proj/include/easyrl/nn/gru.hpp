#pragma once

#include <cstddef>
#include <vector>

#include "easyrl/common/rng.hpp"
#include "easyrl/nn/tensor.hpp"

namespace easyrl::nn {

struct GruGrads {
  Tensor updateWeight, resetWeight, candidateWeight;
  Tensor updateBias, resetBias, candidateBias;

  std::vector<Tensor> flatten() const;
  void setZero();
};

// Intermediates of one batched step, kept for backpropagation through time.
struct GruStepCache {
  Tensor input;      // B x I
  Tensor hidden;     // B x H (state entering the step)
  Tensor update;     // z
  Tensor reset;      // r
  Tensor candidate;  // h~
  Tensor output;     // h'
};

struct GruSequenceBackward {
  GruGrads params;
  std::vector<Tensor> inputGrads;  // per step, B x I
  Tensor initialHiddenGrad;        // B x H
};

// Gated recurrent unit. Gate matrices act on the concatenation [x; h].
class GruCell {
 public:
  GruCell() = default;
  GruCell(std::size_t inputDim, std::size_t hiddenDim);

  static GruCell create(std::size_t inputDim, std::size_t hiddenDim, Rng& rng);

  std::size_t inputDim() const { return inputDim_; }
  std::size_t hiddenDim() const { return hiddenDim_; }

  Tensor& updateWeight() { return wz_; }
  Tensor& resetWeight() { return wr_; }
  Tensor& candidateWeight() { return wc_; }
  Tensor& updateBias() { return bz_; }
  Tensor& resetBias() { return br_; }
  Tensor& candidateBias() { return bc_; }

  Tensor step(const Tensor& input, const Tensor& hidden) const;

  // Batched step; input B x I, hidden B x H.
  Tensor stepBatch(const Tensor& input, const Tensor& hidden,
                   GruStepCache* cache) const;

  // Backpropagation through an unrolled window. hiddenGrads[t] is the
  // gradient flowing into the output of step t from outside the recurrence.
  GruSequenceBackward backwardSequence(
      const std::vector<GruStepCache>& steps,
      const std::vector<Tensor>& hiddenGrads) const;

  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  GruGrads zeroGrads() const;

  friend bool operator==(const GruCell&, const GruCell&) = default;

 private:
  std::size_t inputDim_ = 0;
  std::size_t hiddenDim_ = 0;
  Tensor wz_, wr_, wc_;
  Tensor bz_, br_, bc_;
};

}  // namespace easyrl::nn
