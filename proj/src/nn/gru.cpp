#include "easyrl/nn/gru.hpp"

#include <cmath>

#include "easyrl/common/error.hpp"

namespace easyrl::nn {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// out[b][o] = bias[o] + W[o, :I] . x[b] + W[o, I:] . h[b]
void affineConcat(const Tensor& weight, const Tensor& bias, const Tensor& x,
                  const Tensor& h, Tensor& out) {
  const std::size_t batch = x.rows();
  const std::size_t in = x.cols();
  const std::size_t hid = h.cols();
  for (std::size_t b = 0; b < batch; ++b) {
    auto xr = x.row(b);
    auto hr = h.row(b);
    for (std::size_t o = 0; o < weight.rows(); ++o) {
      auto wr = weight.row(o);
      out.at(b, o) = bias[o] + dot(wr.first(in), xr) + dot(wr.subspan(in, hid), hr);
    }
  }
}

// dW += da^T [x; h], db += sum(da), dx += da W[:, :I], dh += da W[:, I:]
void accumulateConcat(const Tensor& weight, const Tensor& da, const Tensor& x,
                      const Tensor& h, Tensor& dW, Tensor& db, Tensor& dx,
                      Tensor& dh) {
  const std::size_t batch = x.rows();
  const std::size_t in = x.cols();
  const std::size_t hid = h.cols();
  for (std::size_t b = 0; b < batch; ++b) {
    auto xr = x.row(b);
    auto hr = h.row(b);
    auto dxr = dx.row(b);
    auto dhr = dh.row(b);
    for (std::size_t o = 0; o < weight.rows(); ++o) {
      const double g = da.at(b, o);
      if (g == 0.0) continue;
      db[o] += g;
      auto wr = weight.row(o);
      auto dwr = dW.row(o);
      for (std::size_t i = 0; i < in; ++i) {
        dwr[i] += g * xr[i];
        dxr[i] += g * wr[i];
      }
      for (std::size_t j = 0; j < hid; ++j) {
        dwr[in + j] += g * hr[j];
        dhr[j] += g * wr[in + j];
      }
    }
  }
}

}  // namespace

std::vector<Tensor> GruGrads::flatten() const {
  return {updateWeight, updateBias, resetWeight, resetBias, candidateWeight, candidateBias};
}

void GruGrads::setZero() {
  for (Tensor* t : {&updateWeight, &resetWeight, &candidateWeight, &updateBias,
                    &resetBias, &candidateBias}) {
    t->fill(0.0);
  }
}

GruCell::GruCell(std::size_t inputDim, std::size_t hiddenDim)
    : inputDim_(inputDim),
      hiddenDim_(hiddenDim),
      wz_(Tensor::matrix(hiddenDim, inputDim + hiddenDim)),
      wr_(Tensor::matrix(hiddenDim, inputDim + hiddenDim)),
      wc_(Tensor::matrix(hiddenDim, inputDim + hiddenDim)),
      bz_({hiddenDim}),
      br_({hiddenDim}),
      bc_({hiddenDim}) {}

GruCell GruCell::create(std::size_t inputDim, std::size_t hiddenDim, Rng& rng) {
  GruCell cell(inputDim, hiddenDim);
  const double limit =
      std::sqrt(6.0 / static_cast<double>(inputDim + 2 * hiddenDim));
  for (Tensor* w : {&cell.wz_, &cell.wr_, &cell.wc_}) {
    for (double& v : w->data()) v = rng.uniform(-limit, limit);
  }
  return cell;
}

Tensor GruCell::step(const Tensor& input, const Tensor& hidden) const {
  requireDim(input.size(), inputDim_, "gru input");
  requireDim(hidden.size(), hiddenDim_, "gru hidden");
  Tensor out = stepBatch(Tensor({1, inputDim_}, input.values()),
                         Tensor({1, hiddenDim_}, hidden.values()), nullptr);
  return Tensor::vector(out.values());
}

Tensor GruCell::stepBatch(const Tensor& input, const Tensor& hidden,
                          GruStepCache* cache) const {
  requireDim(input.cols(), inputDim_, "gru input");
  requireDim(hidden.cols(), hiddenDim_, "gru hidden");
  requireDim(hidden.rows(), input.rows(), "gru batch");
  const std::size_t batch = input.rows();
  Tensor z = Tensor::matrix(batch, hiddenDim_);
  Tensor r = Tensor::matrix(batch, hiddenDim_);
  Tensor c = Tensor::matrix(batch, hiddenDim_);
  affineConcat(wz_, bz_, input, hidden, z);
  affineConcat(wr_, br_, input, hidden, r);
  for (double& v : z.data()) v = sigmoid(v);
  for (double& v : r.data()) v = sigmoid(v);
  Tensor gated = Tensor::matrix(batch, hiddenDim_);
  for (std::size_t k = 0; k < gated.size(); ++k) gated[k] = r[k] * hidden[k];
  affineConcat(wc_, bc_, input, gated, c);
  for (double& v : c.data()) v = std::tanh(v);
  Tensor next = Tensor::matrix(batch, hiddenDim_);
  for (std::size_t k = 0; k < next.size(); ++k) {
    next[k] = (1.0 - z[k]) * hidden[k] + z[k] * c[k];
  }
  if (!next.allFinite()) fail(ErrorCode::Numeric, "gru produced a non-finite state");
  if (cache) {
    cache->input = input;
    cache->hidden = hidden;
    cache->update = std::move(z);
    cache->reset = std::move(r);
    cache->candidate = std::move(c);
    cache->output = next;
  }
  return next;
}

GruSequenceBackward GruCell::backwardSequence(
    const std::vector<GruStepCache>& steps,
    const std::vector<Tensor>& hiddenGrads) const {
  requireDim(hiddenGrads.size(), steps.size(), "gru sequence gradients");
  GruSequenceBackward result{zeroGrads(), std::vector<Tensor>(steps.size()), {}};
  if (steps.empty()) return result;
  const std::size_t batch = steps.front().input.rows();
  Tensor carry = Tensor::matrix(batch, hiddenDim_);  // dL/dh_t from step t+1
  for (std::size_t t = steps.size(); t-- > 0;) {
    const auto& s = steps[t];
    Tensor dh = hiddenGrads[t];
    for (std::size_t k = 0; k < dh.size(); ++k) dh[k] += carry[k];

    Tensor daz = Tensor::matrix(batch, hiddenDim_);
    Tensor dac = Tensor::matrix(batch, hiddenDim_);
    Tensor dprev = Tensor::matrix(batch, hiddenDim_);
    for (std::size_t k = 0; k < dh.size(); ++k) {
      const double z = s.update[k];
      const double c = s.candidate[k];
      const double h = s.hidden[k];
      dac[k] = dh[k] * z * (1.0 - c * c);
      daz[k] = dh[k] * (c - h) * z * (1.0 - z);
      dprev[k] = dh[k] * (1.0 - z);
    }

    Tensor dx = Tensor::matrix(batch, inputDim_);
    Tensor gated = Tensor::matrix(batch, hiddenDim_);
    for (std::size_t k = 0; k < gated.size(); ++k) gated[k] = s.reset[k] * s.hidden[k];
    Tensor dgated = Tensor::matrix(batch, hiddenDim_);
    accumulateConcat(wc_, dac, s.input, gated, result.params.candidateWeight,
                     result.params.candidateBias, dx, dgated);

    Tensor dar = Tensor::matrix(batch, hiddenDim_);
    for (std::size_t k = 0; k < dar.size(); ++k) {
      const double r = s.reset[k];
      dar[k] = dgated[k] * s.hidden[k] * r * (1.0 - r);
      dprev[k] += dgated[k] * r;
    }
    accumulateConcat(wz_, daz, s.input, s.hidden, result.params.updateWeight,
                     result.params.updateBias, dx, dprev);
    accumulateConcat(wr_, dar, s.input, s.hidden, result.params.resetWeight,
                     result.params.resetBias, dx, dprev);
    result.inputGrads[t] = std::move(dx);
    carry = std::move(dprev);
  }
  result.initialHiddenGrad = std::move(carry);
  return result;
}

std::vector<Tensor*> GruCell::parameters() {
  return {&wz_, &bz_, &wr_, &br_, &wc_, &bc_};
}

std::vector<const Tensor*> GruCell::parameters() const {
  return {&wz_, &bz_, &wr_, &br_, &wc_, &bc_};
}

GruGrads GruCell::zeroGrads() const {
  return GruGrads{Tensor(wz_.shape()), Tensor(wr_.shape()), Tensor(wc_.shape()),
                  Tensor(bz_.shape()), Tensor(br_.shape()), Tensor(bc_.shape())};
}

}  // namespace easyrl::nn
