#pragma once

#include <algorithm>
#include <functional>

#include "ptra/network.hpp"

namespace testing {

/// Greedy log-probability of the actor on `inst` plus its gradient.
inline double actor_log_prob(const ptra::nn::PolicyParams& p, const ptra::Instance& inst,
                             std::vector<ptra::nn::Matrix>* grads, ptra::Tour* tour = nullptr) {
  using namespace ptra::nn;
  Tape tape;
  const ActorVars vars = bind(tape, p);
  const Encoded enc = encode(tape, vars, inst);
  const RolloutRecord r = decode(tape, vars, enc, DecodeMode::kGreedy, nullptr);
  if (grads) tape.backward(r.log_prob, *grads);
  if (tour) *tour = r.tour;
  return r.log_prob_value;
}

inline double critic_output(const ptra::nn::CriticParams& p, const ptra::Instance& inst,
                            std::vector<ptra::nn::Matrix>* grads) {
  using namespace ptra::nn;
  Tape tape;
  const CriticVars vars = bind(tape, p);
  const Tape::Var v = critic_value(tape, vars, inst);
  if (grads) tape.backward(v, *grads);
  return tape.scalar(v);
}

/// Max relative error of analytic vs central-difference gradients over every
/// entry of every tensor. `f(params, grads_or_null)` evaluates the scalar.
/// The denominator is floored at `floor`: below it the difference quotient's
/// own roundoff (about 1e-16 * |f| / step) swamps the comparison.
template <class Params, class F>
double max_gradient_error(Params params, F f, double step = 1e-5, double floor = 1e-6) {
  std::vector<ptra::nn::Matrix> grads = ptra::nn::zero_gradients(params);
  f(params, &grads);
  double worst = 0.0;
  auto tensors = params.tensors();
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    ptra::nn::Matrix& m = *tensors[i].value;
    for (Eigen::Index j = 0; j < m.size(); ++j) {
      const double keep = m(j);
      m(j) = keep + step;
      const double up = f(params, nullptr);
      m(j) = keep - step;
      const double down = f(params, nullptr);
      m(j) = keep;
      const double numeric = (up - down) / (2 * step);
      const double analytic = grads[i](j);
      const double scale = std::max({std::abs(numeric), std::abs(analytic), floor});
      worst = std::max(worst, std::abs(numeric - analytic) / scale);
    }
  }
  return worst;
}

/// A 3-cluster toy instance in normalized coordinates.
inline ptra::Instance toy_instance() {
  ptra::Instance inst;
  inst.area_m = 1.0;
  inst.start = {0.0, 0.0};
  inst.clusters = {{{0.2, 0.7}, {0.25, 0.72}}, {{0.8, 0.3}}, {{0.5, 0.5}, {0.55, 0.45}, {0.52, 0.5}}};
  return inst;
}

}  // namespace testing
