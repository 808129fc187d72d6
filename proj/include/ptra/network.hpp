#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ptra/autodiff.hpp"
#include "ptra/instance.hpp"

namespace ptra::nn {

using Rng = std::mt19937_64;

/// Score given to already-visited items before the softmax.
inline constexpr double kMaskedScore = -1e9;

struct LstmWeights {
  Matrix w_input;   // 4D x D
  Matrix w_hidden;  // 4D x D
  Matrix bias;      // 4D x 1
};

/// A named view of one learnable array.
struct TensorRef {
  std::string name;
  Matrix* value;
};
struct ConstTensorRef {
  std::string name;
  const Matrix* value;
};

/// Actor: item embedding, encoder/decoder LSTMs and pointer attention.
struct PolicyParams {
  int hidden_dim = 0;
  Matrix embed_w;  // D x 2
  LstmWeights enc;
  LstmWeights dec;
  Matrix w1;     // D x D, applied to encoder states
  Matrix w2;     // D x D, applied to the decoder state
  Matrix v_att;  // 1 x D
  Matrix v_go;   // D x 1, first decoder input

  std::vector<TensorRef> tensors();
  std::vector<ConstTensorRef> tensors() const;
};

/// Critic: the actor's embedding + encoder shape, then two dense layers.
struct CriticParams {
  int hidden_dim = 0;
  Matrix embed_w;
  LstmWeights enc;
  Matrix fc1_w;  // D x D
  Matrix fc1_b;  // D x 1
  Matrix fc2_w;  // 1 x D
  Matrix fc2_b;  // 1 x 1

  std::vector<TensorRef> tensors();
  std::vector<ConstTensorRef> tensors() const;
};

/// Zeroed gradient buffers shaped like `params`' tensors, in tensors() order.
template <class Params>
std::vector<Matrix> zero_gradients(const Params& params) {
  std::vector<Matrix> out;
  for (const auto& t : params.tensors()) out.push_back(Matrix::Zero(t.value->rows(), t.value->cols()));
  return out;
}

/// Throws NonFiniteError naming the first tensor holding NaN/Inf.
void check_finite(std::span<const ConstTensorRef> tensors, std::span<const Matrix> grads,
                  const std::string& context);

/// Xavier-uniform weights, zero biases, deterministic per seed.
struct InitializedParams {
  PolicyParams policy;
  CriticParams critic;
};
InitializedParams init_params(std::uint64_t seed, int hidden_dim);

/// Input features per item: start point then each cluster centroid, from an
/// already normalized instance. Column j is item j.
Matrix item_features(const Instance& normalized_instance);

// ---------------------------------------------------------------------------
// Recording forward passes.

/// Parameter leaves of one PolicyParams bound onto a tape.
struct ActorVars {
  Tape::Var embed_w, enc_wi, enc_wh, enc_b, dec_wi, dec_wh, dec_b, w1, w2, v_att, v_go;
};
ActorVars bind(Tape& tape, const PolicyParams& params);

struct CriticVars {
  Tape::Var embed_w, enc_wi, enc_wh, enc_b, fc1_w, fc1_b, fc2_w, fc2_b;
};
CriticVars bind(Tape& tape, const CriticParams& params);

/// Encoder output recorded on a tape.
struct Encoded {
  Tape::Var embeddings;  // D x (K+1)
  Tape::Var states;      // D x (K+1), column j = e_j
  Tape::Var projected;   // W1 * states
  Tape::Var h_last;
  Tape::Var c_last;
  int items = 0;
};

/// One LSTM step; returns [h; c] stacked.
Tape::Var lstm_step(Tape& tape, Tape::Var w_input, Tape::Var w_hidden, Tape::Var bias, Tape::Var x,
                    Tape::Var h, Tape::Var c);

Encoded encode(Tape& tape, const ActorVars& vars, const Instance& normalized_instance);

enum class DecodeMode { kGreedy, kSample };

struct RolloutRecord {
  Tour tour;
  Tape::Var log_prob;      // 1x1, sum of per-step log probabilities
  double log_prob_value = 0.0;
  std::vector<Eigen::RowVectorXd> step_probs;  // filled when requested
};

/// Decoder rollout appended to `tape` after `encode`. Step 0 is forced to
/// the start item; `rng` is only used in sample mode.
RolloutRecord decode(Tape& tape, const ActorVars& vars, const Encoded& enc, DecodeMode mode,
                     Rng* rng, bool keep_step_probs = false);

/// Critic baseline recorded on a tape (1x1).
Tape::Var critic_value(Tape& tape, const CriticVars& vars, const Instance& normalized_instance);

// ---------------------------------------------------------------------------
// Value-level conveniences (no gradient needed).

/// Embedding of each item, column j = item j.
Matrix embed_instance(const PolicyParams& policy, const Instance& normalized_instance);
/// Encoder states, column j = e_j.
Matrix encode_states(const PolicyParams& policy, const Matrix& embeddings);
/// Pointer scores for decoder state `h`; visited items get kMaskedScore.
/// Throws InputError when every item is masked.
Eigen::RowVectorXd attention_scores(const PolicyParams& policy, const Matrix& states,
                                    const Eigen::VectorXd& h, const std::vector<bool>& visited);
/// Softmax over finite scores; requires at least one entry above kMaskedScore.
Eigen::RowVectorXd pointer_softmax(const Eigen::RowVectorXd& scores);

struct RolloutResult {
  Tour tour;
  double log_prob = 0.0;
  double energy_j = 0.0;  // filled by the caller after CH selection
  std::vector<Eigen::RowVectorXd> step_probs;
};
RolloutResult decode_rollout(const PolicyParams& policy, const Instance& normalized_instance,
                             DecodeMode mode, Rng* rng, bool keep_step_probs = false);

double critic_value(const CriticParams& critic, const Instance& normalized_instance);

}  // namespace ptra::nn
