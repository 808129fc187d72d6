#include "ptra/network.hpp"

#include <cmath>

#include "ptra/errors.hpp"

namespace ptra::nn {

std::vector<TensorRef> PolicyParams::tensors() {
  return {{"embed_w", &embed_w},       {"enc_w_input", &enc.w_input}, {"enc_w_hidden", &enc.w_hidden},
          {"enc_bias", &enc.bias},     {"dec_w_input", &dec.w_input}, {"dec_w_hidden", &dec.w_hidden},
          {"dec_bias", &dec.bias},     {"w1", &w1},                   {"w2", &w2},
          {"v_att", &v_att},           {"v_go", &v_go}};
}

std::vector<ConstTensorRef> PolicyParams::tensors() const {
  std::vector<ConstTensorRef> out;
  for (auto& t : const_cast<PolicyParams*>(this)->tensors()) out.push_back({t.name, t.value});
  return out;
}

std::vector<TensorRef> CriticParams::tensors() {
  return {{"embed_w", &embed_w},   {"enc_w_input", &enc.w_input}, {"enc_w_hidden", &enc.w_hidden},
          {"enc_bias", &enc.bias}, {"fc1_w", &fc1_w},             {"fc1_b", &fc1_b},
          {"fc2_w", &fc2_w},       {"fc2_b", &fc2_b}};
}

std::vector<ConstTensorRef> CriticParams::tensors() const {
  std::vector<ConstTensorRef> out;
  for (auto& t : const_cast<CriticParams*>(this)->tensors()) out.push_back({t.name, t.value});
  return out;
}

void check_finite(std::span<const ConstTensorRef> tensors, std::span<const Matrix> grads,
                  const std::string& context) {
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (!tensors[i].value->allFinite())
      throw NonFiniteError(context + ": parameter '" + tensors[i].name + "' is not finite",
                           tensors[i].name);
    if (i < grads.size() && !grads[i].allFinite())
      throw NonFiniteError(context + ": gradient of '" + tensors[i].name + "' is not finite",
                           tensors[i].name);
  }
}

namespace {

Matrix xavier(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> u(-bound, bound);
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = u(rng);
  return m;
}

LstmWeights xavier_lstm(Rng& rng, int d) {
  LstmWeights w;
  w.w_input = xavier(rng, 4 * d, d);
  w.w_hidden = xavier(rng, 4 * d, d);
  w.bias = Matrix::Zero(4 * d, 1);
  return w;
}

}  // namespace

InitializedParams init_params(std::uint64_t seed, int hidden_dim) {
  if (hidden_dim < 1) throw InputError("init_params: hidden_dim must be >= 1");
  const int d = hidden_dim;
  Rng rng(seed);
  InitializedParams out;
  PolicyParams& p = out.policy;
  p.hidden_dim = d;
  p.embed_w = xavier(rng, d, 2);
  p.enc = xavier_lstm(rng, d);
  p.dec = xavier_lstm(rng, d);
  p.w1 = xavier(rng, d, d);
  p.w2 = xavier(rng, d, d);
  p.v_att = xavier(rng, 1, d);
  p.v_go = xavier(rng, d, 1);

  CriticParams& c = out.critic;
  c.hidden_dim = d;
  c.embed_w = xavier(rng, d, 2);
  c.enc = xavier_lstm(rng, d);
  c.fc1_w = xavier(rng, d, d);
  c.fc1_b = Matrix::Zero(d, 1);
  c.fc2_w = xavier(rng, 1, d);
  c.fc2_b = Matrix::Zero(1, 1);
  return out;
}

Matrix item_features(const Instance& normalized_instance) {
  const std::size_t items = normalized_instance.item_count();
  Matrix f(2, static_cast<Eigen::Index>(items));
  f(0, 0) = normalized_instance.start.x;
  f(1, 0) = normalized_instance.start.y;
  for (std::size_t k = 0; k < normalized_instance.cluster_count(); ++k) {
    const Point2 c = centroid(normalized_instance.clusters[k]);
    f(0, static_cast<Eigen::Index>(k + 1)) = c.x;
    f(1, static_cast<Eigen::Index>(k + 1)) = c.y;
  }
  return f;
}

ActorVars bind(Tape& tape, const PolicyParams& p) {
  std::size_t slot = 0;
  auto leaf = [&](const Matrix& m) { return tape.parameter(slot++, m); };
  ActorVars v;
  v.embed_w = leaf(p.embed_w);
  v.enc_wi = leaf(p.enc.w_input);
  v.enc_wh = leaf(p.enc.w_hidden);
  v.enc_b = leaf(p.enc.bias);
  v.dec_wi = leaf(p.dec.w_input);
  v.dec_wh = leaf(p.dec.w_hidden);
  v.dec_b = leaf(p.dec.bias);
  v.w1 = leaf(p.w1);
  v.w2 = leaf(p.w2);
  v.v_att = leaf(p.v_att);
  v.v_go = leaf(p.v_go);
  return v;
}

CriticVars bind(Tape& tape, const CriticParams& p) {
  std::size_t slot = 0;
  auto leaf = [&](const Matrix& m) { return tape.parameter(slot++, m); };
  CriticVars v;
  v.embed_w = leaf(p.embed_w);
  v.enc_wi = leaf(p.enc.w_input);
  v.enc_wh = leaf(p.enc.w_hidden);
  v.enc_b = leaf(p.enc.bias);
  v.fc1_w = leaf(p.fc1_w);
  v.fc1_b = leaf(p.fc1_b);
  v.fc2_w = leaf(p.fc2_w);
  v.fc2_b = leaf(p.fc2_b);
  return v;
}

Tape::Var lstm_step(Tape& tape, Tape::Var w_input, Tape::Var w_hidden, Tape::Var bias, Tape::Var x,
                    Tape::Var h, Tape::Var c) {
  const Tape::Var z =
      tape.add(tape.add(tape.matmul(w_input, x), tape.matmul(w_hidden, h)), bias);
  return tape.lstm_cell(z, c);
}

namespace {

struct EncoderPass {
  Tape::Var embeddings;
  Tape::Var states;
  Tape::Var h;
  Tape::Var c;
};

EncoderPass run_encoder(Tape& tape, Tape::Var embed_w, Tape::Var wi, Tape::Var wh, Tape::Var b,
                        const Instance& normalized_instance) {
  const Tape::Var features = tape.constant(item_features(normalized_instance));
  const Tape::Var emb = tape.matmul(embed_w, features);
  const int d = static_cast<int>(tape.value(embed_w).rows());
  const int items = static_cast<int>(tape.value(emb).cols());

  Tape::Var h = tape.constant(Matrix::Zero(d, 1));
  Tape::Var c = tape.constant(Matrix::Zero(d, 1));
  std::vector<Tape::Var> outs;
  outs.reserve(static_cast<std::size_t>(items));
  for (int j = 0; j < items; ++j) {
    const Tape::Var hc = lstm_step(tape, wi, wh, b, tape.column(emb, j), h, c);
    h = tape.rows(hc, 0, d);
    c = tape.rows(hc, d, d);
    outs.push_back(h);
  }
  return {emb, tape.hstack(outs), h, c};
}

}  // namespace

Encoded encode(Tape& tape, const ActorVars& vars, const Instance& normalized_instance) {
  const EncoderPass pass =
      run_encoder(tape, vars.embed_w, vars.enc_wi, vars.enc_wh, vars.enc_b, normalized_instance);
  Encoded out;
  out.embeddings = pass.embeddings;
  out.states = pass.states;
  out.projected = tape.matmul(vars.w1, pass.states);
  out.h_last = pass.h;
  out.c_last = pass.c;
  out.items = static_cast<int>(tape.value(pass.states).cols());
  return out;
}

namespace {

int sample_index(const Eigen::RowVectorXd& probs, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng);
  double acc = 0.0;
  int last = -1;
  for (Eigen::Index j = 0; j < probs.size(); ++j) {
    if (probs(j) <= 0.0) continue;
    acc += probs(j);
    last = static_cast<int>(j);
    if (r < acc) return last;
  }
  return last;  // rounding left r just above the final cumulative sum
}

}  // namespace

RolloutRecord decode(Tape& tape, const ActorVars& vars, const Encoded& enc, DecodeMode mode,
                     Rng* rng, bool keep_step_probs) {
  if (mode == DecodeMode::kSample && rng == nullptr)
    throw InputError("decode: sample mode needs a generator");
  const int d = static_cast<int>(tape.value(vars.v_go).rows());
  const int items = enc.items;

  RolloutRecord out;
  out.tour.order.reserve(static_cast<std::size_t>(items));
  std::vector<bool> visited(static_cast<std::size_t>(items), false);
  std::vector<bool> mask(static_cast<std::size_t>(items), true);

  Tape::Var h = enc.h_last;
  Tape::Var c = enc.c_last;
  Tape::Var x = vars.v_go;
  Tape::Var total{};
  bool have_total = false;

  for (int t = 0; t < items; ++t) {
    const Tape::Var hc = lstm_step(tape, vars.dec_wi, vars.dec_wh, vars.dec_b, x, h, c);
    h = tape.rows(hc, 0, d);
    c = tape.rows(hc, d, d);

    if (t == 0) {
      std::fill(mask.begin(), mask.end(), true);
      mask[0] = false;  // the tour always leaves from the start
    } else {
      mask = visited;
    }
    const Tape::Var query = tape.matmul(vars.w2, h);
    const Tape::Var act = tape.tanh(tape.add_columnwise(enc.projected, query));
    const Tape::Var scores = tape.mask_fill(tape.matmul(vars.v_att, act), mask, kMaskedScore);
    const Eigen::RowVectorXd probs = softmax(tape.value(scores).row(0));

    int choice = 0;
    if (mode == DecodeMode::kGreedy) {
      probs.maxCoeff(&choice);
    } else {
      choice = sample_index(probs, *rng);
    }
    const Tape::Var lp = tape.log_softmax_pick(scores, choice);
    total = have_total ? tape.add(total, lp) : lp;
    have_total = true;

    if (keep_step_probs) out.step_probs.push_back(probs);
    visited[static_cast<std::size_t>(choice)] = true;
    out.tour.order.push_back(choice);
    x = tape.column(enc.embeddings, choice);
  }
  out.log_prob = total;
  out.log_prob_value = tape.scalar(total);
  return out;
}

Tape::Var critic_value(Tape& tape, const CriticVars& vars, const Instance& normalized_instance) {
  const EncoderPass pass =
      run_encoder(tape, vars.embed_w, vars.enc_wi, vars.enc_wh, vars.enc_b, normalized_instance);
  const Tape::Var pooled = tape.mean_columns(pass.states);
  const Tape::Var hidden = tape.relu(tape.add(tape.matmul(vars.fc1_w, pooled), vars.fc1_b));
  return tape.add(tape.matmul(vars.fc2_w, hidden), vars.fc2_b);
}

Matrix embed_instance(const PolicyParams& policy, const Instance& normalized_instance) {
  return policy.embed_w * item_features(normalized_instance);
}

Matrix encode_states(const PolicyParams& policy, const Matrix& embeddings) {
  Tape tape;
  const int d = policy.hidden_dim;
  const Tape::Var wi = tape.constant(policy.enc.w_input);
  const Tape::Var wh = tape.constant(policy.enc.w_hidden);
  const Tape::Var b = tape.constant(policy.enc.bias);
  const Tape::Var emb = tape.constant(embeddings);
  Tape::Var h = tape.constant(Matrix::Zero(d, 1));
  Tape::Var c = tape.constant(Matrix::Zero(d, 1));
  Matrix states(d, embeddings.cols());
  for (Eigen::Index j = 0; j < embeddings.cols(); ++j) {
    const Tape::Var hc = lstm_step(tape, wi, wh, b, tape.column(emb, static_cast<int>(j)), h, c);
    h = tape.rows(hc, 0, d);
    c = tape.rows(hc, d, d);
    states.col(j) = tape.value(h);
  }
  return states;
}

Eigen::RowVectorXd attention_scores(const PolicyParams& policy, const Matrix& states,
                                    const Eigen::VectorXd& h, const std::vector<bool>& visited) {
  bool any_open = false;
  for (bool v : visited) any_open = any_open || !v;
  if (!any_open) throw InputError("attention_scores: every item is masked");
  const Matrix act = ((policy.w1 * states).colwise() + policy.w2 * h).array().tanh().matrix();
  Eigen::RowVectorXd u = policy.v_att * act;
  for (Eigen::Index j = 0; j < u.size(); ++j)
    if (visited[static_cast<std::size_t>(j)]) u(j) = kMaskedScore;
  return u;
}

Eigen::RowVectorXd pointer_softmax(const Eigen::RowVectorXd& scores) {
  if (!(scores.maxCoeff() > kMaskedScore))
    throw InputError("pointer_softmax: no selectable item");
  return softmax(scores);
}

RolloutResult decode_rollout(const PolicyParams& policy, const Instance& normalized_instance,
                             DecodeMode mode, Rng* rng, bool keep_step_probs) {
  Tape tape;
  const ActorVars vars = bind(tape, policy);
  const Encoded enc = encode(tape, vars, normalized_instance);
  RolloutRecord rec = decode(tape, vars, enc, mode, rng, keep_step_probs);
  RolloutResult out;
  out.tour = std::move(rec.tour);
  out.log_prob = rec.log_prob_value;
  out.step_probs = std::move(rec.step_probs);
  return out;
}

double critic_value(const CriticParams& critic, const Instance& normalized_instance) {
  Tape tape;
  const CriticVars vars = bind(tape, critic);
  return tape.scalar(critic_value(tape, vars, normalized_instance));
}

}  // namespace ptra::nn
