#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "rnco/env.hpp"
#include "rnco/ops.hpp"
#include "rnco/param_store.hpp"

namespace rnco {

constexpr double kRmsEps = 1e-8;

// Policy structure: a base encoder that embeds a state from scratch, an
// optional smaller recurrent encoder that updates the previous step's
// embeddings, and a per-node linear decoder. l_u == 0 means base-only.
struct ModelConfig {
  Problem problem = Problem::tsp;
  int l_e = 3, d_e = 64, d_ff_e = 128, heads_e = 4;
  int l_u = 0, d_u = 0, d_ff_u = 0, heads_u = 4;

  int d_feat() const { return problem == Problem::tsp ? 2 : 4; }
  // actions per node row: CVRP predicts a (direct, via-depot) pair per customer
  int arity() const { return problem == Problem::cvrp ? 2 : 1; }
  bool has_recurrent() const { return l_u > 0; }

  void validate() const {
    if (l_e < 1 || d_e < 1 || d_ff_e < 1) throw ConfigError("model: bad base dimensions");
    if (d_e % heads_e != 0) throw ConfigError("model: d_e not divisible by heads_e");
    if (l_u > 0) {
      if (d_u < 1 || d_ff_u < 1) throw ConfigError("model: bad recurrent dimensions");
      if (d_u % heads_u != 0) throw ConfigError("model: d_u not divisible by heads_u");
    }
  }
};

inline nlohmann::json model_config_to_json(const ModelConfig& c) {
  return {{"problem", problem_name(c.problem)}, {"L_E", c.l_e},    {"d_E", c.d_e},
          {"d_ff_E", c.d_ff_e},                 {"heads_E", c.heads_e}, {"L_U", c.l_u},
          {"d_U", c.d_u},                       {"d_ff_U", c.d_ff_u},   {"heads_U", c.heads_u}};
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.problem = problem_from_name(j.at("problem").get<std::string>());
  c.l_e = j.at("L_E").get<int>();
  c.d_e = j.at("d_E").get<int>();
  c.d_ff_e = j.at("d_ff_E").get<int>();
  c.heads_e = j.at("heads_E").get<int>();
  c.l_u = j.at("L_U").get<int>();
  c.d_u = j.at("d_U").get<int>();
  c.d_ff_u = j.at("d_ff_U").get<int>();
  c.heads_u = j.at("heads_U").get<int>();
  c.validate();
  return c;
}

// Node embeddings for one state; row i corresponds to node_ids[i].
template <typename Real>
struct Embeddings {
  Tensor<Real> h;
  std::vector<int> node_ids;
  int t = 0;
};

namespace detail {

template <typename Real>
void init_block(ParamStore<Real>& p, const std::string& prefix, int d, int dff, Rng& rng) {
  p.add(prefix + ".norm1.gain", Tensor<Real>::from({d}, std::vector<Real>(d, Real(1))));
  p.add(prefix + ".attn.wq", glorot_uniform<Real>(d, d, rng));
  p.add(prefix + ".attn.bq", Tensor<Real>::zeros({d}));
  p.add(prefix + ".attn.wk", glorot_uniform<Real>(d, d, rng));
  p.add(prefix + ".attn.bk", Tensor<Real>::zeros({d}));
  p.add(prefix + ".attn.wv", glorot_uniform<Real>(d, d, rng));
  p.add(prefix + ".attn.bv", Tensor<Real>::zeros({d}));
  p.add(prefix + ".attn.wo", glorot_uniform<Real>(d, d, rng));
  p.add(prefix + ".attn.bo", Tensor<Real>::zeros({d}));
  p.add(prefix + ".alpha_attn", Tensor<Real>::zeros({1}));
  p.add(prefix + ".norm2.gain", Tensor<Real>::from({d}, std::vector<Real>(d, Real(1))));
  p.add(prefix + ".ff.w1", glorot_uniform<Real>(dff, d, rng));
  p.add(prefix + ".ff.b1", Tensor<Real>::zeros({dff}));
  p.add(prefix + ".ff.w2", glorot_uniform<Real>(d, dff, rng));
  p.add(prefix + ".ff.b2", Tensor<Real>::zeros({d}));
  p.add(prefix + ".alpha_ff", Tensor<Real>::zeros({1}));
}

template <typename Real>
BlockParams<Real> block_params(const ParamStore<Real>& p, const std::string& prefix) {
  BlockParams<Real> b;
  b.norm1_gain = p.at(prefix + ".norm1.gain");
  b.mha.wq = p.at(prefix + ".attn.wq");
  b.mha.bq = p.at(prefix + ".attn.bq");
  b.mha.wk = p.at(prefix + ".attn.wk");
  b.mha.bk = p.at(prefix + ".attn.bk");
  b.mha.wv = p.at(prefix + ".attn.wv");
  b.mha.bv = p.at(prefix + ".attn.bv");
  b.mha.wo = p.at(prefix + ".attn.wo");
  b.mha.bo = p.at(prefix + ".attn.bo");
  b.alpha_attn = p.at(prefix + ".alpha_attn");
  b.norm2_gain = p.at(prefix + ".norm2.gain");
  b.ff_w1 = p.at(prefix + ".ff.w1");
  b.ff_b1 = p.at(prefix + ".ff.b1");
  b.ff_w2 = p.at(prefix + ".ff.w2");
  b.ff_b2 = p.at(prefix + ".ff.b2");
  b.alpha_ff = p.at(prefix + ".alpha_ff");
  return b;
}

}  // namespace detail

// Fresh parameters: Glorot linears, zero biases, zero ReZero scalars, unit
// norm gains, zero-initialized decoder (uniform initial policy).
template <typename Real>
ParamStore<Real> init_params(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(splitmix64(seed) ^ 0x7f4a7c15ull);
  ParamStore<Real> p;
  p.add("base.input.w", glorot_uniform<Real>(cfg.d_e, cfg.d_feat(), rng));
  p.add("base.input.b", Tensor<Real>::zeros({cfg.d_e}));
  p.add("base.start", embedding_uniform<Real>(cfg.d_e, rng));
  p.add("base.end", embedding_uniform<Real>(cfg.d_e, rng));
  for (int l = 0; l < cfg.l_e; ++l) {
    detail::init_block(p, "base.blk" + std::to_string(l), cfg.d_e, cfg.d_ff_e, rng);
  }
  p.add("dec.w", Tensor<Real>::zeros({cfg.arity(), cfg.d_e}));
  p.add("dec.b", Tensor<Real>::zeros({cfg.arity()}));
  if (cfg.has_recurrent()) {
    p.add("rec.input.w", glorot_uniform<Real>(cfg.d_u, cfg.d_feat(), rng));
    p.add("rec.input.b", Tensor<Real>::zeros({cfg.d_u}));
    p.add("rec.start", embedding_uniform<Real>(cfg.d_u, rng));
    p.add("rec.end", embedding_uniform<Real>(cfg.d_u, rng));
    p.add("rec.prevnorm.gain", Tensor<Real>::from({cfg.d_e}, std::vector<Real>(cfg.d_e, Real(1))));
    p.add("rec.merge.w", glorot_uniform<Real>(cfg.d_u, cfg.d_e + cfg.d_u, rng));
    p.add("rec.merge.b", Tensor<Real>::zeros({cfg.d_u}));
    for (int l = 0; l < cfg.l_u; ++l) {
      detail::init_block(p, "rec.blk" + std::to_string(l), cfg.d_u, cfg.d_ff_u, rng);
    }
    p.add("rec.out.w", glorot_uniform<Real>(cfg.d_e, cfg.d_u, rng));
    p.add("rec.out.b", Tensor<Real>::zeros({cfg.d_e}));
  }
  return p;
}

template <typename Real>
Tensor<Real> state_features(const State& s) {
  const auto f = s.features();
  std::vector<Real> v(f.begin(), f.end());
  return Tensor<Real>::from({s.n_rows(), s.d_feat()}, std::move(v));
}

// Counts of encoder invocations during a solve; fed into evaluation reports.
struct EncoderStats {
  long long base_calls = 0;
  long long rec_calls = 0;
};

template <typename Real>
Embeddings<Real> base_encode(const ParamStore<Real>& p, const ModelConfig& cfg, const State& s,
                             Tape<std::type_identity_t<Real>>* tape, EncoderStats* stats = nullptr) {
  if (s.done) throw ContractError("base_encode: state is terminal");
  if (stats) ++stats->base_calls;
  auto x = state_features<Real>(s);
  auto h = linear(x, p.at("base.input.w"), p.at("base.input.b"), tape);
  h = add_to_row(h, 0, p.at("base.start"), tape);
  h = add_to_row(h, s.n_rows() - 1, p.at("base.end"), tape);
  for (int l = 0; l < cfg.l_e; ++l) {
    h = transformer_block(h, detail::block_params(p, "base.blk" + std::to_string(l)), cfg.heads_e,
                          Real(kRmsEps), tape);
  }
  return {std::move(h), s.node_ids(), s.t};
}

// Reorders/filters the previous step's embedding rows so row i matches row i
// of `next`; exactly one node (the consumed current position) is dropped.
template <typename Real>
Tensor<Real> align_embeddings(const Embeddings<Real>& prev, const State& next,
                              Tape<std::type_identity_t<Real>>* tape) {
  const auto ids = next.node_ids();
  if (prev.node_ids.size() != ids.size() + 1) {
    throw ContractError("align_embeddings: expected the state to have one node fewer");
  }
  std::unordered_map<int, int> row_of;
  for (std::size_t i = 0; i < prev.node_ids.size(); ++i) row_of[prev.node_ids[i]] = static_cast<int>(i);
  std::vector<int> gather(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto it = row_of.find(ids[i]);
    if (it == row_of.end()) {
      throw ContractError("align_embeddings: node " + std::to_string(ids[i]) +
                          " missing from the previous embeddings");
    }
    gather[i] = it->second;
  }
  return gather_rows(prev.h, gather, tape);
}

// One recurrent update: fresh per-node embeddings from the state, merged with
// the normalized previous embeddings, refined by the recurrent blocks, and
// projected back to the base embedding width.
template <typename Real>
Embeddings<Real> recurrent_encode(const ParamStore<Real>& p, const ModelConfig& cfg,
                                  const Tensor<Real>& aligned_prev, const State& s,
                                  Tape<std::type_identity_t<Real>>* tape, EncoderStats* stats = nullptr) {
  if (!cfg.has_recurrent()) throw ConfigError("recurrent_encode: model has no recurrent encoder");
  if (s.done) throw ContractError("recurrent_encode: state is terminal");
  if (aligned_prev.rows() != s.n_rows() || aligned_prev.cols() != cfg.d_e) {
    throw ContractError("recurrent_encode: previous embeddings not aligned with the state");
  }
  if (stats) ++stats->rec_calls;
  auto x = state_features<Real>(s);
  auto h0 = linear(x, p.at("rec.input.w"), p.at("rec.input.b"), tape);
  h0 = add_to_row(h0, 0, p.at("rec.start"), tape);
  h0 = add_to_row(h0, s.n_rows() - 1, p.at("rec.end"), tape);
  auto hhat = rmsnorm(aligned_prev, p.at("rec.prevnorm.gain"), Real(kRmsEps), tape);
  auto merged = linear(concat_cols(hhat, h0, tape), p.at("rec.merge.w"), p.at("rec.merge.b"), tape);
  auto h = add(relu(merged, tape), h0, tape);
  for (int l = 0; l < cfg.l_u; ++l) {
    h = transformer_block(h, detail::block_params(p, "rec.blk" + std::to_string(l)), cfg.heads_u,
                          Real(kRmsEps), tape);
  }
  auto out = linear(h, p.at("rec.out.w"), p.at("rec.out.b"), tape);
  return {std::move(out), s.node_ids(), s.t};
}

// Per-action logits in the environment's action indexing. TSP/OP: one logit
// per state row. CVRP: the customer rows' (direct, via-depot) pairs, flattened
// as [direct 0..m-1 | via 0..m-1].
template <typename Real>
Tensor<Real> decode_logits(const ParamStore<Real>& p, const ModelConfig& cfg,
                           const Embeddings<Real>& emb, Tape<std::type_identity_t<Real>>* tape) {
  auto raw = linear(emb.h, p.at("dec.w"), p.at("dec.b"), tape);  // [n x arity]
  const int n = raw.rows();
  if (cfg.arity() == 1) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    return gather_elems(raw, idx, tape);
  }
  const int m = n - 2;
  std::vector<int> idx(2 * m);
  for (int j = 0; j < m; ++j) {
    idx[j] = (1 + j) * 2;          // direct
    idx[m + j] = (1 + j) * 2 + 1;  // via depot
  }
  return gather_elems(raw, idx, tape);
}

// Action distribution: masked softmax over the feasible actions.
template <typename Real>
std::vector<Real> decode(const ParamStore<Real>& p, const ModelConfig& cfg,
                         const Embeddings<Real>& emb, const std::vector<std::uint8_t>& mask) {
  auto logits = decode_logits<Real>(p, cfg, emb, nullptr);
  if (static_cast<int>(mask.size()) != logits.size()) {
    throw ShapeError("decode: mask arity does not match the action space");
  }
  std::vector<Real> lv(logits.ptr(), logits.ptr() + logits.size());
  return masked_softmax(lv, mask);
}

}  // namespace rnco
