#pragma once

#include "jsccf/autograd.hpp"
#include "jsccf/rng.hpp"

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace jsccf::nn {

enum class PosEmbedKind { Dense, Conditional };

// Softmax logit divisor: sqrt(d) (model width) or sqrt(d_s) (head width).
enum class AttentionScale { Width, HeadWidth };

// Transform applied before each attention and MLP block.
enum class PreNorm {
  GeluOfNorm,  // GeLU(LayerNorm(x))
  NormOfGelu,  // LayerNorm(GeLU(x))
  NormOnly,    // LayerNorm(x)
};

PosEmbedKind parse_pos_embed(const std::string& name);
AttentionScale parse_attention_scale(const std::string& name);
PreNorm parse_pre_norm(const std::string& name);
std::string to_string(PosEmbedKind kind);
std::string to_string(AttentionScale scale);
std::string to_string(PreNorm pre);

struct ModelSpec {
  int layers = 8;
  int heads = 8;
  int width = 256;
  // 0 selects 4 * width.
  int mlp_hidden = 0;
  PosEmbedKind pos_embed = PosEmbedKind::Dense;
  bool siamese = true;
  AttentionScale attention_scale = AttentionScale::Width;
  PreNorm pre_norm = PreNorm::GeluOfNorm;
  double init_std = 0.02;

  int head_width() const { return width / heads; }
  int mlp_width() const { return mlp_hidden > 0 ? mlp_hidden : 4 * width; }
  void validate() const;
};

inline constexpr double kLayerNormEps = 1e-6;

// Named learnable arrays. Insertion order is the canonical order for
// optimizer state and checkpoints.
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;
  ParamStore(ParamStore&&) = default;
  ParamStore& operator=(ParamStore&&) = default;

  Var add(const std::string& name, Matrix init);
  const Var& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  const std::vector<std::pair<std::string, Var>>& entries() const { return entries_; }
  std::size_t scalar_count() const;
  void zero_grad();

 private:
  std::vector<std::pair<std::string, Var>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Truncated normal (+-2 std) weights, zero biases, unit LayerNorm scales.
class Initializer {
 public:
  explicit Initializer(std::uint64_t seed, double std = 0.02) : rng_(seed), std_(std) {}
  Matrix weight(Index rows, Index cols);

 private:
  Rng rng_;
  double std_;
};

struct Linear {
  Var weight;
  Var bias;  // 1 x out, or empty (0x0) when the layer has no bias
  bool has_bias = false;

  static Linear create(ParamStore& store, Initializer& init, const std::string& name, int in, int out, bool bias);
  Var operator()(const Var& x) const;
};

// x * W.
Var linear_project(const Var& x, const Var& weight);

struct LayerNormParams {
  Var gamma;
  Var beta;

  static LayerNormParams create(ParamStore& store, const std::string& name, int width);
};

struct PositionEmbedding {
  PosEmbedKind kind = PosEmbedKind::Dense;
  int side = 1;
  Var table;   // dense: l x d
  Var kernel;  // conditional: 9d x d
  Var bias;    // conditional: 1 x d

  static PositionEmbedding create(ParamStore& store, Initializer& init, const std::string& name, PosEmbedKind kind,
                                  int side, int width);
  // p_e for a projected l x d token matrix.
  Var operator()(const Var& projected) const;
};

// Learned l x d table; row r embeds patch index r.
Var position_embed_dpe(Index length, const Var& table);
// 3x3 convolution (zero padding 1) over the side x side token grid.
Var position_embed_cpe(const Var& projected, const Var& kernel, const Var& bias);

// softmax(q k^T / sqrt(divisor_dim)) v with q = x Wq, k = x Wk, v = x Wv.
Var self_attention(const Var& x, const Var& wq, const Var& wk, const Var& wv, double divisor_dim);

struct AttentionParams {
  // Heads are stacked along columns: head h owns columns [h*d_s, (h+1)*d_s).
  Var wq, wk, wv;
  Var wo;  // d_s*N_s x d
  int heads = 1;
  AttentionScale scale = AttentionScale::Width;

  static AttentionParams create(ParamStore& store, Initializer& init, const std::string& name, const ModelSpec& spec);
};

// x + concat(SA_1(x), ..., SA_Ns(x)) Wo.
Var multi_head_self_attention(const Var& x, const AttentionParams& p);

struct MlpParams {
  Linear fc1;
  Linear fc2;

  static MlpParams create(ParamStore& store, Initializer& init, const std::string& name, int width, int hidden);
};

Var mlp(const Var& x, const MlpParams& p);

struct TransformerLayerParams {
  LayerNormParams norm1;
  AttentionParams attention;
  LayerNormParams norm2;
  MlpParams mlp;
  PreNorm pre_norm = PreNorm::GeluOfNorm;

  static TransformerLayerParams create(ParamStore& store, Initializer& init, const std::string& name,
                                       const ModelSpec& spec);
};

// u = MSA(pre(x)); out = u + MLP(pre(u)).
Var transformer_layer(const Var& x, const TransformerLayerParams& p);

// Positional embedding followed by the layer stack: shared by every ViT
// encoder and decoder.
struct TransformerStack {
  PositionEmbedding pos;
  std::vector<TransformerLayerParams> layers;

  static TransformerStack create(ParamStore& store, Initializer& init, const std::string& name, const ModelSpec& spec,
                                 int side);
  Var operator()(const Var& projected) const;
};

// Weight-shared two-branch front end: branch(y) + branch(-y) with
// branch(v) = fc2(GeLU(fc1(v))).
struct SiameseParams {
  Linear fc1;
  Linear fc2;

  static SiameseParams create(ParamStore& store, Initializer& init, const std::string& name, int in, int width);
};

Var siamese_embed(const Var& y, const SiameseParams& p);

}  // namespace jsccf::nn
