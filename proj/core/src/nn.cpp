#include "jsccf/nn.hpp"

#include "jsccf/errors.hpp"

#include <array>
#include <cmath>

namespace jsccf::nn {

PosEmbedKind parse_pos_embed(const std::string& name) {
  if (name == "dpe") return PosEmbedKind::Dense;
  if (name == "cpe") return PosEmbedKind::Conditional;
  throw ConfigError("unknown positional embedding '" + name + "'");
}

AttentionScale parse_attention_scale(const std::string& name) {
  if (name == "width") return AttentionScale::Width;
  if (name == "head_width") return AttentionScale::HeadWidth;
  throw ConfigError("unknown attention scale '" + name + "'");
}

PreNorm parse_pre_norm(const std::string& name) {
  if (name == "gelu_ln") return PreNorm::GeluOfNorm;
  if (name == "ln_gelu") return PreNorm::NormOfGelu;
  if (name == "ln") return PreNorm::NormOnly;
  throw ConfigError("unknown pre-norm '" + name + "'");
}

std::string to_string(PosEmbedKind kind) { return kind == PosEmbedKind::Dense ? "dpe" : "cpe"; }
std::string to_string(AttentionScale scale) { return scale == AttentionScale::Width ? "width" : "head_width"; }
std::string to_string(PreNorm pre) {
  switch (pre) {
    case PreNorm::GeluOfNorm: return "gelu_ln";
    case PreNorm::NormOfGelu: return "ln_gelu";
    case PreNorm::NormOnly: return "ln";
  }
  return "?";
}

void ModelSpec::validate() const {
  if (layers < 0 || heads < 1 || width < 1 || mlp_hidden < 0) throw ConfigError("model: sizes must be positive");
  if (width % heads != 0) {
    throw ConfigError("model: heads (" + std::to_string(heads) + ") must divide width (" + std::to_string(width) + ")");
  }
  if (!(init_std > 0.0)) throw ConfigError("model: init_std must be positive");
}

Var ParamStore::add(const std::string& name, Matrix init) {
  if (index_.count(name)) throw ConfigError("duplicate parameter '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.emplace_back(name, Var::parameter(std::move(init)));
  return entries_.back().second;
}

const Var& ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("no parameter named '" + name + "'");
  return entries_[it->second].second;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, v] : entries_) n += static_cast<std::size_t>(v.size());
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [name, v] : entries_) v.zero_grad();
}

Matrix Initializer::weight(Index rows, Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) {
    double z = normal(rng_);
    while (std::abs(z) > 2.0) z = normal(rng_);
    m.data()[i] = z * std_;
  }
  return m;
}

Linear Linear::create(ParamStore& store, Initializer& init, const std::string& name, int in, int out, bool bias) {
  Linear l;
  l.weight = store.add(name + ".weight", init.weight(in, out));
  l.has_bias = bias;
  if (bias) l.bias = store.add(name + ".bias", Matrix::Zero(1, out));
  return l;
}

Var Linear::operator()(const Var& x) const {
  Var y = linear_project(x, weight);
  return has_bias ? add_row(y, bias) : y;
}

Var linear_project(const Var& x, const Var& weight) { return matmul(x, weight); }

LayerNormParams LayerNormParams::create(ParamStore& store, const std::string& name, int width) {
  return {store.add(name + ".gamma", Matrix::Ones(1, width)), store.add(name + ".beta", Matrix::Zero(1, width))};
}

PositionEmbedding PositionEmbedding::create(ParamStore& store, Initializer& init, const std::string& name,
                                            PosEmbedKind kind, int side, int width) {
  PositionEmbedding pe;
  pe.kind = kind;
  pe.side = side;
  if (kind == PosEmbedKind::Dense) {
    pe.table = store.add(name + ".table", init.weight(static_cast<Index>(side) * side, width));
  } else {
    pe.kernel = store.add(name + ".kernel", init.weight(9 * static_cast<Index>(width), width));
    pe.bias = store.add(name + ".bias", Matrix::Zero(1, width));
  }
  return pe;
}

Var PositionEmbedding::operator()(const Var& projected) const {
  if (kind == PosEmbedKind::Dense) return position_embed_dpe(projected.rows(), table);
  return position_embed_cpe(projected, kernel, bias);
}

Var position_embed_dpe(Index length, const Var& table) {
  if (table.rows() != length) {
    throw DimensionError("dpe: table has " + std::to_string(table.rows()) + " rows, sequence has " +
                         std::to_string(length));
  }
  return table;
}

Var position_embed_cpe(const Var& projected, const Var& kernel, const Var& bias) {
  const auto side = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(projected.rows()))));
  if (side * side != projected.rows()) {
    throw DimensionError("cpe: sequence length " + std::to_string(projected.rows()) + " is not a perfect square");
  }
  return add_row(matmul(im2col3x3(projected, side), kernel), bias);
}

Var self_attention(const Var& x, const Var& wq, const Var& wk, const Var& wv, double divisor_dim) {
  const Var q = matmul(x, wq);
  const Var k = matmul(x, wk);
  const Var v = matmul(x, wv);
  const Var logits = scale(matmul(q, transpose(k)), 1.0 / std::sqrt(divisor_dim));
  return matmul(softmax_rows(logits), v);
}

AttentionParams AttentionParams::create(ParamStore& store, Initializer& init, const std::string& name,
                                        const ModelSpec& spec) {
  AttentionParams p;
  const int d = spec.width;
  p.wq = store.add(name + ".wq", init.weight(d, d));
  p.wk = store.add(name + ".wk", init.weight(d, d));
  p.wv = store.add(name + ".wv", init.weight(d, d));
  p.wo = store.add(name + ".wo", init.weight(d, d));
  p.heads = spec.heads;
  p.scale = spec.attention_scale;
  return p;
}

Var multi_head_self_attention(const Var& x, const AttentionParams& p) {
  const Index d = x.cols();
  const Index ds = p.wq.cols() / p.heads;
  const double divisor = p.scale == AttentionScale::Width ? static_cast<double>(d) : static_cast<double>(ds);
  const Var q = matmul(x, p.wq);
  const Var k = matmul(x, p.wk);
  const Var v = matmul(x, p.wv);
  std::vector<Var> heads;
  heads.reserve(p.heads);
  for (int h = 0; h < p.heads; ++h) {
    const Var qh = slice_cols(q, h * ds, ds);
    const Var kh = slice_cols(k, h * ds, ds);
    const Var vh = slice_cols(v, h * ds, ds);
    const Var logits = scale(matmul(qh, transpose(kh)), 1.0 / std::sqrt(divisor));
    heads.push_back(matmul(softmax_rows(logits), vh));
  }
  const Var mixed = p.heads == 1 ? heads.front() : concat_cols(heads);
  return x + matmul(mixed, p.wo);
}

MlpParams MlpParams::create(ParamStore& store, Initializer& init, const std::string& name, int width, int hidden) {
  return {Linear::create(store, init, name + ".fc1", width, hidden, true),
          Linear::create(store, init, name + ".fc2", hidden, width, true)};
}

Var mlp(const Var& x, const MlpParams& p) { return p.fc2(gelu(p.fc1(x))); }

TransformerLayerParams TransformerLayerParams::create(ParamStore& store, Initializer& init, const std::string& name,
                                                      const ModelSpec& spec) {
  TransformerLayerParams p;
  p.norm1 = LayerNormParams::create(store, name + ".norm1", spec.width);
  p.attention = AttentionParams::create(store, init, name + ".attn", spec);
  p.norm2 = LayerNormParams::create(store, name + ".norm2", spec.width);
  p.mlp = MlpParams::create(store, init, name + ".mlp", spec.width, spec.mlp_width());
  p.pre_norm = spec.pre_norm;
  return p;
}

namespace {

Var pre_block(const Var& x, const LayerNormParams& norm, PreNorm pre) {
  switch (pre) {
    case PreNorm::GeluOfNorm: return gelu(layer_norm(x, norm.gamma, norm.beta, kLayerNormEps));
    case PreNorm::NormOfGelu: return layer_norm(gelu(x), norm.gamma, norm.beta, kLayerNormEps);
    case PreNorm::NormOnly: return layer_norm(x, norm.gamma, norm.beta, kLayerNormEps);
  }
  return x;
}

}  // namespace

Var transformer_layer(const Var& x, const TransformerLayerParams& p) {
  const Var u = multi_head_self_attention(pre_block(x, p.norm1, p.pre_norm), p.attention);
  return u + mlp(pre_block(u, p.norm2, p.pre_norm), p.mlp);
}

TransformerStack TransformerStack::create(ParamStore& store, Initializer& init, const std::string& name,
                                          const ModelSpec& spec, int side) {
  TransformerStack s;
  s.pos = PositionEmbedding::create(store, init, name + ".pos", spec.pos_embed, side, spec.width);
  for (int i = 0; i < spec.layers; ++i) {
    s.layers.push_back(TransformerLayerParams::create(store, init, name + ".layer" + std::to_string(i), spec));
  }
  return s;
}

Var TransformerStack::operator()(const Var& projected) const {
  Var x = projected + pos(projected);
  for (const auto& layer : layers) x = transformer_layer(x, layer);
  return x;
}

SiameseParams SiameseParams::create(ParamStore& store, Initializer& init, const std::string& name, int in,
                                    int width) {
  return {Linear::create(store, init, name + ".fc1", in, width, true),
          Linear::create(store, init, name + ".fc2", width, width, true)};
}

Var siamese_embed(const Var& y, const SiameseParams& p) {
  if (y.cols() != p.fc1.weight.rows()) {
    throw DimensionError("siamese: input width " + std::to_string(y.cols()) + ", expected " +
                         std::to_string(p.fc1.weight.rows()));
  }
  auto branch = [&p](const Var& v) { return p.fc2(gelu(p.fc1(v))); };
  return branch(y) + branch(scale(y, -1.0));
}

}  // namespace jsccf::nn
