#include "molforge/toy/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "molforge/common/error.hpp"
#include "molforge/common/rng.hpp"

namespace molforge::toy {
namespace {

constexpr double kLayerNormEps = 1e-5;

template <typename S>
S sigmoid(S x) {
  return S(1) / (S(1) + std::exp(-x));
}

template <typename S>
S silu(S x) {
  return x * sigmoid(x);
}

template <typename S>
S silu_grad(S x) {
  const S s = sigmoid(x);
  return s * (S(1) + x * (S(1) - s));
}

template <typename S>
struct NormCache {
  Matrix<S> xhat;
  Vector<S> rstd;
};

template <typename S>
Matrix<S> layer_norm(const Matrix<S>& x, const Matrix<S>& gain, const Matrix<S>& bias, NormCache<S>& cache) {
  const auto rows = x.rows();
  const auto d = static_cast<S>(x.cols());
  cache.xhat.resize(rows, x.cols());
  cache.rstd.resize(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const S mean = x.row(r).sum() / d;
    const auto centered = (x.row(r).array() - mean).matrix();
    const S var = centered.squaredNorm() / d;
    cache.rstd(r) = S(1) / std::sqrt(var + static_cast<S>(kLayerNormEps));
    cache.xhat.row(r) = centered * cache.rstd(r);
  }
  Matrix<S> y = (cache.xhat.array().rowwise() * gain.row(0).array()).matrix();
  y.rowwise() += bias.row(0);
  return y;
}

template <typename S>
Matrix<S> layer_norm_backward(const Matrix<S>& dy, const Matrix<S>& gain, const NormCache<S>& cache, Matrix<S>& dgain,
                              Matrix<S>& dbias) {
  dgain.row(0) += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
  dbias.row(0) += dy.colwise().sum();
  const Matrix<S> dxhat = (dy.array().rowwise() * gain.row(0).array()).matrix();
  const auto d = static_cast<S>(dy.cols());
  Matrix<S> dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const S mean_dxhat = dxhat.row(r).sum() / d;
    const S mean_dot = dxhat.row(r).dot(cache.xhat.row(r)) / d;
    dx.row(r) = cache.rstd(r) * ((dxhat.row(r).array() - mean_dxhat) - cache.xhat.row(r).array() * mean_dot).matrix();
  }
  return dx;
}

template <typename S>
Matrix<S> affine(const Matrix<S>& x, const Matrix<S>& weight, const Matrix<S>& bias) {
  Matrix<S> y = x * weight;
  y.rowwise() += bias.row(0);
  return y;
}

template <typename S>
void affine_backward(const Matrix<S>& x, const Matrix<S>& dy, Matrix<S>& dweight, Matrix<S>& dbias) {
  dweight.noalias() += x.transpose() * dy;
  dbias.row(0) += dy.colwise().sum();
}

template <typename S>
struct LayerCache {
  NormCache<S> norm1, norm2;
  Matrix<S> a, q, k, v, o, b, u, z;
  std::vector<Matrix<S>> probs;  // per head, L x L (zero above the diagonal)
};

template <typename S>
struct ForwardCache {
  std::vector<LayerCache<S>> layers;
  NormCache<S> final_norm;
  Matrix<S> final_out;
  int molecule_position = -1;
  Vector<S> projector_pre;  // W1 m + b1
  Vector<S> projector_act;  // SiLU of the above
  std::vector<std::pair<int, S>> molecule_nonzeros;
};

template <typename S>
std::vector<std::pair<int, S>> nonzeros(const std::vector<float>& molecule) {
  std::vector<std::pair<int, S>> out;
  for (std::size_t j = 0; j < molecule.size(); ++j) {
    if (molecule[j] != 0.0f) out.emplace_back(static_cast<int>(j), static_cast<S>(molecule[j]));
  }
  return out;
}

template <typename S>
Vector<S> project_sparse(const ProjectorParams<S>& params, const std::vector<std::pair<int, S>>& m, Vector<S>* pre,
                         Vector<S>* act) {
  Vector<S> h = params.b1.col(0);
  for (const auto& [j, value] : m) h.noalias() += params.W1.col(j) * value;
  Vector<S> z = h.unaryExpr([](S x) { return silu(x); });
  Vector<S> out = params.W2 * z + params.b2.col(0);
  if (pre != nullptr) *pre = std::move(h);
  if (act != nullptr) *act = std::move(z);
  return out;
}

int molecule_position(const ToyDecoderConfig& config, const std::vector<int>& tokens) {
  int position = -1;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] != config.molecule_token_id) continue;
    if (position >= 0) throw ArgumentError("a sequence may hold at most one molecule token");
    position = static_cast<int>(i);
  }
  return position;
}

template <typename S>
Matrix<S> forward(const ToyModel<S>& model, const Sequence& sequence, ForwardCache<S>* cache) {
  const auto& config = model.config;
  validate_sequence(config, sequence);
  const auto length = static_cast<Eigen::Index>(sequence.tokens.size());
  const int d = config.d_model;
  const int dh = d / config.n_heads;
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));

  Matrix<S> x(length, d);
  const int mol = molecule_position(config, sequence.tokens);
  std::vector<std::pair<int, S>> mol_nonzeros;
  for (Eigen::Index i = 0; i < length; ++i) {
    if (i == mol) {
      mol_nonzeros = nonzeros<S>(*sequence.molecule);
      Vector<S> pre, act;
      x.row(i) = project_sparse(model.projector, mol_nonzeros, &pre, &act).transpose();
      if (cache != nullptr) {
        cache->projector_pre = std::move(pre);
        cache->projector_act = std::move(act);
      }
    } else {
      x.row(i) = model.embedding.row(sequence.tokens[static_cast<std::size_t>(i)]);
    }
  }
  x += model.positions.topRows(length);
  if (cache != nullptr) {
    cache->molecule_position = mol;
    cache->molecule_nonzeros = std::move(mol_nonzeros);
    cache->layers.resize(model.layers.size());
  }

  LayerCache<S> scratch;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    auto& c = cache != nullptr ? cache->layers[l] : scratch;
    c.a = layer_norm(x, layer.ln1_gain, layer.ln1_bias, c.norm1);
    c.q = affine(c.a, layer.Wq, layer.bq);
    c.k = affine(c.a, layer.Wk, layer.bk);
    c.v = affine(c.a, layer.Wv, layer.bv);
    c.o.resize(length, d);
    c.probs.assign(static_cast<std::size_t>(config.n_heads), Matrix<S>());
    for (int h = 0; h < config.n_heads; ++h) {
      Matrix<S> scores = c.q.middleCols(h * dh, dh) * c.k.middleCols(h * dh, dh).transpose() * scale;
      Matrix<S> probs = Matrix<S>::Zero(length, length);
      for (Eigen::Index i = 0; i < length; ++i) {
        const S top = scores.row(i).head(i + 1).maxCoeff();
        S total = 0;
        for (Eigen::Index j = 0; j <= i; ++j) {
          probs(i, j) = std::exp(scores(i, j) - top);
          total += probs(i, j);
        }
        probs.row(i).head(i + 1) /= total;
      }
      c.o.middleCols(h * dh, dh) = probs * c.v.middleCols(h * dh, dh);
      c.probs[static_cast<std::size_t>(h)] = std::move(probs);
    }
    x += affine(c.o, layer.Wo, layer.bo);
    c.b = layer_norm(x, layer.ln2_gain, layer.ln2_bias, c.norm2);
    c.u = affine(c.b, layer.W_up, layer.b_up);
    c.z = c.u.unaryExpr([](S value) { return silu(value); });
    x += affine(c.z, layer.W_down, layer.b_down);
  }
  NormCache<S> final_scratch;
  auto& final_norm = cache != nullptr ? cache->final_norm : final_scratch;
  Matrix<S> out = layer_norm(x, model.final_gain, model.final_bias, final_norm);
  Matrix<S> logits = out * model.embedding.transpose();
  if (cache != nullptr) cache->final_out = std::move(out);
  return logits;
}

template <typename S>
void backward(const ToyModel<S>& model, const Sequence& sequence, const ForwardCache<S>& cache,
              const Matrix<S>& dlogits, ToyModel<S>& grads) {
  const auto& config = model.config;
  const auto length = static_cast<Eigen::Index>(sequence.tokens.size());
  const int d = config.d_model;
  const int dh = d / config.n_heads;
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));

  grads.embedding.noalias() += dlogits.transpose() * cache.final_out;
  const Matrix<S> dfinal = dlogits * model.embedding;
  Matrix<S> dx = layer_norm_backward(dfinal, model.final_gain, cache.final_norm, grads.final_gain, grads.final_bias);

  for (std::size_t l = model.layers.size(); l-- > 0;) {
    const auto& layer = model.layers[l];
    auto& g = grads.layers[l];
    const auto& c = cache.layers[l];

    // MLP branch.
    affine_backward(c.z, dx, g.W_down, g.b_down);
    const Matrix<S> dz = dx * layer.W_down.transpose();
    const Matrix<S> du = (dz.array() * c.u.unaryExpr([](S value) { return silu_grad(value); }).array()).matrix();
    affine_backward(c.b, du, g.W_up, g.b_up);
    const Matrix<S> db = du * layer.W_up.transpose();
    dx += layer_norm_backward(db, layer.ln2_gain, c.norm2, g.ln2_gain, g.ln2_bias);

    // Attention branch.
    affine_backward(c.o, dx, g.Wo, g.bo);
    const Matrix<S> d_o = dx * layer.Wo.transpose();
    Matrix<S> dq(length, d), dk(length, d), dv(length, d);
    for (int h = 0; h < config.n_heads; ++h) {
      const auto& probs = c.probs[static_cast<std::size_t>(h)];
      const Matrix<S> doh = d_o.middleCols(h * dh, dh);
      const Matrix<S> dprobs = doh * c.v.middleCols(h * dh, dh).transpose();
      dv.middleCols(h * dh, dh) = probs.transpose() * doh;
      Matrix<S> dscores = Matrix<S>::Zero(length, length);
      for (Eigen::Index i = 0; i < length; ++i) {
        const S inner = probs.row(i).head(i + 1).dot(dprobs.row(i).head(i + 1));
        for (Eigen::Index j = 0; j <= i; ++j) dscores(i, j) = probs(i, j) * (dprobs(i, j) - inner);
      }
      dq.middleCols(h * dh, dh) = dscores * c.k.middleCols(h * dh, dh) * scale;
      dk.middleCols(h * dh, dh) = dscores.transpose() * c.q.middleCols(h * dh, dh) * scale;
    }
    affine_backward(c.a, dq, g.Wq, g.bq);
    affine_backward(c.a, dk, g.Wk, g.bk);
    affine_backward(c.a, dv, g.Wv, g.bv);
    const Matrix<S> da = dq * layer.Wq.transpose() + dk * layer.Wk.transpose() + dv * layer.Wv.transpose();
    dx += layer_norm_backward(da, layer.ln1_gain, c.norm1, g.ln1_gain, g.ln1_bias);
  }

  grads.positions.topRows(length) += dx;
  for (Eigen::Index i = 0; i < length; ++i) {
    if (i != cache.molecule_position) {
      grads.embedding.row(sequence.tokens[static_cast<std::size_t>(i)]) += dx.row(i);
      continue;
    }
    const Vector<S> dout = dx.row(i).transpose();
    auto& pg = grads.projector;
    pg.W2.noalias() += dout * cache.projector_act.transpose();
    pg.b2.col(0) += dout;
    const Vector<S> dact = model.projector.W2.transpose() * dout;
    const Vector<S> dpre =
        (dact.array() * cache.projector_pre.unaryExpr([](S value) { return silu_grad(value); }).array()).matrix();
    pg.b1.col(0) += dpre;
    for (const auto& [j, value] : cache.molecule_nonzeros) pg.W1.col(j) += dpre * value;
  }
}

template <typename S>
Matrix<S> normal_matrix(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
  Matrix<S> m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = static_cast<S>(rng.normal(0.0, stddev));
  }
  return m;
}

template <typename S>
Matrix<S> uniform_matrix(Eigen::Index rows, Eigen::Index cols, double bound, Rng& rng) {
  Matrix<S> m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = static_cast<S>(rng.uniform(-bound, bound));
  }
  return m;
}

}  // namespace

void ToyDecoderConfig::validate() const {
  if (d_model < 1 || n_layers < 1 || n_heads < 1 || vocab_size < 1 || max_seq_len < 2 || fingerprint_bits < 1 ||
      mlp_ratio < 1) {
    throw ArgumentError("toy decoder sizes must be positive");
  }
  if (d_model % n_heads != 0) throw ArgumentError("d_model must be divisible by n_heads");
  if (molecule_token_id < 0 || molecule_token_id >= vocab_size) {
    throw ArgumentError("molecule_token_id must be below vocab_size");
  }
}

void validate_sequence(const ToyDecoderConfig& config, const Sequence& sequence) {
  const auto& tokens = sequence.tokens;
  if (tokens.empty()) throw ArgumentError("empty sequence");
  if (static_cast<int>(tokens.size()) > config.max_seq_len) {
    throw ArgumentError("sequence of " + std::to_string(tokens.size()) + " tokens exceeds max_seq_len " +
                        std::to_string(config.max_seq_len));
  }
  if (!sequence.loss_mask.empty() && sequence.loss_mask.size() != tokens.size()) {
    throw ArgumentError("loss mask length differs from the token count");
  }
  if (!sequence.loss_mask.empty() && sequence.loss_mask[0]) {
    throw ArgumentError("the first token has no context and cannot be scored");
  }
  for (int t : tokens) {
    if (t < 0 || t >= config.vocab_size) throw ArgumentError("token id " + std::to_string(t) + " out of range");
  }
  const bool has_token = molecule_position(config, tokens) >= 0;
  if (has_token != sequence.molecule.has_value()) {
    throw ArgumentError(has_token ? "molecule token present but no molecule vector"
                                  : "molecule vector given without a molecule token");
  }
  if (sequence.molecule) {
    if (static_cast<int>(sequence.molecule->size()) != config.fingerprint_bits) {
      throw ArgumentError("molecule vector has " + std::to_string(sequence.molecule->size()) + " entries, expected " +
                          std::to_string(config.fingerprint_bits));
    }
    for (float value : *sequence.molecule) {
      if (!std::isfinite(value)) throw ArgumentError("molecule vector holds a non-finite value");
    }
  }
}

template <typename S>
Vector<S> project(const ProjectorParams<S>& params, std::span<const S> fingerprint) {
  if (static_cast<Eigen::Index>(fingerprint.size()) != params.W1.cols()) {
    throw ArgumentError("fingerprint has " + std::to_string(fingerprint.size()) + " entries, projector expects " +
                        std::to_string(params.W1.cols()));
  }
  const Eigen::Map<const Vector<S>> m(fingerprint.data(), static_cast<Eigen::Index>(fingerprint.size()));
  const Vector<S> pre = params.W1 * m + params.b1.col(0);
  return params.W2 * pre.unaryExpr([](S x) { return silu(x); }) + params.b2.col(0);
}

template <typename S>
ToyModel<S> ToyModel<S>::zeros(const ToyDecoderConfig& config) {
  config.validate();
  const int d = config.d_model;
  const int ff = config.mlp_ratio * d;
  ToyModel model;
  model.config = config;
  model.embedding = Matrix<S>::Zero(config.vocab_size, d);
  model.positions = Matrix<S>::Zero(config.max_seq_len, d);
  for (int l = 0; l < config.n_layers; ++l) {
    DecoderLayer<S> layer;
    layer.ln1_gain = layer.ln1_bias = layer.ln2_gain = layer.ln2_bias = Matrix<S>::Zero(1, d);
    layer.Wq = layer.Wk = layer.Wv = layer.Wo = Matrix<S>::Zero(d, d);
    layer.bq = layer.bk = layer.bv = layer.bo = layer.b_down = Matrix<S>::Zero(1, d);
    layer.W_up = Matrix<S>::Zero(d, ff);
    layer.b_up = Matrix<S>::Zero(1, ff);
    layer.W_down = Matrix<S>::Zero(ff, d);
    model.layers.push_back(std::move(layer));
  }
  model.final_gain = model.final_bias = Matrix<S>::Zero(1, d);
  const int hidden = config.projector_hidden();
  model.projector.W1 = Matrix<S>::Zero(hidden, config.fingerprint_bits);
  model.projector.b1 = Matrix<S>::Zero(hidden, 1);
  model.projector.W2 = Matrix<S>::Zero(d, hidden);
  model.projector.b2 = Matrix<S>::Zero(d, 1);
  return model;
}

template <typename S>
ToyModel<S> ToyModel<S>::initialize(const ToyDecoderConfig& config, std::uint64_t seed) {
  ToyModel model = zeros(config);
  Rng rng(derive_seed(seed, 0));
  const int d = config.d_model;
  const int ff = config.mlp_ratio * d;
  constexpr double kStd = 0.02;
  const double residual_std = kStd / std::sqrt(2.0 * config.n_layers);
  model.embedding = normal_matrix<S>(config.vocab_size, d, kStd, rng);
  model.positions = normal_matrix<S>(config.max_seq_len, d, kStd, rng);
  for (auto& layer : model.layers) {
    layer.ln1_gain.setOnes();
    layer.ln2_gain.setOnes();
    layer.Wq = normal_matrix<S>(d, d, kStd, rng);
    layer.Wk = normal_matrix<S>(d, d, kStd, rng);
    layer.Wv = normal_matrix<S>(d, d, kStd, rng);
    layer.Wo = normal_matrix<S>(d, d, residual_std, rng);
    layer.W_up = normal_matrix<S>(d, ff, kStd, rng);
    layer.W_down = normal_matrix<S>(ff, d, residual_std, rng);
  }
  model.final_gain.setOnes();
  Rng projector_rng(derive_seed(seed, 1));
  const int hidden = config.projector_hidden();
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(config.fingerprint_bits));
  const double bound2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  model.projector.W1 = uniform_matrix<S>(hidden, config.fingerprint_bits, bound1, projector_rng);
  model.projector.b1 = uniform_matrix<S>(hidden, 1, bound1, projector_rng);
  model.projector.W2 = uniform_matrix<S>(d, hidden, bound2, projector_rng);
  model.projector.b2 = uniform_matrix<S>(d, 1, bound2, projector_rng);
  return model;
}

template <typename S>
std::vector<Matrix<S>*> ToyModel<S>::tensors() {
  std::vector<Matrix<S>*> out{&embedding, &positions};
  for (auto& l : layers) {
    for (auto* t : {&l.ln1_gain, &l.ln1_bias, &l.Wq, &l.bq, &l.Wk, &l.bk, &l.Wv, &l.bv, &l.Wo, &l.bo, &l.ln2_gain,
                    &l.ln2_bias, &l.W_up, &l.b_up, &l.W_down, &l.b_down}) {
      out.push_back(t);
    }
  }
  for (auto* t : {&final_gain, &final_bias, &projector.W1, &projector.b1, &projector.W2, &projector.b2}) {
    out.push_back(t);
  }
  return out;
}

template <typename S>
std::vector<const Matrix<S>*> ToyModel<S>::tensors() const {
  auto mutable_list = const_cast<ToyModel*>(this)->tensors();
  return {mutable_list.begin(), mutable_list.end()};
}

template <typename S>
std::vector<NamedTensorInfo> ToyModel<S>::tensor_info() const {
  std::vector<NamedTensorInfo> out{{"embedding", false}, {"positions", false}};
  static constexpr const char* kLayerNames[] = {"ln1_gain", "ln1_bias", "Wq",       "bq",       "Wk",   "bk",
                                                "Wv",       "bv",       "Wo",       "bo",       "ln2_gain",
                                                "ln2_bias", "W_up",     "b_up",     "W_down",   "b_down"};
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (const char* name : kLayerNames) out.push_back({"layer" + std::to_string(l) + "." + name, false});
  }
  out.push_back({"final_gain", false});
  out.push_back({"final_bias", false});
  for (const char* name : {"projector.W1", "projector.b1", "projector.W2", "projector.b2"}) out.push_back({name, true});
  return out;
}

template <typename S>
std::size_t ToyModel<S>::parameter_count() const {
  std::size_t total = 0;
  for (const auto* t : tensors()) total += static_cast<std::size_t>(t->size());
  return total;
}

template <typename S>
template <typename Other>
ToyModel<Other> ToyModel<S>::cast() const {
  ToyModel<Other> out = ToyModel<Other>::zeros(config);
  const auto source = tensors();
  const auto target = out.tensors();
  for (std::size_t i = 0; i < source.size(); ++i) *target[i] = source[i]->template cast<Other>();
  return out;
}

template <typename S>
Matrix<S> embed_sequence(const ToyModel<S>& model, const std::vector<int>& tokens,
                         const std::optional<std::vector<float>>& molecule) {
  Sequence sequence{tokens, {}, molecule};
  validate_sequence(model.config, sequence);
  const int mol = molecule_position(model.config, tokens);
  Matrix<S> out(static_cast<Eigen::Index>(tokens.size()), model.config.d_model);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (static_cast<int>(i) == mol) {
      out.row(static_cast<Eigen::Index>(i)) =
          project_sparse(model.projector, nonzeros<S>(*molecule), static_cast<Vector<S>*>(nullptr), static_cast<Vector<S>*>(nullptr)).transpose();
    } else {
      out.row(static_cast<Eigen::Index>(i)) = model.embedding.row(tokens[i]);
    }
  }
  return out;
}

template <typename S>
Matrix<S> forward_logits(const ToyModel<S>& model, const Sequence& sequence) {
  return forward(model, sequence, static_cast<ForwardCache<S>*>(nullptr));
}

template <typename S>
MaskedLoss<S> masked_cross_entropy(const Matrix<S>& logits, const Sequence& sequence) {
  const auto length = static_cast<Eigen::Index>(sequence.tokens.size());
  if (logits.rows() != length) throw ArgumentError("logit rows differ from the token count");
  MaskedLoss<S> out;
  out.per_position.assign(sequence.tokens.size(), S(0));
  out.dlogits = Matrix<S>::Zero(logits.rows(), logits.cols());
  for (Eigen::Index i = 1; i < length; ++i) {
    if (sequence.loss_mask.empty() || !sequence.loss_mask[static_cast<std::size_t>(i)]) continue;
    const auto row = logits.row(i - 1);
    const S top = row.maxCoeff();
    const auto shifted = (row.array() - top).exp();
    const S total = shifted.sum();
    const int target = sequence.tokens[static_cast<std::size_t>(i)];
    const S loss = std::log(total) + top - row(target);
    out.per_position[static_cast<std::size_t>(i)] = loss;
    out.total += loss;
    ++out.count;
    out.dlogits.row(i - 1) = (shifted / total).matrix();
    out.dlogits(i - 1, target) -= S(1);
  }
  return out;
}

template <typename S>
LossResult<S> forward_loss(const ToyModel<S>& model, std::span<const Sequence> batch) {
  LossResult<S> result;
  S total = 0;
  for (const auto& sequence : batch) {
    const auto masked = masked_cross_entropy(forward_logits(model, sequence), sequence);
    total += masked.total;
    result.count += masked.count;
    result.per_position.push_back(masked.per_position);
  }
  if (result.count == 0) throw ArgumentError("no scored position in the batch");
  result.loss = total / static_cast<S>(result.count);
  return result;
}

template <typename S>
LossResult<S> forward_backward(const ToyModel<S>& model, std::span<const Sequence> batch, ToyModel<S>& gradients) {
  gradients = ToyModel<S>::zeros(model.config);
  std::vector<ForwardCache<S>> caches(batch.size());
  std::vector<MaskedLoss<S>> losses(batch.size());
  LossResult<S> result;
  S total = 0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    losses[b] = masked_cross_entropy(forward(model, batch[b], &caches[b]), batch[b]);
    total += losses[b].total;
    result.count += losses[b].count;
    result.per_position.push_back(losses[b].per_position);
  }
  if (result.count == 0) throw ArgumentError("no scored position in the batch");
  result.loss = total / static_cast<S>(result.count);
  const S inv_count = S(1) / static_cast<S>(result.count);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    if (losses[b].count == 0) continue;
    backward(model, batch[b], caches[b], Matrix<S>(losses[b].dlogits * inv_count), gradients);
  }
  return result;
}

#define MOLFORGE_TOY_INSTANTIATE(S)                                                                               \
  template Vector<S> project<S>(const ProjectorParams<S>&, std::span<const S>);                                 \
  template struct ToyModel<S>;                                                                                  \
  template Matrix<S> embed_sequence<S>(const ToyModel<S>&, const std::vector<int>&,                             \
                                       const std::optional<std::vector<float>>&);                               \
  template Matrix<S> forward_logits<S>(const ToyModel<S>&, const Sequence&);                                    \
  template MaskedLoss<S> masked_cross_entropy<S>(const Matrix<S>&, const Sequence&);                            \
  template LossResult<S> forward_loss<S>(const ToyModel<S>&, std::span<const Sequence>);                        \
  template LossResult<S> forward_backward<S>(const ToyModel<S>&, std::span<const Sequence>, ToyModel<S>&);

MOLFORGE_TOY_INSTANTIATE(float)
MOLFORGE_TOY_INSTANTIATE(double)
template ToyModel<double> ToyModel<float>::cast<double>() const;
template ToyModel<float> ToyModel<double>::cast<float>() const;
template ToyModel<float> ToyModel<float>::cast<float>() const;
template ToyModel<double> ToyModel<double>::cast<double>() const;

}  // namespace molforge::toy
