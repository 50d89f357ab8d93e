#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "molforge/toy/tokenizer.hpp"

namespace molforge::toy {

struct ToyDecoderConfig {
  int d_model = 64;
  int n_layers = 2;
  int n_heads = 4;
  int vocab_size = Tokenizer::kVocabSize;
  int max_seq_len = 256;
  int molecule_token_id = Tokenizer::kMolecule;
  int fingerprint_bits = 2048;
  int mlp_ratio = 4;

  int projector_hidden() const { return 2 * d_model; }
  // Throws ArgumentError on inconsistent sizes.
  void validate() const;
};

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// out = W2 SiLU(W1 m + b1) + b2 with W1 hidden x bits, W2 d_model x hidden.
template <typename Scalar>
struct ProjectorParams {
  Matrix<Scalar> W1, b1, W2, b2;  // biases are column vectors
};

template <typename Scalar>
Vector<Scalar> project(const ProjectorParams<Scalar>& params, std::span<const Scalar> fingerprint);

// Pre-norm block; row-vector activations times weights (d_in x d_out).
template <typename Scalar>
struct DecoderLayer {
  Matrix<Scalar> ln1_gain, ln1_bias;
  Matrix<Scalar> Wq, bq, Wk, bk, Wv, bv, Wo, bo;
  Matrix<Scalar> ln2_gain, ln2_bias;
  Matrix<Scalar> W_up, b_up, W_down, b_down;
};

struct NamedTensorInfo {
  std::string name;
  bool projector = false;
};

// Causal decoder with learned positions, a tied embedding/output head and a
// fingerprint projector. Also used as the gradient container.
template <typename Scalar>
struct ToyModel {
  ToyDecoderConfig config;
  Matrix<Scalar> embedding;  // vocab x d_model, tied with the output head
  Matrix<Scalar> positions;  // max_seq_len x d_model
  std::vector<DecoderLayer<Scalar>> layers;
  Matrix<Scalar> final_gain, final_bias;
  ProjectorParams<Scalar> projector;

  // Zero-filled tensors of the right shapes.
  static ToyModel zeros(const ToyDecoderConfig& config);
  // Decoder: normal(0, 0.02), residual outputs scaled by 1/sqrt(2 n_layers),
  // unit gains, zero biases. Projector: uniform(+-1/sqrt(fan_in)).
  static ToyModel initialize(const ToyDecoderConfig& config, std::uint64_t seed);

  std::vector<Matrix<Scalar>*> tensors();
  std::vector<const Matrix<Scalar>*> tensors() const;
  // Same order as tensors().
  std::vector<NamedTensorInfo> tensor_info() const;
  std::size_t parameter_count() const;

  template <typename Other>
  ToyModel<Other> cast() const;
};

// One training or evaluation sequence.
struct Sequence {
  std::vector<int> tokens;
  std::vector<char> loss_mask;  // mask[i]: token i is predicted and scored
  std::optional<std::vector<float>> molecule;  // fingerprint, present iff a molecule token is
};

// Position i gets project(m) at the molecule token and row tokens[i] of the
// embedding otherwise. Throws ArgumentError on more than one molecule token
// or a molecule/vector mismatch.
template <typename Scalar>
Matrix<Scalar> embed_sequence(const ToyModel<Scalar>& model, const std::vector<int>& tokens,
                              const std::optional<std::vector<float>>& molecule);

// L x vocab logits; row i predicts token i + 1.
template <typename Scalar>
Matrix<Scalar> forward_logits(const ToyModel<Scalar>& model, const Sequence& sequence);

template <typename Scalar>
struct MaskedLoss {
  Scalar total = 0;   // summed cross-entropy over scored positions
  int count = 0;      // scored positions
  std::vector<Scalar> per_position;  // loss at token i (0 where unscored)
  Matrix<Scalar> dlogits;            // d total / d logits
};

// Cross-entropy of each scored token under the previous row's logits.
template <typename Scalar>
MaskedLoss<Scalar> masked_cross_entropy(const Matrix<Scalar>& logits, const Sequence& sequence);

template <typename Scalar>
struct LossResult {
  Scalar loss = 0;  // mean over scored positions of the whole batch
  int count = 0;
  std::vector<std::vector<Scalar>> per_position;
};

// Throws ArgumentError when no position in the batch is scored.
template <typename Scalar>
LossResult<Scalar> forward_loss(const ToyModel<Scalar>& model, std::span<const Sequence> batch);

// Loss plus exact gradients of the batch mean, written into `gradients`
// (overwritten, same shapes as the model).
template <typename Scalar>
LossResult<Scalar> forward_backward(const ToyModel<Scalar>& model, std::span<const Sequence> batch,
                                    ToyModel<Scalar>& gradients);

void validate_sequence(const ToyDecoderConfig& config, const Sequence& sequence);

}  // namespace molforge::toy
