#include "molforge/toy/train.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <json.hpp>

#include "molforge/common/error.hpp"
#include "molforge/common/io.hpp"
#include "molforge/common/parallel.hpp"
#include "molforge/common/rng.hpp"

namespace molforge::toy {
namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'M', 'F', 'T', 'O', 'Y', 'C', 'K', '\0'};
constexpr std::uint32_t kCheckpointVersion = 1;
constexpr double kRatio = 10.0;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <typename T>
void append_raw(std::string& out, const T& value) {
  out.append(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T read_raw(std::string_view data, std::size_t& offset) {
  if (offset + sizeof(T) > data.size()) throw DataError("checkpoint is truncated");
  T value;
  std::memcpy(&value, data.data() + offset, sizeof value);
  offset += sizeof value;
  return value;
}

json config_to_json(const ToyDecoderConfig& c) {
  return {{"d_model", c.d_model},         {"n_layers", c.n_layers},
          {"n_heads", c.n_heads},         {"vocab_size", c.vocab_size},
          {"max_seq_len", c.max_seq_len}, {"molecule_token_id", c.molecule_token_id},
          {"fingerprint_bits", c.fingerprint_bits}, {"mlp_ratio", c.mlp_ratio}};
}

ToyDecoderConfig config_from_json(const json& j) {
  ToyDecoderConfig c;
  c.d_model = j.at("d_model").get<int>();
  c.n_layers = j.at("n_layers").get<int>();
  c.n_heads = j.at("n_heads").get<int>();
  c.vocab_size = j.at("vocab_size").get<int>();
  c.max_seq_len = j.at("max_seq_len").get<int>();
  c.molecule_token_id = j.at("molecule_token_id").get<int>();
  c.fingerprint_bits = j.at("fingerprint_bits").get<int>();
  c.mlp_ratio = j.at("mlp_ratio").get<int>();
  return c;
}

json train_to_json(const TrainConfig& t) {
  return {{"steps", t.steps},
          {"batch_size", t.batch_size},
          {"lr_backbone", t.lr_backbone},
          {"lr_projector", t.lr_projector},
          {"weight_decay", t.weight_decay},
          {"log_every", t.log_every},
          {"seed", t.seed},
          {"optimizer", {{"name", "adaptive-moment"}, {"beta1", t.beta1}, {"beta2", t.beta2}, {"epsilon", t.epsilon}}}};
}

TrainConfig train_from_json(const json& j) {
  TrainConfig t;
  t.steps = j.at("steps").get<int>();
  t.batch_size = j.at("batch_size").get<int>();
  t.lr_backbone = j.at("lr_backbone").get<double>();
  t.lr_projector = j.at("lr_projector").get<double>();
  t.weight_decay = j.at("weight_decay").get<double>();
  t.log_every = j.at("log_every").get<int>();
  t.seed = j.at("seed").get<std::uint64_t>();
  const auto& opt = j.at("optimizer");
  t.beta1 = opt.at("beta1").get<double>();
  t.beta2 = opt.at("beta2").get<double>();
  t.epsilon = opt.at("epsilon").get<double>();
  return t;
}

int sample_token(const Eigen::RowVectorXf& logits_row, double temperature, Rng& rng) {
  Eigen::Index best = 0;
  const float top = logits_row.maxCoeff(&best);
  if (temperature <= 0) return static_cast<int>(best);
  std::vector<double> weights(static_cast<std::size_t>(logits_row.size()));
  double total = 0;
  for (Eigen::Index v = 0; v < logits_row.size(); ++v) {
    weights[static_cast<std::size_t>(v)] = std::exp((static_cast<double>(logits_row(v)) - top) / temperature);
    total += weights[static_cast<std::size_t>(v)];
  }
  double u = rng.uniform01() * total;
  for (std::size_t v = 0; v < weights.size(); ++v) {
    u -= weights[v];
    if (u < 0) return static_cast<int>(v);
  }
  return static_cast<int>(best);
}

}  // namespace

void TrainConfig::validate() const {
  if (steps < 1) throw ArgumentError("steps must be at least 1");
  if (batch_size < 1) throw ArgumentError("batch_size must be at least 1");
  if (log_every < 1) throw ArgumentError("log_every must be at least 1");
  if (!(lr_backbone > 0) || !std::isfinite(lr_backbone)) throw ArgumentError("lr_backbone must be positive");
  if (std::abs(lr_projector - kRatio * lr_backbone) > 1e-12 * lr_projector) {
    throw ArgumentError("lr_projector must be 10x lr_backbone");
  }
  if (weight_decay != 0) throw ArgumentError("weight_decay must be zero");
  if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1 || !(epsilon > 0)) {
    throw ArgumentError("optimizer betas must lie in [0, 1) and epsilon must be positive");
  }
}

double learning_rate(double lr0, int step, int steps) {
  if (steps < 1 || step < 0 || step > steps) throw ArgumentError("learning-rate step out of range");
  return lr0 * (1.0 - static_cast<double>(step) / static_cast<double>(steps));
}

TrainResult train(ToyModel<float>& model, const ExampleSource& next_example, const TrainConfig& config,
                  const StepObserver& observer) {
  config.validate();
  auto params = model.tensors();
  const auto info = model.tensor_info();
  ToyModel<float> first_moment = ToyModel<float>::zeros(model.config);
  ToyModel<float> second_moment = ToyModel<float>::zeros(model.config);
  auto m_list = first_moment.tensors();
  auto v_list = second_moment.tensors();
  ToyModel<float> grads;
  std::vector<Sequence> batch(static_cast<std::size_t>(config.batch_size));

  TrainResult result;
  result.trace.reserve(static_cast<std::size_t>(config.steps));
  for (int step = 0; step < config.steps; ++step) {
    for (auto& sequence : batch) sequence = next_example();
    const auto loss = forward_backward<float>(model, batch, grads);
    if (!std::isfinite(loss.loss)) {
      throw Error("non-finite training loss at step " + std::to_string(step));
    }
    StepRecord record{step, static_cast<double>(loss.loss), learning_rate(config.lr_backbone, step, config.steps),
                      learning_rate(config.lr_projector, step, config.steps)};
    const auto grad_list = grads.tensors();
    const double t = step + 1;
    const double correction1 = 1.0 - std::pow(config.beta1, t);
    const double correction2 = 1.0 - std::pow(config.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double lr = info[i].projector ? record.lr_projector : record.lr_backbone;
      auto& m = *m_list[i];
      auto& v = *v_list[i];
      const auto& g = *grad_list[i];
      m = static_cast<float>(config.beta1) * m + static_cast<float>(1 - config.beta1) * g;
      v = static_cast<float>(config.beta2) * v + static_cast<float>(1 - config.beta2) * g.cwiseProduct(g);
      const float step_size = static_cast<float>(lr / correction1);
      const float inv_c2 = static_cast<float>(1.0 / correction2);
      const float eps = static_cast<float>(config.epsilon);
      params[i]->array() -= step_size * m.array() / ((v.array() * inv_c2).sqrt() + eps);
    }
    result.trace.push_back(record);
    if (observer && (step % config.log_every == 0 || step + 1 == config.steps)) observer(record);
  }
  return result;
}

std::vector<std::string> generate(const ToyModel<float>& model, const std::vector<int>& prompt_tokens,
                                  const std::optional<std::vector<float>>& molecule, const GenerateOptions& options) {
  if (options.n < 1) throw ArgumentError("rollout count must be at least 1");
  validate_sequence(model.config, Sequence{prompt_tokens, {}, molecule});
  std::vector<std::string> out(static_cast<std::size_t>(options.n));
  parallel_for(out.size(), options.threads, [&](std::size_t index) {
    Rng rng(derive_seed(options.seed, index));
    Sequence sequence{prompt_tokens, {}, molecule};
    std::vector<int> produced;
    while (static_cast<int>(sequence.tokens.size()) < model.config.max_seq_len) {
      const auto logits = forward_logits(model, sequence);
      const int token = sample_token(logits.row(logits.rows() - 1), options.temperature, rng);
      if (token == Tokenizer::kEos) break;
      // A sampled molecule token has no vector to substitute; treat it as text.
      const int kept = token == model.config.molecule_token_id ? Tokenizer::kUnk : token;
      sequence.tokens.push_back(kept);
      produced.push_back(kept);
    }
    out[index] = Tokenizer::decode(produced);
  });
  return out;
}

double grad_check(const ToyModel<double>& model, std::span<const Sequence> batch, const GradCheckOptions& options) {
  if (!(options.epsilon > 0)) throw ArgumentError("epsilon must be positive");
  if (options.samples < 1) throw ArgumentError("grad_check needs at least one sample");
  ToyModel<double> grads;
  forward_backward(model, batch, grads);
  ToyModel<double> probe = model;
  auto params = probe.tensors();
  const auto grad_list = grads.tensors();
  const auto info = probe.tensor_info();
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!options.projector_only || info[i].projector) eligible.push_back(i);
  }
  Rng rng(options.seed);
  double worst = 0;
  for (int s = 0; s < options.samples; ++s) {
    const auto tensor = eligible[static_cast<std::size_t>(rng.uniform_index(eligible.size()))];
    auto& param = *params[tensor];
    const auto entry = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(param.size())));
    double& slot = param.data()[entry];
    const double saved = slot;
    slot = saved + options.epsilon;
    const double plus = forward_loss(probe, batch).loss;
    slot = saved - options.epsilon;
    const double minus = forward_loss(probe, batch).loss;
    slot = saved;
    const double numeric = (plus - minus) / (2 * options.epsilon);
    const double analytic = grad_list[tensor]->data()[entry];
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic - numeric) / scale);
  }
  return worst;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const auto& model = checkpoint.model;
  json header;
  header["format"] = "molforge-toy-checkpoint";
  header["config"] = config_to_json(model.config);
  header["train"] = train_to_json(checkpoint.train);
  header["init_seed"] = checkpoint.init_seed;
  const auto tensors = model.tensors();
  const auto info = model.tensor_info();
  header["tensors"] = json::array();
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    header["tensors"].push_back({{"name", info[i].name}, {"rows", tensors[i]->rows()}, {"cols", tensors[i]->cols()}});
  }
  const std::string header_text = header.dump();

  std::string out(kMagic, sizeof kMagic);
  append_raw(out, kCheckpointVersion);
  append_raw(out, static_cast<std::uint64_t>(header_text.size()));
  out += header_text;
  for (const auto* tensor : tensors) {
    for (Eigen::Index r = 0; r < tensor->rows(); ++r) {
      for (Eigen::Index c = 0; c < tensor->cols(); ++c) append_raw(out, (*tensor)(r, c));
    }
  }
  io::write_file_atomic(path, out);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string data = io::read_file(path);
  const auto where = path.string() + ": ";
  if (data.size() < sizeof kMagic || std::memcmp(data.data(), kMagic, sizeof kMagic) != 0) {
    throw DataError(where + "not a toy-model checkpoint");
  }
  try {
    std::size_t offset = sizeof kMagic;
    const auto version = read_raw<std::uint32_t>(data, offset);
    if (version != kCheckpointVersion) throw DataError("unsupported checkpoint version " + std::to_string(version));
    const auto header_size = read_raw<std::uint64_t>(data, offset);
    if (offset + header_size > data.size()) throw DataError("checkpoint is truncated");
    const json header = json::parse(data.substr(offset, header_size));
    offset += header_size;
    Checkpoint checkpoint;
    checkpoint.model = ToyModel<float>::zeros(config_from_json(header.at("config")));
    checkpoint.train = train_from_json(header.at("train"));
    checkpoint.init_seed = header.at("init_seed").get<std::uint64_t>();
    auto tensors = checkpoint.model.tensors();
    const auto info = checkpoint.model.tensor_info();
    const auto& listed = header.at("tensors");
    if (listed.size() != tensors.size()) throw DataError("tensor count differs from the configuration");
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      auto& tensor = *tensors[i];
      if (listed[i].at("name").get<std::string>() != info[i].name ||
          listed[i].at("rows").get<Eigen::Index>() != tensor.rows() ||
          listed[i].at("cols").get<Eigen::Index>() != tensor.cols()) {
        throw DataError("tensor " + info[i].name + " does not match the configuration");
      }
      for (Eigen::Index r = 0; r < tensor.rows(); ++r) {
        for (Eigen::Index c = 0; c < tensor.cols(); ++c) {
          const float value = read_raw<float>(data, offset);
          if (!std::isfinite(value)) throw DataError("tensor " + info[i].name + " holds a non-finite value");
          tensor(r, c) = value;
        }
      }
    }
    if (offset != data.size()) throw DataError("trailing bytes after the last tensor");
    return checkpoint;
  } catch (const json::exception& e) {
    throw DataError(where + "bad header: " + e.what());
  } catch (const ArgumentError& e) {
    throw DataError(where + e.what());
  } catch (const DataError& e) {
    throw DataError(where + e.what());
  }
}

}  // namespace molforge::toy
