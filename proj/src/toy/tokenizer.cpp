#include "molforge/toy/tokenizer.hpp"

#include "molforge/common/error.hpp"

namespace molforge::toy {
namespace {

constexpr std::string_view kMoleculeText = "<molecule>";

}  // namespace

std::vector<int> Tokenizer::encode(std::string_view text) {
  std::vector<int> out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    if (text.substr(i, kMoleculeText.size()) == kMoleculeText) {
      out.push_back(kMolecule);
      i += kMoleculeText.size();
      continue;
    }
    const auto byte = static_cast<unsigned char>(text[i]);
    out.push_back(byte >= 0x20 && byte <= 0x7e ? kFirstChar + (byte - 0x20) : kUnk);
    ++i;
  }
  return out;
}

std::string Tokenizer::decode(const std::vector<int>& tokens) {
  std::string out;
  for (int token : tokens) {
    if (token == kMolecule) {
      out += kMoleculeText;
    } else if (token >= kFirstChar && token < kVocabSize) {
      out += static_cast<char>(0x20 + token - kFirstChar);
    }
  }
  return out;
}

EncodedExample encode_example(std::string_view prompt, std::string_view answer, int max_len) {
  EncodedExample out;
  out.tokens = encode_prompt(prompt);
  out.loss_mask.assign(out.tokens.size(), 0);
  for (int token : Tokenizer::encode(answer)) {
    out.tokens.push_back(token);
    out.loss_mask.push_back(1);
  }
  out.tokens.push_back(Tokenizer::kEos);
  out.loss_mask.push_back(1);
  if (static_cast<int>(out.tokens.size()) > max_len) {
    throw ArgumentError("example of " + std::to_string(out.tokens.size()) + " tokens exceeds max length " +
                        std::to_string(max_len));
  }
  return out;
}

std::vector<int> encode_prompt(std::string_view prompt) {
  std::vector<int> out{Tokenizer::kBos};
  for (int token : Tokenizer::encode(prompt)) out.push_back(token);
  out.push_back(Tokenizer::kSep);
  return out;
}

}  // namespace molforge::toy
