#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace molforge::toy {

// Character-level vocabulary: five special tokens followed by printable
// ASCII (space through '~'). Other bytes map to <unk>.
class Tokenizer {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kMolecule = 3;  // the single molecule token
  static constexpr int kSep = 4;       // start of the assistant response
  static constexpr int kUnk = 5;
  static constexpr int kFirstChar = 6;
  static constexpr int kVocabSize = kFirstChar + 95;

  // The literal "<molecule>" becomes kMolecule.
  static std::vector<int> encode(std::string_view text);
  // Special tokens other than the molecule token are dropped.
  static std::string decode(const std::vector<int>& tokens);
};

struct EncodedExample {
  std::vector<int> tokens;      // <bos> prompt <sep> answer <eos>
  std::vector<char> loss_mask;  // true on answer tokens and <eos>
};

// Throws ArgumentError when the result exceeds max_len tokens.
EncodedExample encode_example(std::string_view prompt, std::string_view answer, int max_len);
// <bos> prompt <sep>, ready for generation.
std::vector<int> encode_prompt(std::string_view prompt);

}  // namespace molforge::toy
