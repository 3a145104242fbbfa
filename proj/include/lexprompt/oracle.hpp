#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace lexprompt {

struct DecodingParams {
  double temperature = 0.0;
  int max_output_tokens = 16;

  friend bool operator==(const DecodingParams&, const DecodingParams&) = default;
};

// The black-box model f_theta: prompt in, raw text out. Implementations
// must be safe to call from several threads at once.
class CompletionOracle {
 public:
  virtual ~CompletionOracle() = default;

  virtual std::string complete(const std::string& prompt) = 0;
  // Stable identity of the model behind the oracle; part of cache keys.
  virtual std::string identity() const = 0;
  virtual DecodingParams decoding() const { return {}; }
  // Upper bound on concurrent complete() calls the caller may issue.
  virtual std::size_t parallelism() const { return 1; }
};

inline constexpr std::string_view kMaskToken = "[MASK]";

struct FillCandidate {
  std::string word;
  double probability = 0.0;

  friend bool operator==(const FillCandidate&, const FillCandidate&) = default;
};

std::size_t count_masks(std::string_view text);

// Masked-LM fill-in. fill_mask() enforces the wire contract around the
// implementation hook: exactly one mask in, at most k entries out, each
// probability in [0, 1], probability non-increasing.
class FillMaskProvider {
 public:
  virtual ~FillMaskProvider() = default;

  std::vector<FillCandidate> fill_mask(std::string_view masked_text, std::size_t k);

 protected:
  virtual std::vector<FillCandidate> do_fill_mask(std::string_view masked_text,
                                                  std::size_t k) = 0;
};

}  // namespace lexprompt
