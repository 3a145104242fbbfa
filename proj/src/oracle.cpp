#include "lexprompt/oracle.hpp"

#include <algorithm>

#include "lexprompt/error.hpp"

namespace lexprompt {

std::size_t count_masks(std::string_view text) {
  std::size_t count = 0;
  for (auto pos = text.find(kMaskToken); pos != std::string_view::npos;
       pos = text.find(kMaskToken, pos + kMaskToken.size())) {
    ++count;
  }
  return count;
}

std::vector<FillCandidate> FillMaskProvider::fill_mask(std::string_view masked_text,
                                                       std::size_t k) {
  if (const auto masks = count_masks(masked_text); masks != 1) throw BadMaskCount(masks);
  if (k == 0) throw InvalidArgument("fill-mask k must be at least 1");
  auto out = do_fill_mask(masked_text, k);
  for (const auto& c : out) {
    if (!(c.probability >= 0.0 && c.probability <= 1.0)) {
      throw ProviderFailure("fill-mask probability out of [0, 1] for '" + c.word + "'");
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const FillCandidate& a, const FillCandidate& b) {
    return a.probability > b.probability;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

}  // namespace lexprompt
