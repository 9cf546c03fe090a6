#pragma once

#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "divrate/error.hpp"

namespace divrate {

/// Bin counts of an i.i.d. sample over the alphabet [k].
/// Immutable after construction; safe to share across threads.
class SampleHistogram {
public:
  explicit SampleHistogram(std::vector<std::int64_t> counts)
      : counts_(std::move(counts)) {
    if (counts_.empty())
      throw invalid_parameter("SampleHistogram: alphabet must be non-empty");
    total_ = 0;
    for (std::int64_t c : counts_) {
      if (c < 0) throw invalid_parameter("SampleHistogram: negative count");
      total_ += c;
    }
  }

  std::int64_t alphabet_size() const noexcept {
    return static_cast<std::int64_t>(counts_.size());
  }
  std::int64_t total() const noexcept { return total_; }
  std::int64_t operator[](std::size_t i) const { return counts_[i]; }
  const std::vector<std::int64_t>& counts() const noexcept { return counts_; }

private:
  std::vector<std::int64_t> counts_;
  std::int64_t total_;
};

enum class SplitMode {
  multinomial_reuse,  // one histogram used for both selection and estimation
  poissonized_split,  // two independent Poissonized histograms
};

/// Estimation histogram plus the selector histogram that decides, per bin,
/// between the polynomial and plug-in branches of the optimal estimator.
/// In multinomial-reuse mode both are the same draw.
struct SplitSamples {
  SampleHistogram first;   // used for estimation (M or N)
  SampleHistogram second;  // used for branch selection (M' or N')
  SplitMode mode;

  SplitSamples(SampleHistogram est, SampleHistogram sel, SplitMode m)
      : first(std::move(est)), second(std::move(sel)), mode(m) {
    if (first.alphabet_size() != second.alphabet_size())
      throw invalid_parameter("SplitSamples: alphabet size mismatch");
    if (mode == SplitMode::multinomial_reuse &&
        first.counts() != second.counts())
      throw invalid_parameter(
          "SplitSamples: multinomial-reuse requires one histogram used for "
          "both roles");
  }
};

} // namespace divrate
