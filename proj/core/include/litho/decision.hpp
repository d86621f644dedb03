#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "litho/morph_class.hpp"
#include "litho/records.hpp"

namespace litho {

/// Multiset of per-frame labels of one video.
class LabelCensus {
 public:
  LabelCensus() = default;
  explicit LabelCensus(const std::array<std::uint64_t, kNumClasses>& counts);
  static LabelCensus from_labels(std::span<const MorphClass> labels);

  void add(MorphClass c, std::uint64_t n = 1) noexcept;
  std::uint64_t count(MorphClass c) const noexcept { return counts_[index_of(c)]; }
  std::uint64_t total() const noexcept { return total_; }
  const std::array<std::uint64_t, kNumClasses>& counts() const noexcept { return counts_; }

  friend bool operator==(const LabelCensus&, const LabelCensus&) = default;

 private:
  std::array<std::uint64_t, kNumClasses> counts_{};
  std::uint64_t total_ = 0;
};

/// Final decision over a completed census:
///  1. a class holding more than half of the labels wins (Majority);
///  2. otherwise, if the union {Ia, IIb, IaIIb} or {Ia, IIIb, IaIIIb} holds
///     more than half, the corresponding mixed class wins; when both do, the
///     larger union wins and IaIIb on an exact tie (MixedUnion);
///  3. otherwise the most frequent class, canonical order on ties (Fallback).
/// Throws EmptyList on an empty census.
Decision decide(const LabelCensus& census);

/// Decision after each admitted label of a stream, for inspection of how the
/// verdict evolves; the final entry equals decide() on the whole census.
struct PrefixDecision {
  std::int64_t stream_index;
  Decision decision;
};
std::vector<PrefixDecision> prefix_decisions(const VideoTimeline& timeline);

}  // namespace litho
