#include "litho/decision.hpp"

#include <numeric>

#include "litho/error.hpp"

namespace litho {

LabelCensus::LabelCensus(const std::array<std::uint64_t, kNumClasses>& counts)
    : counts_(counts),
      total_(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0})) {}

LabelCensus LabelCensus::from_labels(std::span<const MorphClass> labels) {
  LabelCensus c;
  for (auto l : labels) c.add(l);
  return c;
}

void LabelCensus::add(MorphClass c, std::uint64_t n) noexcept {
  counts_[index_of(c)] += n;
  total_ += n;
}

Decision decide(const LabelCensus& census) {
  const std::uint64_t total = census.total();
  if (total == 0) throw Error(ErrorCode::EmptyList, "no QC-passing frame to decide on");
  // "more than half" is evaluated as 2 * count > total to stay in integers.
  const auto over_half = [total](std::uint64_t n) { return 2 * n > total; };

  for (auto c : kAllClasses) {
    if (over_half(census.count(c))) return {c, DecisionPath::Majority};
  }

  const std::uint64_t union_b = census.count(MorphClass::Ia) +
                                census.count(MorphClass::IIb) +
                                census.count(MorphClass::IaIIb);
  const std::uint64_t union_c = census.count(MorphClass::Ia) +
                                census.count(MorphClass::IIIb) +
                                census.count(MorphClass::IaIIIb);
  const bool b = over_half(union_b);
  const bool c = over_half(union_c);
  if (b && (!c || union_b >= union_c)) return {MorphClass::IaIIb, DecisionPath::MixedUnion};
  if (c) return {MorphClass::IaIIIb, DecisionPath::MixedUnion};

  MorphClass best = MorphClass::Ia;
  for (auto k : kAllClasses) {
    if (census.count(k) > census.count(best)) best = k;
  }
  return {best, DecisionPath::Fallback};
}

std::vector<PrefixDecision> prefix_decisions(const VideoTimeline& timeline) {
  std::vector<PrefixDecision> out;
  LabelCensus census;
  for (const auto& r : timeline.records()) {
    if (!r.label()) continue;
    census.add(*r.label());
    out.push_back({r.stream_index(), decide(census)});
  }
  return out;
}

}  // namespace litho
