#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace litho {

/// The five morphological stone classes handled by the recognizer. The
/// enumerator order is the canonical total order used for tie-breaking.
enum class MorphClass : std::uint8_t { Ia = 0, IIb, IIIb, IaIIb, IaIIIb };

inline constexpr std::size_t kNumClasses = 5;

inline constexpr std::array<MorphClass, kNumClasses> kAllClasses = {
    MorphClass::Ia, MorphClass::IIb, MorphClass::IIIb, MorphClass::IaIIb,
    MorphClass::IaIIIb};

inline constexpr std::size_t index_of(MorphClass c) noexcept {
  return static_cast<std::size_t>(c);
}

std::string_view to_string(MorphClass c) noexcept;

/// Accepts the canonical tags ("Ia", "IaIIb", ...) and the "+"-joined
/// spellings ("Ia+IIb").
std::optional<MorphClass> parse_morph_class(std::string_view tag) noexcept;

bool is_mixed(MorphClass c) noexcept;

/// Pure constituents of a class: one for pure stones, two for mixed ones.
std::vector<MorphClass> components(MorphClass c);

/// For a mixed class, the second (non-Ia) constituent; for a pure class, the
/// class itself.
MorphClass core_component(MorphClass c) noexcept;

constexpr std::strong_ordering canonical_order(MorphClass a,
                                               MorphClass b) noexcept {
  return index_of(a) <=> index_of(b);
}

/// Per-class probabilities indexed by `index_of(MorphClass)`.
using ScoreMap = std::array<double, kNumClasses>;

/// Argmax of a score map; ties resolve to the canonically smallest class.
MorphClass argmax(const ScoreMap& scores) noexcept;

}  // namespace litho
