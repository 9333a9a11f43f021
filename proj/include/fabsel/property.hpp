#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "fabsel/error.hpp"

namespace fabsel {

/// The four annotated fabric properties, in canonical order.
enum class PropertyKind : std::uint8_t { elasticity = 0, softness = 1, thickness = 2, texture = 3 };

inline constexpr std::array<PropertyKind, 4> kAllProperties = {
    PropertyKind::elasticity, PropertyKind::softness, PropertyKind::thickness, PropertyKind::texture};

inline constexpr std::size_t index_of(PropertyKind p) noexcept { return static_cast<std::size_t>(p); }

inline constexpr std::string_view to_string(PropertyKind p) noexcept {
  switch (p) {
    case PropertyKind::elasticity: return "elasticity";
    case PropertyKind::softness: return "softness";
    case PropertyKind::thickness: return "thickness";
    case PropertyKind::texture: return "texture";
  }
  return "?";
}

inline std::optional<PropertyKind> parse_property(std::string_view s) noexcept {
  for (auto p : kAllProperties)
    if (to_string(p) == s) return p;
  return std::nullopt;
}

inline PropertyKind property_from_string(std::string_view s) {
  if (auto p = parse_property(s)) return *p;
  throw InvalidRecord("unknown property '" + std::string(s) + "'");
}

/// Ordinal annotation level: 0 low, 1 moderate, 2 high.
using Level = std::uint8_t;

inline constexpr bool valid_level(int v) noexcept { return v >= 0 && v <= 2; }

class AttributeVector {
 public:
  constexpr AttributeVector() = default;
  AttributeVector(int elasticity, int softness, int thickness, int texture)
      : levels_{checked(elasticity), checked(softness), checked(thickness), checked(texture)} {}

  Level operator[](PropertyKind p) const noexcept { return levels_[index_of(p)]; }
  void set(PropertyKind p, int level) { levels_[index_of(p)] = checked(level); }
  const std::array<Level, 4>& levels() const noexcept { return levels_; }

  friend bool operator==(const AttributeVector&, const AttributeVector&) = default;

 private:
  static Level checked(int v) {
    if (!valid_level(v)) throw InvalidRecord("attribute level " + std::to_string(v) + " outside {0,1,2}");
    return static_cast<Level>(v);
  }

  std::array<Level, 4> levels_{};
};

/// Three-way comparison answer: which side ranks higher, or neither.
enum class Verdict : std::uint8_t { A = 0, B = 1, inconclusive = 2 };

inline constexpr std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::A: return "A";
    case Verdict::B: return "B";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

inline Verdict verdict_from_string(std::string_view s) {
  if (s == "A") return Verdict::A;
  if (s == "B") return Verdict::B;
  if (s == "inconclusive") return Verdict::inconclusive;
  throw InvalidRecord("unknown verdict '" + std::string(s) + "'");
}

inline constexpr Verdict opposite(Verdict v) noexcept {
  return v == Verdict::A ? Verdict::B : v == Verdict::B ? Verdict::A : Verdict::inconclusive;
}

}  // namespace fabsel
