#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fabsel/error.hpp"
#include "fabsel/property.hpp"

namespace fabsel {

/// Timestamps are integer milliseconds from press start.
using Millis = std::int64_t;

inline constexpr double kMaxForceGrams = 10000.0;  // 0-10 kg rated range
inline constexpr double kNominalRateHz = 25.0;
inline constexpr Millis kFramePeriodMs = 40;
inline constexpr std::size_t kFramesPerPress = 250;  // 10 s at 25 Hz
inline constexpr std::size_t kFeatureDim = 16;
inline constexpr Millis kDefaultAlignToleranceMs = 20;

/// Synthetic ground truth behind a fabric's annotated levels.
struct LatentPhysical {
  double stiffness = 1.0;         // N/mm
  double thickness_mm = 1.0;      // mm
  double roughness = 0.5;         // [0, 1]
  double elasticity_coeff = 0.5;  // [0, 1]

  friend bool operator==(const LatentPhysical&, const LatentPhysical&) = default;
};

inline bool is_valid(const LatentPhysical& l) noexcept {
  return std::isfinite(l.stiffness) && std::isfinite(l.thickness_mm) && std::isfinite(l.roughness) &&
         std::isfinite(l.elasticity_coeff) && l.stiffness > 0.0 && l.thickness_mm > 0.0 && l.roughness >= 0.0 &&
         l.roughness <= 1.0 && l.elasticity_coeff >= 0.0 && l.elasticity_coeff <= 1.0;
}

struct PressureSample {
  Millis t_ms = 0;
  double force_g = 0.0;

  friend bool operator==(const PressureSample&, const PressureSample&) = default;
};

/// One GelSight frame: an opaque reference, or a fixed-dimension descriptor in synthetic mode.
struct GelSightFrameRef {
  Millis t_ms = 0;
  std::string uri;
  std::vector<double> features;

  friend bool operator==(const GelSightFrameRef&, const GelSightFrameRef&) = default;
};

struct PressSession {
  int press_index = 1;
  std::vector<GelSightFrameRef> frames;
  std::vector<PressureSample> pressure;
  double rate_hz = kNominalRateHz;

  friend bool operator==(const PressSession&, const PressSession&) = default;
};

struct ForceLabeledFrame {
  GelSightFrameRef frame;
  double force_g = 0.0;
  Millis dt_ms = 0;

  friend bool operator==(const ForceLabeledFrame&, const ForceLabeledFrame&) = default;
};

struct FabricRecord {
  std::string fabric_id;
  std::array<double, 3> position{};  // metres
  std::string image_ref;
  AttributeVector attributes;
  std::optional<LatentPhysical> latent;
  std::vector<PressSession> sessions;

  friend bool operator==(const FabricRecord&, const FabricRecord&) = default;
};

/// Fabric IDs are used as file-name stems and list elements, so they are restricted to [A-Za-z0-9_.-].
inline bool is_valid_token(std::string_view s) noexcept {
  if (s.empty()) return false;
  for (char c : s) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
              c == '.';
    if (!ok) return false;
  }
  return true;
}

inline void validate(const PressSession& s) {
  if (s.press_index != 1 && s.press_index != 2)
    throw InvalidRecord("press_index " + std::to_string(s.press_index) + " not in {1,2}");
  for (std::size_t i = 1; i < s.frames.size(); ++i)
    if (s.frames[i].t_ms <= s.frames[i - 1].t_ms) throw InvalidRecord("frame timestamps not strictly increasing");
  for (std::size_t i = 0; i < s.pressure.size(); ++i) {
    if (i > 0 && s.pressure[i].t_ms <= s.pressure[i - 1].t_ms)
      throw InvalidRecord("pressure timestamps not strictly increasing");
    double f = s.pressure[i].force_g;
    if (!(f >= 0.0 && f <= kMaxForceGrams)) throw InvalidRecord("force reading outside [0, 10000] g");
  }
}

inline void validate(const FabricRecord& r) {
  if (!is_valid_token(r.fabric_id)) throw InvalidRecord("fabric_id '" + r.fabric_id + "' is not a valid token");
  if (r.image_ref.empty()) throw InvalidRecord("fabric " + r.fabric_id + " has empty image_ref");
  if (r.latent && !is_valid(*r.latent)) throw InvalidRecord("fabric " + r.fabric_id + " has invalid latent");
  for (const auto& s : r.sessions) validate(s);
}

/// Level cut points. Each latent distribution is split at its 40% and 60% quantiles, so roughly
/// 40% of fabrics land at each extreme and 20% at the moderate level. A value exactly on a cut
/// belongs to the upper latent bucket.
struct LevelThresholds {
  static constexpr double elasticity_low = 0.4;
  static constexpr double elasticity_high = 0.6;
  static constexpr double roughness_low = 0.4;
  static constexpr double roughness_high = 0.6;
  // thickness_mm = 0.1 * 30^u, cut at u = 0.4 and u = 0.6
  static constexpr double thickness_low_mm = 0.39;
  static constexpr double thickness_high_mm = 0.77;
  // stiffness = 0.5 * 40^u N/mm, cut at u = 0.4 and u = 0.6; softness runs opposite to stiffness
  static constexpr double stiffness_low = 2.2;
  static constexpr double stiffness_high = 4.55;
};

namespace detail {
inline int bucket(double v, double low, double high) noexcept { return v < low ? 0 : (v < high ? 1 : 2); }
}  // namespace detail

inline AttributeVector derive_attribute_levels(const LatentPhysical& latent) {
  if (!is_valid(latent)) throw InvalidRecord("latent parameters out of range");
  using T = LevelThresholds;
  return AttributeVector{
      detail::bucket(latent.elasticity_coeff, T::elasticity_low, T::elasticity_high),
      2 - detail::bucket(latent.stiffness, T::stiffness_low, T::stiffness_high),
      detail::bucket(latent.thickness_mm, T::thickness_low_mm, T::thickness_high_mm),
      detail::bucket(latent.roughness, T::roughness_low, T::roughness_high),
  };
}

}  // namespace fabsel
