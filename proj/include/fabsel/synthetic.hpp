#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "fabsel/fabric.hpp"
#include "fabsel/util.hpp"

namespace fabsel {

// Synthetic fabric generator.
//
// Latent distributions (u ~ U[0,1) drawn independently per component):
//   elasticity_coeff = u
//   roughness        = u
//   thickness_mm     = 0.1 * 30^u       (0.1 .. 3 mm, log-uniform)
//   stiffness        = 0.5 * 40^u       (0.5 .. 20 N/mm, log-uniform)
//
// Each press lasts 10 s at 25 Hz. Pressure follows a saturating ramp
//   F(t) = F_max * (1 - exp(-t / tau)) + N(0, (0.01 F_max)^2),  tau = 3000 / (1 + stiffness) ms
// with F_max ~ U[2500, 6000) g, clamped to the sensor's 0..10000 g range. GelSight frames are
// 16-value descriptors of indentation and surface texture, stamped on the same 40 ms grid.

namespace synthetic_detail {

inline double ramp_force(double f_max, double tau_ms, Millis t_ms) {
  return f_max * (1.0 - std::exp(-static_cast<double>(t_ms) / tau_ms));
}

inline PressSession make_press(const LatentPhysical& latent, std::uint64_t seed, const std::string& fabric_id,
                               int press_index) {
  auto eng = keyed_engine(seed, fabric_id + "/press" + std::to_string(press_index));
  std::normal_distribution<double> unit_noise(0.0, 1.0);

  const double f_max = 2500.0 + 3500.0 * unit_draw(eng);
  const double tau_ms = 3000.0 / (1.0 + latent.stiffness);
  const double phase = 2.0 * M_PI * unit_draw(eng);

  PressSession press;
  press.press_index = press_index;
  press.rate_hz = kNominalRateHz;
  press.frames.reserve(kFramesPerPress);
  press.pressure.reserve(kFramesPerPress);
  for (std::size_t i = 0; i < kFramesPerPress; ++i) {
    const Millis t = static_cast<Millis>(i) * kFramePeriodMs;
    double force = ramp_force(f_max, tau_ms, t) + 0.01 * f_max * unit_noise(eng);
    force = std::clamp(force, 0.0, kMaxForceGrams);
    press.pressure.push_back(PressureSample{t, force});

    // indentation in mm, bounded by the fabric's thickness
    const double indent = latent.thickness_mm * (1.0 - std::exp(-force / (1000.0 * latent.stiffness)));
    GelSightFrameRef frame;
    frame.t_ms = t;
    frame.features.resize(kFeatureDim);
    for (std::size_t k = 0; k < kFeatureDim; ++k) {
      double value;
      if (k < 8) {
        value = latent.roughness * std::sin(static_cast<double>(k + 1) * phase + 0.05 * static_cast<double>(i)) *
                (0.5 + 0.5 * indent / latent.thickness_mm);
      } else if (k < 12) {
        value = indent * (1.0 + 0.25 * static_cast<double>(k - 8));
      } else {
        value = latent.elasticity_coeff * std::exp(-static_cast<double>(k - 12) * 0.5) * indent;
      }
      frame.features[k] = value + 0.01 * unit_noise(eng);
    }
    press.frames.push_back(std::move(frame));
  }
  return press;
}

}  // namespace synthetic_detail

/// Deterministic synthetic fabric: a pure function of (seed, fabric_id).
inline FabricRecord generate_synthetic_fabric(std::uint64_t seed, const std::string& fabric_id) {
  if (!is_valid_token(fabric_id)) throw InvalidRecord("fabric_id '" + fabric_id + "' is not a valid token");
  auto eng = keyed_engine(seed, fabric_id);

  LatentPhysical latent;
  latent.elasticity_coeff = unit_draw(eng);
  latent.roughness = unit_draw(eng);
  latent.thickness_mm = 0.1 * std::pow(30.0, unit_draw(eng));
  latent.stiffness = 0.5 * std::pow(40.0, unit_draw(eng));

  FabricRecord rec;
  rec.fabric_id = fabric_id;
  rec.position = {0.3 + 0.4 * unit_draw(eng), -0.3 + 0.6 * unit_draw(eng), 0.2 + 0.4 * unit_draw(eng)};
  rec.image_ref = "images/" + fabric_id + ".png";
  rec.attributes = derive_attribute_levels(latent);
  rec.latent = latent;
  rec.sessions.push_back(synthetic_detail::make_press(latent, seed, fabric_id, 1));
  rec.sessions.push_back(synthetic_detail::make_press(latent, seed, fabric_id, 2));
  return rec;
}

/// Zero-padded IDs F0001, F0002, ... for synthetic datasets.
inline std::string synthetic_fabric_id(std::size_t index) {
  std::string digits = std::to_string(index + 1);
  if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
  return "F" + digits;
}

inline std::vector<FabricRecord> generate_synthetic_dataset(std::size_t n, std::uint64_t seed) {
  std::vector<FabricRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(generate_synthetic_fabric(seed, synthetic_fabric_id(i)));
  return out;
}

}  // namespace fabsel
