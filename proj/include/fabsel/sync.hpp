#pragma once

#include <algorithm>
#include <cstdlib>
#include <vector>

#include "fabsel/error.hpp"
#include "fabsel/fabric.hpp"

namespace fabsel {

/// Pairs every GelSight frame with the nearest-in-time pressure reading.
///
/// The pressure sensor sits on the opposing fingertip, so its reading is the normal
/// force on the gel at that instant. Equidistant samples resolve to the earlier one.
/// Both streams must be sorted by timestamp.
inline std::vector<ForceLabeledFrame> synchronize_press(const PressSession& session,
                                                        Millis tol_ms = kDefaultAlignToleranceMs) {
  if (session.frames.empty()) throw EmptyStream("press has no GelSight frames");
  if (session.pressure.empty()) throw EmptyStream("press has no pressure samples");

  const auto& pressure = session.pressure;
  std::vector<ForceLabeledFrame> out;
  out.reserve(session.frames.size());
  for (const auto& frame : session.frames) {
    auto it = std::lower_bound(pressure.begin(), pressure.end(), frame.t_ms,
                               [](const PressureSample& s, Millis t) { return s.t_ms < t; });
    const PressureSample* best = nullptr;
    if (it != pressure.end()) best = &*it;
    if (it != pressure.begin()) {
      const auto& prev = *std::prev(it);
      if (!best || frame.t_ms - prev.t_ms <= best->t_ms - frame.t_ms) best = &prev;
    }
    Millis gap = std::llabs(best->t_ms - frame.t_ms);
    if (gap > tol_ms) throw UnalignedFrame(frame.t_ms, gap, tol_ms);
    out.push_back(ForceLabeledFrame{frame, best->force_g, gap});
  }
  return out;
}

}  // namespace fabsel
