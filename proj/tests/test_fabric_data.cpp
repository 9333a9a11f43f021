#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "fabsel/manifest.hpp"
#include "fabsel/sync.hpp"
#include "fabsel/synthetic.hpp"
#include "test_support.hpp"

using namespace fabsel;

namespace {

PressSession press_with(std::vector<Millis> frames, std::vector<Millis> pressure) {
  PressSession s;
  for (auto t : frames) s.frames.push_back({t, "f" + std::to_string(t), {}});
  double f = 100.0;
  for (auto t : pressure) s.pressure.push_back({t, f += 10.0});
  return s;
}

// Brute-force nearest neighbour used to check the binary-search pairing.
std::pair<double, Millis> nearest(const PressSession& s, Millis t) {
  const PressureSample* best = nullptr;
  for (const auto& p : s.pressure)
    if (!best || std::llabs(p.t_ms - t) < std::llabs(best->t_ms - t)) best = &p;
  return {best->force_g, std::llabs(best->t_ms - t)};
}

}  // namespace

TEST(Sync, IdenticalStampsGiveZeroOffset) {
  auto s = press_with({0, 40, 80}, {0, 40, 80});
  auto out = synchronize_press(s);
  ASSERT_EQ(out.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(out[i].dt_ms, 0);
    EXPECT_EQ(out[i].force_g, s.pressure[i].force_g);
    EXPECT_EQ(out[i].frame.t_ms, s.frames[i].t_ms);
  }
}

TEST(Sync, NearestSampleWithinTolerance) {
  auto s = press_with({41}, {0, 40, 80});
  auto out = synchronize_press(s, 20);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].dt_ms, 1);
  EXPECT_EQ(out[0].force_g, s.pressure[1].force_g);
}

TEST(Sync, GapBeyondToleranceThrows) {
  auto s = press_with({65}, {0, 40});
  try {
    synchronize_press(s, 20);
    FAIL() << "expected UnalignedFrame";
  } catch (const UnalignedFrame& e) {
    EXPECT_EQ(e.gap_ms(), 25);
    EXPECT_EQ(e.frame_t_ms(), 65);
    EXPECT_EQ(e.category(), ErrorCategory::data);
  }
}

TEST(Sync, EquidistantPicksEarlierSample) {
  auto s = press_with({20}, {0, 40});
  auto out = synchronize_press(s);
  EXPECT_EQ(out[0].force_g, s.pressure[0].force_g);
  EXPECT_EQ(out[0].dt_ms, 20);
}

TEST(Sync, FramesOutsidePressureRangeUseEndpoints) {
  auto s = press_with({0, 100}, {10, 90});
  auto out = synchronize_press(s);
  EXPECT_EQ(out[0].force_g, s.pressure.front().force_g);
  EXPECT_EQ(out[1].force_g, s.pressure.back().force_g);
  EXPECT_EQ(out[0].dt_ms, 10);
  EXPECT_EQ(out[1].dt_ms, 10);
}

TEST(Sync, EmptyStreamsThrow) {
  EXPECT_THROW(synchronize_press(press_with({}, {0})), EmptyStream);
  EXPECT_THROW(synchronize_press(press_with({0}, {})), EmptyStream);
}

TEST(Sync, MatchesBruteForceOnRandomJitter) {
  std::mt19937_64 eng(5);
  std::uniform_int_distribution<int> jitter(-5, 5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Millis> frames, pressure;
    for (int i = 0; i < 250; ++i) {
      frames.push_back(i * 40 + jitter(eng));
      pressure.push_back(i * 40);
    }
    auto s = press_with(frames, pressure);
    auto out = synchronize_press(s);
    ASSERT_EQ(out.size(), 250u);
    for (std::size_t i = 0; i < out.size(); ++i) {
      auto [force, gap] = nearest(s, frames[i]);
      EXPECT_EQ(out[i].force_g, force);
      EXPECT_EQ(out[i].dt_ms, gap);
      EXPECT_LE(out[i].dt_ms, 5);
    }
  }
}

TEST(Synthetic, DeterministicPerSeedAndId) {
  EXPECT_EQ(generate_synthetic_fabric(1, "F0001"), generate_synthetic_fabric(1, "F0001"));
  auto a = generate_synthetic_fabric(1, "F0001");
  auto b = generate_synthetic_fabric(2, "F0001");
  ASSERT_TRUE(a.latent && b.latent);
  EXPECT_NE(a.latent->stiffness, b.latent->stiffness);
  EXPECT_NE(a.latent->roughness, b.latent->roughness);
  EXPECT_NE(generate_synthetic_fabric(1, "F0002").latent->roughness, a.latent->roughness);
}

TEST(Synthetic, SessionShapeAndForceRange) {
  auto rec = generate_synthetic_fabric(3, "X-1");
  ASSERT_EQ(rec.sessions.size(), 2u);
  for (const auto& s : rec.sessions) {
    ASSERT_EQ(s.frames.size(), kFramesPerPress);
    ASSERT_EQ(s.pressure.size(), kFramesPerPress);
    for (std::size_t i = 0; i < kFramesPerPress; ++i) {
      EXPECT_EQ(s.frames[i].t_ms, static_cast<Millis>(i) * 40);
      EXPECT_EQ(s.pressure[i].t_ms, static_cast<Millis>(i) * 40);
      EXPECT_EQ(s.frames[i].features.size(), kFeatureDim);
      EXPECT_GE(s.pressure[i].force_g, 0.0);
      EXPECT_LE(s.pressure[i].force_g, kMaxForceGrams);
    }
    EXPECT_EQ(s.frames.back().t_ms, 9960);
  }
  EXPECT_EQ(rec.attributes, derive_attribute_levels(*rec.latent));
}

TEST(Synthetic, SynchronizationIsTotal) {
  for (const auto& rec : generate_synthetic_dataset(30, 11))
    for (const auto& s : rec.sessions) {
      auto out = synchronize_press(s);
      ASSERT_EQ(out.size(), s.frames.size());
      for (const auto& f : out) EXPECT_EQ(f.dt_ms, 0);
    }
}

TEST(Synthetic, RejectsBadFabricId) { EXPECT_THROW(generate_synthetic_fabric(1, "bad id"), InvalidRecord); }

TEST(Synthetic, DatasetIdsAreSequential) {
  auto ds = generate_synthetic_dataset(3, 1);
  ASSERT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds[0].fabric_id, "F0001");
  EXPECT_EQ(ds[2].fabric_id, "F0003");
  EXPECT_EQ(synthetic_fabric_id(9999), "F10000");
}

TEST(Levels, TextureBoundaries) {
  LatentPhysical l{1.0, 0.5, 0.0, 0.5};
  EXPECT_EQ(derive_attribute_levels(l)[PropertyKind::texture], 0);
  l.roughness = 1.0;
  EXPECT_EQ(derive_attribute_levels(l)[PropertyKind::texture], 2);
  l.roughness = LevelThresholds::roughness_low;
  EXPECT_EQ(derive_attribute_levels(l)[PropertyKind::texture], 1);
  l.roughness = LevelThresholds::roughness_high;
  EXPECT_EQ(derive_attribute_levels(l)[PropertyKind::texture], 2);
}

TEST(Levels, SoftnessRunsOppositeToStiffness) {
  LatentPhysical l{0.6, 0.5, 0.5, 0.5};
  EXPECT_EQ(derive_attribute_levels(l)[PropertyKind::softness], 2);
  l.stiffness = 19.0;
  EXPECT_EQ(derive_attribute_levels(l)[PropertyKind::softness], 0);
  l.stiffness = LevelThresholds::stiffness_low;
  EXPECT_EQ(derive_attribute_levels(l)[PropertyKind::softness], 1);
}

TEST(Levels, MonotoneInEachComponent) {
  // elasticity, thickness, texture non-decreasing in their latent; softness non-increasing in stiffness.
  std::mt19937_64 eng(9);
  for (int trial = 0; trial < 500; ++trial) {
    LatentPhysical base{0.5 + 19.5 * unit_draw(eng), 0.1 + 2.9 * unit_draw(eng), unit_draw(eng), unit_draw(eng)};
    auto lv = derive_attribute_levels(base);
    auto up = base;
    up.elasticity_coeff = std::min(1.0, base.elasticity_coeff + 0.3 * unit_draw(eng));
    EXPECT_GE(derive_attribute_levels(up)[PropertyKind::elasticity], lv[PropertyKind::elasticity]);
    up = base;
    up.thickness_mm += unit_draw(eng);
    EXPECT_GE(derive_attribute_levels(up)[PropertyKind::thickness], lv[PropertyKind::thickness]);
    up = base;
    up.roughness = std::min(1.0, base.roughness + 0.3 * unit_draw(eng));
    EXPECT_GE(derive_attribute_levels(up)[PropertyKind::texture], lv[PropertyKind::texture]);
    up = base;
    up.stiffness += 5.0 * unit_draw(eng);
    EXPECT_LE(derive_attribute_levels(up)[PropertyKind::softness], lv[PropertyKind::softness]);
  }
}

TEST(Levels, InvalidLatentRejected) {
  EXPECT_FALSE(is_valid(LatentPhysical{0.0, 1.0, 0.5, 0.5}));
  EXPECT_FALSE(is_valid(LatentPhysical{1.0, 1.0, 1.5, 0.5}));
  EXPECT_TRUE(is_valid(LatentPhysical{1.0, 1.0, 0.5, 0.5}));
}

TEST(Records, ValidationRejectsBadSessions) {
  auto rec = generate_synthetic_fabric(1, "F0001");
  auto bad = rec;
  bad.sessions[0].pressure[3].force_g = 10001.0;
  EXPECT_THROW(validate(bad), InvalidRecord);
  bad = rec;
  bad.sessions[1].press_index = 3;
  EXPECT_THROW(validate(bad), InvalidRecord);
  bad = rec;
  std::swap(bad.sessions[0].frames[0], bad.sessions[0].frames[1]);
  EXPECT_THROW(validate(bad), InvalidRecord);
  bad = rec;
  bad.image_ref.clear();
  EXPECT_THROW(validate(bad), InvalidRecord);
  EXPECT_THROW(AttributeVector(0, 3, 0, 0), InvalidRecord);
}

TEST(Manifest, EmptyRoundTrip) {
  test::TempDir dir;
  save_manifest({}, dir / "m.jsonl");
  EXPECT_TRUE(load_manifest(dir / "m.jsonl").empty());
}

TEST(Manifest, SyntheticRoundTripIsExact) {
  test::TempDir dir;
  auto records = generate_synthetic_dataset(220, 7);
  save_manifest(records, dir / "manifest.jsonl", ManifestInfo{7, "abc"});
  std::size_t n_sessions = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir / "sessions")) n_sessions += e.is_regular_file();
  EXPECT_EQ(n_sessions, 440u);
  ManifestInfo info;
  auto loaded = load_manifest(dir / "manifest.jsonl", &info);
  EXPECT_EQ(info.seed, 7u);
  EXPECT_EQ(info.config_hash, "abc");
  ASSERT_EQ(loaded.size(), records.size());
  for (std::size_t i = 0; i < records.size(); ++i) EXPECT_EQ(loaded[i], records[i]) << records[i].fabric_id;
}

TEST(Manifest, MetadataOnlyLoadSkipsSamples) {
  test::TempDir dir;
  save_manifest(generate_synthetic_dataset(2, 1), dir / "m.jsonl");
  auto loaded = load_manifest(dir / "m.jsonl", nullptr, false);
  ASSERT_EQ(loaded.size(), 2u);
  ASSERT_EQ(loaded[0].sessions.size(), 2u);
  EXPECT_TRUE(loaded[0].sessions[0].frames.empty());
}

TEST(Manifest, DuplicateIdsRejectedOnSaveAndLoad) {
  test::TempDir dir;
  auto a = generate_synthetic_fabric(1, "F0001");
  EXPECT_THROW(save_manifest({a, a}, dir / "m.jsonl"), DuplicateFabricId);

  save_manifest({a}, dir / "m.jsonl");
  auto text = test::slurp(dir / "m.jsonl");
  auto second_line = text.substr(text.find('\n') + 1);
  test::spit(dir / "m.jsonl", text + second_line);
  EXPECT_THROW(load_manifest(dir / "m.jsonl"), DuplicateFabricId);
}

TEST(Manifest, SchemaErrorsCarryLineNumbers) {
  test::TempDir dir;
  test::spit(dir / "m.jsonl",
                "{\"kind\":\"fabsel-manifest\",\"config_hash\":\"x\"}\n{\"fabric_id\":\"F1\",\"position\":[0,0]}\n");
  try {
    load_manifest(dir / "m.jsonl");
    FAIL();
  } catch (const SchemaViolation& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  test::spit(dir / "m.jsonl", "{\"kind\":\"something-else\"}\n");
  EXPECT_THROW(load_manifest(dir / "m.jsonl"), SchemaViolation);
  EXPECT_THROW(load_manifest(dir / "missing.jsonl"), IOFailure);
}

TEST(Manifest, MissingSessionFileIsIoError) {
  test::TempDir dir;
  save_manifest({generate_synthetic_fabric(1, "F0001")}, dir / "m.jsonl");
  std::filesystem::remove(dir / "sessions/F0001_p2.csv");
  EXPECT_THROW(load_manifest(dir / "m.jsonl"), IOFailure);
}
