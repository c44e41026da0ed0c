#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "tenseg/gait.hpp"

using namespace tenseg;

namespace {

ServoProfile unit_profile() {
  ServoProfile p;
  p.amplitude = 1.0;
  p.contract_time = 1.0;
  p.hold_time = 0.5;
  p.release_time = 0.2;
  p.period = 3.0;
  p.phase_offset = 0.7;
  return p;
}

TensegrityGraph crawler() {
  ModuleSpec spec;
  spec.with_actuator = true;
  return build_chain(spec, 3, ChainOptions{.alternate_handedness = true});
}

struct CrawlRun {
  TensegrityGraph g;
  GaitProgram program;
  Trajectory tr;
};

CrawlRun crawl(const ServoProfile& tmpl, bool reverse_wave, int cycles, const ContactModel& contact = {},
          double sample_rate = 240.0) {
  CrawlRun r{crawler(), peristaltic_program(3, tmpl, 1.0, cycles), {}};
  if (reverse_wave) {
    for (int i = 0; i < 3; ++i) r.program.profiles[i].phase_offset = (2 - i) * 1.0;
  }
  const DynamicsSettings set;
  const SimState s = settle(r.g, initial_state(r.g), 3.0, set, contact);
  r.tr = simulate(r.g, s, schedule(r.program), r.program.duration(), set, contact, sample_rate);
  return r;
}

double forward_displacement() {
  static const double d = [] {
    const CrawlRun r = crawl(ServoProfile{}, false, 5);
    return locomotion_metrics(r.g, r.tr, r.program).displacement_per_cycle;
  }();
  return d;
}

struct SingleRun {
  TensegrityGraph g;
  Trajectory tr;
};

const SingleRun& single_contraction() {
  static const SingleRun run = [] {
    ModuleSpec spec;
    spec.with_actuator = true;
    SingleRun r{resting_on_face(build_icosahedron(spec), 1), {}};
    const DynamicsSettings set;
    const ContactModel c;
    const SimState s = settle(r.g, initial_state(r.g), 3.0, set, c);
    const GaitProgram prog = peristaltic_program(1, ServoProfile{}, 0.0, 1);
    r.tr = simulate(r.g, s, schedule(prog), prog.duration(), set, c);
    return r;
  }();
  return run;
}

}  // namespace

TEST(Profile, Examples) {
  const ServoProfile p = unit_profile();
  EXPECT_EQ(profile_angle(p, 0.0), 0.0);
  EXPECT_EQ(profile_angle(p, 0.5), 0.0);
  EXPECT_NEAR(profile_angle(p, 0.7 + 0.25), 0.25, 1e-12);
  EXPECT_DOUBLE_EQ(profile_angle(p, 0.7 + 1.0), 1.0);
  EXPECT_DOUBLE_EQ(profile_angle(p, 0.7 + 1.4), 1.0);
  EXPECT_NEAR(profile_angle(p, 0.7 + 1.6), 0.5, 1e-12);
  EXPECT_EQ(profile_angle(p, 0.7 + 2.5), 0.0);
  EXPECT_THROW(profile_angle(p, -0.1), ValidationError);
}

TEST(Profile, ContinuousAndPeriodic) {
  const ServoProfile p = unit_profile();
  const int n = 10000;
  const double span = 4 * p.period, h = span / n;
  // Steepest ramp bounds the change between neighbouring samples.
  const double slope = p.amplitude / std::min(p.contract_time, p.release_time);
  double prev = profile_angle(p, 0.0);
  for (int i = 1; i <= n; ++i) {
    const double t = i * h;
    const double a = profile_angle(p, t);
    EXPECT_LE(std::abs(a - prev), slope * h * (1 + 1e-9)) << "t=" << t;
    prev = a;
    if (t >= p.phase_offset) EXPECT_NEAR(profile_angle(p, t + p.period), a, 1e-12) << "t=" << t;
  }
}

TEST(Profile, Validation) {
  ServoProfile p;
  EXPECT_NO_THROW(check_profile(p));
  p.contract_time = 4.0;
  EXPECT_THROW(check_profile(p), ValidationError);
  p = ServoProfile{};
  p.hold_time = -1.0;
  EXPECT_THROW(check_profile(p), ValidationError);
  p = ServoProfile{};
  p.period = 0.0;
  EXPECT_THROW(check_profile(p), ValidationError);
}

TEST(Program, Offsets) {
  const GaitProgram one = peristaltic_program(1, ServoProfile{}, 1.0, 2);
  ASSERT_EQ(one.profiles.size(), 1u);
  EXPECT_EQ(one.profiles[0].phase_offset, 0.0);

  const GaitProgram three = peristaltic_program(3, ServoProfile{}, 1.0, 4);
  ASSERT_EQ(three.profiles.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(three.profiles[i].phase_offset, i * 1.0);
  EXPECT_DOUBLE_EQ(three.duration(), 4 * 4.5 + 2.0);

  const ServoProfile d;
  EXPECT_LT(d.release_time, d.contract_time);

  EXPECT_THROW(peristaltic_program(0, d, 1.0, 1), ValidationError);
  EXPECT_THROW(peristaltic_program(3, d, -1.0, 1), ValidationError);
}

TEST(Program, ScheduleFollowsProfiles) {
  const GaitProgram prog = peristaltic_program(3, ServoProfile{}, 1.0, 2);
  const AngleSchedule f = schedule(prog);
  for (double t : {0.0, 0.4, 1.3, 2.2, 3.1, 5.0, 7.7})
    for (int a = 0; a < 3; ++a) EXPECT_EQ(f(a, t), profile_angle(prog.profiles[a], t));
  EXPECT_EQ(f(3, 1.0), 0.0);
}

TEST(Contraction, RestIsZero) {
  ModuleSpec spec;
  spec.with_actuator = true;
  const TensegrityGraph g = resting_on_face(build_icosahedron(spec), 1);
  Trajectory tr;
  tr.samples.assign(5, initial_state(g));
  const ContractionSeries c = contraction_metrics(g, tr, 0);
  for (std::size_t i = 0; i < tr.samples.size(); ++i) {
    EXPECT_EQ(c.axial_strain[i], 0.0);
    EXPECT_EQ(c.lateral_expansion[i], 0.0);
  }
}

TEST(Contraction, Errors) {
  const TensegrityGraph plain = build_icosahedron(ModuleSpec{});
  Trajectory tr;
  tr.samples.push_back(initial_state(plain));
  EXPECT_THROW(contraction_metrics(plain, tr, 0), MetricError);

  ModuleSpec spec;
  spec.with_actuator = true;
  const TensegrityGraph g = build_icosahedron(spec);
  EXPECT_THROW(contraction_metrics(g, Trajectory{}, 0), MetricError);
}

TEST(Contraction, DefaultRun) {
  const SingleRun& r = single_contraction();
  const ContractionSeries c = contraction_metrics(r.g, r.tr, 0);
  EXPECT_GE(c.axial_strain_peak, 0.20);
  EXPECT_LE(c.axial_strain_peak, 0.30);
  EXPECT_GT(c.lateral_expansion_peak, 0.0);
  EXPECT_NEAR(c.lateral_expansion_peak, 0.09, 0.05);
}

TEST(Contraction, LateralGrowsWithStrain) {
  const SingleRun& r = single_contraction();
  const ContractionSeries c = contraction_metrics(r.g, r.tr, 0);
  const ServoProfile p;
  // Compare quarter points of the contraction ramp.
  std::vector<std::pair<double, double>> pts;
  for (double f : {0.25, 0.5, 0.75, 1.0}) {
    const auto k = static_cast<std::size_t>(std::llround(f * p.contract_time * r.tr.sample_rate));
    pts.emplace_back(c.axial_strain[k], c.lateral_expansion[k]);
  }
  for (std::size_t i = 1; i < pts.size(); ++i) {
    EXPECT_GT(pts[i].first, pts[i - 1].first);
    EXPECT_GT(pts[i].second, pts[i - 1].second);
  }
}

TEST(Locomotion, Errors) {
  const TensegrityGraph g = crawler();
  const GaitProgram prog = peristaltic_program(3, ServoProfile{}, 1.0, 1);
  Trajectory tr;
  SimState s = initial_state(g);
  for (int k = 0; k < 1500; ++k) {
    s.time = k / tr.sample_rate;
    tr.samples.push_back(s);
  }
  // 1500 samples cover one 4.5 s period and part of the next.
  EXPECT_THROW(locomotion_metrics(g, tr, prog), MetricError);
  EXPECT_THROW(locomotion_metrics(g, tr, GaitProgram{}), MetricError);
  for (int k = 1500; k < 2200; ++k) {
    s.time = k / tr.sample_rate;
    tr.samples.push_back(s);
  }
  const GaitMetrics m = locomotion_metrics(g, tr, prog);
  EXPECT_EQ(m.cycles_measured, 1);
  EXPECT_EQ(m.displacement_per_cycle, 0.0);
}

TEST(Locomotion, NoActuationStaysPut) {
  ServoProfile idle;
  idle.amplitude = 0.0;
  const CrawlRun r = crawl(idle, false, 3);
  EXPECT_LT(std::abs(locomotion_metrics(r.g, r.tr, r.program).displacement_per_cycle), 1e-5);
}

TEST(Locomotion, ForwardWave) {
  EXPECT_GT(forward_displacement(), 0.0);
}

TEST(Locomotion, ReversedWaveDegrades) {
  const CrawlRun r = crawl(ServoProfile{}, true, 5);
  EXPECT_LT(locomotion_metrics(r.g, r.tr, r.program).displacement_per_cycle, forward_displacement());
}

TEST(Locomotion, SwappedTimingDegrades) {
  ServoProfile swapped;
  std::swap(swapped.contract_time, swapped.release_time);
  const CrawlRun r = crawl(swapped, false, 5);
  EXPECT_LT(locomotion_metrics(r.g, r.tr, r.program).displacement_per_cycle, forward_displacement());
}

TEST(Locomotion, FrictionlessGroundDoesNotCrawl) {
  ContactModel ice;
  ice.mu_static = 0.0;
  ice.mu_kinetic = 0.0;
  const CrawlRun r = crawl(ServoProfile{}, false, 3, ice);
  EXPECT_LT(std::abs(locomotion_metrics(r.g, r.tr, r.program).displacement_per_cycle), 1e-4);
}

TEST(Locomotion, SampleRateInvariance) {
  const CrawlRun slow = crawl(ServoProfile{}, false, 3, {}, 120.0);
  const CrawlRun fast = crawl(ServoProfile{}, false, 3, {}, 480.0);
  const double a = locomotion_metrics(slow.g, slow.tr, slow.program).displacement_per_cycle;
  const double b = locomotion_metrics(fast.g, fast.tr, fast.program).displacement_per_cycle;
  EXPECT_NEAR(a, b, 0.02 * std::abs(b));
}

TEST(Locomotion, MirroredChainMirrorsTrajectory) {
  // Mirroring the chain across its midplane puts module 0 at the other end,
  // so the same program runs the wave in the opposite direction. The chain
  // is centred on x = 0 first so the mirror is an exact sign flip; the
  // rocking chain amplifies roundoff of an off-origin mirror by about 10x
  // every half second.
  TensegrityGraph g = crawler();
  g = transformed(g, Mat3::Identity(), Vec3(-module_centroid(g, 1).x(), 0, 0));
  const Mat3 flip = Vec3(-1, 1, 1).asDiagonal();
  const TensegrityGraph h = transformed(g, flip, Vec3::Zero());

  const GaitProgram prog = peristaltic_program(3, ServoProfile{}, 1.0, 1);
  const DynamicsSettings set;
  const ContactModel c;
  const double t = ServoProfile{}.period;
  const Trajectory a = simulate(g, initial_state(g), schedule(prog), t, set, c);
  const Trajectory b = simulate(h, initial_state(h), schedule(prog), t, set, c);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  const SimState& sa = a.samples.back();
  const SimState& sb = b.samples.back();
  double err = 0.0;
  for (std::size_t i = 0; i < sa.positions.size(); ++i)
    err = std::max(err, (flip * sa.positions[i] - sb.positions[i]).norm());
  EXPECT_LT(err, 1e-4);
}
