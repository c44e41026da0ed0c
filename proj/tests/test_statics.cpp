#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tenseg/statics.hpp"

using namespace tenseg;

namespace {

ModuleSpec spec_with(double p, double thickness = 1e-3) {
  ModuleSpec s;
  s.pre_stretch = p;
  s.cable_section.thickness = thickness;
  return s;
}

double strut_length(const TensegrityGraph& g) { return g.modules[0].strut_length; }

std::vector<Vec3> perturbed(const TensegrityGraph& g, double amp, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-amp, amp);
  auto x = g.positions();
  for (Vec3& p : x) p += Vec3(U(rng), U(rng), U(rng));
  return x;
}

// Optimal rigid alignment (Kabsch) of a onto b; returns RMS distance.
double aligned_rms(std::vector<Vec3> a, const std::vector<Vec3>& b) {
  Vec3 ca = Vec3::Zero(), cb = Vec3::Zero();
  for (std::size_t i = 0; i < a.size(); ++i) ca += a[i], cb += b[i];
  ca /= a.size();
  cb /= b.size();
  Mat3 H = Mat3::Zero();
  for (std::size_t i = 0; i < a.size(); ++i) H += (a[i] - ca) * (b[i] - cb).transpose();
  Eigen::JacobiSVD<Mat3> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 D = Mat3::Identity();
  D(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() > 0 ? 1 : -1;
  const Mat3 R = svd.matrixV() * D * svd.matrixU().transpose();
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (R * (a[i] - ca) + cb - b[i]).squaredNorm();
  return std::sqrt(s / a.size());
}

std::vector<Vec3> fd_gradient(const TensegrityGraph& g, std::vector<Vec3> x, double h) {
  std::vector<Vec3> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (int k = 0; k < 3; ++k) {
      const double x0 = x[i][k];
      x[i][k] = x0 + h;
      const double ep = elastic_energy(g, x);
      x[i][k] = x0 - h;
      const double em = elastic_energy(g, x);
      x[i][k] = x0;
      grad[i][k] = (ep - em) / (2 * h);
    }
  return grad;
}

double max_norm(const std::vector<Vec3>& v) {
  double m = 0;
  for (const Vec3& e : v) m = std::max(m, e.norm());
  return m;
}

double max_diff(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, (a[i] - b[i]).norm());
  return m;
}

}  // namespace

TEST(MemberForces, ZeroPreStretch) {
  const auto g = build_icosahedron(spec_with(0.0));
  for (double f : member_forces(g, g.positions())) EXPECT_NEAR(f, 0.0, 1e-12);
}

TEST(MemberForces, BuildPoseRatio) {
  const auto g = build_icosahedron(spec_with(0.15));
  const auto f = member_forces(g, g.positions());
  const double T = 12.0 * 0.15;  // k * p
  for (std::size_t k = 0; k < g.members.size(); ++k) {
    if (g.members[k].kind == MemberKind::cable) EXPECT_NEAR(f[k], T, 1e-12);
    if (g.members[k].kind == MemberKind::strut) EXPECT_NEAR(-f[k] / T, std::sqrt(6.0), 1e-6 * std::sqrt(6.0));
  }
}

TEST(MemberForces, SlackCable) {
  auto g = build_icosahedron(spec_with(0.15));
  for (Member& m : g.members)
    if (m.kind == MemberKind::cable) {
      m.rest_length *= 1.5;  // now shorter than its span
      break;
    }
  const auto f = member_forces(g, g.positions());
  for (std::size_t k = 0; k < g.members.size(); ++k)
    if (g.members[k].kind == MemberKind::cable) {
      EXPECT_EQ(f[k], 0.0);
      break;
    }
}

TEST(MemberForces, WrongSizeThrows) {
  const auto g = build_icosahedron({});
  std::vector<Vec3> x(5, Vec3::Zero());
  EXPECT_THROW(member_forces(g, x), ValidationError);
}

TEST(Equilibrate, BuildPoseIsEquilibrium) {
  for (double p : {0.01, 0.15, 0.3}) {
    const auto g = build_icosahedron(spec_with(p));
    const auto r = equilibrate(g, g.positions(), 1e-5);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.residual_max, 1e-5);
    EXPECT_LT(max_diff(r.positions, g.positions()), 1e-6 * strut_length(g));
  }
}

TEST(Equilibrate, RecoversFromNoise) {
  const auto g = build_icosahedron(spec_with(0.15));
  const double L = strut_length(g);
  for (unsigned seed : {1u, 2u, 3u}) {
    const auto r = equilibrate(g, perturbed(g, 0.02 * L, seed), 1e-5);
    ASSERT_TRUE(r.converged) << r.residual_max;
    EXPECT_LT(aligned_rms(r.positions, g.positions()), 1e-3 * L);
  }
}

TEST(Equilibrate, InfiniteToleranceReturnsImmediately) {
  const auto g = build_icosahedron({});
  const auto x = perturbed(g, 1e-3, 4);
  const auto r = equilibrate(g, x, std::numeric_limits<double>::infinity());
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(max_diff(r.positions, x), 0.0);
}

TEST(Equilibrate, BadTolerance) {
  const auto g = build_icosahedron({});
  EXPECT_THROW(equilibrate(g, g.positions(), 0.0), ValidationError);
  EXPECT_THROW(equilibrate(g, g.positions(), -1.0), ValidationError);
}

TEST(Equilibrate, NonConvergenceIsReported) {
  const auto g = build_icosahedron({});
  const auto r = equilibrate(g, perturbed(g, 0.01 * strut_length(g), 9), 1e-12, 3);
  EXPECT_FALSE(r.converged);
  EXPECT_GT(r.residual_max, 1e-12);
}

TEST(Equilibrate, StrutsCompressedCablesTaut) {
  for (double p : {0.05, 0.3}) {
    const auto g = build_icosahedron(spec_with(p));
    const auto r = equilibrate(g, perturbed(g, 0.01 * strut_length(g), 5), 1e-6);
    ASSERT_TRUE(r.converged);
    const auto f = member_forces(g, r.positions);
    for (std::size_t k = 0; k < f.size(); ++k) {
      if (g.members[k].kind == MemberKind::strut) EXPECT_LE(f[k], -1e-9);
      else EXPECT_GE(f[k], 0.0);
    }
  }
}

TEST(Residual, MatchesEnergyGradient) {
  const auto g = build_icosahedron(spec_with(0.10));
  const double L = strut_length(g);
  for (unsigned seed = 0; seed < 20; ++seed) {
    const auto x = perturbed(g, 0.05 * L, 100 + seed);
    auto grad = fd_gradient(g, x, 1e-7 * L);
    for (Vec3& v : grad) v = -v;
    const auto f = elastic_forces(g, x);
    EXPECT_LT(max_diff(f, grad), 1e-4 * max_norm(grad)) << seed;
    const auto r = static_residual(g, x);
    const auto rp = project_rigid(g, x, grad);
    EXPECT_LT(max_diff(r, rp), 1e-4 * max_norm(rp)) << seed;
  }
}

TEST(Residual, ProjectionRemovesStrutDirection) {
  const auto g = build_icosahedron(spec_with(0.15));
  // At the build pose the cable load is entirely carried by the struts.
  EXPECT_LT(max_norm(static_residual(g, g.positions())), 1e-12);
  EXPECT_GT(max_norm(elastic_forces(g, g.positions())), 1.0);
}

TEST(Compress, ZeroDisplacementGivesZeroForce) {
  const auto g = build_icosahedron({});
  const auto c = compress_test(g, collapsibility_directions(g)[0], 0.1, 10);
  ASSERT_EQ(c.samples.size(), 11u);
  EXPECT_EQ(c.samples[0].displacement, 0.0);
  EXPECT_NEAR(c.samples[0].force, 0.0, 1e-9);
  for (std::size_t i = 1; i < c.samples.size(); ++i)
    EXPECT_GT(c.samples[i].displacement, c.samples[i - 1].displacement);
  EXPECT_FALSE(c.truncated);
}

TEST(Compress, InitialHeightIsTwiceFaceOffset) {
  const auto g = build_icosahedron({});
  const auto c = compress_test(g, collapsibility_directions(g)[0], 0.1, 2);
  EXPECT_NEAR(c.initial_height, strut_length(g) * std::sqrt(3.0) / 2, 1e-12);
}

TEST(Compress, BadArguments) {
  const auto g = build_icosahedron({});
  const Vec3 d = collapsibility_directions(g)[0];
  EXPECT_THROW(compress_test(g, Vec3(1, 1, 0), 0.5, 10), ValidationError);
  EXPECT_THROW(compress_test(g, d, 0.0, 10), ValidationError);
  EXPECT_THROW(compress_test(g, d, 1.0, 10), ValidationError);
  EXPECT_THROW(compress_test(g, d, 0.5, 0), ValidationError);
}

TEST(Compress, TruncatesWithDiagnostic) {
  const auto g = build_icosahedron({});
  RelaxSettings tight;
  tight.tolerance = 1e-14;
  tight.max_iterations = 5;
  const auto c = compress_test(g, collapsibility_directions(g)[0], 0.5, 10, tight);
  EXPECT_TRUE(c.truncated);
  EXPECT_FALSE(c.diagnostic.empty());
  EXPECT_LT(c.samples.size(), 11u);
}

TEST(Compress, OrderedByPreStretch) {
  std::vector<ForceDisplacementCurve> c;
  for (double p : {0.01, 0.05, 0.10, 0.15, 0.30}) {
    const auto g = build_icosahedron(spec_with(p));
    c.push_back(compress_test(g, collapsibility_directions(g)[0], 0.5, 100));
    ASSERT_FALSE(c.back().truncated) << c.back().diagnostic;
  }
  for (std::size_t a = 0; a + 1 < c.size(); ++a)
    for (std::size_t i = 1; i < c[a].samples.size(); ++i)
      EXPECT_GT(c[a + 1].samples[i].force, c[a].samples[i].force) << a << " " << i;
  const double k1 = secant_stiffness(c[0], 0.0, 0.1);
  const double k15 = secant_stiffness(c[3], 0.0, 0.1);
  const double k30 = secant_stiffness(c[4], 0.0, 0.1);
  EXPECT_LT(k30 - k15, k15 - k1);
}

TEST(Compress, OrderedByThickness) {
  std::vector<ForceDisplacementCurve> c;
  for (double t : {1e-3, 2e-3, 3e-3}) {
    const auto g = build_icosahedron(spec_with(0.15, t));
    c.push_back(compress_test(g, collapsibility_directions(g)[0], 0.5, 100));
  }
  for (std::size_t a = 0; a + 1 < c.size(); ++a)
    for (std::size_t i = 1; i < c[a].samples.size(); ++i)
      EXPECT_GT(c[a + 1].samples[i].force, c[a].samples[i].force);
}

// Force grows while every cable is taut; the first drop only comes after a
// cable has gone slack.
TEST(Compress, MonotoneUntilFirstSlackCable) {
  for (double p : {0.01, 0.15, 0.30}) {
    const auto g = build_icosahedron(spec_with(p));
    const Vec3 d = collapsibility_directions(g)[0];
    const auto c = compress_test(g, d, 0.5, 100);
    std::size_t drop = c.samples.size();
    for (std::size_t i = 1; i < c.samples.size(); ++i)
      if (c.samples[i].force < c.samples[i - 1].force) {
        drop = i;
        break;
      }
    EXPECT_GT(drop, 20u) << p;  // at least the first 10% strain
    if (drop == c.samples.size()) continue;
    const auto upto = compress_test(g, d, 0.5 * drop / 100.0, static_cast<int>(drop));
    const auto f = member_forces(g, upto.final_positions);
    int slack = 0;
    for (std::size_t k = 0; k < f.size(); ++k)
      if (g.members[k].kind == MemberKind::cable && f[k] == 0.0) ++slack;
    EXPECT_GT(slack, 0) << p;
  }
}

TEST(Compress, Deterministic) {
  const auto g = build_icosahedron({});
  const Vec3 d = collapsibility_directions(g)[0];
  const auto a = compress_test(g, d, 0.5, 50), b = compress_test(g, d, 0.5, 50);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].force, b.samples[i].force);
    EXPECT_EQ(a.samples[i].displacement, b.samples[i].displacement);
  }
}

TEST(Compress, DimensionlessCurveScaleInvariant) {
  ModuleSpec a = spec_with(0.15), b = spec_with(0.15);
  b.strut_length = 3 * a.strut_length;
  const auto ga = build_icosahedron(a), gb = build_icosahedron(b);
  RelaxSettings sa, sb;
  sa.strut_diameter = 2e-3;
  sb.strut_diameter = 6e-3;
  const auto ca = compress_test(ga, collapsibility_directions(ga)[0], 0.5, 50, sa);
  const auto cb = compress_test(gb, collapsibility_directions(gb)[0], 0.5, 50, sb);
  ASSERT_EQ(ca.samples.size(), cb.samples.size());
  for (std::size_t i = 0; i < ca.samples.size(); ++i) {
    EXPECT_NEAR(ca.samples[i].displacement / ca.initial_height,
                cb.samples[i].displacement / cb.initial_height, 1e-12);
    EXPECT_NEAR(ca.samples[i].force / a.cable_stiffness(), cb.samples[i].force / b.cable_stiffness(),
                1e-5);
  }
}

TEST(Secant, InterpolatesAndRejectsBadWindows) {
  ForceDisplacementCurve c;
  c.initial_height = 1.0;
  c.samples = {{0.0, 0.0}, {0.1, 1.0}, {0.2, 3.0}};
  EXPECT_NEAR(secant_stiffness(c, 0.0, 0.1), 10.0, 1e-12);
  EXPECT_NEAR(secant_stiffness(c, 0.05, 0.15), 15.0, 1e-12);
  EXPECT_THROW(secant_stiffness(c, 0.0, 0.3), ValidationError);
  EXPECT_THROW(secant_stiffness(c, 0.1, 0.1), ValidationError);
}

TEST(Hull, KnownVolumes) {
  std::vector<Vec3> cube;
  for (int i = 0; i < 8; ++i) cube.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
  cube.emplace_back(0.5, 0.5, 0.5);  // interior point
  EXPECT_NEAR(hull_volume(cube), 1.0, 1e-12);
  std::vector<Vec3> tet{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  EXPECT_NEAR(hull_volume(tet), 1.0 / 6, 1e-12);
  std::vector<Vec3> flat{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {0.3, 0.2, 0}};
  EXPECT_EQ(hull_volume(flat), 0.0);
  EXPECT_EQ(hull_volume(std::vector<Vec3>{{0, 0, 0}, {1, 0, 0}}), 0.0);
}

// Oracle: supporting planes from all node triples, then Monte Carlo
// membership on a bounding cube.
TEST(Hull, MatchesHalfspaceSampling) {
  const auto g = build_icosahedron({});
  const auto x = g.positions();
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  const double L = strut_length(g);
  std::vector<std::pair<Vec3, double>> planes;
  for (int a = 0; a < 12; ++a)
    for (int b = a + 1; b < 12; ++b)
      for (int c = b + 1; c < 12; ++c) {
        Vec3 n = (x[b] - x[a]).cross(x[c] - x[a]);
        if (n.norm() < 1e-12) continue;
        n.normalize();
        const double off = n.dot(x[a]);
        int pos = 0, neg = 0;
        for (const Vec3& q : x) {
          const double s = n.dot(q) - off;
          if (s > 1e-12) ++pos;
          if (s < -1e-12) ++neg;
        }
        if (pos == 0) planes.push_back({n, off});
        else if (neg == 0) planes.push_back({-n, -off});
      }
  int inside = 0;
  const int N = 400000;
  for (int i = 0; i < N; ++i) {
    const Vec3 q(U(rng) * L, U(rng) * L, U(rng) * L);
    bool in = true;
    for (const auto& [n, off] : planes)
      if (n.dot(q) > off) {
        in = false;
        break;
      }
    inside += in;
  }
  const double mc = static_cast<double>(inside) / N * L * L * L;
  EXPECT_NEAR(hull_volume(x), mc, 0.01 * mc);
}

TEST(Collapse, CollapsibilityDirection) {
  const auto g = build_icosahedron({});
  for (const Vec3& d : collapsibility_directions(g)) {
    const auto r = collapse_test(g, d);
    EXPECT_FALSE(r.curve.truncated) << r.curve.diagnostic;
    EXPECT_LE(r.volume_ratio, 0.20);
    EXPECT_NEAR(r.final_height_ratio, 0.1, 1e-9);
  }
}

TEST(Collapse, StrutAxisIsLessCollapsible) {
  const auto g = build_icosahedron({});
  const double along_face = collapse_test(g, collapsibility_directions(g)[0]).volume_ratio;
  for (int k = 0; k < 3; ++k) EXPECT_GT(collapse_test(g, Vec3::Unit(k)).volume_ratio, along_face);
}

TEST(Collapse, RotationInvariant) {
  const auto g = build_icosahedron({});
  const Mat3 R = Eigen::AngleAxisd(1.1, Vec3(0.3, -1, 0.4).normalized()).toRotationMatrix();
  const auto gr = transformed(g, R, Vec3(0.01, 0.02, -0.03));
  const Vec3 d = collapsibility_directions(g)[1];
  const auto a = collapse_test(g, d), b = collapse_test(gr, R * d);
  EXPECT_NEAR(a.volume_ratio, b.volume_ratio, 1e-6);
  EXPECT_NEAR(a.final_height_ratio, b.final_height_ratio, 1e-6);
}
