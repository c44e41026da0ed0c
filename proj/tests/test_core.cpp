#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "tenseg/core.hpp"

using namespace tenseg;

namespace {

const double kL = 4 * 0.0475 / std::sqrt(6.0);

int count_kind(const TensegrityGraph& g, MemberKind k) {
  return static_cast<int>(std::count_if(g.members.begin(), g.members.end(),
                                        [&](const Member& m) { return m.kind == k; }));
}

// Brute-force oracle: walk each member in tiny steps and test containment.
bool sampled_cavity_clear(const TensegrityGraph& g, double edge) {
  Vec3 c = Vec3::Zero();
  for (int i = 0; i < 12; ++i) c += g.nodes[i].position;
  c /= 12.0;
  const double h = edge / 2;
  for (const Member& m : g.members) {
    if (m.kind != MemberKind::strut && m.kind != MemberKind::cable) continue;
    const Vec3 a = g.nodes[m.endpoints[0]].position, b = g.nodes[m.endpoints[1]].position;
    for (int i = 0; i <= 20000; ++i) {
      const Vec3 p = a + (b - a) * (i / 20000.0) - c;
      if (std::abs(p.x()) < h && std::abs(p.y()) < h && std::abs(p.z()) < h) return false;
    }
  }
  return true;
}

int components(const TensegrityGraph& g) {
  std::vector<int> parent(g.nodes.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const Member& m : g.members) parent[find(m.endpoints[0])] = find(m.endpoints[1]);
  for (const Weld& w : g.welds) parent[find(w.a)] = find(w.b);
  std::set<int> roots;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) roots.insert(find(static_cast<int>(i)));
  return static_cast<int>(roots.size());
}

}  // namespace

TEST(Build, CountsAndValence) {
  const auto g = build_icosahedron({});
  EXPECT_EQ(g.nodes.size(), 12u);
  EXPECT_EQ(count_kind(g, MemberKind::strut), 6);
  EXPECT_EQ(count_kind(g, MemberKind::cable), 24);
  EXPECT_EQ(g.faces.size(), 8u);
  std::vector<int> struts(12, 0), cables(12, 0);
  for (const Member& m : g.members)
    for (int e : m.endpoints) (m.kind == MemberKind::strut ? struts : cables)[e]++;
  for (int i = 0; i < 12; ++i) {
    EXPECT_EQ(struts[i], 1);
    EXPECT_EQ(cables[i], 4);
  }
}

TEST(Build, CableLengthAnchor) {
  ModuleSpec s;
  s.strut_length = 0.07757;
  s.pre_stretch = 0.0;
  const auto g = build_icosahedron(s);
  for (const Member& m : g.members) {
    const double len = (g.nodes[m.endpoints[1]].position - g.nodes[m.endpoints[0]].position).norm();
    if (m.kind == MemberKind::cable) {
      EXPECT_NEAR(len, 0.0475, 1e-5);
      EXPECT_DOUBLE_EQ(m.rest_length, len);
    }
  }
}

TEST(Build, DefaultStrutLength) { EXPECT_NEAR(default_strut_length(), kL, 1e-15); }

TEST(Build, BoundingBoxHeight) {
  ModuleSpec s;
  s.strut_length = 0.07757;
  const auto g = build_icosahedron(s);
  for (int k = 0; k < 3; ++k) {
    double lo = 1e9, hi = -1e9;
    for (const Node& n : g.nodes) lo = std::min(lo, n.position[k]), hi = std::max(hi, n.position[k]);
    EXPECT_NEAR(hi - lo, 0.07757, 1e-12);
    EXPECT_NEAR(hi - lo, 0.078, 0.01 * 0.078);
  }
}

TEST(Build, NodesAreCyclicPermutations) {
  const auto g = build_icosahedron({});
  std::set<std::array<long, 3>> expect, got;
  const double q = kL / 4;
  for (int sa : {-1, 1})
    for (int sb : {-1, 1})
      for (int r = 0; r < 3; ++r) {
        std::array<double, 3> v{sa * 2 * q, sb * q, 0.0};
        std::array<long, 3> key{};
        for (int k = 0; k < 3; ++k) key[(k + r) % 3] = std::lround(v[k] / q);
        expect.insert(key);
      }
  for (const Node& n : g.nodes)
    got.insert({std::lround(n.position.x() / q), std::lround(n.position.y() / q),
                std::lround(n.position.z() / q)});
  EXPECT_EQ(got, expect);
  for (const Node& n : g.nodes)
    for (int k = 0; k < 3; ++k)
      EXPECT_NEAR(n.position[k], std::lround(n.position[k] / q) * q, 1e-15);
}

TEST(Build, LabelsFollowStrutLetters) {
  const auto g = build_icosahedron({});
  for (const Member& m : g.members) {
    if (m.kind != MemberKind::strut) continue;
    const auto& a = g.nodes[m.endpoints[0]].label;
    const auto& b = g.nodes[m.endpoints[1]].label;
    EXPECT_EQ(a[0], b[0]);
    EXPECT_EQ(a.substr(1) + b.substr(1), "12");
  }
  EXPECT_EQ(g.nodes[0].label, "A1");
  EXPECT_EQ(g.nodes[11].label, "F2");
}

TEST(Build, PreStretchProperty) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> P(0.0, 0.6), Ls(0.02, 0.3), T(0.5e-3, 3e-3);
  for (int trial = 0; trial < 50; ++trial) {
    ModuleSpec s;
    s.pre_stretch = P(rng);
    s.strut_length = Ls(rng);
    s.cable_section.thickness = T(rng);
    s.with_actuator = trial % 2 == 0;
    const auto g = build_icosahedron(s);
    EXPECT_TRUE(validate(g).ok()) << trial;
    for (const Member& m : g.members) {
      if (m.kind != MemberKind::cable) continue;
      const double len = (g.nodes[m.endpoints[1]].position - g.nodes[m.endpoints[0]].position).norm();
      EXPECT_NEAR(len / s.strut_length, std::sqrt(6.0) / 4, 1e-9);
      EXPECT_NEAR(len, m.rest_length * (1 + s.pre_stretch), 1e-15);
      EXPECT_DOUBLE_EQ(m.axial_stiffness, s.cable_modulus * s.cable_section.thickness * 1e-3);
    }
  }
}

TEST(Build, InvalidSpecListsBounds) {
  ModuleSpec s;
  s.pre_stretch = 0.9;
  s.strut_length = -1;
  try {
    build_icosahedron(s);
    FAIL();
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("pre_stretch"), std::string::npos);
    EXPECT_NE(what.find("0.65"), std::string::npos);
    EXPECT_NE(what.find("strut_length"), std::string::npos);
  }
  s = {};
  s.cable_section.width = 0;
  EXPECT_THROW(build_icosahedron(s), ValidationError);
  EXPECT_TRUE(check_spec({}).empty());
}

TEST(Build, Actuator) {
  ModuleSpec s;
  s.with_actuator = true;
  const auto g = build_icosahedron(s);
  ASSERT_EQ(g.nodes.size(), 13u);
  const Module& m = g.modules[0];
  ASSERT_TRUE(m.hub.has_value());
  EXPECT_TRUE(g.nodes[*m.hub].position.isZero());
  EXPECT_EQ(m.tendons.size(), 6u);
  EXPECT_EQ(count_kind(g, MemberKind::tendon), 6);
  std::set<int> ends;
  for (int t : m.tendons) {
    const Member& mem = g.members[t];
    EXPECT_EQ(mem.endpoints[0], *m.hub);
    ends.insert(mem.endpoints[1]);
    EXPECT_NEAR(mem.rest_length, g.nodes[mem.endpoints[1]].position.norm(), 1e-15);
  }
  std::set<int> face_nodes;
  for (int f : g.face_pair(0, *m.actuated_pair))
    for (int n : g.faces[f].nodes) face_nodes.insert(n);
  EXPECT_EQ(ends, face_nodes);
  EXPECT_TRUE(validate(g).ok());
}

TEST(Directions, AnalyticNormals) {
  const auto g = build_icosahedron({});
  const auto d = collapsibility_directions(g);
  ASSERT_EQ(d.size(), 4u);
  const double r = 1 / std::sqrt(3.0);
  double sign_product = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(d[i].norm(), 1.0, 1e-12);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(std::abs(d[i][k]), r, 1e-12);
    const double p = d[i].x() * d[i].y() * d[i].z();
    if (i == 0) sign_product = p;
    EXPECT_NEAR(p, sign_product, 1e-12);
    for (std::size_t j = 0; j < i; ++j) EXPECT_LT(std::abs(d[i].dot(d[j])), 1 - 1e-3);
  }
  // Each direction is normal to both faces of its pair.
  for (int k = 0; k < 4; ++k)
    for (int f : g.face_pair(0, k)) {
      const auto& t = g.faces[f].nodes;
      const Vec3 a = g.nodes[t[0]].position, b = g.nodes[t[1]].position, c = g.nodes[t[2]].position;
      EXPECT_NEAR((b - a).dot(d[k]), 0.0, 1e-9 * kL);
      EXPECT_NEAR((c - a).dot(d[k]), 0.0, 1e-9 * kL);
    }
}

TEST(Directions, RotationEquivariance) {
  const auto g = build_icosahedron({});
  const Mat3 R = Eigen::AngleAxisd(0.7, Vec3(1, 2, -0.5).normalized()).toRotationMatrix();
  const auto d0 = collapsibility_directions(g);
  const auto d1 = collapsibility_directions(transformed(g, R, Vec3(0.1, -0.2, 0.3)));
  for (int k = 0; k < 4; ++k) EXPECT_LT((d1[k] - R * d0[k]).norm(), 1e-12);
}

TEST(Directions, MissingFacesIsStructureError) {
  auto g = build_icosahedron({});
  g.modules[0].faces.resize(6);
  EXPECT_THROW(collapsibility_directions(g), StructureError);
}

TEST(Faces, OutwardAndEquilateral) {
  const auto g = build_icosahedron({});
  const Vec3 c = module_centroid(g, 0);
  for (const Face& f : g.faces) {
    const Vec3 a = g.nodes[f.nodes[0]].position, b = g.nodes[f.nodes[1]].position,
               e = g.nodes[f.nodes[2]].position;
    EXPECT_GT((b - a).cross(e - a).dot((a + b + e) / 3 - c), 0);
    EXPECT_NEAR((b - a).norm(), kL * std::sqrt(6.0) / 4, 1e-12);
    EXPECT_NEAR((e - b).norm(), kL * std::sqrt(6.0) / 4, 1e-12);
    EXPECT_NEAR((a - e).norm(), kL * std::sqrt(6.0) / 4, 1e-12);
  }
}

TEST(Cavity, Examples) {
  const auto g = build_icosahedron({});
  EXPECT_TRUE(inner_cavity_clearance(g, 0.0));
  EXPECT_TRUE(inner_cavity_clearance(g, kL / 4));
  EXPECT_FALSE(inner_cavity_clearance(g, 2 * kL));
}

TEST(Cavity, AgreesWithSampling) {
  const auto g = build_icosahedron({});
  for (double f : {0.1, 0.25, 0.3, 0.4, 0.45, 0.55, 0.6, 0.8, 1.0})
    EXPECT_EQ(inner_cavity_clearance(g, f * kL), sampled_cavity_clear(g, f * kL)) << f;
}

TEST(Latch, TwoModulesGive21Particles) {
  const auto g = place_chain({}, 2);
  const auto l = latch(g, 0, 0, 1, 1);
  EXPECT_EQ(l.welds.size(), 3u);
  EXPECT_EQ(l.nodes.size(), 24u);
  EXPECT_EQ(make_particles(l).size(), 21);
  for (const Weld& w : l.welds) {
    EXPECT_LT(w.a, 12);
    EXPECT_GE(w.b, 12);
    EXPECT_LT((l.nodes[w.a].position - l.nodes[w.b].position).norm(), 1e-12);
  }
  EXPECT_TRUE(validate(l).ok());
}

TEST(Latch, Commutative) {
  const auto g = place_chain({}, 2);
  EXPECT_EQ(latch(g, 0, 0, 1, 1).welds, latch(g, 1, 1, 0, 0).welds);
}

TEST(Latch, Errors) {
  const auto g = place_chain({}, 2);
  EXPECT_THROW(latch(g, 0, 0, 0, 1), StructureError);
  // Far faces are outside the capture radius.
  EXPECT_THROW(latch(g, 0, 1, 1, 0), LatchError);
  auto moved = g;
  for (int i = 12; i < 24; ++i) moved.nodes[i].position.x() += 0.2 * kL;
  EXPECT_THROW(latch(moved, 0, 0, 1, 1), LatchError);
  LatchOptions wide;
  wide.capture_fraction = 0.5;
  EXPECT_NO_THROW(latch(moved, 0, 0, 1, 1, wide));
}

TEST(Latch, WeldedParticleMassIsSummed) {
  ModuleSpec s;
  s.node_mass = 0.004;
  const auto l = latch(place_chain(s, 2), 0, 0, 1, 1);
  const auto pm = make_particles(l);
  double total = 0;
  for (double m : pm.mass) total += m;
  EXPECT_NEAR(total, 24 * 0.004, 1e-15);
  for (const Weld& w : l.welds) EXPECT_DOUBLE_EQ(pm.mass[pm.particle_of_node[w.a]], 0.008);
}

TEST(Chain, ThreeModules) {
  const auto g = build_chain({}, 3);
  EXPECT_EQ(g.nodes.size(), 36u);
  EXPECT_EQ(g.welds.size(), 6u);
  EXPECT_EQ(components(g), 1);
  EXPECT_TRUE(validate(g).ok());
  double zmin = 1e9;
  for (const Node& n : g.nodes) zmin = std::min(zmin, n.position.z());
  EXPECT_NEAR(zmin, 0.0, 1e-15);
  // Actuated axes point along +x.
  for (int m = 0; m < 3; ++m) {
    const auto d = collapsibility_directions(g, m);
    EXPECT_NEAR(std::abs(d[0].x()), 1.0, 1e-12);
  }
  // Module centroids advance along +x by twice the face offset.
  const double h = kL * std::sqrt(3.0) / 4;
  for (int m = 1; m < 3; ++m)
    EXPECT_NEAR(module_centroid(g, m).x() - module_centroid(g, m - 1).x(), 2 * h, 1e-12);
}

TEST(Validate, FreshBuildPasses) {
  const auto r = validate(build_icosahedron({}));
  EXPECT_TRUE(r.ok());
  ASSERT_EQ(r.modules.size(), 1u);
  EXPECT_EQ(r.modules[0].cables, 24);
  EXPECT_EQ(r.modules[0].struts, 6);
}

TEST(Validate, DeletedCable) {
  auto g = build_icosahedron({});
  auto it = std::find_if(g.members.begin(), g.members.end(),
                         [](const Member& m) { return m.kind == MemberKind::cable; });
  g.members.erase(it);
  const auto r = validate(g);
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.modules[0].cables, 23);
  EXPECT_EQ(r.modules[0].valence_violations.size(), 2u);
  std::string all;
  for (const auto& v : r.violations) all += v + "\n";
  EXPECT_NE(all.find("cables=23"), std::string::npos) << all;
  EXPECT_NE(all.find("node valence violation at 2 nodes"), std::string::npos) << all;
}

TEST(Validate, SharedStrutNode) {
  auto g = build_icosahedron({});
  for (Member& m : g.members)
    if (m.kind == MemberKind::strut && m.endpoints[0] == 2) m.endpoints[0] = 0;
  const auto r = validate(g);
  EXPECT_FALSE(r.modules[0].struts_disjoint);
  std::string all;
  for (const auto& v : r.violations) all += v + "\n";
  EXPECT_NE(all.find("strut-disjointness"), std::string::npos) << all;
}

TEST(Validate, NonUniformCables) {
  auto g = build_icosahedron({});
  for (Member& m : g.members)
    if (m.kind == MemberKind::cable) {
      m.rest_length *= 1.1;
      break;
    }
  EXPECT_FALSE(validate(g).modules[0].cable_lengths_uniform);
}

TEST(MemberKind, RoundTrip) {
  for (auto k : {MemberKind::strut, MemberKind::cable, MemberKind::tendon, MemberKind::link})
    EXPECT_EQ(member_kind_from_string(to_string(k)), k);
  EXPECT_THROW(member_kind_from_string("rope"), ValidationError);
}
