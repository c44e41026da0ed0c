#include "tenseg/core.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace tenseg {

namespace {

constexpr double kSqrt6 = 2.449489742783178;
constexpr double kSqrt3 = 1.7320508075688772;

// Representative outward normals of the four face pairs (product of signs +1).
const std::array<Vec3, 4> kPairSigns = {Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1),
                                        Vec3(-1, -1, 1)};

std::vector<int> module_of_nodes(const TensegrityGraph& g) {
  std::vector<int> owner(g.nodes.size(), -1);
  for (const auto& m : g.modules)
    for (int n : m.nodes) owner[n] = m.id;
  return owner;
}

Vec3 face_normal(const TensegrityGraph& g, const Face& f) {
  const Vec3& a = g.nodes[f.nodes[0]].position;
  const Vec3& b = g.nodes[f.nodes[1]].position;
  const Vec3& c = g.nodes[f.nodes[2]].position;
  return (b - a).cross(c - a).normalized();
}

// Slab test of segment p0-p1 against the closed box [lo, hi].
bool segment_hits_box(const Vec3& p0, const Vec3& p1, const Vec3& lo, const Vec3& hi) {
  double t0 = 0.0, t1 = 1.0;
  const Vec3 d = p1 - p0;
  for (int k = 0; k < 3; ++k) {
    if (std::abs(d[k]) < 1e-300) {
      if (p0[k] < lo[k] || p0[k] > hi[k]) return false;
      continue;
    }
    double a = (lo[k] - p0[k]) / d[k];
    double b = (hi[k] - p0[k]) / d[k];
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace

double default_strut_length() { return 4.0 * kDefaultCableLength / kSqrt6; }

const char* to_string(MemberKind kind) {
  switch (kind) {
    case MemberKind::strut: return "strut";
    case MemberKind::cable: return "cable";
    case MemberKind::tendon: return "tendon";
    case MemberKind::link: return "link";
  }
  return "?";
}

MemberKind member_kind_from_string(const std::string& s) {
  if (s == "strut") return MemberKind::strut;
  if (s == "cable") return MemberKind::cable;
  if (s == "tendon") return MemberKind::tendon;
  if (s == "link") return MemberKind::link;
  throw ValidationError("unknown member kind '" + s + "'");
}

std::vector<Vec3> TensegrityGraph::positions() const {
  std::vector<Vec3> p;
  p.reserve(nodes.size());
  for (const auto& n : nodes) p.push_back(n.position);
  return p;
}

void TensegrityGraph::set_positions(std::span<const Vec3> p) {
  if (p.size() != nodes.size()) throw ValidationError("position count does not match node count");
  for (std::size_t i = 0; i < p.size(); ++i) nodes[i].position = p[i];
}

const Module& TensegrityGraph::module(int id) const {
  if (id < 0 || id >= static_cast<int>(modules.size()))
    throw StructureError("no module " + std::to_string(id));
  return modules[id];
}

std::array<int, 2> TensegrityGraph::face_pair(int module_id, int pair) const {
  const Module& m = module(module_id);
  if (m.faces.size() != 8 || pair < 0 || pair > 3)
    throw StructureError("module " + std::to_string(module_id) + " has no face pair " +
                         std::to_string(pair));
  return {m.faces[2 * pair], m.faces[2 * pair + 1]};
}

std::vector<std::string> check_spec(const ModuleSpec& s) {
  std::vector<std::string> v;
  auto bad = [&](const std::string& field, double value, const std::string& bound) {
    std::ostringstream os;
    os << "ModuleSpec." << field << " = " << value << " violates " << bound;
    v.push_back(os.str());
  };
  if (!(s.strut_length > 0)) bad("strut_length", s.strut_length, "strut_length > 0");
  if (!(s.pre_stretch >= 0 && s.pre_stretch < kMaxPreStretch))
    bad("pre_stretch", s.pre_stretch, "0 <= pre_stretch < 0.65");
  if (!(s.cable_section.thickness > 0))
    bad("cable_thickness", s.cable_section.thickness, "cable_thickness > 0");
  if (!(s.cable_section.width > 0)) bad("cable_width", s.cable_section.width, "cable_width > 0");
  if (!(s.cable_modulus > 0)) bad("cable_modulus", s.cable_modulus, "cable_modulus > 0");
  if (!(s.node_mass > 0)) bad("node_mass", s.node_mass, "node_mass > 0");
  if (!(s.pulley_radius > 0)) bad("pulley_radius", s.pulley_radius, "pulley_radius > 0");
  if (s.tendon_stiffness && !(*s.tendon_stiffness >= 0))
    bad("tendon_stiffness", *s.tendon_stiffness, "tendon_stiffness >= 0");
  if (!(s.cable_damping >= 0)) bad("cable_damping", s.cable_damping, "cable_damping >= 0");
  return v;
}

TensegrityGraph build_icosahedron(const ModuleSpec& spec) {
  if (auto v = check_spec(spec); !v.empty()) {
    std::string msg = "invalid module spec:";
    for (const auto& e : v) msg += "\n  " + e;
    throw ValidationError(msg);
  }
  const double L = spec.strut_length;
  const double a = L / 2.0, b = L / 4.0;

  TensegrityGraph g;
  // Strut k: pair (k/2) is parallel to axis k/2; the sign of the offset
  // alternates within the pair.
  const std::array<std::array<Vec3, 2>, 6> ends = {{
      {Vec3(a, b, 0), Vec3(-a, b, 0)},
      {Vec3(a, -b, 0), Vec3(-a, -b, 0)},
      {Vec3(0, a, b), Vec3(0, -a, b)},
      {Vec3(0, a, -b), Vec3(0, -a, -b)},
      {Vec3(b, 0, a), Vec3(b, 0, -a)},
      {Vec3(-b, 0, a), Vec3(-b, 0, -a)},
  }};
  for (int k = 0; k < 6; ++k) {
    for (int e = 0; e < 2; ++e) {
      Node n;
      n.id = 2 * k + e;
      n.position = ends[k][e];
      n.mass = spec.node_mass;
      n.label = std::string(1, static_cast<char>('A' + k)) + std::to_string(e + 1);
      g.nodes.push_back(n);
    }
  }
  for (int k = 0; k < 6; ++k) {
    Member m;
    m.kind = MemberKind::strut;
    m.endpoints = {2 * k, 2 * k + 1};
    m.rest_length = L;
    g.members.push_back(m);
  }

  const double cable_len = L * kSqrt6 / 4.0;
  const double k_cable = spec.cable_stiffness();
  for (int i = 0; i < 12; ++i) {
    for (int j = i + 1; j < 12; ++j) {
      const double d = (g.nodes[i].position - g.nodes[j].position).norm();
      if (std::abs(d - cable_len) <= 1e-9 * L) {
        Member m;
        m.kind = MemberKind::cable;
        m.endpoints = {i, j};
        m.rest_length = cable_len / (1.0 + spec.pre_stretch);
        m.axial_stiffness = k_cable;
        m.damping = spec.cable_damping;
        m.section = spec.cable_section;
        g.members.push_back(m);
      }
    }
  }

  Module mod;
  mod.id = 0;
  mod.strut_length = L;
  mod.pulley_radius = spec.pulley_radius;
  for (int i = 0; i < 12; ++i) mod.nodes.push_back(i);

  // Each face is the 3 nodes maximizing s.x for a sign vector s.
  for (int k = 0; k < 4; ++k) {
    for (int side = 0; side < 2; ++side) {
      const Vec3 s = side == 0 ? kPairSigns[k] : Vec3(-kPairSigns[k]);
      std::vector<int> idx(12);
      std::iota(idx.begin(), idx.end(), 0);
      std::sort(idx.begin(), idx.end(), [&](int x, int y) {
        const double px = s.dot(g.nodes[x].position), py = s.dot(g.nodes[y].position);
        return px != py ? px > py : x < y;
      });
      std::array<int, 3> tri{idx[0], idx[1], idx[2]};
      std::sort(tri.begin(), tri.end());
      Face f{tri, 0, k};
      if (face_normal(g, f).dot(s) < 0) std::swap(f.nodes[1], f.nodes[2]);
      mod.faces.push_back(static_cast<int>(g.faces.size()));
      g.faces.push_back(f);
    }
  }

  if (spec.with_actuator) {
    Node hub;
    hub.id = 12;
    hub.position = Vec3::Zero();
    hub.mass = spec.node_mass;
    hub.label = "H";
    g.nodes.push_back(hub);
    mod.nodes.push_back(12);
    mod.hub = 12;
    mod.actuated_pair = 0;
    const double k_tendon = spec.effective_tendon_stiffness();
    for (int fi : {mod.faces[0], mod.faces[1]}) {
      for (int v : g.faces[fi].nodes) {
        Member t;
        t.kind = MemberKind::tendon;
        t.endpoints = {12, v};
        t.rest_length = g.nodes[v].position.norm();
        t.axial_stiffness = k_tendon;
        t.damping = spec.cable_damping;
        mod.tendons.push_back(static_cast<int>(g.members.size()));
        g.members.push_back(t);
      }
    }
    // Servo strut mount: two rigid links from the hub to the ends of strut A.
    for (int v : {0, 1}) {
      Member l;
      l.kind = MemberKind::link;
      l.endpoints = {12, v};
      l.rest_length = g.nodes[v].position.norm();
      g.members.push_back(l);
    }
  }
  g.modules.push_back(std::move(mod));
  return g;
}

Vec3 module_centroid(const TensegrityGraph& g, int module_id) {
  const Module& m = g.module(module_id);
  Vec3 c = Vec3::Zero();
  int n = 0;
  for (int i : m.nodes) {
    if (m.hub && i == *m.hub) continue;
    c += g.nodes[i].position;
    ++n;
  }
  return n ? Vec3(c / n) : c;
}

std::vector<Vec3> collapsibility_directions(const TensegrityGraph& g, int module_id) {
  const Module& m = g.module(module_id);
  if (m.faces.size() != 8)
    throw StructureError("module " + std::to_string(module_id) + " lacks 4 face pairs");
  std::vector<Vec3> out;
  for (int k = 0; k < 4; ++k) out.push_back(face_normal(g, g.faces[m.faces[2 * k]]));
  return out;
}

bool inner_cavity_clearance(const TensegrityGraph& g, double cube_edge, int module_id) {
  if (cube_edge <= 0) return true;
  const Module& m = g.module(module_id);
  const Vec3 c = module_centroid(g, module_id);
  const Vec3 h = Vec3::Constant(cube_edge / 2.0);
  std::set<int> in_module(m.nodes.begin(), m.nodes.end());
  for (const auto& mem : g.members) {
    if (mem.kind != MemberKind::strut && mem.kind != MemberKind::cable) continue;
    if (!in_module.count(mem.endpoints[0]) || !in_module.count(mem.endpoints[1])) continue;
    if (segment_hits_box(g.nodes[mem.endpoints[0]].position, g.nodes[mem.endpoints[1]].position,
                         c - h, c + h))
      return false;
  }
  return true;
}

TensegrityGraph transformed(const TensegrityGraph& g, const Mat3& R, const Vec3& t) {
  TensegrityGraph out = g;
  for (auto& n : out.nodes) n.position = R * n.position + t;
  if (R.determinant() < 0)
    for (auto& f : out.faces) std::swap(f.nodes[1], f.nodes[2]);
  return out;
}

TensegrityGraph resting_on_face(const TensegrityGraph& g, int face) {
  if (face < 0 || face >= static_cast<int>(g.faces.size()))
    throw ValidationError("resting_on_face: no face " + std::to_string(face));
  const auto& v = g.faces[face].nodes;
  const Vec3 a = g.nodes[v[0]].position, b = g.nodes[v[1]].position, c = g.nodes[v[2]].position;
  const Vec3 n = (b - a).cross(c - a).normalized();
  const Mat3 R = Eigen::Quaterniond::FromTwoVectors(n, -Vec3::UnitZ()).toRotationMatrix();
  double zmin = 1e300;
  for (const auto& node : g.nodes) zmin = std::min(zmin, (R * node.position).z());
  return transformed(g, R, Vec3(0, 0, -zmin));
}

TensegrityGraph assemble(std::span<const TensegrityGraph> parts) {
  TensegrityGraph out;
  for (const auto& p : parts) {
    const int node_off = static_cast<int>(out.nodes.size());
    const int mem_off = static_cast<int>(out.members.size());
    const int face_off = static_cast<int>(out.faces.size());
    const int mod_off = static_cast<int>(out.modules.size());
    for (auto n : p.nodes) {
      n.id += node_off;
      out.nodes.push_back(std::move(n));
    }
    for (auto m : p.members) {
      m.endpoints[0] += node_off;
      m.endpoints[1] += node_off;
      out.members.push_back(m);
    }
    for (auto f : p.faces) {
      for (int& v : f.nodes) v += node_off;
      f.module += mod_off;
      out.faces.push_back(f);
    }
    for (auto w : p.welds) out.welds.push_back({w.a + node_off, w.b + node_off});
    for (auto m : p.modules) {
      m.id += mod_off;
      for (int& v : m.nodes) v += node_off;
      for (int& f : m.faces) f += face_off;
      for (int& t : m.tendons) t += mem_off;
      if (m.hub) *m.hub += node_off;
      out.modules.push_back(std::move(m));
    }
  }
  return out;
}

TensegrityGraph place_chain(const ModuleSpec& spec, int n_modules, const ChainOptions& opt) {
  if (n_modules < 1) throw ValidationError("chain needs at least one module");
  const TensegrityGraph base = build_icosahedron(spec);
  const Vec3 axis = kPairSigns[0].normalized();
  const double h = spec.strut_length * kSqrt3 / 4.0;
  const Mat3 half_turn = 2.0 * axis * axis.transpose() - Mat3::Identity();
  // Reflection in the plane through the axis and one vertex of face 0. It
  // maps both faces of pair 0 onto themselves as point sets.
  const Vec3 v0 = base.nodes[base.faces[base.modules[0].faces[0]].nodes[0]].position;
  const Vec3 m = axis.cross(v0).normalized();
  const Mat3 mirror = Mat3::Identity() - 2.0 * m * m.transpose();

  std::vector<TensegrityGraph> parts;
  Mat3 R = Mat3::Identity();
  for (int i = 0; i < n_modules; ++i) {
    const Mat3 Ri = opt.alternate_handedness && i % 2 == 1 ? Mat3(R * mirror) : R;
    parts.push_back(transformed(base, Ri, 2.0 * h * i * axis));
    R = half_turn * R;
  }
  TensegrityGraph g = assemble(parts);

  // Axis -> +x, then roll about x so two equatorial nodes share the lowest z.
  const Mat3 to_x = Eigen::Quaterniond::FromTwoVectors(axis, Vec3::UnitX()).toRotationMatrix();
  const Face& f0 = base.faces[base.modules[0].faces[0]];
  const Face& f1 = base.faces[base.modules[0].faces[1]];
  int equator = -1;
  for (int i = 0; i < 12 && equator < 0; ++i)
    if (std::find(f0.nodes.begin(), f0.nodes.end(), i) == f0.nodes.end() &&
        std::find(f1.nodes.begin(), f1.nodes.end(), i) == f1.nodes.end())
      equator = i;
  const Vec3 e = to_x * base.nodes[equator].position;
  const double phi = std::atan2(e.z(), e.y());
  // Equatorial nodes sit every 60 degrees; put node `equator` at -60 degrees.
  const double pi = std::acos(-1.0);
  const Mat3 roll = Eigen::AngleAxisd(-pi / 3.0 - phi, Vec3::UnitX()).toRotationMatrix();
  g = transformed(g, roll * to_x, Vec3::Zero());

  double zmin = 1e300;
  for (const auto& n : g.nodes) zmin = std::min(zmin, n.position.z());
  return transformed(g, Mat3::Identity(), Vec3(0, 0, -zmin));
}

TensegrityGraph latch(const TensegrityGraph& g, int module_a, int face_a, int module_b,
                      int face_b, const LatchOptions& opt) {
  const Module& ma = g.module(module_a);
  const Module& mb = g.module(module_b);
  if (module_a == module_b) throw StructureError("cannot latch module " + std::to_string(module_a) + " to itself");
  if (face_a < 0 || face_a >= static_cast<int>(ma.faces.size()) || face_b < 0 ||
      face_b >= static_cast<int>(mb.faces.size()))
    throw StructureError("latch face index out of range");
  const auto& va = g.faces[ma.faces[face_a]].nodes;
  const auto& vb = g.faces[mb.faces[face_b]].nodes;
  const double capture = opt.capture_fraction * std::min(ma.strut_length, mb.strut_length);

  auto nearest = [&](int from, const std::array<int, 3>& to) {
    int best = to[0];
    double bd = 1e300;
    for (int t : to) {
      const double d = (g.nodes[from].position - g.nodes[t].position).norm();
      if (d < bd) bd = d, best = t;
    }
    return std::pair{best, bd};
  };

  TensegrityGraph out = g;
  std::set<Weld> welds(out.welds.begin(), out.welds.end());
  for (int a : va) {
    auto [b, d] = nearest(a, vb);
    if (nearest(b, va).first != a)
      throw LatchError("vertices " + std::to_string(a) + " and " + std::to_string(b) +
                       " are not mutually nearest");
    if (d > capture) {
      std::ostringstream os;
      os << "vertex " << a << " is " << d << " m from its partner " << b
         << ", beyond the capture distance " << capture << " m";
      throw LatchError(os.str());
    }
    welds.insert({std::min(a, b), std::max(a, b)});
  }
  out.welds.assign(welds.begin(), welds.end());
  return out;
}

TensegrityGraph build_chain(const ModuleSpec& spec, int n_modules, const ChainOptions& opt) {
  TensegrityGraph g = place_chain(spec, n_modules, opt);
  for (int i = 0; i + 1 < n_modules; ++i) g = latch(g, i, 0, i + 1, 1);
  return g;
}

ParticleMap make_particles(const TensegrityGraph& g) {
  const int n = static_cast<int>(g.nodes.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& w : g.welds) {
    const int ra = find(w.a), rb = find(w.b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  ParticleMap pm;
  pm.particle_of_node.assign(n, -1);
  std::map<int, int> root_to_particle;
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    auto [it, inserted] = root_to_particle.emplace(r, pm.size());
    if (inserted) {
      pm.nodes_of_particle.emplace_back();
      pm.mass.push_back(0.0);
    }
    pm.particle_of_node[i] = it->second;
    pm.nodes_of_particle[it->second].push_back(i);
    pm.mass[it->second] += g.nodes[i].mass;
  }
  return pm;
}

ValidationReport validate(const TensegrityGraph& g) {
  ValidationReport rep;
  const int n = static_cast<int>(g.nodes.size());
  for (int i = 0; i < n; ++i) {
    if (g.nodes[i].id != i) rep.violations.push_back("node " + std::to_string(i) + " has id " + std::to_string(g.nodes[i].id));
    if (!(g.nodes[i].mass > 0)) rep.violations.push_back("node " + std::to_string(i) + " has non-positive mass");
  }
  for (std::size_t k = 0; k < g.members.size(); ++k) {
    const auto& m = g.members[k];
    const auto [a, b] = m.endpoints;
    if (a < 0 || b < 0 || a >= n || b >= n || a == b)
      rep.violations.push_back("member " + std::to_string(k) + " has invalid endpoints");
    if (!(m.rest_length > 0)) rep.violations.push_back("member " + std::to_string(k) + " has non-positive rest length");
    if (!(m.axial_stiffness >= 0)) rep.violations.push_back("member " + std::to_string(k) + " has negative stiffness");
  }
  const auto owner = module_of_nodes(g);
  for (const auto& w : g.welds) {
    if (w.a < 0 || w.b < 0 || w.a >= n || w.b >= n) {
      rep.violations.push_back("weld references a missing node");
      continue;
    }
    if (owner[w.a] == owner[w.b])
      rep.violations.push_back("weld " + std::to_string(w.a) + "-" + std::to_string(w.b) + " joins nodes of the same module");
  }

  for (const auto& mod : g.modules) {
    ModuleReport r;
    r.module = mod.id;
    const std::string tag = "module " + std::to_string(mod.id) + ": ";
    std::map<int, std::pair<int, int>> valence;  // node -> (struts, cables)
    for (int v : mod.nodes)
      if (!(mod.hub && v == *mod.hub)) valence[v] = {0, 0};
    r.nodes = static_cast<int>(valence.size());
    std::vector<double> cable_rest;
    for (const auto& m : g.members) {
      const auto [a, b] = m.endpoints;
      if (a < 0 || b < 0 || a >= n || b >= n) continue;
      if (owner[a] != mod.id || owner[b] != mod.id) continue;
      switch (m.kind) {
        case MemberKind::strut:
          ++r.struts;
          if (valence.count(a)) ++valence[a].first;
          if (valence.count(b)) ++valence[b].first;
          break;
        case MemberKind::cable:
          ++r.cables;
          cable_rest.push_back(m.rest_length);
          if (valence.count(a)) ++valence[a].second;
          if (valence.count(b)) ++valence[b].second;
          break;
        case MemberKind::tendon: ++r.tendons; break;
        case MemberKind::link: break;
      }
    }
    for (const auto& [v, sc] : valence) {
      if (sc.first != 1 || sc.second != 4) r.valence_violations.push_back(v);
      if (sc.first > 1) r.struts_disjoint = false;
    }
    if (r.nodes != 12) rep.violations.push_back(tag + "nodes=" + std::to_string(r.nodes) + " (expected 12)");
    if (r.struts != 6) rep.violations.push_back(tag + "struts=" + std::to_string(r.struts) + " (expected 6)");
    if (r.cables != 24) rep.violations.push_back(tag + "cables=" + std::to_string(r.cables) + " (expected 24)");
    if (!r.valence_violations.empty())
      rep.violations.push_back(tag + "node valence violation at " +
                               std::to_string(r.valence_violations.size()) + " nodes");
    if (!r.struts_disjoint) rep.violations.push_back(tag + "strut-disjointness violation");

    if (mod.faces.size() != 8) {
      r.faces_parallel = false;
      rep.violations.push_back(tag + "faces=" + std::to_string(mod.faces.size()) + " (expected 8 in 4 pairs)");
    } else {
      for (int k = 0; k < 4; ++k) {
        const Vec3 n0 = face_normal(g, g.faces[mod.faces[2 * k]]);
        const Vec3 n1 = face_normal(g, g.faces[mod.faces[2 * k + 1]]);
        if ((n0 + n1).norm() > 1e-6) r.faces_parallel = false;
      }
      if (!r.faces_parallel) rep.violations.push_back(tag + "face pairs not parallel");
    }
    if (!cable_rest.empty()) {
      const auto [lo, hi] = std::minmax_element(cable_rest.begin(), cable_rest.end());
      if (*hi - *lo > 1e-9 * *hi) {
        r.cable_lengths_uniform = false;
        rep.violations.push_back(tag + "cable rest lengths not uniform");
      }
    }
    rep.modules.push_back(std::move(r));
  }
  return rep;
}

}  // namespace tenseg
