#include "tenseg/unfold.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace tenseg {

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec2 rotate(const Vec2& v, double a) {
  const double c = std::cos(a), s = std::sin(a);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

// Third corner of the equilateral triangle on p-q, on the side away from `away`.
Vec2 apex(const Vec2& p, const Vec2& q, const Vec2& away) {
  const Vec2 mid = 0.5 * (p + q);
  const Vec2 d = q - p;
  const Vec2 perp = Vec2(-d.y(), d.x()) * (std::sqrt(3.0) / 2.0);
  const Vec2 a = mid + perp, b = mid - perp;
  return (a - away).squaredNorm() > (b - away).squaredNorm() ? a : b;
}

const Module& module0(const TensegrityGraph& g) {
  if (g.modules.empty()) throw UnfoldError("graph has no modules");
  const Module& m = g.modules[0];
  if (m.faces.size() != 8) throw UnfoldError("module 0 does not have 8 cable triangles");
  return m;
}

std::string label_of(const TensegrityGraph& g, int n) {
  const std::string& l = g.nodes.at(n).label;
  return l.empty() ? "#" + std::to_string(n) : l;
}

// Cable triangles of module 0 and the node shared by each pair (-1 if none).
struct TriangleGraph {
  std::array<std::array<int, 3>, 8> nodes{};
  std::array<std::array<int, 8>, 8> shared{};
};

TriangleGraph triangle_graph(const TensegrityGraph& g, const Module& m) {
  TriangleGraph t;
  for (int i = 0; i < 8; ++i) t.nodes[i] = g.faces.at(m.faces[i]).nodes;
  std::map<int, std::vector<int>> tris_of;
  for (int i = 0; i < 8; ++i)
    for (int n : t.nodes[i]) tris_of[n].push_back(i);
  for (auto& row : t.shared) row.fill(-1);
  for (const auto& [n, tris] : tris_of) {
    if (tris.size() != 2)
      throw UnfoldError("node " + label_of(g, n) + " lies on " + std::to_string(tris.size()) +
                        " cable triangles, expected 2");
    t.shared[tris[0]][tris[1]] = t.shared[tris[1]][tris[0]] = n;
  }
  return t;
}

// Rings of four triangles, each consecutive pair sharing a node.
std::vector<std::array<int, 4>> rings(const TriangleGraph& t) {
  std::vector<std::array<int, 4>> out;
  for (int a = 0; a < 8; ++a)
    for (int b = a + 1; b < 8; ++b)
      for (int c = a + 1; c < 8; ++c)
        for (int d = b + 1; d < 8; ++d) {
          if (c == b || c == d) continue;
          if (t.shared[a][b] >= 0 && t.shared[b][c] >= 0 && t.shared[c][d] >= 0 && t.shared[d][a] >= 0)
            out.push_back({a, b, c, d});
        }
  return out;
}

std::array<int, 4> ring_nodes(const TriangleGraph& t, const std::array<int, 4>& r) {
  return {t.shared[r[0]][r[1]], t.shared[r[1]][r[2]], t.shared[r[2]][r[3]], t.shared[r[3]][r[0]]};
}

bool ring_has(const TriangleGraph& t, const std::array<int, 4>& r, int node) {
  const auto n = ring_nodes(t, r);
  return std::find(n.begin(), n.end(), node) != n.end();
}

bool ring_has_tri(const std::array<int, 4>& r, int tri) {
  return std::find(r.begin(), r.end(), tri) != r.end();
}

}  // namespace

std::array<int, 2> canonical_cut(const TensegrityGraph& g) {
  const Module& m = module0(g);
  int f1 = -1, f2 = -1;
  for (int n : m.nodes) {
    if (g.nodes[n].label == "F1") f1 = n;
    if (g.nodes[n].label == "F2") f2 = n;
  }
  if (f1 < 0 || f2 < 0) throw UnfoldError("module 0 has no nodes labelled F1 and F2");
  return {f1, f2};
}

PlanarLayout unfold_icosahedron(const TensegrityGraph& g) {
  return unfold_icosahedron(g, canonical_cut(g));
}

PlanarLayout unfold_icosahedron(const TensegrityGraph& g, std::array<int, 2> cut, const UnfoldOptions& opt) {
  if (!(opt.rod_diameter > 0 && opt.pin_diameter > 0 && opt.hole_diameter > 0))
    throw ValidationError("UnfoldOptions: diameters must be > 0");
  if (!(opt.pin_diameter > opt.hole_diameter))
    throw ValidationError("UnfoldOptions: pin_diameter must exceed hole_diameter");
  const Module& m = module0(g);
  const TriangleGraph t = triangle_graph(g, m);
  const auto [ca, cb] = cut;
  for (int n : cut)
    if (n < 0 || n >= static_cast<int>(g.nodes.size()) ||
        std::find(m.nodes.begin(), m.nodes.end(), n) == m.nodes.end() || (m.hub && n == *m.hub))
      throw UnfoldError("cut node " + std::to_string(n) + " is not a cable node of module 0");
  const std::string pair_name = label_of(g, ca) + "-" + label_of(g, cb);
  if (ca == cb) throw UnfoldError("cut " + pair_name + " names the same node twice");

  // Triangles must be congruent cable triangles.
  std::set<std::pair<int, int>> cables;
  for (const Member& mem : g.members)
    if (mem.kind == MemberKind::cable)
      cables.insert(std::minmax(mem.endpoints[0], mem.endpoints[1]));
  double c = 0.0;
  std::vector<double> lengths;
  for (const auto& tri : t.nodes)
    for (int k = 0; k < 3; ++k) {
      const int i = tri[k], j = tri[(k + 1) % 3];
      if (!cables.count(std::minmax(i, j)))
        throw UnfoldError("triangle edge " + label_of(g, i) + "-" + label_of(g, j) + " is not a cable");
      lengths.push_back((g.nodes[i].position - g.nodes[j].position).norm());
      c += lengths.back();
    }
  c /= static_cast<double>(lengths.size());
  for (double l : lengths)
    if (std::abs(l - c) > 1e-9 * c) throw UnfoldError("cable lengths differ; unfold needs the equal-cable design pose");

  const auto all = rings(t);
  const std::array<int, 4>* broken = nullptr;
  for (const auto& r : all) {
    const auto n = ring_nodes(t, r);
    for (int k = 0; k < 2; ++k)
      if ((n[k] == ca && n[k + 2] == cb) || (n[k] == cb && n[k + 2] == ca)) broken = &r;
  }
  if (!broken)
    throw UnfoldError("cut " + pair_name +
                      " does not admit the strip layout: the nodes are not on opposite sides of one triangle ring");
  std::vector<std::array<int, 4>> kept;
  for (const auto& r : all)
    if (!ring_has(t, r, ca) && !ring_has(t, r, cb)) kept.push_back(r);
  const std::array<int, 4>* middle = nullptr;
  std::vector<const std::array<int, 4>*> sides;
  for (const auto& r : kept) {
    bool disjoint = true;
    for (int tri : r) disjoint = disjoint && !ring_has_tri(*broken, tri);
    if (disjoint) middle = &r;
    else sides.push_back(&r);
  }
  if (kept.size() != 3 || !middle || sides.size() != 2)
    throw UnfoldError("cut " + pair_name + " leaves no strip of three rings");

  // Middle ring t0..t3 around a square hole; side ring 1 shares t0-t1, side
  // ring 2 shares t2-t3.
  std::array<int, 4> T{};
  {
    const auto& r = *middle;
    int start = -1;
    for (int k = 0; k < 4 && start < 0; ++k)
      if (ring_has(t, *sides[0], t.shared[r[k]][r[(k + 1) % 4]])) start = k;
    if (start < 0) throw UnfoldError("cut " + pair_name + ": side ring does not meet the middle ring");
    for (int k = 0; k < 4; ++k) T[k] = r[(start + k) % 4];
    if (!ring_has(t, *sides[1], t.shared[T[2]][T[3]]))
      throw UnfoldError("cut " + pair_name + ": side rings are not opposite");
  }
  auto other_neighbour = [&](const std::array<int, 4>& ring, int tri, int not_this) {
    for (int x : ring)
      if (x != tri && x != not_this && t.shared[tri][x] >= 0) return x;
    throw UnfoldError("cut " + pair_name + ": malformed ring");
  };
  const int u1 = other_neighbour(*sides[0], T[1], T[0]);
  const int u0 = other_neighbour(*sides[0], T[0], T[1]);
  const int v2 = other_neighbour(*sides[1], T[2], T[3]);
  const int v3 = other_neighbour(*sides[1], T[3], T[2]);

  const double h = c * std::sqrt(3.0) / 2.0;
  std::map<int, Vec2> joint;  // node -> point
  auto put = [&](int a, int b, const Vec2& p) { joint[t.shared[a][b]] = p; };
  put(T[3], T[0], Vec2(0, 0));
  put(T[0], T[1], Vec2(0, c));
  put(T[1], T[2], Vec2(c, c));
  put(T[2], T[3], Vec2(c, 0));
  const Vec2 a0(-h, c / 2), a1(c / 2, c + h), a2(c + h, c / 2), a3(c / 2, -h);
  put(T[0], u0, a0);
  put(T[1], u1, a1);
  put(T[2], v2, a2);
  put(T[3], v3, a3);
  const Vec2 x1 = a1 + a0 - Vec2(0, c), x2 = a2 + a3 - Vec2(c, 0);
  put(u0, u1, x1);
  put(v2, v3, x2);
  const Vec2 hole1 = 0.25 * (Vec2(0, c) + a0 + a1 + x1), hole2 = 0.25 * (Vec2(c, 0) + a2 + a3 + x2);
  std::map<int, Vec2> loose;  // outer triangle -> its cut corner
  loose[u1] = apex(a1, x1, hole1);
  loose[u0] = apex(a0, x1, hole1);
  loose[v2] = apex(a2, x2, hole2);
  loose[v3] = apex(a3, x2, hole2);
  if (joint.size() != 10) throw UnfoldError("cut " + pair_name + ": joint count " + std::to_string(joint.size()));

  std::array<std::array<Vec2, 3>, 8> corner{};
  for (int i = 0; i < 8; ++i)
    for (int k = 0; k < 3; ++k) {
      const int n = t.nodes[i][k];
      if (n == ca || n == cb) {
        if (!loose.count(i)) throw UnfoldError("cut " + pair_name + ": cut node on an inner triangle");
        corner[i][k] = loose[i];
      } else {
        corner[i][k] = joint.at(n);
      }
    }

  // Triangle 0, corner 0 at the origin; its first edge along +x.
  const Vec2 o = corner[0][0];
  const Vec2 e = corner[0][1] - o;
  const double ang = -std::atan2(e.y(), e.x());
  for (auto& tri : corner)
    for (Vec2& p : tri) p = rotate(p - o, ang);
  corner[0][0] = Vec2::Zero();
  corner[0][1].y() = 0.0;

  PlanarLayout out;
  out.cut = cut;
  out.housing_height = opt.housing_height;
  std::map<int, int> point_of_node;
  std::map<int, int> first_tri;
  for (int i = 0; i < 8; ++i) {
    LayoutTriangle lt;
    lt.face = m.faces[i];
    lt.nodes = t.nodes[i];
    for (int k = 0; k < 3; ++k) {
      const int n = t.nodes[i][k];
      const bool is_cut = n == ca || n == cb;
      if (!is_cut && point_of_node.count(n)) {
        lt.points[k] = point_of_node[n];
        const int j = first_tri[n];
        const auto& nj = t.nodes[j];
        const int kj = static_cast<int>(std::find(nj.begin(), nj.end(), n) - nj.begin());
        out.joints.push_back({j, kj, i, k});
        continue;
      }
      std::string label = label_of(g, n);
      if (is_cut) label += first_tri.count(n) ? "b" : "a";
      lt.points[k] = static_cast<int>(out.points.size());
      out.points.push_back(corner[i][k]);
      out.point_labels.push_back(label);
      out.point_nodes.push_back(n);
      if (!is_cut) point_of_node[n] = lt.points[k];
      first_tri.emplace(n, i);
    }
    out.triangles.push_back(lt);
  }

  // Pin and hole sit either side of the outward direction at each point.
  std::vector<Vec2> outward(out.points.size(), Vec2::Zero());
  for (const LayoutTriangle& lt : out.triangles) {
    Vec2 centroid = Vec2::Zero();
    for (int p : lt.points) centroid += out.points[p] / 3.0;
    for (int p : lt.points) outward[p] += out.points[p] - centroid;
  }
  const double reach = opt.rod_diameter / 2 + std::max(opt.pin_diameter, opt.hole_diameter) / 2 + 0.0005;
  for (std::size_t p = 0; p < out.points.size(); ++p) {
    const Vec2 u = outward[p].normalized();
    out.housings.push_back({out.points[p], opt.rod_diameter});
    out.latch_features.push_back({{out.points[p] + reach * rotate(u, kPi / 3.5), opt.pin_diameter},
                                  {out.points[p] + reach * rotate(u, -kPi / 3.5), opt.hole_diameter}});
  }

  std::set<std::string> anchors;
  for (int mi : m.tendons)
    for (int n : g.members.at(mi).endpoints)
      if (!m.hub || n != *m.hub) anchors.insert(label_of(g, n));
  out.tendon_anchors.assign(anchors.begin(), anchors.end());

  if (const auto bad = overlapping_triangles(out); !bad.empty()) {
    const auto [i, j] = bad.front();
    throw UnfoldError("cut " + pair_name + " forces overlap of triangles " + std::to_string(i) + " and " +
                      std::to_string(j));
  }
  return out;
}

std::vector<std::pair<int, int>> overlapping_triangles(const PlanarLayout& layout, double tol) {
  std::vector<std::pair<int, int>> out;
  const int n = static_cast<int>(layout.triangles.size());
  auto tri = [&](int i) {
    std::array<Vec2, 3> p;
    for (int k = 0; k < 3; ++k) p[k] = layout.points[layout.triangles[i].points[k]];
    return p;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const auto A = tri(i), B = tri(j);
      bool separated = false;
      for (const auto* P : {&A, &B}) {
        for (int k = 0; k < 3 && !separated; ++k) {
          const Vec2 d = (*P)[(k + 1) % 3] - (*P)[k];
          const Vec2 axis = Vec2(-d.y(), d.x()).normalized();
          double alo = 1e300, ahi = -1e300, blo = 1e300, bhi = -1e300;
          for (const Vec2& p : A) alo = std::min(alo, axis.dot(p)), ahi = std::max(ahi, axis.dot(p));
          for (const Vec2& p : B) blo = std::min(blo, axis.dot(p)), bhi = std::max(bhi, axis.dot(p));
          if (std::min(ahi, bhi) - std::max(alo, blo) <= tol) separated = true;
        }
      }
      if (!separated) out.emplace_back(i, j);
    }
  return out;
}

RefoldVerdict refold_check(const PlanarLayout& layout, const TensegrityGraph& g, bool merge_cut_copies) {
  RefoldVerdict v;
  const Module& m = module0(g);

  std::map<std::string, int> graph_node;
  for (int n : m.nodes)
    if (!m.hub || n != *m.hub) graph_node[label_of(g, n)] = n;
  auto base = [&](const std::string& l) {
    if (graph_node.count(l) || l.empty()) return l;
    const std::string b = l.substr(0, l.size() - 1);
    return graph_node.count(b) ? b : l;
  };

  // Layout vertices.
  std::vector<std::string> names;
  std::map<std::string, int> vertex;
  std::vector<int> vertex_of_point;
  for (const std::string& l : layout.point_labels) {
    const std::string name = merge_cut_copies ? base(l) : l;
    auto [it, fresh] = vertex.emplace(name, static_cast<int>(names.size()));
    if (fresh) names.push_back(name);
    vertex_of_point.push_back(it->second);
  }
  const int nv = static_cast<int>(names.size());
  std::set<std::pair<int, int>> edges;
  for (const LayoutTriangle& lt : layout.triangles)
    for (int k = 0; k < 3; ++k) {
      const int a = vertex_of_point.at(lt.points[k]), b = vertex_of_point.at(lt.points[(k + 1) % 3]);
      if (a == b) {
        v.messages.push_back("triangle edge collapses at " + names[a]);
        continue;
      }
      if (!edges.insert(std::minmax(a, b)).second)
        v.messages.push_back("edge " + names[a] + "-" + names[b] + " appears twice");
    }
  v.cables = static_cast<int>(edges.size());

  // Module cable graph by node.
  std::vector<int> gnodes;
  for (const auto& [l, n] : graph_node) gnodes.push_back(n);
  std::map<int, int> gidx;
  for (std::size_t i = 0; i < gnodes.size(); ++i) gidx[gnodes[i]] = static_cast<int>(i);
  const int ng = static_cast<int>(gnodes.size());
  std::vector<std::vector<char>> gadj(ng, std::vector<char>(ng, 0));
  std::vector<int> gdeg(ng, 0);
  int gcables = 0;
  for (const Member& mem : g.members) {
    if (mem.kind != MemberKind::cable) continue;
    const auto a = gidx.find(mem.endpoints[0]), b = gidx.find(mem.endpoints[1]);
    if (a == gidx.end() || b == gidx.end()) continue;
    gadj[a->second][b->second] = gadj[b->second][a->second] = 1;
    ++gdeg[a->second], ++gdeg[b->second];
    ++gcables;
  }

  std::vector<std::vector<char>> ladj(nv, std::vector<char>(nv, 0));
  std::vector<int> ldeg(nv, 0);
  for (const auto& [a, b] : edges) {
    ladj[a][b] = ladj[b][a] = 1;
    ++ldeg[a], ++ldeg[b];
    const auto ga = graph_node.find(base(names[a])), gb = graph_node.find(base(names[b]));
    if (ga != graph_node.end() && gb != graph_node.end() && gadj[gidx[ga->second]][gidx[gb->second]])
      ++v.cables_matched;
  }
  for (int i = 0; i < nv; ++i) {
    const auto it = graph_node.find(base(names[i]));
    const int want = it == graph_node.end() ? -1 : gdeg[gidx[it->second]];
    if (ldeg[i] != want)
      v.degree_defects.push_back(names[i] + ": degree " + std::to_string(ldeg[i]) + ", expected " +
                                 std::to_string(want));
  }

  for (char letter = 'A'; letter <= 'F'; ++letter) {
    const std::string l1 = std::string(1, letter) + "1", l2 = std::string(1, letter) + "2";
    bool present1 = false, present2 = false;
    for (const std::string& nm : names) {
      present1 = present1 || base(nm) == l1;
      present2 = present2 || base(nm) == l2;
    }
    if (!present1 || !present2 || !graph_node.count(l1) || !graph_node.count(l2)) continue;
    const int a = graph_node[l1], b = graph_node[l2];
    for (const Member& mem : g.members)
      if (mem.kind == MemberKind::strut && std::minmax(mem.endpoints[0], mem.endpoints[1]) == std::minmax(a, b)) {
        ++v.struts_matched;
        break;
      }
  }

  if (nv != ng || v.cables != gcables) {
    v.messages.push_back("layout has " + std::to_string(nv) + " nodes and " + std::to_string(v.cables) +
                         " cables, module has " + std::to_string(ng) + " and " + std::to_string(gcables));
    return v;
  }

  // Adjacency-preserving bijections; keep the one agreeing with most labels.
  std::vector<int> order;
  {
    std::vector<char> seen(nv, 0);
    for (int s = 0; s < nv; ++s) {
      if (seen[s]) continue;
      std::vector<int> q{s};
      seen[s] = 1;
      for (std::size_t h = 0; h < q.size(); ++h) {
        order.push_back(q[h]);
        for (int w = 0; w < nv; ++w)
          if (ladj[q[h]][w] && !seen[w]) seen[w] = 1, q.push_back(w);
      }
    }
  }
  std::vector<int> map(nv, -1), best;
  std::vector<char> used(ng, 0);
  int best_agree = -1;
  auto agrees = [&](int lv, int gv) { return base(names[lv]) == label_of(g, gnodes[gv]) && names[lv] == base(names[lv]); };
  std::function<void(std::size_t, int)> search = [&](std::size_t depth, int agree) {
    if (agree + static_cast<int>(order.size() - depth) <= best_agree) return;
    if (depth == order.size()) {
      best_agree = agree;
      best = map;
      return;
    }
    const int lv = order[depth];
    for (int gv = 0; gv < ng; ++gv) {
      if (used[gv] || ldeg[lv] != gdeg[gv]) continue;
      bool ok = true;
      for (std::size_t d = 0; d < depth && ok; ++d) {
        const int u = order[d];
        ok = ladj[lv][u] == gadj[gv][map[u]];
      }
      if (!ok) continue;
      map[lv] = gv;
      used[gv] = 1;
      search(depth + 1, agree + (agrees(lv, gv) ? 1 : 0));
      used[gv] = 0;
      map[lv] = -1;
    }
  };
  search(0, 0);
  if (best.empty()) {
    v.messages.push_back("cable network is not isomorphic to the module's");
    return v;
  }
  for (int lv = 0; lv < nv; ++lv)
    if (!agrees(lv, best[lv])) v.mismatched_nodes.push_back(names[lv]);
  std::sort(v.mismatched_nodes.begin(), v.mismatched_nodes.end());
  v.isomorphic = v.mismatched_nodes.empty();
  if (!v.isomorphic) v.messages.push_back("labels disagree with the module at " + std::to_string(v.mismatched_nodes.size()) + " nodes");
  return v;
}

void check_svg_options(const SvgOptions& o) {
  if (!(o.stroke_width > 0 && o.housing_diameter > 0 && o.pin_diameter > 0 && o.hole_diameter > 0))
    throw ValidationError("SvgOptions: widths and diameters must be > 0");
  if (!(o.pin_diameter > o.hole_diameter))
    throw ValidationError("SvgOptions: pin_diameter must exceed hole_diameter (friction fit)");
  if (!(o.units_per_meter > 0) || !(o.margin >= 0)) throw ValidationError("SvgOptions: bad scale or margin");
}

namespace {

std::string num(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  std::string s = buf;
  if (s == "-0.0000") s = "0.0000";
  return s;
}

}  // namespace

std::string export_svg(const PlanarLayout& layout, const SvgOptions& o) {
  check_svg_options(o);
  const double s = o.units_per_meter;
  double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
  for (const Vec2& p : layout.points) {
    xlo = std::min(xlo, p.x()), xhi = std::max(xhi, p.x());
    ylo = std::min(ylo, p.y()), yhi = std::max(yhi, p.y());
  }
  if (layout.points.empty()) xlo = xhi = ylo = yhi = 0.0;
  xlo -= o.margin, xhi += o.margin, ylo -= o.margin, yhi += o.margin;
  // SVG y runs down; flip so the drawing is not mirrored.
  auto X = [&](const Vec2& p) { return num(p.x() * s); };
  auto Y = [&](const Vec2& p) { return num(-p.y() * s); };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num((xhi - xlo) * 1000.0)
      << "mm\" height=\"" << num((yhi - ylo) * 1000.0) << "mm\" viewBox=\"" << num(xlo * s) << " "
      << num(-yhi * s) << " " << num((xhi - xlo) * s) << " " << num((yhi - ylo) * s) << "\">\n";

  out << "<g id=\"cables\" stroke=\"black\" stroke-width=\"" << num(o.stroke_width * s)
      << "\" stroke-linecap=\"round\">\n";
  for (const LayoutTriangle& t : layout.triangles)
    for (int k = 0; k < 3; ++k) {
      const Vec2& a = layout.points[t.points[k]];
      const Vec2& b = layout.points[t.points[(k + 1) % 3]];
      out << "<line x1=\"" << X(a) << "\" y1=\"" << Y(a) << "\" x2=\"" << X(b) << "\" y2=\"" << Y(b) << "\"/>\n";
    }
  out << "</g>\n";

  auto circles = [&](const char* id, const char* colour, double d, auto&& center) {
    out << "<g id=\"" << id << "\" fill=\"none\" stroke=\"" << colour << "\" stroke-width=\""
        << num(0.1e-3 * s) << "\">\n";
    for (std::size_t p = 0; p < layout.points.size(); ++p) {
      const Vec2 c = center(p);
      out << "<circle cx=\"" << X(c) << "\" cy=\"" << Y(c) << "\" r=\"" << num(d / 2 * s) << "\"/>\n";
    }
    out << "</g>\n";
  };
  circles("housings", "blue", o.housing_diameter, [&](std::size_t p) { return layout.housings.at(p).center; });
  circles("pins", "red", o.pin_diameter, [&](std::size_t p) { return layout.latch_features.at(p).pin.center; });
  circles("holes", "green", o.hole_diameter, [&](std::size_t p) { return layout.latch_features.at(p).hole.center; });

  if (o.labels) {
    out << "<g id=\"labels\" font-family=\"sans-serif\" font-size=\"" << num(2e-3 * s) << "\">\n";
    for (std::size_t p = 0; p < layout.points.size(); ++p)
      out << "<text x=\"" << X(layout.points[p]) << "\" y=\"" << Y(layout.points[p]) << "\">"
          << layout.point_labels[p] << "</text>\n";
    out << "</g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace tenseg
