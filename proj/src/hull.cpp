// Incremental 3D convex hull, used only for volumes.

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include "tenseg/statics.hpp"

namespace tenseg {

namespace {

struct Tri {
  std::array<int, 3> v;
  Vec3 n;     // outward, unnormalised
  double off; // n.dot(p) for p on the plane
};

Tri make_tri(std::span<const Vec3> p, int a, int b, int c) {
  Tri t{{a, b, c}, (p[b] - p[a]).cross(p[c] - p[a]), 0.0};
  t.off = t.n.dot(p[a]);
  return t;
}

double signed_dist(const Tri& t, const Vec3& q) {
  const double nn = t.n.norm();
  return nn > 0 ? (t.n.dot(q) - t.off) / nn : 0.0;
}

}  // namespace

double hull_volume(std::span<const Vec3> p) {
  const int n = static_cast<int>(p.size());
  if (n < 4) return 0.0;
  double scale = 0.0;
  for (const Vec3& q : p) scale = std::max(scale, (q - p[0]).norm());
  if (scale == 0.0) return 0.0;
  const double eps = 1e-12 * scale;

  // Initial simplex from extreme points.
  int i0 = 0, i1 = -1, i2 = -1, i3 = -1;
  double best = 0.0;
  for (int i = 0; i < n; ++i)
    if (double d = (p[i] - p[i0]).norm(); d > best) best = d, i1 = i;
  if (i1 < 0 || best <= eps) return 0.0;
  best = 0.0;
  const Vec3 e = (p[i1] - p[i0]).normalized();
  for (int i = 0; i < n; ++i) {
    const Vec3 r = p[i] - p[i0];
    if (double d = (r - r.dot(e) * e).norm(); d > best) best = d, i2 = i;
  }
  if (i2 < 0 || best <= eps) return 0.0;
  best = 0.0;
  const Vec3 nrm = (p[i1] - p[i0]).cross(p[i2] - p[i0]).normalized();
  for (int i = 0; i < n; ++i)
    if (double d = std::abs((p[i] - p[i0]).dot(nrm)); d > best) best = d, i3 = i;
  if (i3 < 0 || best <= eps) return 0.0;

  const Vec3 inside = (p[i0] + p[i1] + p[i2] + p[i3]) / 4.0;
  std::vector<Tri> hull;
  auto add = [&](int a, int b, int c) {
    Tri t = make_tri(p, a, b, c);
    if (signed_dist(t, inside) > 0) t = make_tri(p, a, c, b);
    hull.push_back(t);
  };
  add(i0, i1, i2);
  add(i0, i1, i3);
  add(i0, i2, i3);
  add(i1, i2, i3);

  for (int q = 0; q < n; ++q) {
    if (q == i0 || q == i1 || q == i2 || q == i3) continue;
    std::vector<char> visible(hull.size(), 0);
    bool any = false;
    for (std::size_t f = 0; f < hull.size(); ++f)
      if (signed_dist(hull[f], p[q]) > eps) visible[f] = 1, any = true;
    if (!any) continue;
    // Horizon: directed edges of visible faces whose twin is not visible.
    std::set<std::pair<int, int>> vis_edges;
    for (std::size_t f = 0; f < hull.size(); ++f)
      if (visible[f])
        for (int k = 0; k < 3; ++k) vis_edges.insert({hull[f].v[k], hull[f].v[(k + 1) % 3]});
    std::vector<Tri> next;
    for (std::size_t f = 0; f < hull.size(); ++f)
      if (!visible[f]) next.push_back(hull[f]);
    for (const auto& [a, b] : vis_edges) {
      if (vis_edges.count({b, a})) continue;
      Tri t = make_tri(p, a, b, q);
      if (signed_dist(t, inside) > 0) t = make_tri(p, b, a, q);
      next.push_back(t);
    }
    hull.swap(next);
  }

  double vol = 0.0;
  for (const Tri& t : hull)
    vol += (p[t.v[0]] - inside).dot((p[t.v[1]] - inside).cross(p[t.v[2]] - inside));
  return std::abs(vol) / 6.0;
}

}  // namespace tenseg
