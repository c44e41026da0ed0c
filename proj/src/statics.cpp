#include "tenseg/statics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "system.hpp"

namespace tenseg {

namespace {

using detail::Link;
using detail::System;

struct Plates {
  bool active = false;
  Vec3 d = Vec3::UnitZ();
  double bottom = 0.0;
  double top = 0.0;
  double eps = 0.0;
  double strut_gap = 0.0;  // minimum strut centreline distance, 0 disables
};

struct Reaction {
  std::vector<Vec3> residual;        // per particle
  std::vector<double> rigid_lambda;  // > 0 pushes the ends apart
  double top_force = 0.0;
  double bottom_force = 0.0;
  double residual_max = 0.0;
};

// One row of the constraint Jacobian.
struct Row {
  std::array<int, 4> p{-1, -1, -1, -1};
  std::array<Vec3, 4> g{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  int kind = 0;  // 0 rigid, -1 bottom contact, +1 top contact, 2 strut contact
  int link = -1;
};

double dot_rows(const Row& a, const Row& b) {
  double s = 0.0;
  for (int i = 0; i < 4 && a.p[i] >= 0; ++i)
    for (int j = 0; j < 4 && b.p[j] >= 0; ++j)
      if (a.p[i] == b.p[j]) s += a.g[i].dot(b.g[j]);
  return s;
}

// Closest points of segments ab and cd; returns the parameters along each.
std::pair<double, double> closest_params(const Vec3& a, const Vec3& b, const Vec3& c,
                                         const Vec3& d) {
  const Vec3 u = b - a, v = d - c, w = a - c;
  const double uu = u.dot(u), vv = v.dot(v), uv = u.dot(v), uw = u.dot(w), vw = v.dot(w);
  const double den = uu * vv - uv * uv;
  double s = den > 1e-14 * uu * vv ? std::clamp((uv * vw - vv * uw) / den, 0.0, 1.0) : 0.0;
  double t = (uv * s + vw) / vv;
  if (t < 0.0) {
    t = 0.0;
    s = std::clamp(-uw / uu, 0.0, 1.0);
  } else if (t > 1.0) {
    t = 1.0;
    s = std::clamp((uv - uw) / uu, 0.0, 1.0);
  }
  return {s, t};
}

// Separation gradient for a pair of struts closer than `gap`; false if clear.
bool strut_contact(const Link& m, const Link& n, std::span<const Vec3> x, double gap, Row& row,
                   double& dist) {
  if (m.i == n.i || m.i == n.j || m.j == n.i || m.j == n.j) return false;
  const auto [s, t] = closest_params(x[m.i], x[m.j], x[n.i], x[n.j]);
  const Vec3 d = ((1 - s) * x[m.i] + s * x[m.j]) - ((1 - t) * x[n.i] + t * x[n.j]);
  dist = d.norm();
  if (dist > gap || dist == 0.0) return false;
  const Vec3 e = d / dist;
  row.p = {m.i, m.j, n.i, n.j};
  row.g = {(1 - s) * e, s * e, -(1 - t) * e, -t * e};
  row.kind = 2;
  return true;
}

// Least-squares reactions: minimise |f + G^T lambda| with contact multipliers
// restricted to pushing (active-set elimination of pulling contacts).
Reaction solve_reactions(const System& s, std::span<const Vec3> x, std::span<const Vec3> f,
                         const Plates& plates) {
  std::vector<Row> rows;
  for (std::size_t k = 0; k < s.rigid.size(); ++k) {
    const Link& l = s.rigid[k];
    Vec3 u = x[l.i] - x[l.j];
    const double len = u.norm();
    if (len > 0) u /= len;
    Row r;
    r.p[0] = l.i;
    r.p[1] = l.j;
    r.g[0] = u;
    r.g[1] = -u;
    r.link = static_cast<int>(k);
    rows.push_back(r);
  }
  if (plates.active) {
    for (int p = 0; p < static_cast<int>(x.size()); ++p) {
      const double sp = x[p].dot(plates.d);
      Row r;
      r.p[0] = p;
      if (sp <= plates.bottom + plates.eps) {
        r.g[0] = plates.d;
        r.kind = -1;
        rows.push_back(r);
      }
      if (sp >= plates.top - plates.eps) {
        r.g[0] = -plates.d;
        r.kind = +1;
        rows.push_back(r);
      }
    }
  }
  if (plates.strut_gap > 0) {
    const double reach = plates.strut_gap + plates.eps;
    for (std::size_t a = 0; a < s.rigid.size(); ++a)
      for (std::size_t b = a + 1; b < s.rigid.size(); ++b) {
        if (s.rigid[a].kind != MemberKind::strut || s.rigid[b].kind != MemberKind::strut) continue;
        Row r;
        double dist = 0.0;
        if (strut_contact(s.rigid[a], s.rigid[b], x, reach, r, dist)) rows.push_back(r);
      }
  }

  std::vector<char> active(rows.size(), 1);
  Eigen::VectorXd lambda;
  std::vector<int> idx;
  for (;;) {
    idx.clear();
    for (std::size_t r = 0; r < rows.size(); ++r)
      if (active[r]) idx.push_back(static_cast<int>(r));
    const int n = static_cast<int>(idx.size());
    Eigen::MatrixXd A(n, n);
    Eigen::VectorXd b(n);
    double trace = 0.0;
    for (int a = 0; a < n; ++a) {
      const Row& ra = rows[idx[a]];
      b[a] = 0.0;
      for (int i = 0; i < 4 && ra.p[i] >= 0; ++i) b[a] -= ra.g[i].dot(f[ra.p[i]]);
      for (int c = a; c < n; ++c) A(a, c) = A(c, a) = dot_rows(ra, rows[idx[c]]);
      trace += A(a, a);
    }
    if (n > 0) {
      A.diagonal().array() += 1e-13 * trace / n;
      lambda = A.ldlt().solve(b);
    } else {
      lambda.resize(0);
    }
    int worst = -1;
    double worst_val = 0.0;
    for (int a = 0; a < n; ++a) {
      if (rows[idx[a]].kind != 0 && lambda[a] < worst_val) {
        worst_val = lambda[a];
        worst = a;
      }
    }
    if (worst < 0) break;
    active[idx[worst]] = 0;
  }

  Reaction out;
  out.residual.assign(f.begin(), f.end());
  out.rigid_lambda.assign(s.rigid.size(), 0.0);
  for (std::size_t a = 0; a < idx.size(); ++a) {
    const Row& r = rows[idx[a]];
    for (int i = 0; i < 4 && r.p[i] >= 0; ++i) out.residual[r.p[i]] += lambda[a] * r.g[i];
    if (r.kind == 0) out.rigid_lambda[r.link] = lambda[a];
    if (r.kind == +1) out.top_force += lambda[a];
    if (r.kind == -1) out.bottom_force += lambda[a];
  }
  for (const Vec3& r : out.residual) out.residual_max = std::max(out.residual_max, r.norm());
  return out;
}

double length_scale(const System& s, std::span<const Vec3> x) {
  double L = 0.0;
  for (const Link& l : s.rigid) L = std::max(L, l.rest);
  for (const Link& l : s.tensile) L = std::max(L, l.rest);
  if (L == 0.0 && !x.empty()) L = 1.0;
  return L;
}

class Relaxer {
 public:
  Relaxer(const System& s, const Plates& plates) : s_(s), plates_(plates) {
    const int n = s.particles.size();
    mass_.assign(n, 0.0);
    for (const Link& l : s.tensile) {
      const double k = l.stiffness / l.rest;
      mass_[l.i] += k;
      mass_[l.j] += k;
    }
    for (double& m : mass_) m = m > 0 ? 3.0 * m : 1.0;
  }

  void set_plates(const Plates& p) { plates_ = p; }

  // Rigid members by mass-weighted projection, plates by clamping.
  void project(std::vector<Vec3>& x, double L) const {
    for (int pass = 0; pass < 2000; ++pass) {
      for (const Link& l : s_.rigid) {
        const double wi = 1.0 / mass_[l.i], wj = 1.0 / mass_[l.j];
        const Vec3 d = x[l.j] - x[l.i];
        const double len = d.norm();
        if (len == 0.0) continue;
        const Vec3 corr = ((len - l.rest) / ((wi + wj) * len)) * d;
        x[l.i] += wi * corr;
        x[l.j] -= wj * corr;
      }
      double err = separate_struts(x);
      clamp(x);
      for (const Link& l : s_.rigid) err = std::max(err, std::abs((x[l.j] - x[l.i]).norm() - l.rest));
      if (err <= 1e-13 * L) break;
    }
  }

  // Pushes overlapping struts apart; returns the largest overlap found.
  double separate_struts(std::vector<Vec3>& x) const {
    if (plates_.strut_gap <= 0) return 0.0;
    double worst = 0.0;
    for (std::size_t a = 0; a < s_.rigid.size(); ++a)
      for (std::size_t b = a + 1; b < s_.rigid.size(); ++b) {
        if (s_.rigid[a].kind != MemberKind::strut || s_.rigid[b].kind != MemberKind::strut) continue;
        Row r;
        double dist = 0.0;
        if (!strut_contact(s_.rigid[a], s_.rigid[b], x, plates_.strut_gap, r, dist)) continue;
        const double depth = plates_.strut_gap - dist;
        double w = 0.0;
        for (int i = 0; i < 4; ++i) w += r.g[i].squaredNorm() / mass_[r.p[i]];
        for (int i = 0; i < 4; ++i) x[r.p[i]] += (depth / (w * mass_[r.p[i]])) * r.g[i];
        worst = std::max(worst, depth);
      }
    return worst;
  }

  void clamp(std::vector<Vec3>& x) const {
    if (!plates_.active) return;
    for (Vec3& p : x) {
      const double sp = p.dot(plates_.d);
      if (sp < plates_.bottom) p += (plates_.bottom - sp) * plates_.d;
      else if (sp > plates_.top) p -= (sp - plates_.top) * plates_.d;
    }
  }

  // Zero-energy rigid motions left free by the boundary conditions.
  void remove_rigid_modes(std::vector<Vec3>& v, std::span<const Vec3> x) const {
    const int n = static_cast<int>(x.size());
    double mt = 0.0;
    Vec3 c = Vec3::Zero();
    for (int i = 0; i < n; ++i) {
      c += mass_[i] * x[i];
      mt += mass_[i];
    }
    c /= mt;
    std::vector<std::vector<Vec3>> modes;
    auto add_translation = [&](const Vec3& e) { modes.emplace_back(n, e); };
    auto add_rotation = [&](const Vec3& e) {
      std::vector<Vec3> m(n);
      for (int i = 0; i < n; ++i) m[i] = e.cross(x[i] - c);
      modes.push_back(std::move(m));
    };
    if (plates_.active) {
      Vec3 a = plates_.d.unitOrthogonal();
      Vec3 b = plates_.d.cross(a);
      add_translation(a);
      add_translation(b);
      add_rotation(plates_.d);
    } else {
      for (int k = 0; k < 3; ++k) add_translation(Vec3::Unit(k));
      for (int k = 0; k < 3; ++k) add_rotation(Vec3::Unit(k));
    }
    auto inner = [&](const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += mass_[i] * a[i].dot(b[i]);
      return s;
    };
    std::vector<std::vector<Vec3>> basis;
    for (auto& m : modes) {
      for (const auto& q : basis) {
        const double p = inner(m, q);
        for (int i = 0; i < n; ++i) m[i] -= p * q[i];
      }
      const double nn = std::sqrt(inner(m, m));
      if (nn < 1e-12) continue;
      for (auto& e : m) e /= nn;
      basis.push_back(std::move(m));
    }
    for (const auto& q : basis) {
      const double p = inner(v, q);
      for (int i = 0; i < n; ++i) v[i] -= p * q[i];
    }
  }

  struct Outcome {
    int iterations = 0;
    bool converged = false;
    Reaction reaction;
  };

  Outcome run(std::vector<Vec3>& x, double tol, int max_iter) const {
    const double L = length_scale(s_, x);
    const int n = static_cast<int>(x.size());
    std::vector<Vec3> v(n, Vec3::Zero()), f, x_new;
    double ke_prev = 0.0;
    Outcome out;
    for (int it = 0;; ++it) {
      detail::tensile_forces(s_, x, f);
      out.reaction = solve_reactions(s_, x, f, plates_);
      out.iterations = it;
      if (!std::isfinite(out.reaction.residual_max)) return out;
      if (out.reaction.residual_max <= tol) {
        out.converged = true;
        return out;
      }
      if (it >= max_iter) return out;
      const auto& r = out.reaction.residual;
      for (int i = 0; i < n; ++i) v[i] += r[i] / mass_[i];
      remove_rigid_modes(v, x);
      x_new = x;
      for (int i = 0; i < n; ++i) x_new[i] += v[i];
      project(x_new, L);
      double ke = 0.0;
      for (int i = 0; i < n; ++i) {
        v[i] = x_new[i] - x[i];
        ke += mass_[i] * v[i].squaredNorm();
      }
      x.swap(x_new);
      if (ke < ke_prev) {
        std::fill(v.begin(), v.end(), Vec3::Zero());
        ke_prev = 0.0;
      } else {
        ke_prev = ke;
      }
    }
  }

 private:
  const System& s_;
  Plates plates_;
  std::vector<double> mass_;
};

void check_positions(const TensegrityGraph& g, std::span<const Vec3> positions) {
  if (positions.size() != g.nodes.size())
    throw ValidationError("expected " + std::to_string(g.nodes.size()) + " positions, got " +
                          std::to_string(positions.size()));
}

}  // namespace

std::vector<double> member_forces(const TensegrityGraph& g, std::span<const Vec3> positions) {
  check_positions(g, positions);
  const System s = detail::compile(g);
  const auto x = detail::to_particles(s.particles, positions);
  std::vector<Vec3> f;
  detail::tensile_forces(s, x, f);
  const Reaction r = solve_reactions(s, x, f, Plates{});
  std::vector<double> out(g.members.size(), 0.0);
  for (std::size_t k = 0; k < g.members.size(); ++k) {
    const Member& m = g.members[k];
    if (is_tensile(m.kind)) {
      const double len = (positions[m.endpoints[1]] - positions[m.endpoints[0]]).norm();
      out[k] = detail::tension(m.axial_stiffness, m.rest_length, len);
    }
  }
  for (std::size_t k = 0; k < s.rigid.size(); ++k) out[s.rigid[k].member] = -r.rigid_lambda[k];
  return out;
}

double elastic_energy(const TensegrityGraph& g, std::span<const Vec3> positions) {
  check_positions(g, positions);
  double e = 0.0;
  for (const Member& m : g.members) {
    if (!is_tensile(m.kind)) continue;
    const double len = (positions[m.endpoints[1]] - positions[m.endpoints[0]]).norm();
    if (len > m.rest_length) {
      const double dl = len - m.rest_length;
      e += 0.5 * m.axial_stiffness / m.rest_length * dl * dl;
    }
  }
  return e;
}

std::vector<Vec3> elastic_forces(const TensegrityGraph& g, std::span<const Vec3> positions) {
  check_positions(g, positions);
  std::vector<Vec3> f(positions.size(), Vec3::Zero());
  for (const Member& m : g.members) {
    if (!is_tensile(m.kind)) continue;
    const auto [a, b] = m.endpoints;
    const Vec3 d = positions[b] - positions[a];
    const double len = d.norm();
    const double t = detail::tension(m.axial_stiffness, m.rest_length, len);
    if (t == 0.0) continue;
    f[a] += (t / len) * d;
    f[b] -= (t / len) * d;
  }
  return f;
}

std::vector<Vec3> project_rigid(const TensegrityGraph& g, std::span<const Vec3> positions,
                                std::span<const Vec3> forces) {
  check_positions(g, positions);
  const System s = detail::compile(g);
  const auto x = detail::to_particles(s.particles, positions);
  std::vector<Vec3> f(s.particles.size(), Vec3::Zero());
  for (std::size_t n = 0; n < forces.size(); ++n) f[s.particles.particle_of_node[n]] += forces[n];
  const Reaction r = solve_reactions(s, x, f, Plates{});
  return detail::to_nodes(s.particles, r.residual);
}

std::vector<Vec3> static_residual(const TensegrityGraph& g, std::span<const Vec3> positions) {
  const auto f = elastic_forces(g, positions);
  return project_rigid(g, positions, f);
}

EquilibriumResult equilibrate(const TensegrityGraph& g, std::span<const Vec3> initial,
                              double tolerance, int max_iterations) {
  check_positions(g, initial);
  if (!(tolerance > 0)) throw ValidationError("equilibrate: tolerance must be > 0");
  if (max_iterations < 0) throw ValidationError("equilibrate: max_iterations must be >= 0");
  const System s = detail::compile(g);
  auto x = detail::to_particles(s.particles, initial);
  Relaxer relaxer(s, Plates{});
  EquilibriumResult res;
  if (std::isinf(tolerance)) {
    res.positions.assign(initial.begin(), initial.end());
    res.converged = true;
    std::vector<Vec3> f;
    detail::tensile_forces(s, x, f);
    res.residual_max = solve_reactions(s, x, f, Plates{}).residual_max;
    return res;
  }
  const auto out = relaxer.run(x, tolerance, max_iterations);
  res.positions = detail::to_nodes(s.particles, x);
  res.residual_max = out.reaction.residual_max;
  res.iterations = out.iterations;
  res.converged = out.converged;
  return res;
}

double extent_along(std::span<const Vec3> points, const Vec3& d) {
  if (points.empty()) return 0.0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const Vec3& p : points) {
    lo = std::min(lo, p.dot(d));
    hi = std::max(hi, p.dot(d));
  }
  return hi - lo;
}

ForceDisplacementCurve compress_test(const TensegrityGraph& g, const Vec3& direction,
                                     double max_strain, int steps, const RelaxSettings& settings) {
  if (std::abs(direction.norm() - 1.0) > 1e-9)
    throw ValidationError("compress_test: direction must be a unit vector");
  if (!(max_strain > 0 && max_strain < 1))
    throw ValidationError("compress_test: max_strain must lie in (0, 1)");
  if (steps < 1) throw ValidationError("compress_test: steps must be >= 1");
  if (!(settings.strut_diameter >= 0))
    throw ValidationError("compress_test: strut_diameter must be >= 0");

  const System s = detail::compile(g);
  auto x = detail::to_particles(s.particles, g.positions());
  const double L = length_scale(s, x);

  ForceDisplacementCurve curve;
  curve.direction = direction;
  curve.max_strain = max_strain;
  curve.steps = steps;

  Plates plates;
  plates.active = true;
  plates.d = direction;
  plates.bottom = std::numeric_limits<double>::infinity();
  plates.top = -plates.bottom;
  for (const Vec3& p : x) {
    plates.bottom = std::min(plates.bottom, p.dot(direction));
    plates.top = std::max(plates.top, p.dot(direction));
  }
  const double h0 = plates.top - plates.bottom;
  const double top0 = plates.top;
  plates.eps = 1e-10 * h0;
  plates.strut_gap = settings.strut_diameter;
  curve.initial_height = h0;

  Relaxer relaxer(s, plates);
  {
    std::vector<Vec3> f;
    detail::tensile_forces(s, x, f);
    const Reaction r = solve_reactions(s, x, f, plates);
    curve.samples.push_back({0.0, r.top_force});
  }
  const double step = max_strain * h0 / steps;
  for (int k = 1; k <= steps; ++k) {
    plates.top = top0 - k * step;
    relaxer.set_plates(plates);
    relaxer.project(x, L);
    const auto out = relaxer.run(x, settings.tolerance, settings.max_iterations);
    if (!out.converged) {
      std::ostringstream os;
      os << "equilibrium not reached at step " << k << " (strain " << k * step / h0
         << "): residual " << out.reaction.residual_max << " N after " << out.iterations
         << " iterations";
      curve.truncated = true;
      curve.diagnostic = os.str();
      break;
    }
    curve.samples.push_back({k * step, out.reaction.top_force});
  }
  curve.final_positions = detail::to_nodes(s.particles, x);
  return curve;
}

CollapseResult collapse_test(const TensegrityGraph& g, const Vec3& direction, double max_strain,
                             int steps, const RelaxSettings& settings) {
  CollapseResult r;
  r.curve = compress_test(g, direction, max_strain, steps, settings);
  const auto p0 = g.positions();
  const double v0 = hull_volume(p0);
  const double h0 = extent_along(p0, direction);
  r.volume_ratio = v0 > 0 ? hull_volume(r.curve.final_positions) / v0 : 0.0;
  r.final_height_ratio = h0 > 0 ? extent_along(r.curve.final_positions, direction) / h0 : 0.0;
  return r;
}

double secant_stiffness(const ForceDisplacementCurve& curve, double strain_lo, double strain_hi) {
  if (curve.samples.size() < 2 || !(strain_hi > strain_lo))
    throw ValidationError("secant_stiffness: need at least two samples and a non-empty window");
  auto force_at = [&](double d) {
    const auto& s = curve.samples;
    if (d > s.back().displacement * (1 + 1e-12))
      throw ValidationError("secant_stiffness: window exceeds the recorded curve");
    for (std::size_t i = 1; i < s.size(); ++i) {
      if (d <= s[i].displacement) {
        const double t = (d - s[i - 1].displacement) / (s[i].displacement - s[i - 1].displacement);
        return s[i - 1].force + t * (s[i].force - s[i - 1].force);
      }
    }
    return s.back().force;
  };
  const double a = strain_lo * curve.initial_height, b = strain_hi * curve.initial_height;
  return (force_at(b) - force_at(a)) / (b - a);
}

}  // namespace tenseg
