#include "system.hpp"

#include <algorithm>
#include <set>
#include <utility>

namespace tenseg {

namespace detail {

System compile(const TensegrityGraph& g) {
  System s;
  s.particles = make_particles(g);
  const auto& pn = s.particles.particle_of_node;
  for (std::size_t k = 0; k < g.members.size(); ++k) {
    const Member& m = g.members[k];
    Link l;
    l.i = pn[m.endpoints[0]];
    l.j = pn[m.endpoints[1]];
    l.member = static_cast<int>(k);
    l.rest = m.rest_length;
    l.stiffness = m.axial_stiffness;
    l.damping = m.damping;
    l.kind = m.kind;
    if (l.i == l.j) continue;  // both ends welded together: carries nothing
    (is_rigid(m.kind) ? s.rigid : s.tensile).push_back(l);
  }
  // A tensile member alongside a rigid one cannot change length; its load is
  // absorbed entirely by the rigid member and it has no effect on motion.
  std::set<std::pair<int, int>> rigid_pairs;
  for (const Link& l : s.rigid) rigid_pairs.insert(std::minmax(l.i, l.j));
  std::erase_if(s.tensile, [&](const Link& l) { return rigid_pairs.count(std::minmax(l.i, l.j)) > 0; });
  return s;
}

std::vector<Vec3> to_particles(const ParticleMap& pm, std::span<const Vec3> node_positions) {
  std::vector<Vec3> x(pm.size(), Vec3::Zero());
  for (int p = 0; p < pm.size(); ++p) {
    for (int n : pm.nodes_of_particle[p]) x[p] += node_positions[n];
    x[p] /= static_cast<double>(pm.nodes_of_particle[p].size());
  }
  return x;
}

std::vector<Vec3> to_nodes(const ParticleMap& pm, std::span<const Vec3> particle_values) {
  std::vector<Vec3> out(pm.particle_of_node.size());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = particle_values[pm.particle_of_node[n]];
  return out;
}

void tensile_forces(const System& s, std::span<const Vec3> x, std::vector<Vec3>& f) {
  f.assign(x.size(), Vec3::Zero());
  for (const Link& l : s.tensile) {
    const Vec3 d = x[l.j] - x[l.i];
    const double len = d.norm();
    const double t = tension(l.stiffness, l.rest, len);
    if (t == 0.0) continue;
    const Vec3 fu = (t / len) * d;
    f[l.i] += fu;
    f[l.j] -= fu;
  }
}

}  // namespace detail

}  // namespace tenseg
