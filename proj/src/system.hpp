#pragma once

// Particle-level view of a graph shared by the statics and dynamics solvers.

#include <span>
#include <vector>

#include "tenseg/core.hpp"

namespace tenseg::detail {

struct Link {
  int i = 0;
  int j = 0;
  int member = 0;  // index into graph.members
  double rest = 0.0;
  double stiffness = 0.0;
  double damping = 0.0;
  MemberKind kind = MemberKind::cable;
};

struct System {
  ParticleMap particles;
  std::vector<Link> tensile;
  std::vector<Link> rigid;
};

System compile(const TensegrityGraph& g);

std::vector<Vec3> to_particles(const ParticleMap& pm, std::span<const Vec3> node_positions);
std::vector<Vec3> to_nodes(const ParticleMap& pm, std::span<const Vec3> particle_values);

// Static tension-only force law; never negative.
inline double tension(double stiffness, double rest, double length) {
  return length > rest ? stiffness * (length - rest) / rest : 0.0;
}

// Accumulates tensile member forces into f (resized to particle count).
void tensile_forces(const System& s, std::span<const Vec3> x, std::vector<Vec3>& f);

}  // namespace tenseg::detail
