#pragma once

#include <span>
#include <string>
#include <vector>

#include "tenseg/core.hpp"

namespace tenseg {

struct EquilibriumResult {
  std::vector<Vec3> positions;  // per node
  double residual_max = 0.0;    // N
  int iterations = 0;
  bool converged = false;
};

struct ForceDisplacementSample {
  double displacement = 0.0;  // m
  double force = 0.0;         // N, reaction on the moving plate
};

struct ForceDisplacementCurve {
  std::vector<ForceDisplacementSample> samples;
  Vec3 direction = Vec3::UnitZ();
  double initial_height = 0.0;  // plate separation at first contact, m
  double max_strain = 0.0;
  int steps = 0;
  bool truncated = false;
  std::string diagnostic;
  std::vector<Vec3> final_positions;  // per node, last converged step
};

struct RelaxSettings {
  double tolerance = 1e-5;  // N
  int max_iterations = 400000;
  // Struts are rods of this diameter and may not pass through each other
  // during plate tests. 0 treats them as zero-thickness lines.
  double strut_diameter = 2e-3;  // m
};

// Signed axial force per member (tension > 0). Cables and tendons follow the
// tension-only law; struts and links report the reaction that balances the
// tensile loads at their endpoints.
std::vector<double> member_forces(const TensegrityGraph& g, std::span<const Vec3> positions);

// Strain energy of the tensile members.
double elastic_energy(const TensegrityGraph& g, std::span<const Vec3> positions);

// -grad elastic_energy, per node. Welded nodes each receive their own
// member loads.
std::vector<Vec3> elastic_forces(const TensegrityGraph& g, std::span<const Vec3> positions);

// Out-of-balance force per node after the rigid members take up the load
// they can carry (least-squares reaction). Welded nodes share their
// particle's residual.
std::vector<Vec3> static_residual(const TensegrityGraph& g, std::span<const Vec3> positions);

// Same projection applied to an arbitrary per-node force field.
std::vector<Vec3> project_rigid(const TensegrityGraph& g, std::span<const Vec3> positions,
                                std::span<const Vec3> forces);

// Damped dynamic relaxation with kinetic damping. Struts are enforced as
// rigid constraints; rigid-body drift is removed every iteration.
EquilibriumResult equilibrate(const TensegrityGraph& g, std::span<const Vec3> initial,
                              double tolerance = 1e-5, int max_iterations = 400000);

// Two frictionless plates normal to `direction` close on the structure in
// `steps` equal increments up to `max_strain` of the initial height.
ForceDisplacementCurve compress_test(const TensegrityGraph& g, const Vec3& direction,
                                     double max_strain, int steps,
                                     const RelaxSettings& settings = {});

// Convex hull volume; 0 for degenerate (coplanar) sets.
double hull_volume(std::span<const Vec3> points);

// Extent of the points along a unit direction.
double extent_along(std::span<const Vec3> points, const Vec3& direction);

struct CollapseResult {
  double volume_ratio = 0.0;
  double final_height_ratio = 0.0;
  ForceDisplacementCurve curve;
};

CollapseResult collapse_test(const TensegrityGraph& g, const Vec3& direction,
                             double max_strain = 0.9, int steps = 180,
                             const RelaxSettings& settings = {});

// (F(b) - F(a)) / (d(b) - d(a)) with the window given as strain fractions of
// the initial height; linear interpolation between samples.
double secant_stiffness(const ForceDisplacementCurve& curve, double strain_lo, double strain_hi);

}  // namespace tenseg
