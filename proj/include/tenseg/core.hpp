#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "tenseg/errors.hpp"

namespace tenseg {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;

// Default strut length: recovered from the 4.75 cm printed cable through the
// equal-cable ratio cable/strut = sqrt(6)/4.
inline constexpr double kDefaultCableLength = 0.0475;
double default_strut_length();

enum class MemberKind { strut, cable, tendon, link };

const char* to_string(MemberKind kind);
MemberKind member_kind_from_string(const std::string& s);

// Tension-only members go slack; struts and links are rigid distance
// constraints.
inline bool is_tensile(MemberKind k) { return k == MemberKind::cable || k == MemberKind::tendon; }
inline bool is_rigid(MemberKind k) { return k == MemberKind::strut || k == MemberKind::link; }

struct CableSection {
  double thickness = 1e-3;  // m
  double width = 1e-3;      // m
  bool operator==(const CableSection&) const = default;
};

struct Node {
  int id = 0;
  Vec3 position = Vec3::Zero();
  double mass = 0.0;  // kg
  std::string label;
};

struct Member {
  MemberKind kind = MemberKind::cable;
  std::array<int, 2> endpoints{0, 0};
  double rest_length = 0.0;      // m
  double axial_stiffness = 0.0;  // N, force at 100% strain (E*A)
  double damping = 0.0;          // N*s/m on the elongation rate
  CableSection section{};        // meaningful for cables only
};

// Triangular cable face. Vertices are ordered counter-clockwise seen from
// outside, so the right-hand normal points away from the module center.
struct Face {
  std::array<int, 3> nodes{0, 0, 0};
  int module = 0;
  int pair = 0;  // collapsibility pair index within the module, 0..3
};

struct Weld {
  int a = 0;
  int b = 0;
  bool operator==(const Weld&) const = default;
  auto operator<=>(const Weld&) const = default;
};

struct Module {
  int id = 0;
  std::vector<int> nodes;              // includes the hub, if any
  std::vector<int> faces;              // 8 entries; faces[2k], faces[2k+1] form pair k
  std::optional<int> hub;              // actuation hub node
  std::optional<int> actuated_pair;    // face pair pulled by the tendons
  std::vector<int> tendons;            // member indices, hub -> face vertices
  double strut_length = 0.0;
  double pulley_radius = 0.0;
};

struct TensegrityGraph {
  std::vector<Node> nodes;
  std::vector<Member> members;
  std::vector<Module> modules;
  std::vector<Weld> welds;
  std::vector<Face> faces;

  std::vector<Vec3> positions() const;
  void set_positions(std::span<const Vec3> p);
  const Module& module(int id) const;
  // Indices of the two faces of pair k in module m.
  std::array<int, 2> face_pair(int module_id, int pair) const;
};

struct ModuleSpec {
  double strut_length = default_strut_length();
  double pre_stretch = 0.15;
  CableSection cable_section{};
  double cable_modulus = 12e6;  // Pa; calibration parameter
  double node_mass = 0.005;     // kg
  bool with_actuator = false;
  double pulley_radius = 0.005;              // m
  std::optional<double> tendon_stiffness{};  // N; defaults to 50x cable stiffness
  double cable_damping = 0.05;               // N*s/m

  double cable_stiffness() const {
    return cable_modulus * cable_section.thickness * cable_section.width;
  }
  double effective_tendon_stiffness() const {
    return tendon_stiffness.value_or(50.0 * cable_stiffness());
  }
  bool operator==(const ModuleSpec&) const = default;
};

// Upper bound on pre-stretch: cable elongation at yield.
inline constexpr double kMaxPreStretch = 0.65;

// Returns the list of violated bounds; empty when valid.
std::vector<std::string> check_spec(const ModuleSpec& spec);

// Analytic equal-cable equilibrium of the six-strut icosahedron. Struts are
// in three orthogonal parallel pairs; nodes are cyclic permutations of
// (+-L/2, +-L/4, 0). Node 2k and 2k+1 are the ends of strut k, labelled with
// letter k ("A1", "A2", ...). With an actuator, node 12 is the hub at the
// origin with 6 tendons to face pair 0 and two rigid links to strut 0.
TensegrityGraph build_icosahedron(const ModuleSpec& spec);

// Unit normals of faces[2k] for k = 0..3, from current positions.
std::vector<Vec3> collapsibility_directions(const TensegrityGraph& g, int module_id = 0);

Vec3 module_centroid(const TensegrityGraph& g, int module_id);

// Struts and cables only; tendons and hub links are actuator hardware that
// deliberately crosses the cavity.
bool inner_cavity_clearance(const TensegrityGraph& g, double cube_edge, int module_id = 0);

// Applies x -> R x + t to every node.
TensegrityGraph transformed(const TensegrityGraph& g, const Mat3& rotation, const Vec3& translation);

// Rotates g so faces[face] looks straight down, then lifts it to rest on z = 0.
TensegrityGraph resting_on_face(const TensegrityGraph& g, int face);

// Disjoint union; module ids, node ids, member and face indices renumbered.
TensegrityGraph assemble(std::span<const TensegrityGraph> parts);

// Positions n copies of the module in build pose along the axis of face
// pair 0: copy i+1 is copy i rotated 180 degrees about the axis and shifted
// so its faces[1] coincides with the faces[0] of copy i. The result is then
// rotated so the axis is +x and the lowest nodes rest on z = 0. No welds.
struct ChainOptions {
  // Odd-numbered modules are mirror images, so the twist each module makes
  // under contraction alternates in sense along the chain.
  bool alternate_handedness = false;
};

TensegrityGraph place_chain(const ModuleSpec& spec, int n_modules, const ChainOptions& opt = {});

struct LatchOptions {
  // Capture radius as a fraction of the strut length.
  double capture_fraction = 0.1;
};

// Welds the 3 vertices of face_a (module_a) to their nearest vertices of
// face_b (module_b). face_a/face_b are face indices local to the module
// (0..7).
TensegrityGraph latch(const TensegrityGraph& g, int module_a, int face_a, int module_b,
                      int face_b, const LatchOptions& opt = {});

// Canonical peristaltic chain: n modules, actuated axis of each module along
// +x, consecutive modules latched face to face.
TensegrityGraph build_chain(const ModuleSpec& spec, int n_modules, const ChainOptions& opt = {});

// Weld classes: nodes joined by welds act as one point mass.
struct ParticleMap {
  std::vector<int> particle_of_node;
  std::vector<std::vector<int>> nodes_of_particle;
  std::vector<double> mass;
  int size() const { return static_cast<int>(nodes_of_particle.size()); }
};

ParticleMap make_particles(const TensegrityGraph& g);

struct ModuleReport {
  int module = 0;
  int struts = 0;
  int cables = 0;
  int tendons = 0;
  int nodes = 0;
  std::vector<int> valence_violations;  // node ids
  bool struts_disjoint = true;
  bool faces_parallel = true;
  bool cable_lengths_uniform = true;
};

struct ValidationReport {
  std::vector<ModuleReport> modules;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate(const TensegrityGraph& g);

}  // namespace tenseg
