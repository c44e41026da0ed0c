#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "tenseg/core.hpp"

namespace tenseg {

// Ground half-space n.x >= height with Coulomb friction.
struct ContactModel {
  bool enabled = true;
  double ground_height = 0.0;  // m, along normal
  Vec3 normal = Vec3::UnitZ();
  double mu_static = 0.8;
  double mu_kinetic = 0.6;
  double stick_velocity = 1e-4;  // m/s; sticking only below this tangential speed

  bool operator==(const ContactModel&) const = default;
};

struct DynamicsSettings {
  double dt = 5e-5;  // s
  Vec3 gravity = Vec3(0, 0, -9.81);
  double node_drag = 0.01;  // N*s/m per node
  int constraint_passes = 10;       // minimum projection passes per step
  int max_constraint_passes = 400;  // passes continue until the tolerance is met
  double constraint_tolerance = 1e-7;  // relative to each rigid member's length

  bool operator==(const DynamicsSettings&) const = default;
};

// Minimum rest length a pulley can wind a tendon down to.
inline constexpr double kMinTendonLength = 1e-4;

struct ActuatorState {
  int module = 0;
  int hub = 0;
  std::array<int, 6> tendons{};  // member indices
  double pulley_radius = 0.0;
  std::array<double, 6> base_rest{};
};

// One entry per module with a hub, in module order.
std::vector<ActuatorState> actuators(const TensegrityGraph& g);

struct SimState {
  double time = 0.0;
  std::vector<Vec3> positions;   // per node
  std::vector<Vec3> velocities;  // per node
  std::vector<double> pulley_angles;  // per actuator, rad
  std::vector<int> contact_set;       // node ids on the ground, ascending
};

// Graph positions at rest, zero velocity, pulleys unwound.
SimState initial_state(const TensegrityGraph& g);

// Axial force of a cable or tendon; elastic plus damping on the elongation
// rate, never negative.
double cable_force(const Member& m, double length, double rate);

double pulley_rest_length(double base, double radius, double angle);

// Sets the pulley angle of `actuator` (index into actuators()).
SimState apply_pulley(const SimState& s, int actuator, double angle);

// Tendon rest lengths implied by a pulley angle.
std::array<double, 6> tendon_rest_lengths(const ActuatorState& a, double angle);

// 0.2 * sqrt(m_min / k_max), k = stiffness/rest over tensile members at the
// current pulley angles.
double stability_limit(const TensegrityGraph& g, const SimState& s);

// Pulley angle for actuator i at time t.
using AngleSchedule = std::function<double(int actuator, double t)>;

class Simulator {
 public:
  Simulator(const TensegrityGraph& g, const DynamicsSettings& settings, const ContactModel& contact);
  ~Simulator();
  Simulator(Simulator&&) noexcept;
  Simulator& operator=(Simulator&&) noexcept;

  // Advances by settings.dt. Throws ValidationError above the stability
  // limit and IntegrationFault on non-finite state.
  SimState step(const SimState& s) const;

  double mechanical_energy(const SimState& s) const;
  double kinetic_energy(const SimState& s) const;
  // Largest |length - rest| over struts and links, m.
  double constraint_error(const SimState& s) const;
  double stability_limit(const SimState& s) const;
  // Signed axial forces (tension > 0) of cables and tendons, damping included.
  std::vector<double> tensile_member_forces(const SimState& s) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SimState step(const TensegrityGraph& g, const SimState& s, double dt, const ContactModel& contact,
              DynamicsSettings settings = {});

struct Trajectory {
  std::vector<SimState> samples;
  double sample_rate = 240.0;
};

// round(duration * sample_rate) snapshots, each at the step nearest t0 + k / sample_rate, starting
// with the initial state.
Trajectory simulate(const TensegrityGraph& g, const SimState& initial, const AngleSchedule& schedule,
                    double duration, const DynamicsSettings& settings, const ContactModel& contact,
                    double sample_rate = 240.0);

// Runs with pulleys held at their current angles for `duration` seconds and
// returns the final state.
SimState settle(const TensegrityGraph& g, const SimState& initial, double duration,
                const DynamicsSettings& settings, const ContactModel& contact);

}  // namespace tenseg
