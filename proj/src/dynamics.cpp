#include "tenseg/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "system.hpp"

namespace tenseg {

using detail::Link;
using detail::System;

std::vector<ActuatorState> actuators(const TensegrityGraph& g) {
  std::vector<ActuatorState> out;
  for (const Module& m : g.modules) {
    if (!m.hub) continue;
    if (m.tendons.size() != 6)
      throw StructureError("module " + std::to_string(m.id) + ": actuator needs 6 tendons, has " +
                           std::to_string(m.tendons.size()));
    ActuatorState a;
    a.module = m.id;
    a.hub = *m.hub;
    a.pulley_radius = m.pulley_radius;
    for (int k = 0; k < 6; ++k) {
      a.tendons[k] = m.tendons[k];
      a.base_rest[k] = g.members.at(m.tendons[k]).rest_length;
    }
    out.push_back(a);
  }
  return out;
}

SimState initial_state(const TensegrityGraph& g) {
  SimState s;
  s.positions = g.positions();
  s.velocities.assign(g.nodes.size(), Vec3::Zero());
  s.pulley_angles.assign(actuators(g).size(), 0.0);
  return s;
}

double cable_force(const Member& m, double length, double rate) {
  if (length <= m.rest_length) return 0.0;
  const double f = m.axial_stiffness * (length - m.rest_length) / m.rest_length + m.damping * rate;
  return std::max(f, 0.0);
}

double pulley_rest_length(double base, double radius, double angle) {
  return std::max(base - radius * angle, kMinTendonLength);
}

SimState apply_pulley(const SimState& s, int actuator, double angle) {
  if (!(angle >= 0)) throw ValidationError("apply_pulley: angle must be >= 0");
  if (actuator < 0 || actuator >= static_cast<int>(s.pulley_angles.size()))
    throw ValidationError("apply_pulley: no actuator " + std::to_string(actuator));
  SimState out = s;
  out.pulley_angles[actuator] = angle;
  return out;
}

std::array<double, 6> tendon_rest_lengths(const ActuatorState& a, double angle) {
  std::array<double, 6> r{};
  for (int k = 0; k < 6; ++k) r[k] = pulley_rest_length(a.base_rest[k], a.pulley_radius, angle);
  return r;
}

struct Simulator::Impl {
  System sys;
  DynamicsSettings set;
  ContactModel contact;
  std::vector<ActuatorState> acts;
  std::vector<std::array<int, 6>> tendon_links;  // index into sys.tensile, -1 if welded away
  std::vector<double> mass;
  std::size_t member_count = 0;

  std::vector<double> rests(const SimState& s) const {
    std::vector<double> r(sys.tensile.size());
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = sys.tensile[k].rest;
    for (std::size_t a = 0; a < acts.size(); ++a) {
      const auto tr = tendon_rest_lengths(acts[a], s.pulley_angles[a]);
      for (int k = 0; k < 6; ++k)
        if (tendon_links[a][k] >= 0) r[tendon_links[a][k]] = tr[k];
    }
    return r;
  }

  double limit(const std::vector<double>& rest) const {
    double kmax = 0.0, mmin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < rest.size(); ++k) kmax = std::max(kmax, sys.tensile[k].stiffness / rest[k]);
    for (double m : mass) mmin = std::min(mmin, m);
    return kmax > 0 ? 0.2 * std::sqrt(mmin / kmax) : std::numeric_limits<double>::infinity();
  }

  void check(const SimState& s) const {
    const std::size_t n = sys.particles.particle_of_node.size();
    if (s.positions.size() != n || s.velocities.size() != n)
      throw ValidationError("state has " + std::to_string(s.positions.size()) + " positions, graph has " +
                            std::to_string(n) + " nodes");
    if (s.pulley_angles.size() != acts.size())
      throw ValidationError("state has " + std::to_string(s.pulley_angles.size()) +
                            " pulley angles, graph has " + std::to_string(acts.size()) + " actuators");
  }

  // Rigid links by mass-weighted projection, interleaved with the ground.
  // Corrections act along each link's direction in `ref` (start of step), so
  // the constraint impulses are central and angular momentum is kept; pushing
  // along the predicted direction instead spins up prestressed structures.
  // `dn` collects the normal push of the ground when non-null.
  void project(std::vector<Vec3>& x, const std::vector<Vec3>& ref, const std::vector<char>& pinned,
               std::vector<double>* dn) const {
    const Vec3& nrm = contact.normal;
    for (int pass = 0; pass < set.max_constraint_passes; ++pass) {
      for (const Link& l : sys.rigid) {
        const double wi = pinned[l.i] ? 0.0 : 1.0 / mass[l.i];
        const double wj = pinned[l.j] ? 0.0 : 1.0 / mass[l.j];
        if (wi + wj == 0.0) continue;
        const Vec3 d = x[l.j] - x[l.i];
        Vec3 r = ref[l.j] - ref[l.i];
        double dr = d.dot(r);
        if (dr < 0.5 * d.norm() * r.norm()) {
          r = d;
          dr = d.squaredNorm();
        }
        if (dr == 0.0) continue;
        const Vec3 corr = ((d.squaredNorm() - l.rest * l.rest) / (2.0 * (wi + wj) * dr)) * r;
        x[l.i] += wi * corr;
        x[l.j] -= wj * corr;
      }
      if (contact.enabled) {
        for (std::size_t p = 0; p < x.size(); ++p) {
          const double pen = contact.ground_height - nrm.dot(x[p]);
          if (pen <= 0.0) continue;
          x[p] += pen * nrm;
          if (dn) (*dn)[p] += pen;
        }
      }
      if (pass + 1 < set.constraint_passes) continue;
      double err = 0.0;
      for (const Link& l : sys.rigid)
        err = std::max(err, std::abs((x[l.j] - x[l.i]).norm() - l.rest) / l.rest);
      if (err <= set.constraint_tolerance) break;
    }
  }
};

Simulator::Simulator(const TensegrityGraph& g, const DynamicsSettings& settings,
                     const ContactModel& contact)
    : impl_(std::make_unique<Impl>()) {
  if (!(settings.dt > 0)) throw ValidationError("DynamicsSettings.dt must be > 0");
  if (settings.node_drag < 0) throw ValidationError("DynamicsSettings.node_drag must be >= 0");
  if (settings.constraint_passes < 1 || settings.max_constraint_passes < settings.constraint_passes)
    throw ValidationError("DynamicsSettings: need 1 <= constraint_passes <= max_constraint_passes");
  if (!(contact.mu_static >= contact.mu_kinetic && contact.mu_kinetic >= 0))
    throw ValidationError("ContactModel: need mu_static >= mu_kinetic >= 0");
  if (!(contact.stick_velocity >= 0)) throw ValidationError("ContactModel.stick_velocity must be >= 0");
  if (contact.enabled && std::abs(contact.normal.norm() - 1.0) > 1e-9)
    throw ValidationError("ContactModel.normal must be a unit vector");
  Impl& m = *impl_;
  m.sys = detail::compile(g);
  m.set = settings;
  m.contact = contact;
  m.acts = actuators(g);
  m.mass = m.sys.particles.mass;
  m.member_count = g.members.size();
  for (double ms : m.mass)
    if (!(ms > 0)) throw ValidationError("every node needs a positive mass");
  for (const ActuatorState& a : m.acts) {
    std::array<int, 6> idx;
    idx.fill(-1);
    for (int k = 0; k < 6; ++k)
      for (std::size_t t = 0; t < m.sys.tensile.size(); ++t)
        if (m.sys.tensile[t].member == a.tendons[k]) idx[k] = static_cast<int>(t);
    m.tendon_links.push_back(idx);
  }
}

Simulator::~Simulator() = default;
Simulator::Simulator(Simulator&&) noexcept = default;
Simulator& Simulator::operator=(Simulator&&) noexcept = default;

SimState Simulator::step(const SimState& s) const {
  const Impl& m = *impl_;
  m.check(s);
  const double dt = m.set.dt;
  const auto rest = m.rests(s);
  if (const double lim = m.limit(rest); dt > lim) {
    std::ostringstream os;
    os << "dt = " << dt << " s exceeds the stability limit " << lim << " s";
    throw ValidationError(os.str());
  }
  const auto& pm = m.sys.particles;
  const int n = pm.size();
  auto x = detail::to_particles(pm, s.positions);
  auto v = detail::to_particles(pm, s.velocities);
  const auto v0 = v;

  std::vector<Vec3> f(n, Vec3::Zero());
  for (std::size_t k = 0; k < m.sys.tensile.size(); ++k) {
    const Link& l = m.sys.tensile[k];
    const Vec3 d = x[l.j] - x[l.i];
    const double len = d.norm();
    if (len <= rest[k]) continue;
    const Vec3 u = d / len;
    const double rate = (v[l.j] - v[l.i]).dot(u);
    const double t = std::max(l.stiffness * (len - rest[k]) / rest[k] + l.damping * rate, 0.0);
    f[l.i] += t * u;
    f[l.j] -= t * u;
  }
  for (int p = 0; p < n; ++p) {
    // drag acts on every node of a welded particle
    f[p] -= m.set.node_drag * static_cast<double>(pm.nodes_of_particle[p].size()) * v[p];
    f[p] += m.mass[p] * m.set.gravity;
    v[p] += (dt / m.mass[p]) * f[p];
  }
  const auto x_old = x;
  for (int p = 0; p < n; ++p) x[p] += dt * v[p];

  std::vector<char> pinned(n, 0);
  std::vector<double> dn(n, 0.0);
  m.project(x, x_old, pinned, &dn);

  if (m.contact.enabled) {
    const Vec3& nrm = m.contact.normal;
    bool any = false;
    for (int p = 0; p < n; ++p) {
      if (dn[p] <= 0.0) continue;
      const Vec3 step = x[p] - x_old[p];
      const Vec3 tang = step - step.dot(nrm) * nrm;
      const double slip = tang.norm();
      const Vec3 vt = v0[p] - v0[p].dot(nrm) * nrm;
      if (vt.norm() <= m.contact.stick_velocity && slip <= m.contact.mu_static * dn[p]) {
        x[p] -= tang;
        pinned[p] = 1;
      } else if (slip > 0.0) {
        x[p] -= std::min(1.0, m.contact.mu_kinetic * dn[p] / slip) * tang;
      }
      any = true;
    }
    if (any) m.project(x, x_old, pinned, nullptr);
  }

  SimState out;
  out.time = s.time + dt;
  out.pulley_angles = s.pulley_angles;
  for (int p = 0; p < n; ++p) {
    v[p] = (x[p] - x_old[p]) / dt;
    if (!x[p].allFinite() || !v[p].allFinite()) throw IntegrationFault("non-finite node state", out.time);
  }
  out.positions = detail::to_nodes(pm, x);
  out.velocities = detail::to_nodes(pm, v);
  if (m.contact.enabled) {
    for (std::size_t node = 0; node < out.positions.size(); ++node) {
      const int p = pm.particle_of_node[node];
      if (dn[p] > 0.0 || m.contact.normal.dot(x[p]) - m.contact.ground_height <= 1e-9)
        out.contact_set.push_back(static_cast<int>(node));
    }
  }
  return out;
}

double Simulator::kinetic_energy(const SimState& s) const {
  const Impl& m = *impl_;
  m.check(s);
  const auto v = detail::to_particles(m.sys.particles, s.velocities);
  double e = 0.0;
  for (std::size_t p = 0; p < v.size(); ++p) e += 0.5 * m.mass[p] * v[p].squaredNorm();
  return e;
}

double Simulator::mechanical_energy(const SimState& s) const {
  const Impl& m = *impl_;
  const auto x = detail::to_particles(m.sys.particles, s.positions);
  const auto rest = m.rests(s);
  double e = kinetic_energy(s);
  for (std::size_t k = 0; k < m.sys.tensile.size(); ++k) {
    const Link& l = m.sys.tensile[k];
    const double dl = (x[l.j] - x[l.i]).norm() - rest[k];
    if (dl > 0) e += 0.5 * l.stiffness / rest[k] * dl * dl;
  }
  for (std::size_t p = 0; p < x.size(); ++p) e -= m.mass[p] * m.set.gravity.dot(x[p]);
  return e;
}

double Simulator::constraint_error(const SimState& s) const {
  const Impl& m = *impl_;
  m.check(s);
  const auto x = detail::to_particles(m.sys.particles, s.positions);
  double err = 0.0;
  for (const Link& l : m.sys.rigid) err = std::max(err, std::abs((x[l.j] - x[l.i]).norm() - l.rest));
  return err;
}

std::vector<double> Simulator::tensile_member_forces(const SimState& s) const {
  const Impl& m = *impl_;
  m.check(s);
  const auto& pm = m.sys.particles;
  const auto x = detail::to_particles(pm, s.positions);
  const auto v = detail::to_particles(pm, s.velocities);
  const auto rest = m.rests(s);
  std::vector<double> out(m.member_count, 0.0);
  for (std::size_t k = 0; k < m.sys.tensile.size(); ++k) {
    const Link& l = m.sys.tensile[k];
    const Vec3 d = x[l.j] - x[l.i];
    const double len = d.norm();
    if (len <= rest[k]) continue;
    const double rate = (v[l.j] - v[l.i]).dot(d / len);
    out[l.member] = std::max(l.stiffness * (len - rest[k]) / rest[k] + l.damping * rate, 0.0);
  }
  return out;
}

double Simulator::stability_limit(const SimState& s) const {
  impl_->check(s);
  return impl_->limit(impl_->rests(s));
}

double stability_limit(const TensegrityGraph& g, const SimState& s) {
  ContactModel c;
  c.enabled = false;
  return Simulator(g, {}, c).stability_limit(s);
}

SimState step(const TensegrityGraph& g, const SimState& s, double dt, const ContactModel& contact,
              DynamicsSettings settings) {
  settings.dt = dt;
  return Simulator(g, settings, contact).step(s);
}

Trajectory simulate(const TensegrityGraph& g, const SimState& initial, const AngleSchedule& schedule,
                    double duration, const DynamicsSettings& settings, const ContactModel& contact,
                    double sample_rate) {
  if (!(duration > 0)) throw ValidationError("simulate: duration must be > 0");
  if (!(sample_rate > 0)) throw ValidationError("simulate: sample_rate must be > 0");
  const Simulator sim(g, settings, contact);
  Trajectory tr;
  tr.sample_rate = sample_rate;
  const long long samples = std::llround(duration * sample_rate);
  const double t0 = initial.time;
  SimState s = initial;
  long long done = 0;
  for (long long k = 0; k < samples; ++k) {
    const long long target = std::llround(k / (sample_rate * settings.dt));
    for (; done < target; ++done) {
      for (std::size_t a = 0; a < s.pulley_angles.size(); ++a) {
        const double angle = schedule ? schedule(static_cast<int>(a), s.time - t0) : 0.0;
        if (!(angle >= 0)) throw ValidationError("simulate: schedule produced a negative pulley angle");
        s.pulley_angles[a] = angle;
      }
      s = sim.step(s);
      s.time = t0 + (done + 1) * settings.dt;
    }
    tr.samples.push_back(s);
  }
  return tr;
}

SimState settle(const TensegrityGraph& g, const SimState& initial, double duration,
                const DynamicsSettings& settings, const ContactModel& contact) {
  if (!(duration >= 0)) throw ValidationError("settle: duration must be >= 0");
  const Simulator sim(g, settings, contact);
  SimState s = initial;
  const long long steps = std::llround(duration / settings.dt);
  for (long long k = 0; k < steps; ++k) {
    s = sim.step(s);
    s.time = initial.time + (k + 1) * settings.dt;
  }
  return s;
}

}  // namespace tenseg
