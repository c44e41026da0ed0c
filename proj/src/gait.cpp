#include "tenseg/gait.hpp"

#include <algorithm>
#include <cmath>

namespace tenseg {

void check_profile(const ServoProfile& p) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ValidationError("ServoProfile: " + what);
  };
  need(p.amplitude >= 0, "amplitude must be >= 0");
  need(p.contract_time >= 0 && p.hold_time >= 0 && p.release_time >= 0 && p.phase_offset >= 0,
       "times must be >= 0");
  need(p.period > 0, "period must be > 0");
  need(p.contract_time + p.hold_time + p.release_time <= p.period,
       "contract_time + hold_time + release_time must not exceed period");
}

double profile_angle(const ServoProfile& p, double t) {
  if (!(t >= 0)) throw ValidationError("profile_angle: t must be >= 0");
  double u = t - p.phase_offset;
  if (u < 0) return 0.0;
  u = std::fmod(u, p.period);
  const double up = p.contract_time, top = up + p.hold_time, down = top + p.release_time;
  if (u < up) return p.amplitude * u / up;
  if (u < top) return p.amplitude;
  if (u < down) return p.amplitude * (down - u) / p.release_time;
  return 0.0;
}

double GaitProgram::duration() const {
  double period = 0.0, offset = 0.0;
  for (const ServoProfile& p : profiles) {
    period = std::max(period, p.period);
    offset = std::max(offset, p.phase_offset);
  }
  return cycles * period + offset;
}

GaitProgram peristaltic_program(int n_modules, const ServoProfile& tmpl, double wave_offset, int cycles) {
  if (n_modules < 1) throw ValidationError("peristaltic_program: need at least one module");
  if (!(wave_offset >= 0)) throw ValidationError("peristaltic_program: wave_offset must be >= 0");
  if (cycles < 1) throw ValidationError("peristaltic_program: cycles must be >= 1");
  check_profile(tmpl);
  GaitProgram g;
  g.cycles = cycles;
  for (int i = 0; i < n_modules; ++i) {
    ServoProfile p = tmpl;
    p.phase_offset = tmpl.phase_offset + i * wave_offset;
    g.profiles.push_back(p);
  }
  return g;
}

AngleSchedule schedule(const GaitProgram& program) {
  for (const ServoProfile& p : program.profiles) check_profile(p);
  return [profiles = program.profiles](int actuator, double t) {
    if (actuator < 0 || actuator >= static_cast<int>(profiles.size())) return 0.0;
    return profile_angle(profiles[actuator], std::max(t, 0.0));
  };
}

namespace {

Vec3 centroid(const TensegrityGraph& g, const SimState& s, int face) {
  Vec3 c = Vec3::Zero();
  for (int n : g.faces.at(face).nodes) c += s.positions[n];
  return c / 3.0;
}

}  // namespace

ContractionSeries contraction_metrics(const TensegrityGraph& g, const Trajectory& tr, int module) {
  const Module& m = g.module(module);
  if (!m.actuated_pair) throw MetricError("module " + std::to_string(module) + " has no actuated face pair");
  if (tr.samples.empty()) throw MetricError("empty trajectory");
  const auto [fa, fb] = g.face_pair(module, *m.actuated_pair);
  std::vector<int> body;
  for (int n : m.nodes)
    if (!m.hub || n != *m.hub) body.push_back(n);

  auto measure = [&](const SimState& s) {
    const Vec3 d = centroid(g, s, fb) - centroid(g, s, fa);
    const double h = d.norm();
    const Vec3 a = d / h;
    double w = 0.0;
    for (std::size_t i = 0; i < body.size(); ++i)
      for (std::size_t j = i + 1; j < body.size(); ++j) {
        const Vec3 r = s.positions[body[j]] - s.positions[body[i]];
        w = std::max(w, (r - r.dot(a) * a).norm());
      }
    return std::pair{h, w};
  };

  ContractionSeries out;
  const auto [h0, w0] = measure(tr.samples.front());
  for (const SimState& s : tr.samples) {
    const auto [h, w] = measure(s);
    out.time.push_back(s.time);
    out.axial_strain.push_back(1.0 - h / h0);
    out.lateral_expansion.push_back(w / w0 - 1.0);
    out.axial_strain_peak = std::max(out.axial_strain_peak, out.axial_strain.back());
    out.lateral_expansion_peak = std::max(out.lateral_expansion_peak, out.lateral_expansion.back());
  }
  return out;
}

std::vector<double> head_advance(const TensegrityGraph& g, const Trajectory& tr) {
  if (g.modules.empty()) throw MetricError("graph has no modules");
  if (tr.samples.empty()) throw MetricError("empty trajectory");
  const Module& front = g.modules.back();
  if (front.faces.empty()) throw MetricError("front module has no faces");
  const int head_face = front.faces[0];

  // Heading: from the body's mean position to the head, levelled.
  const SimState& s0 = tr.samples.front();
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : s0.positions) mean += p;
  mean /= static_cast<double>(s0.positions.size());
  const Vec3 h0 = centroid(g, s0, head_face);
  Vec3 u = h0 - mean;
  u.z() = 0.0;
  if (u.norm() == 0.0) throw MetricError("cannot determine the chain heading");
  u.normalize();

  std::vector<double> x;
  x.reserve(tr.samples.size());
  for (const SimState& s : tr.samples) x.push_back((centroid(g, s, head_face) - h0).dot(u));
  return x;
}

GaitMetrics locomotion_metrics(const TensegrityGraph& g, const Trajectory& tr, const GaitProgram& program) {
  if (program.profiles.empty()) throw MetricError("program has no profiles");
  const double period = program.profiles.front().period;
  for (const ServoProfile& p : program.profiles)
    if (p.period != period) throw MetricError("profiles have different periods");
  if (tr.samples.size() < 2 || !(tr.sample_rate > 0)) throw MetricError("trajectory too short");

  const double t0 = tr.samples.front().time;
  const double span = tr.samples.back().time - t0;
  const int cycles = static_cast<int>(std::floor(span / period + 1e-9));
  if (cycles < 2) throw MetricError("need at least 2 complete cycles, trajectory covers " + std::to_string(cycles));

  const auto x = head_advance(g, tr);
  auto at = [&](double t) {
    const auto k = static_cast<std::size_t>(std::llround((t - t0) * tr.sample_rate));
    return x[std::min(k, x.size() - 1)];
  };

  GaitMetrics out;
  out.cycles_measured = cycles - 1;
  out.displacement_per_cycle = (at(t0 + cycles * period) - at(t0 + period)) / out.cycles_measured;
  out.mean_speed = out.displacement_per_cycle / period * 60.0;
  for (const Module& m : g.modules) {
    if (!m.actuated_pair) continue;
    const auto c = contraction_metrics(g, tr, m.id);
    out.axial_strain_peak = std::max(out.axial_strain_peak, c.axial_strain_peak);
    out.lateral_expansion_peak = std::max(out.lateral_expansion_peak, c.lateral_expansion_peak);
  }
  return out;
}

}  // namespace tenseg
