#pragma once

#include <vector>

#include "tenseg/dynamics.hpp"

namespace tenseg {

// Trapezoidal pulley-angle signal: ramp up, hold, ramp down, rest.
struct ServoProfile {
  double amplitude = 1.6;  // rad; calibrated to about 25% axial strain
  double contract_time = 2.0;  // s
  double hold_time = 0.5;
  double release_time = 0.2;
  double period = 4.5;
  double phase_offset = 0.0;

  bool operator==(const ServoProfile&) const = default;
};

void check_profile(const ServoProfile& p);

double profile_angle(const ServoProfile& p, double t);

struct GaitProgram {
  std::vector<ServoProfile> profiles;  // one per actuated module, in chain order
  int cycles = 1;

  // cycles * period, plus the largest phase offset so the last module
  // finishes its final cycle.
  double duration() const;
  bool operator==(const GaitProgram&) const = default;
};

GaitProgram peristaltic_program(int n_modules, const ServoProfile& tmpl, double wave_offset, int cycles);

// Actuator a follows profiles[a]; time is measured from the program start.
AngleSchedule schedule(const GaitProgram& program);

struct ContractionSeries {
  std::vector<double> time;
  std::vector<double> axial_strain;
  std::vector<double> lateral_expansion;
  double axial_strain_peak = 0.0;
  double lateral_expansion_peak = 0.0;
};

// Axial strain from the distance between the module's actuated face
// centroids; lateral expansion from the widest node spread across that axis.
ContractionSeries contraction_metrics(const TensegrityGraph& g, const Trajectory& tr, int module);

struct GaitMetrics {
  double axial_strain_peak = 0.0;
  double lateral_expansion_peak = 0.0;
  double displacement_per_cycle = 0.0;  // m, along the chain's initial heading
  double mean_speed = 0.0;              // m/min
  int cycles_measured = 0;
};

// Head: centroid of faces[0] of the last module. Its position is read at
// whole periods after the first sample; the first cycle starts from rest
// rather than from the periodic gait, so it is left out of the mean.
std::vector<double> head_advance(const TensegrityGraph& g, const Trajectory& tr);
GaitMetrics locomotion_metrics(const TensegrityGraph& g, const Trajectory& tr, const GaitProgram& program);

}  // namespace tenseg
