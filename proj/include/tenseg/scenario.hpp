#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tenseg/dynamics.hpp"
#include "tenseg/gait.hpp"
#include "tenseg/io.hpp"
#include "tenseg/statics.hpp"
#include "tenseg/unfold.hpp"

namespace tenseg {

// Bad scenario document: unknown key, wrong type or a bound violation. The
// message starts with the key path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Experiment { generate, compress, collapse, actuate, crawl, unfold };

const char* to_string(Experiment e);

inline constexpr int kSummarySchemaVersion = 1;
inline constexpr const char* kOutDirEnv = "TENSEG_OUT";

struct ChainConfig {
  int modules = 1;
  bool alternate_handedness = true;
  bool operator==(const ChainConfig&) const = default;
};

// Plate direction: a collapsibility direction (face-pair normal), a strut
// axis, or an explicit vector.
struct PlateConfig {
  std::string direction = "collapsibility";  // collapsibility | strut | vector
  int index = 0;
  Vec3 vector = Vec3::UnitZ();
  double max_strain = 0.5;
  int steps = 100;
  RelaxSettings relax{};
  bool operator==(const PlateConfig& o) const {
    return direction == o.direction && index == o.index && vector == o.vector && max_strain == o.max_strain &&
           steps == o.steps && relax.tolerance == o.relax.tolerance &&
           relax.max_iterations == o.relax.max_iterations && relax.strut_diameter == o.relax.strut_diameter;
  }
};

// One run per value; parameter is a ModuleSpec field.
struct SweepConfig {
  std::string parameter;  // empty: no sweep
  std::vector<double> values;
  bool operator==(const SweepConfig&) const = default;
};

struct SimConfig {
  DynamicsSettings settings{};
  double sample_rate = 240.0;  // Hz
  double settle_time = 3.0;    // s
  bool operator==(const SimConfig&) const = default;
};

struct GaitConfig {
  ServoProfile profile{};
  double wave_offset = 1.0;  // s
  int cycles = 1;
  bool reverse_wave = false;
  bool operator==(const GaitConfig&) const = default;
};

struct UnfoldConfig {
  std::array<std::string, 2> cut{"F1", "F2"};
  UnfoldOptions options{};
  SvgOptions svg{};
  bool operator==(const UnfoldConfig& o) const {
    return cut == o.cut && options.rod_diameter == o.options.rod_diameter &&
           options.pin_diameter == o.options.pin_diameter && options.hole_diameter == o.options.hole_diameter &&
           options.housing_height == o.options.housing_height && svg.stroke_width == o.svg.stroke_width &&
           svg.housing_diameter == o.svg.housing_diameter && svg.pin_diameter == o.svg.pin_diameter &&
           svg.hole_diameter == o.svg.hole_diameter && svg.units_per_meter == o.svg.units_per_meter &&
           svg.margin == o.svg.margin && svg.labels == o.svg.labels;
  }
};

struct OutputConfig {
  std::string dir;                 // empty: --out, then $TENSEG_OUT, then "."
  std::vector<int> tracked_nodes;  // empty: nodes of the head face
  bool operator==(const OutputConfig&) const = default;
};

struct Scenario {
  Experiment experiment = Experiment::generate;
  ModuleSpec module{};
  ChainConfig chain{};
  double equilibrium_tolerance = 1e-5;  // N
  int equilibrium_max_iterations = 400000;
  PlateConfig plates{};
  SweepConfig sweep{};
  ContactModel contact{};
  SimConfig simulation{};
  GaitConfig gait{};
  UnfoldConfig unfold{};
  OutputConfig output{};
  bool operator==(const Scenario&) const = default;
};

// Strict parse: unknown keys, type mismatches and bound violations raise
// ConfigError naming the key path. Keys left out take defaults, some of
// which depend on the experiment.
Scenario parse_scenario(const Json& j);
Scenario parse_config(const std::filesystem::path& path);  // IoError if unreadable

// Every effective value, in the parse_scenario schema.
Json to_json(const Scenario& s);

struct RunOptions {
  std::filesystem::path out_dir;  // empty: scenario, then $TENSEG_OUT, then "."
  bool verbose = false;
};

struct RunResult {
  int exit_code = 0;  // 0 ok, 1 invalid input, 2 solver failure, 3 I/O
  std::string diagnostic;
  std::filesystem::path out_dir;
  std::vector<std::string> files;  // written, relative to out_dir
};

// Runs the experiment and writes its CSVs plus summary.json. Solver failures
// still write what was computed, flagged as truncated in the summary.
RunResult run_scenario(const Scenario& s, const RunOptions& opt = {});

// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace tenseg
