#include "tenseg/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <unistd.h>

namespace tenseg {

namespace fs = std::filesystem;

const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::generate: return "generate";
    case Experiment::compress: return "compress";
    case Experiment::collapse: return "collapse";
    case Experiment::actuate: return "actuate";
    case Experiment::crawl: return "crawl";
    case Experiment::unfold: return "unfold";
  }
  return "?";
}

namespace {

const std::vector<std::string> kSweepable = {"strut_length", "pre_stretch", "cable_thickness", "cable_width",
                                             "cable_modulus"};

std::string type_name(const Json& j) { return j.type_name(); }

class Reader {
 public:
  Reader(const Json* j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_->is_object()) throw ConfigError(where() + ": expected an object, got " + type_name(*j_));
  }

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  void number(const char* k, double& out) {
    if (const Json* v = find(k)) {
      if (!v->is_number()) throw ConfigError(key(k) + ": expected a number, got " + type_name(*v));
      out = v->get<double>();
    }
  }
  void integer(const char* k, int& out) {
    if (const Json* v = find(k)) {
      if (!v->is_number_integer()) throw ConfigError(key(k) + ": expected an integer, got " + type_name(*v));
      out = v->get<int>();
    }
  }
  void boolean(const char* k, bool& out) {
    if (const Json* v = find(k)) {
      if (!v->is_boolean()) throw ConfigError(key(k) + ": expected true or false, got " + type_name(*v));
      out = v->get<bool>();
    }
  }
  void string(const char* k, std::string& out) {
    if (const Json* v = find(k)) {
      if (!v->is_string()) throw ConfigError(key(k) + ": expected a string, got " + type_name(*v));
      out = v->get<std::string>();
    }
  }
  void optional_number(const char* k, std::optional<double>& out) {
    if (const Json* v = find(k)) {
      if (v->is_null()) out.reset();
      else if (v->is_number()) out = v->get<double>();
      else throw ConfigError(key(k) + ": expected a number or null, got " + type_name(*v));
    }
  }
  void vec3(const char* k, Vec3& out) {
    if (const Json* v = find(k)) {
      if (!v->is_array() || v->size() != 3) throw ConfigError(key(k) + ": expected an array of 3 numbers");
      for (int i = 0; i < 3; ++i) {
        if (!(*v)[i].is_number()) throw ConfigError(key(k) + "[" + std::to_string(i) + "]: expected a number");
        out[i] = (*v)[i].get<double>();
      }
    }
  }
  void numbers(const char* k, std::vector<double>& out) {
    if (const Json* v = find(k)) {
      if (!v->is_array()) throw ConfigError(key(k) + ": expected an array of numbers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number()) throw ConfigError(key(k) + "[" + std::to_string(i) + "]: expected a number");
        out.push_back((*v)[i].get<double>());
      }
    }
  }
  void integers(const char* k, std::vector<int>& out) {
    if (const Json* v = find(k)) {
      if (!v->is_array()) throw ConfigError(key(k) + ": expected an array of integers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number_integer())
          throw ConfigError(key(k) + "[" + std::to_string(i) + "]: expected an integer");
        out.push_back((*v)[i].get<int>());
      }
    }
  }
  void strings(const char* k, std::vector<std::string>& out) {
    if (const Json* v = find(k)) {
      if (!v->is_array()) throw ConfigError(key(k) + ": expected an array of strings");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_string()) throw ConfigError(key(k) + "[" + std::to_string(i) + "]: expected a string");
        out.push_back((*v)[i].get<std::string>());
      }
    }
  }

  // Sub-object; an absent key reads as {}.
  Reader object(const char* k) {
    static const Json empty = Json::object();
    const Json* v = find(k);
    return Reader(v ? v : &empty, key(k));
  }

  void finish() const {
    for (auto it = j_->begin(); it != j_->end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(key(it.key()) + ": unknown key");
  }

 private:
  std::string where() const { return path_.empty() ? "document" : path_; }
  const Json* find(const char* k) {
    used_.insert(k);
    const auto it = j_->find(k);
    return it == j_->end() ? nullptr : &*it;
  }

  const Json* j_;
  std::string path_;
  std::set<std::string> used_;
};

Experiment experiment_from(const std::string& name) {
  for (Experiment e : {Experiment::generate, Experiment::compress, Experiment::collapse, Experiment::actuate,
                       Experiment::crawl, Experiment::unfold})
    if (name == to_string(e)) return e;
  throw ConfigError("experiment: unknown experiment '" + name +
                    "' (expected generate, compress, collapse, actuate, crawl or unfold)");
}

void set_field(ModuleSpec& m, const std::string& field, double v) {
  if (field == "strut_length") m.strut_length = v;
  else if (field == "pre_stretch") m.pre_stretch = v;
  else if (field == "cable_thickness") m.cable_section.thickness = v;
  else if (field == "cable_width") m.cable_section.width = v;
  else if (field == "cable_modulus") m.cable_modulus = v;
}

void check_module(const ModuleSpec& m, const std::string& path) {
  const auto v = check_spec(m);
  if (v.empty()) return;
  std::string msg;
  for (const std::string& e : v) {
    // "ModuleSpec.<field> = ..." -> "<path>.<field>: ModuleSpec.<field> = ..."
    const auto dot = e.find('.'), sp = e.find(' ');
    const std::string field = dot != std::string::npos && sp != std::string::npos ? e.substr(dot + 1, sp - dot - 1) : "";
    msg += (msg.empty() ? "" : "; ") + path + "." + field + ": " + e;
  }
  throw ConfigError(msg);
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key + ": " + what);
}

bool is_node_label(const std::string& l) {
  return l.size() == 2 && l[0] >= 'A' && l[0] <= 'F' && (l[1] == '1' || l[1] == '2');
}

}  // namespace

Scenario parse_scenario(const Json& j) {
  Reader r(&j, "");
  Scenario s;
  std::string name;
  r.string("experiment", name);
  if (name.empty()) throw ConfigError("experiment: required key missing");
  s.experiment = experiment_from(name);
  int version = kSummarySchemaVersion;
  r.integer("schema_version", version);
  require(version == kSummarySchemaVersion, "schema_version", "unsupported version " + std::to_string(version));

  const bool dynamic = s.experiment == Experiment::actuate || s.experiment == Experiment::crawl;
  s.module.with_actuator = dynamic;
  s.chain.modules = s.experiment == Experiment::crawl ? 3 : 1;
  if (s.experiment == Experiment::collapse) {
    s.plates.max_strain = 0.9;
    s.plates.steps = 180;
  }
  s.gait.cycles = s.experiment == Experiment::crawl ? 5 : 1;

  {
    Reader m = r.object("module");
    m.number("strut_length", s.module.strut_length);
    m.number("pre_stretch", s.module.pre_stretch);
    m.number("cable_thickness", s.module.cable_section.thickness);
    m.number("cable_width", s.module.cable_section.width);
    m.number("cable_modulus", s.module.cable_modulus);
    m.number("node_mass", s.module.node_mass);
    m.boolean("with_actuator", s.module.with_actuator);
    m.number("pulley_radius", s.module.pulley_radius);
    m.optional_number("tendon_stiffness", s.module.tendon_stiffness);
    m.number("cable_damping", s.module.cable_damping);
    m.finish();
  }
  {
    Reader c = r.object("chain");
    c.integer("modules", s.chain.modules);
    c.boolean("alternate_handedness", s.chain.alternate_handedness);
    c.finish();
  }
  {
    Reader e = r.object("equilibrium");
    e.number("tolerance", s.equilibrium_tolerance);
    e.integer("max_iterations", s.equilibrium_max_iterations);
    e.finish();
  }
  {
    Reader p = r.object("plates");
    p.string("direction", s.plates.direction);
    p.integer("index", s.plates.index);
    p.vec3("vector", s.plates.vector);
    p.number("max_strain", s.plates.max_strain);
    p.integer("steps", s.plates.steps);
    p.number("tolerance", s.plates.relax.tolerance);
    p.integer("max_iterations", s.plates.relax.max_iterations);
    p.number("strut_diameter", s.plates.relax.strut_diameter);
    p.finish();
  }
  {
    Reader w = r.object("sweep");
    w.string("parameter", s.sweep.parameter);
    w.numbers("values", s.sweep.values);
    w.finish();
  }
  {
    Reader c = r.object("contact");
    c.boolean("enabled", s.contact.enabled);
    c.number("ground_height", s.contact.ground_height);
    c.vec3("normal", s.contact.normal);
    c.number("mu_static", s.contact.mu_static);
    c.number("mu_kinetic", s.contact.mu_kinetic);
    c.number("stick_velocity", s.contact.stick_velocity);
    c.finish();
  }
  {
    Reader d = r.object("simulation");
    DynamicsSettings& ds = s.simulation.settings;
    d.number("dt", ds.dt);
    d.vec3("gravity", ds.gravity);
    d.number("node_drag", ds.node_drag);
    d.integer("constraint_passes", ds.constraint_passes);
    d.integer("max_constraint_passes", ds.max_constraint_passes);
    d.number("constraint_tolerance", ds.constraint_tolerance);
    d.number("sample_rate", s.simulation.sample_rate);
    d.number("settle_time", s.simulation.settle_time);
    d.finish();
  }
  {
    Reader g = r.object("gait");
    ServoProfile& p = s.gait.profile;
    g.number("amplitude", p.amplitude);
    g.number("contract_time", p.contract_time);
    g.number("hold_time", p.hold_time);
    g.number("release_time", p.release_time);
    g.number("period", p.period);
    g.number("phase_offset", p.phase_offset);
    g.number("wave_offset", s.gait.wave_offset);
    g.integer("cycles", s.gait.cycles);
    g.boolean("reverse_wave", s.gait.reverse_wave);
    g.finish();
  }
  {
    Reader u = r.object("unfold");
    std::vector<std::string> cut(s.unfold.cut.begin(), s.unfold.cut.end());
    u.strings("cut", cut);
    require(cut.size() == 2, u.key("cut"), "expected 2 node labels");
    s.unfold.cut = {cut[0], cut[1]};
    u.number("rod_diameter", s.unfold.options.rod_diameter);
    u.number("pin_diameter", s.unfold.options.pin_diameter);
    u.number("hole_diameter", s.unfold.options.hole_diameter);
    u.number("housing_height", s.unfold.options.housing_height);
    u.number("stroke_width", s.unfold.svg.stroke_width);
    u.number("units_per_meter", s.unfold.svg.units_per_meter);
    u.number("margin", s.unfold.svg.margin);
    u.boolean("labels", s.unfold.svg.labels);
    u.finish();
    s.unfold.svg.housing_diameter = s.unfold.options.rod_diameter;
    s.unfold.svg.pin_diameter = s.unfold.options.pin_diameter;
    s.unfold.svg.hole_diameter = s.unfold.options.hole_diameter;
  }
  {
    Reader o = r.object("output");
    o.string("dir", s.output.dir);
    o.integers("tracked_nodes", s.output.tracked_nodes);
    o.finish();
  }
  r.finish();

  // Bounds.
  check_module(s.module, "module");
  if (dynamic) require(s.module.with_actuator, "module.with_actuator", std::string("must be true for ") + name);
  require(s.chain.modules >= 1 && s.chain.modules <= 50, "chain.modules", "must be in 1..50");
  require(s.equilibrium_tolerance > 0, "equilibrium.tolerance", "must be > 0");
  require(s.equilibrium_max_iterations >= 1, "equilibrium.max_iterations", "must be >= 1");

  const PlateConfig& p = s.plates;
  if (p.direction == "collapsibility") require(p.index >= 0 && p.index < 4, "plates.index", "must be in 0..3");
  else if (p.direction == "strut") require(p.index >= 0 && p.index < 6, "plates.index", "must be in 0..5");
  else if (p.direction == "vector") require(p.vector.norm() > 0, "plates.vector", "must be nonzero");
  else throw ConfigError("plates.direction: expected collapsibility, strut or vector, got '" + p.direction + "'");
  require(p.max_strain > 0 && p.max_strain < 1, "plates.max_strain", "must be in (0, 1)");
  require(p.steps >= 1, "plates.steps", "must be >= 1");
  require(p.relax.tolerance > 0, "plates.tolerance", "must be > 0");
  require(p.relax.max_iterations >= 1, "plates.max_iterations", "must be >= 1");
  require(p.relax.strut_diameter >= 0, "plates.strut_diameter", "must be >= 0");

  if (s.sweep.parameter.empty()) {
    require(s.sweep.values.empty(), "sweep.values", "given without sweep.parameter");
  } else {
    require(std::find(kSweepable.begin(), kSweepable.end(), s.sweep.parameter) != kSweepable.end(),
            "sweep.parameter", "cannot sweep '" + s.sweep.parameter +
                                   "' (expected strut_length, pre_stretch, cable_thickness, cable_width or cable_modulus)");
    require(!s.sweep.values.empty(), "sweep.values", "must not be empty");
    for (std::size_t i = 0; i < s.sweep.values.size(); ++i) {
      ModuleSpec m = s.module;
      set_field(m, s.sweep.parameter, s.sweep.values[i]);
      check_module(m, "sweep.values[" + std::to_string(i) + "]");
    }
  }

  const ContactModel& c = s.contact;
  require(c.mu_kinetic >= 0, "contact.mu_kinetic", "must be >= 0");
  require(c.mu_static >= c.mu_kinetic, "contact.mu_static", "must be >= contact.mu_kinetic");
  require(c.stick_velocity >= 0, "contact.stick_velocity", "must be >= 0");
  require(std::abs(c.normal.norm() - 1.0) <= 1e-9, "contact.normal", "must be a unit vector");

  const SimConfig& sim = s.simulation;
  require(sim.settings.dt > 0, "simulation.dt", "must be > 0");
  require(sim.settings.node_drag >= 0, "simulation.node_drag", "must be >= 0");
  require(sim.settings.constraint_passes >= 1, "simulation.constraint_passes", "must be >= 1");
  require(sim.settings.max_constraint_passes >= sim.settings.constraint_passes, "simulation.max_constraint_passes",
          "must be >= simulation.constraint_passes");
  require(sim.settings.constraint_tolerance > 0, "simulation.constraint_tolerance", "must be > 0");
  require(sim.sample_rate > 0, "simulation.sample_rate", "must be > 0");
  require(sim.sample_rate * sim.settings.dt <= 1.0, "simulation.sample_rate", "must not exceed 1 / simulation.dt");
  require(sim.settle_time >= 0, "simulation.settle_time", "must be >= 0");

  try {
    check_profile(s.gait.profile);
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("gait: ") + e.what());
  }
  require(s.gait.wave_offset >= 0, "gait.wave_offset", "must be >= 0");
  require(s.gait.cycles >= (s.experiment == Experiment::crawl ? 2 : 1), "gait.cycles",
          s.experiment == Experiment::crawl ? "must be >= 2 for crawl (the first cycle is not measured)"
                                            : "must be >= 1");

  for (int k = 0; k < 2; ++k)
    require(is_node_label(s.unfold.cut[k]), "unfold.cut[" + std::to_string(k) + "]",
            "expected a node label A1..F2, got '" + s.unfold.cut[k] + "'");
  require(s.unfold.cut[0] != s.unfold.cut[1], "unfold.cut", "names the same node twice");
  const UnfoldOptions& uo = s.unfold.options;
  require(uo.rod_diameter > 0, "unfold.rod_diameter", "must be > 0");
  require(uo.hole_diameter > 0, "unfold.hole_diameter", "must be > 0");
  require(uo.pin_diameter > uo.hole_diameter, "unfold.pin_diameter", "must exceed unfold.hole_diameter");
  require(uo.housing_height >= 0, "unfold.housing_height", "must be >= 0");
  require(s.unfold.svg.stroke_width > 0, "unfold.stroke_width", "must be > 0");
  require(s.unfold.svg.units_per_meter > 0, "unfold.units_per_meter", "must be > 0");
  require(s.unfold.svg.margin >= 0, "unfold.margin", "must be >= 0");

  for (std::size_t i = 0; i < s.output.tracked_nodes.size(); ++i)
    require(s.output.tracked_nodes[i] >= 0, "output.tracked_nodes[" + std::to_string(i) + "]", "must be >= 0");
  return s;
}

Scenario parse_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  Json j;
  try {
    j = Json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  return parse_scenario(j);
}

Json to_json(const Scenario& s) {
  const auto vec = [](const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); };
  Json j;
  j["schema_version"] = kSummarySchemaVersion;
  j["experiment"] = to_string(s.experiment);
  const ModuleSpec& m = s.module;
  j["module"] = {{"strut_length", m.strut_length},
                 {"pre_stretch", m.pre_stretch},
                 {"cable_thickness", m.cable_section.thickness},
                 {"cable_width", m.cable_section.width},
                 {"cable_modulus", m.cable_modulus},
                 {"node_mass", m.node_mass},
                 {"with_actuator", m.with_actuator},
                 {"pulley_radius", m.pulley_radius},
                 {"tendon_stiffness", m.tendon_stiffness ? Json(*m.tendon_stiffness) : Json(nullptr)},
                 {"cable_damping", m.cable_damping}};
  j["chain"] = {{"modules", s.chain.modules}, {"alternate_handedness", s.chain.alternate_handedness}};
  j["equilibrium"] = {{"tolerance", s.equilibrium_tolerance}, {"max_iterations", s.equilibrium_max_iterations}};
  const PlateConfig& p = s.plates;
  j["plates"] = {{"direction", p.direction},   {"index", p.index},
                 {"vector", vec(p.vector)},     {"max_strain", p.max_strain},
                 {"steps", p.steps},            {"tolerance", p.relax.tolerance},
                 {"max_iterations", p.relax.max_iterations}, {"strut_diameter", p.relax.strut_diameter}};
  j["sweep"] = {{"parameter", s.sweep.parameter}, {"values", s.sweep.values}};
  const ContactModel& c = s.contact;
  j["contact"] = {{"enabled", c.enabled},       {"ground_height", c.ground_height}, {"normal", vec(c.normal)},
                  {"mu_static", c.mu_static},   {"mu_kinetic", c.mu_kinetic},       {"stick_velocity", c.stick_velocity}};
  const DynamicsSettings& d = s.simulation.settings;
  j["simulation"] = {{"dt", d.dt},
                     {"gravity", vec(d.gravity)},
                     {"node_drag", d.node_drag},
                     {"constraint_passes", d.constraint_passes},
                     {"max_constraint_passes", d.max_constraint_passes},
                     {"constraint_tolerance", d.constraint_tolerance},
                     {"sample_rate", s.simulation.sample_rate},
                     {"settle_time", s.simulation.settle_time}};
  const ServoProfile& g = s.gait.profile;
  j["gait"] = {{"amplitude", g.amplitude},         {"contract_time", g.contract_time},
               {"hold_time", g.hold_time},         {"release_time", g.release_time},
               {"period", g.period},               {"phase_offset", g.phase_offset},
               {"wave_offset", s.gait.wave_offset}, {"cycles", s.gait.cycles},
               {"reverse_wave", s.gait.reverse_wave}};
  const UnfoldConfig& u = s.unfold;
  j["unfold"] = {{"cut", {u.cut[0], u.cut[1]}},
                 {"rod_diameter", u.options.rod_diameter},
                 {"pin_diameter", u.options.pin_diameter},
                 {"hole_diameter", u.options.hole_diameter},
                 {"housing_height", u.options.housing_height},
                 {"stroke_width", u.svg.stroke_width},
                 {"units_per_meter", u.svg.units_per_meter},
                 {"margin", u.svg.margin},
                 {"labels", u.svg.labels}};
  j["output"] = {{"dir", s.output.dir}, {"tracked_nodes", s.output.tracked_nodes}};
  return j;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot replace " + path.string() + ": " + ec.message());
  }
}

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) text_ += (i ? "," : "") + header[i];
    text_ += "\n";
  }
  void row(const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) text_ += (i ? "," : "") + fmt(v[i]);
    text_ += "\n";
  }
  const std::string& str() const { return text_; }

 private:
  std::string text_;
};

struct Run {
  const Scenario& s;
  Scenario& effective;
  const RunOptions& opt;
  fs::path dir;
  std::vector<std::string> files;
  Json metrics = Json::array();
  Json diagnostics = Json::object();
  bool truncated = false;
  std::string failure;

  void log(const std::string& msg) const {
    if (opt.verbose) std::cerr << "[tenseg] " << msg << "\n";
  }
  void write(const std::string& name, const std::string& content) {
    write_file_atomic(dir / name, content);
    files.push_back(name);
    log("wrote " + (dir / name).string());
  }
  void metric(const std::string& name, double value, const std::string& unit, const std::string& point = "",
              const Json& reference = nullptr) {
    Json m{{"name", name}, {"value", value}, {"unit", unit}};
    if (!point.empty()) m["point"] = point;
    if (!reference.is_null()) m["reference"] = reference;
    metrics.push_back(m);
  }
};

struct SweepPoint {
  std::string label;  // "" without a sweep
  std::string stem;   // file name suffix
  ModuleSpec spec;
};

std::vector<SweepPoint> sweep_points(const Scenario& s) {
  if (s.sweep.parameter.empty()) return {{"", "", s.module}};
  std::vector<SweepPoint> out;
  for (double v : s.sweep.values) {
    SweepPoint p{s.sweep.parameter + "=" + fmt(v), "_" + s.sweep.parameter + "_" + fmt(v), s.module};
    set_field(p.spec, s.sweep.parameter, v);
    out.push_back(p);
  }
  return out;
}

TensegrityGraph build(const Scenario& s, const ModuleSpec& spec) {
  if (s.chain.modules == 1) return build_icosahedron(spec);
  return build_chain(spec, s.chain.modules, ChainOptions{.alternate_handedness = s.chain.alternate_handedness});
}

Vec3 plate_direction(const TensegrityGraph& g, const PlateConfig& p) {
  if (p.direction == "collapsibility") return collapsibility_directions(g, 0)[p.index];
  if (p.direction == "strut") {
    const Member& m = g.members.at(p.index);
    if (m.kind != MemberKind::strut) throw StructureError("member " + std::to_string(p.index) + " is not a strut");
    return (g.nodes[m.endpoints[1]].position - g.nodes[m.endpoints[0]].position).normalized();
  }
  return p.vector.normalized();
}

std::vector<double> module_extent(const TensegrityGraph& g, const std::vector<Vec3>& pos) {
  Vec3 lo = Vec3::Constant(1e300), hi = Vec3::Constant(-1e300);
  for (int n : g.modules[0].nodes) {
    if (g.modules[0].hub && n == *g.modules[0].hub) continue;
    lo = lo.cwiseMin(pos[n]);
    hi = hi.cwiseMax(pos[n]);
  }
  return {hi.x() - lo.x(), hi.y() - lo.y(), hi.z() - lo.z()};
}

void run_generate(Run& r) {
  const Scenario& s = r.s;
  const TensegrityGraph g = build(s, s.module);
  const ValidationReport rep = validate(g);
  r.log("equilibrating " + std::to_string(g.nodes.size()) + " nodes");
  const EquilibriumResult eq = equilibrate(g, g.positions(), s.equilibrium_tolerance, s.equilibrium_max_iterations);
  r.diagnostics["equilibrium"] = {{"converged", eq.converged},
                                  {"iterations", eq.iterations},
                                  {"residual_max_N", eq.residual_max}};
  r.diagnostics["validation_violations"] = rep.violations;
  if (!eq.converged) {
    r.truncated = true;
    r.failure = "equilibrium did not converge";
  }

  r.write("graph.json", to_json(g).dump(2) + "\n");
  Csv nodes({"node", "x_m", "y_m", "z_m"});
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    nodes.row({static_cast<double>(i), eq.positions[i].x(), eq.positions[i].y(), eq.positions[i].z()});
  r.write("nodes.csv", nodes.str());
  const auto forces = member_forces(g, eq.positions);
  Csv members({"member", "node_a", "node_b", "rest_length_m", "length_m", "force_N"});
  for (std::size_t k = 0; k < g.members.size(); ++k) {
    const Member& m = g.members[k];
    members.row({static_cast<double>(k), static_cast<double>(m.endpoints[0]), static_cast<double>(m.endpoints[1]),
                 m.rest_length, (eq.positions[m.endpoints[1]] - eq.positions[m.endpoints[0]]).norm(), forces[k]});
  }
  r.write("members.csv", members.str());

  const Module& mod = g.modules[0];
  const double L = mod.strut_length;
  double cable = 0.0, tension = 0.0, compression = 0.0;
  int nc = 0, ns = 0;
  for (std::size_t k = 0; k < g.members.size(); ++k) {
    const Member& m = g.members[k];
    if (m.kind == MemberKind::cable) {
      cable = (g.nodes[m.endpoints[1]].position - g.nodes[m.endpoints[0]].position).norm();
      tension += forces[k], ++nc;
    } else if (m.kind == MemberKind::strut) {
      compression += -forces[k], ++ns;
    }
  }
  const double height = module_extent(g, g.positions())[2];
  const double pi = std::acos(-1.0);
  r.metric("strut_length", L, "m");
  r.metric("cable_length", cable, "m", "", 0.0475);
  r.metric("height", height, "m", "", 0.078);
  r.metric("sphere_volume", pi / 6.0 * height * height * height, "m^3", "", 248e-6);
  std::vector<Vec3> hull;
  for (int n : mod.nodes)
    if (!mod.hub || n != *mod.hub) hull.push_back(eq.positions[n]);
  r.metric("hull_volume", hull_volume(hull), "m^3");
  if (nc > 0 && tension > 0)
    r.metric("strut_to_cable_force_ratio", (compression / ns) / (tension / nc), "1", "", std::sqrt(6.0));
  r.metric("equilibrium_residual", eq.residual_max, "N");
}

void run_plates(Run& r, bool collapse) {
  const Scenario& s = r.s;
  const char* stem = collapse ? "collapse" : "compress";
  for (const SweepPoint& pt : sweep_points(s)) {
    const TensegrityGraph g = build(s, pt.spec);
    const Vec3 dir = plate_direction(g, s.plates);
    r.log(std::string(stem) + (pt.label.empty() ? "" : " " + pt.label));
    ForceDisplacementCurve curve;
    if (collapse) {
      const CollapseResult c = collapse_test(g, dir, s.plates.max_strain, s.plates.steps, s.plates.relax);
      curve = c.curve;
      r.metric("volume_ratio", c.volume_ratio, "1", pt.label, 0.16);
      r.metric("volume_reduction", 100.0 * (1.0 - c.volume_ratio), "%", pt.label, 84.0);
      r.metric("final_height_ratio", c.final_height_ratio, "1", pt.label);
    } else {
      curve = compress_test(g, dir, s.plates.max_strain, s.plates.steps, s.plates.relax);
    }
    Csv csv({"displacement_m", "force_N"});
    for (const auto& smp : curve.samples) csv.row({smp.displacement, smp.force});
    r.write(std::string(stem) + pt.stem + ".csv", csv.str());

    double peak = 0.0;
    for (const auto& smp : curve.samples) peak = std::max(peak, smp.force);
    r.metric("peak_force", peak, "N", pt.label);
    if (!curve.samples.empty()) r.metric("final_force", curve.samples.back().force, "N", pt.label);
    const double reach = curve.initial_height > 0 && !curve.samples.empty()
                             ? curve.samples.back().displacement / curve.initial_height
                             : 0.0;
    if (reach >= 0.1 - 1e-12) r.metric("secant_stiffness_0_10", secant_stiffness(curve, 0.0, 0.1), "N/m", pt.label);
    Json d{{"initial_height_m", curve.initial_height}, {"steps", curve.steps}, {"truncated", curve.truncated},
           {"diagnostic", curve.diagnostic}, {"direction", {dir.x(), dir.y(), dir.z()}}};
    if (!pt.label.empty()) d["point"] = pt.label;
    r.diagnostics[stem].push_back(d);
    if (curve.truncated) {
      r.truncated = true;
      r.failure = std::string(stem) + (pt.label.empty() ? "" : " " + pt.label) + ": " + curve.diagnostic;
    }
  }
}

std::vector<int> tracked_nodes(Run& r, const TensegrityGraph& g) {
  std::vector<int> nodes = r.s.output.tracked_nodes;
  if (nodes.empty()) {
    const Module& head = g.modules.back();
    for (int n : g.faces.at(head.faces[0]).nodes) nodes.push_back(n);
  }
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i] >= static_cast<int>(g.nodes.size()))
      throw ValidationError("output.tracked_nodes[" + std::to_string(i) + "]: node " + std::to_string(nodes[i]) +
                            " does not exist (graph has " + std::to_string(g.nodes.size()) + " nodes)");
  r.effective.output.tracked_nodes = nodes;
  return nodes;
}

void write_trajectory(Run& r, const TensegrityGraph& g, const Trajectory& tr) {
  const std::vector<int> nodes = tracked_nodes(r, g);
  std::vector<std::string> head{"time_s"};
  for (int n : nodes)
    for (const char* ax : {"x", "y", "z"}) head.push_back("n" + std::to_string(n) + "_" + ax + "_m");
  const std::size_t na = tr.samples.empty() ? 0 : tr.samples.front().pulley_angles.size();
  for (std::size_t a = 0; a < na; ++a) head.push_back("pulley" + std::to_string(a) + "_rad");
  Csv csv(head);
  for (const SimState& st : tr.samples) {
    std::vector<double> row{st.time};
    for (int n : nodes)
      for (int k = 0; k < 3; ++k) row.push_back(st.positions[n][k]);
    for (double a : st.pulley_angles) row.push_back(a);
    csv.row(row);
  }
  r.write("trajectory.csv", csv.str());
}

void write_metric_series(Run& r, const TensegrityGraph& g, const Trajectory& tr, const std::vector<double>& head_x) {
  std::vector<ContractionSeries> series;
  for (const Module& m : g.modules)
    if (m.actuated_pair) series.push_back(contraction_metrics(g, tr, m.id));
  Csv csv({"time_s", "axial_strain", "lateral_expansion", "head_x_m"});
  for (std::size_t k = 0; k < tr.samples.size(); ++k) {
    double a = 0.0, l = 0.0;
    for (const auto& c : series) a += c.axial_strain[k], l += c.lateral_expansion[k];
    const double n = series.empty() ? 1.0 : static_cast<double>(series.size());
    csv.row({tr.samples[k].time, a / n, l / n, head_x[k]});
  }
  r.write("metrics.csv", csv.str());
}

GaitProgram program_for(const Scenario& s, int n) {
  GaitProgram prog = peristaltic_program(n, s.gait.profile, s.gait.wave_offset, s.gait.cycles);
  if (s.gait.reverse_wave)
    for (int i = 0; i < n; ++i)
      prog.profiles[i].phase_offset = s.gait.profile.phase_offset + (n - 1 - i) * s.gait.wave_offset;
  return prog;
}

SimState settled(Run& r, const TensegrityGraph& g) {
  r.log("settling for " + fmt(r.s.simulation.settle_time) + " s");
  SimState st = settle(g, initial_state(g), r.s.simulation.settle_time, r.s.simulation.settings, r.s.contact);
  st.time = 0.0;
  return st;
}

void run_actuate(Run& r) {
  const Scenario& s = r.s;
  ModuleSpec spec = s.module;
  TensegrityGraph g = build_icosahedron(spec);
  g = resting_on_face(g, g.face_pair(0, *g.modules[0].actuated_pair)[1]);
  const SimState st = settled(r, g);
  const GaitProgram prog = program_for(s, 1);
  r.log("actuating for " + fmt(prog.duration()) + " s");
  const Trajectory tr =
      simulate(g, st, schedule(prog), prog.duration(), s.simulation.settings, s.contact, s.simulation.sample_rate);
  write_trajectory(r, g, tr);
  const int head_face = g.modules[0].faces[0];
  auto head = [&](const SimState& x) {
    Vec3 c = Vec3::Zero();
    for (int n : g.faces[head_face].nodes) c += x.positions[n] / 3.0;
    return c.x();
  };
  std::vector<double> hx;
  for (const SimState& x : tr.samples) hx.push_back(head(x) - head(tr.samples.front()));
  write_metric_series(r, g, tr, hx);
  const ContractionSeries c = contraction_metrics(g, tr, 0);
  r.metric("axial_strain_peak", c.axial_strain_peak, "1", "", 0.25);
  r.metric("lateral_expansion_peak", c.lateral_expansion_peak, "1", "", 0.09);
  r.metric("axial_compression", 100.0 * c.axial_strain_peak, "%", "", 25.0);
  r.metric("lateral_expansion", 100.0 * c.lateral_expansion_peak, "%", "", 9.0);
  r.diagnostics["samples"] = tr.samples.size();
}

void run_crawl(Run& r) {
  const Scenario& s = r.s;
  const TensegrityGraph g =
      build_chain(s.module, s.chain.modules, ChainOptions{.alternate_handedness = s.chain.alternate_handedness});
  const SimState st = settled(r, g);
  const GaitProgram prog = program_for(s, s.chain.modules);
  r.log("crawling for " + fmt(prog.duration()) + " s");
  const Trajectory tr =
      simulate(g, st, schedule(prog), prog.duration(), s.simulation.settings, s.contact, s.simulation.sample_rate);
  write_trajectory(r, g, tr);
  write_metric_series(r, g, tr, head_advance(g, tr));
  const GaitMetrics m = locomotion_metrics(g, tr, prog);
  r.metric("displacement_per_cycle", m.displacement_per_cycle, "m", "", Json::array({0.0065, 0.015}));
  r.metric("mean_speed", m.mean_speed, "m/min", "", 0.9);
  r.metric("axial_strain_peak", m.axial_strain_peak, "1", "", 0.25);
  r.metric("lateral_expansion_peak", m.lateral_expansion_peak, "1", "", 0.09);
  r.diagnostics["cycles_measured"] = m.cycles_measured;
  r.diagnostics["samples"] = tr.samples.size();
}

void run_unfold(Run& r) {
  const Scenario& s = r.s;
  const TensegrityGraph g = build_icosahedron(s.module);
  std::array<int, 2> cut{-1, -1};
  for (int k = 0; k < 2; ++k)
    for (const Node& n : g.nodes)
      if (n.label == s.unfold.cut[k]) cut[k] = n.id;
  const PlanarLayout layout = unfold_icosahedron(g, cut, s.unfold.options);
  const RefoldVerdict v = refold_check(layout, g);
  r.write("layout.svg", export_svg(layout, s.unfold.svg));
  r.write("layout.json", to_json(layout).dump(2) + "\n");
  double err = 0.0;
  for (const LayoutTriangle& t : layout.triangles)
    for (int k = 0; k < 3; ++k) {
      const double flat = (layout.points[t.points[(k + 1) % 3]] - layout.points[t.points[k]]).norm();
      const double space = (g.nodes[t.nodes[(k + 1) % 3]].position - g.nodes[t.nodes[k]].position).norm();
      err = std::max(err, std::abs(flat - space));
    }
  r.metric("triangles", static_cast<double>(layout.triangles.size()), "1");
  r.metric("joints", static_cast<double>(layout.joints.size()), "1");
  r.metric("points", static_cast<double>(layout.points.size()), "1");
  r.metric("max_edge_length_error", err, "m");
  r.metric("overlapping_triangle_pairs", static_cast<double>(overlapping_triangles(layout).size()), "1");
  r.metric("cables_matched", v.cables_matched, "1");
  r.metric("struts_matched", v.struts_matched, "1");
  r.diagnostics["refold"] = {{"isomorphic", v.isomorphic},
                             {"mismatched_nodes", v.mismatched_nodes},
                             {"degree_defects", v.degree_defects},
                             {"messages", v.messages}};
  if (!v.isomorphic) {
    r.truncated = true;
    r.failure = "refold check failed";
  }
}

}  // namespace

RunResult run_scenario(const Scenario& s, const RunOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  RunResult res;
  Scenario effective = s;
  if (!opt.out_dir.empty()) res.out_dir = opt.out_dir;
  else if (!s.output.dir.empty()) res.out_dir = s.output.dir;
  else if (const char* env = std::getenv(kOutDirEnv); env && *env) res.out_dir = env;
  else res.out_dir = ".";
  effective.output.dir = res.out_dir.string();

  std::error_code ec;
  fs::create_directories(res.out_dir, ec);
  if (ec) {
    res.exit_code = 3;
    res.diagnostic = "cannot create output directory " + res.out_dir.string() + ": " + ec.message();
    return res;
  }

  Run r{s, effective, opt, res.out_dir, {}, Json::array(), Json::object(), false, {}};
  std::string status = "ok";
  try {
    switch (s.experiment) {
      case Experiment::generate: run_generate(r); break;
      case Experiment::compress: run_plates(r, false); break;
      case Experiment::collapse: run_plates(r, true); break;
      case Experiment::actuate: run_actuate(r); break;
      case Experiment::crawl: run_crawl(r); break;
      case Experiment::unfold: run_unfold(r); break;
    }
    if (r.truncated) {
      res.exit_code = 2;
      status = "solver_failure";
      res.diagnostic = r.failure;
    }
  } catch (const IoError& e) {
    res.exit_code = 3;
    status = "io_error";
    res.diagnostic = e.what();
  } catch (const ConfigError& e) {
    res.exit_code = 1;
    status = "invalid_input";
    res.diagnostic = e.what();
  } catch (const std::invalid_argument& e) {  // ValidationError
    res.exit_code = 1;
    status = "invalid_input";
    res.diagnostic = e.what();
  } catch (const UnfoldError& e) {
    res.exit_code = 1;
    status = "invalid_input";
    res.diagnostic = e.what();
  } catch (const std::runtime_error& e) {  // IntegrationFault, MetricError, StructureError
    res.exit_code = 2;
    status = "solver_failure";
    r.truncated = true;
    res.diagnostic = e.what();
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Json summary;
  summary["schema"] = "tenseg.run_summary";
  summary["schema_version"] = kSummarySchemaVersion;
  summary["experiment"] = to_string(s.experiment);
  summary["status"] = status;
  summary["exit_code"] = res.exit_code;
  summary["truncated"] = r.truncated;
  summary["diagnostic"] = res.diagnostic;
  summary["config"] = to_json(effective);
  summary["metrics"] = r.metrics;
  summary["diagnostics"] = r.diagnostics;
  summary["outputs"] = r.files;
  summary["wall_time_s"] = wall;
  try {
    r.write("summary.json", summary.dump(2) + "\n");
  } catch (const IoError& e) {
    if (res.exit_code == 0 || res.exit_code == 2) {
      res.exit_code = 3;
      res.diagnostic = e.what();
    }
  }
  res.files = r.files;
  return res;
}

}  // namespace tenseg
