#include "tenseg/io.hpp"

namespace tenseg {

namespace {

Json vec(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }
Json vec(const Vec2& v) { return Json::array({v.x(), v.y()}); }

Vec3 vec3(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw StructureError("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json circle(const Circle& c) { return Json{{"center", vec(c.center)}, {"diameter", c.diameter}}; }

}  // namespace

Json to_json(const TensegrityGraph& g) {
  Json j;
  j["schema"] = "tenseg.graph";
  j["schema_version"] = kGraphSchemaVersion;
  j["units"] = "SI";
  Json nodes = Json::array();
  for (const Node& n : g.nodes)
    nodes.push_back({{"id", n.id}, {"label", n.label}, {"position", vec(n.position)}, {"mass", n.mass}});
  j["nodes"] = nodes;
  Json members = Json::array();
  for (const Member& m : g.members) {
    Json e{{"kind", to_string(m.kind)},
           {"endpoints", {m.endpoints[0], m.endpoints[1]}},
           {"rest_length", m.rest_length},
           {"axial_stiffness", m.axial_stiffness},
           {"damping", m.damping}};
    if (m.kind == MemberKind::cable)
      e["section"] = {{"thickness", m.section.thickness}, {"width", m.section.width}};
    members.push_back(e);
  }
  j["members"] = members;
  Json faces = Json::array();
  for (const Face& f : g.faces)
    faces.push_back({{"nodes", {f.nodes[0], f.nodes[1], f.nodes[2]}}, {"module", f.module}, {"pair", f.pair}});
  j["faces"] = faces;
  Json welds = Json::array();
  for (const Weld& w : g.welds) welds.push_back({w.a, w.b});
  j["welds"] = welds;
  Json modules = Json::array();
  for (const Module& m : g.modules) {
    Json e{{"id", m.id},
           {"nodes", m.nodes},
           {"faces", m.faces},
           {"hub", m.hub ? Json(*m.hub) : Json(nullptr)},
           {"actuated_pair", m.actuated_pair ? Json(*m.actuated_pair) : Json(nullptr)},
           {"tendons", m.tendons},
           {"strut_length", m.strut_length},
           {"pulley_radius", m.pulley_radius}};
    modules.push_back(e);
  }
  j["modules"] = modules;
  return j;
}

TensegrityGraph graph_from_json(const Json& j) {
  try {
    if (j.at("schema") != "tenseg.graph") throw StructureError("not a tenseg.graph document");
    if (j.at("schema_version").get<int>() != kGraphSchemaVersion)
      throw StructureError("unsupported graph schema_version " + j.at("schema_version").dump());
    TensegrityGraph g;
    for (const Json& e : j.at("nodes")) {
      Node n;
      n.id = e.at("id").get<int>();
      n.label = e.at("label").get<std::string>();
      n.position = vec3(e.at("position"));
      n.mass = e.at("mass").get<double>();
      if (n.id != static_cast<int>(g.nodes.size())) throw StructureError("node ids must be 0..n-1 in order");
      g.nodes.push_back(n);
    }
    const int nn = static_cast<int>(g.nodes.size());
    auto node_id = [&](const Json& v) {
      const int id = v.get<int>();
      if (id < 0 || id >= nn) throw StructureError("node id " + std::to_string(id) + " out of range");
      return id;
    };
    for (const Json& e : j.at("members")) {
      Member m;
      m.kind = member_kind_from_string(e.at("kind").get<std::string>());
      m.endpoints = {node_id(e.at("endpoints").at(0)), node_id(e.at("endpoints").at(1))};
      m.rest_length = e.at("rest_length").get<double>();
      m.axial_stiffness = e.at("axial_stiffness").get<double>();
      m.damping = e.at("damping").get<double>();
      if (e.contains("section")) {
        m.section.thickness = e["section"].at("thickness").get<double>();
        m.section.width = e["section"].at("width").get<double>();
      }
      g.members.push_back(m);
    }
    for (const Json& e : j.at("faces")) {
      Face f;
      for (int k = 0; k < 3; ++k) f.nodes[k] = node_id(e.at("nodes").at(k));
      f.module = e.at("module").get<int>();
      f.pair = e.at("pair").get<int>();
      g.faces.push_back(f);
    }
    for (const Json& e : j.at("welds")) g.welds.push_back({node_id(e.at(0)), node_id(e.at(1))});
    for (const Json& e : j.at("modules")) {
      Module m;
      m.id = e.at("id").get<int>();
      m.nodes = e.at("nodes").get<std::vector<int>>();
      m.faces = e.at("faces").get<std::vector<int>>();
      if (!e.at("hub").is_null()) m.hub = e["hub"].get<int>();
      if (!e.at("actuated_pair").is_null()) m.actuated_pair = e["actuated_pair"].get<int>();
      m.tendons = e.at("tendons").get<std::vector<int>>();
      m.strut_length = e.at("strut_length").get<double>();
      m.pulley_radius = e.at("pulley_radius").get<double>();
      g.modules.push_back(m);
    }
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw StructureError(std::string("malformed graph document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw StructureError(std::string("malformed graph document: ") + e.what());
  }
}

Json to_json(const PlanarLayout& l) {
  Json j;
  j["schema"] = "tenseg.layout";
  j["schema_version"] = 1;
  j["units"] = "m";
  Json tris = Json::array();
  for (const LayoutTriangle& t : l.triangles) {
    Json labels = Json::array();
    for (int p : t.points) labels.push_back(l.point_labels[p]);
    tris.push_back({{"face", t.face},
                    {"nodes", {t.nodes[0], t.nodes[1], t.nodes[2]}},
                    {"points", {t.points[0], t.points[1], t.points[2]}},
                    {"labels", labels}});
  }
  j["triangles"] = tris;
  Json points = Json::array();
  for (std::size_t p = 0; p < l.points.size(); ++p)
    points.push_back({{"label", l.point_labels[p]},
                      {"node", l.point_nodes[p]},
                      {"position", vec(l.points[p])},
                      {"housing", circle(l.housings[p])},
                      {"pin", circle(l.latch_features[p].pin)},
                      {"hole", circle(l.latch_features[p].hole)}});
  j["points"] = points;
  Json joints = Json::array();
  for (const Joint& jt : l.joints) joints.push_back({{jt.tri_a, jt.corner_a}, {jt.tri_b, jt.corner_b}});
  j["joints"] = joints;
  j["cut"] = {l.cut[0], l.cut[1]};
  j["housing_height"] = l.housing_height;
  j["tendon_anchors"] = l.tendon_anchors;
  return j;
}

}  // namespace tenseg
