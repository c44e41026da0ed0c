#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "tenseg/core.hpp"

namespace tenseg {

struct Circle {
  Vec2 center = Vec2::Zero();
  double diameter = 0.0;  // m
};

struct LatchFeature {
  Circle pin;
  Circle hole;
};

struct LayoutTriangle {
  int face = 0;                  // index into graph.faces
  std::array<int, 3> nodes{};    // graph node ids, in face order
  std::array<int, 3> points{};   // indices into PlanarLayout::points
};

// Two triangle corners that sit on the same layout point.
struct Joint {
  int tri_a = 0, corner_a = 0;
  int tri_b = 0, corner_b = 0;
};

struct PlanarLayout {
  std::vector<LayoutTriangle> triangles;  // module face order
  std::vector<Vec2> points;               // m
  std::vector<std::string> point_labels;  // node labels; cut copies end in a/b
  std::vector<int> point_nodes;           // graph node id behind each point
  std::vector<Joint> joints;
  std::vector<Circle> housings;           // one per point
  std::vector<LatchFeature> latch_features;  // one per point
  std::array<int, 2> cut{};
  double housing_height = 0.004;            // m, print metadata only
  std::vector<std::string> tendon_anchors;  // labels of tendon anchor nodes

  const std::string& corner_label(int tri, int corner) const {
    return point_labels[triangles[tri].points[corner]];
  }
};

struct UnfoldOptions {
  double rod_diameter = 0.002;   // housing inner diameter, m
  double pin_diameter = 0.0022;
  double hole_diameter = 0.002;
  double housing_height = 0.004;
};

// The two strut F end nodes of module 0.
std::array<int, 2> canonical_cut(const TensegrityGraph& g);

// Flat layout of module 0's cable net. The 8 cable triangles meet at single
// nodes; cutting two nodes leaves a strip of three 4-triangle rings, laid
// out around a square hole flanked by two rhombus holes. Only cuts at two
// nodes on opposite edges of one triangle ring admit that strip.
PlanarLayout unfold_icosahedron(const TensegrityGraph& g, std::array<int, 2> cut,
                                const UnfoldOptions& opt = {});
PlanarLayout unfold_icosahedron(const TensegrityGraph& g);

// Triangle pairs whose interiors overlap by more than `tol` (m) along every
// separating axis.
std::vector<std::pair<int, int>> overlapping_triangles(const PlanarLayout& layout, double tol = 1e-12);

struct RefoldVerdict {
  bool isomorphic = false;
  int cables = 0;          // distinct layout edges
  int cables_matched = 0;  // layout edges that are cables of the module
  int struts_matched = 0;  // X1-X2 label pairs that are strut ends
  std::vector<std::string> mismatched_nodes;
  std::vector<std::string> degree_defects;
  std::vector<std::string> messages;
};

// Rebuilds the cable graph from the layout (cut copies merged by label
// unless merge_cut_copies is false) and compares it with module 0.
RefoldVerdict refold_check(const PlanarLayout& layout, const TensegrityGraph& g,
                           bool merge_cut_copies = true);

struct SvgOptions {
  double stroke_width = 0.001;  // m, cable width
  double housing_diameter = 0.002;
  double pin_diameter = 0.0022;
  double hole_diameter = 0.002;
  double units_per_meter = 1000.0;  // user units are mm
  double margin = 0.005;            // m
  bool labels = true;
};

void check_svg_options(const SvgOptions& opt);

std::string export_svg(const PlanarLayout& layout, const SvgOptions& opt = {});

}  // namespace tenseg
