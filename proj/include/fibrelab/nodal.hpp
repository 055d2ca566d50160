#pragma once

#include <Eigen/Core>
#include <functional>
#include <iosfwd>
#include <vector>

#include "fibrelab/geometry.hpp"
#include "fibrelab/operators.hpp"

namespace fibrelab {

/// Samples on a rectilinear grid, periodic in s. Rows are fibre positions;
/// on a Dirichlet fibre the first and last rows are the walls.
struct ScalarField {
  int n_s = 0;
  double s_start = 0.0;
  double h_s = 0.0;
  double s_period = 0.0;
  std::vector<double> rows;
  bool fiber_periodic = true;
  double fiber_period = 0.0;
  bool has_walls = false;
  /// values[i * rows.size() + r]
  std::vector<double> values;

  int n_rows() const { return static_cast<int>(rows.size()); }
  double at(int i, int r) const { return values[static_cast<std::size_t>(i) * rows.size() + r]; }
  double s(int i) const { return s_start + i * h_s; }
};

/// Field on the operator grid. Dirichlet walls take the value of the
/// adjacent interior node, i.e. the sign of the inward normal derivative.
ScalarField field_from_vector(const BundleGeometry& geom, const GridSpec& spec,
                              const Eigen::VectorXd& v);

ScalarField sample_field(const BundleGeometry& geom, const GridSpec& spec,
                         const std::function<double(double, double)>& f);

struct Point2 {
  double s;
  double f;
};

struct Segment {
  Point2 a;
  Point2 b;
};

/// Marching-squares output. Endpoints are unwrapped within their cell.
struct NodalSet {
  std::vector<Segment> segments;
  std::vector<int> labels;
  int component_count = 0;
  /// Row index of each endpoint that lies on a grid row (an s-directed cell
  /// edge), -1 for endpoints on fibre-directed edges.
  std::vector<int> row_a;
  std::vector<int> row_b;
  /// Edge identifier of each endpoint; shared by the two cells touching it.
  std::vector<long long> edge_a;
  std::vector<long long> edge_b;
  std::vector<double> row_coords;
  bool has_walls = false;
  double h_s = 0.0;
  double s_period = 0.0;
  double fiber_period = 0.0;
  bool fiber_periodic = true;
};

/// Zero-level polylines. Saddle cells are resolved by the sign of the cell
/// average; exact zeros count as positive.
NodalSet extract_nodal_set(const ScalarField& field);

/// Number of 4-connected components of {f > 0} and {f < 0} over grid nodes.
/// Exact zeros and wall rows belong to none.
int count_nodal_domains(const ScalarField& field);

struct BaseZero {
  double s;
  double slope;
};

/// Sign changes of periodic samples, linearly interpolated.
std::vector<BaseZero> zeros_of_base(const std::vector<double>& values, double s_start, double h,
                                    double period);

/// Full fibres over the given base points, as segments no longer than `sampling`.
std::vector<Segment> fiber_set(const BundleGeometry& geom, const std::vector<double>& base_points,
                               double sampling);

/// Symmetric Hausdorff distance in the eps-independent reference metric.
/// Each set is sampled at spacing <= sampling and measured exactly against the
/// segments of the other.
double hausdorff_distance(const std::vector<Segment>& a, const std::vector<Segment>& b,
                          const BundleGeometry& geom, double sampling);

/// Clusters of nodal endpoints on u = +-1; endpoints within one cell width
/// along the same wall are merged.
int boundary_trace_components(const NodalSet& nodal);

struct GraphCheck {
  bool passed = false;
  bool inside_tubes = false;
  bool single_crossing = false;
  bool component_match = false;
  /// max over endpoints of the base distance to the nearest zero.
  double max_offset = 0.0;
};

/// Inside tubes of radius r around each zero, the nodal set meets every grid
/// row exactly once, and there is one component per zero.
GraphCheck graph_over_fiber_check(const NodalSet& nodal, const std::vector<double>& zeros,
                                  double tube_radius);

/// One row per segment: s0, f0, s1, f1, component.
void write_nodal_csv(std::ostream& out, const NodalSet& nodal);

/// Wrap-aware difference x - y reduced to [-period/2, period/2).
double periodic_delta(double x, double y, double period);

}  // namespace fibrelab
