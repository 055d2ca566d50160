#include "fibrelab/nodal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>

#include "fibrelab/error.hpp"

namespace fibrelab {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<unsigned char> rank_;
};

ScalarField empty_field(const BundleGeometry& geom, const GridSpec& spec, Grid& g) {
  g = make_grid(geom, spec);
  ScalarField field;
  field.n_s = g.n_s;
  field.s_start = g.s_start;
  field.h_s = g.h_s;
  field.s_period = g.s_period;
  field.fiber_periodic = !g.dirichlet;
  field.fiber_period = g.f_extent;
  field.has_walls = g.dirichlet;
  if (g.dirichlet) field.rows.push_back(-1.0);
  for (int j = 0; j < g.n_f; ++j) field.rows.push_back(g.f(j));
  if (g.dirichlet) field.rows.push_back(1.0);
  field.values.assign(static_cast<std::size_t>(g.n_s) * field.rows.size(), 0.0);
  return field;
}

template <class Get>
void fill_field(ScalarField& field, const Grid& g, Get&& get) {
  const int rows = field.n_rows();
  const int off = field.has_walls ? 1 : 0;
  for (int i = 0; i < g.n_s; ++i) {
    for (int j = 0; j < g.n_f; ++j) {
      field.values[static_cast<std::size_t>(i) * rows + j + off] = get(i, j);
    }
    if (field.has_walls) {
      field.values[static_cast<std::size_t>(i) * rows] = get(i, 0);
      field.values[static_cast<std::size_t>(i) * rows + rows - 1] = get(i, g.n_f - 1);
    }
  }
}

double point_segment(double px, double py, double ax, double ay, double bx, double by) {
  const double dx = bx - ax;
  const double dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - ax - t * dx, py - ay - t * dy);
}

double directed_hausdorff(const std::vector<Segment>& a, const std::vector<Segment>& b,
                          const BundleGeometry& geom, double sampling) {
  const double sp = base_period(geom);
  const bool fper = !fiber_dirichlet(geom);
  const double fp = fiber_extent(geom);
  auto wrap_into = [](double x, double p) { return x - p * std::floor(x / p); };

  // Per segment of b: midpoint and half-extent along s, for a cheap lower bound.
  std::vector<double> mid_s(b.size());
  std::vector<double> half_s(b.size());
  for (std::size_t k = 0; k < b.size(); ++k) {
    mid_s[k] = 0.5 * (b[k].a.s + b[k].b.s);
    half_s[k] = 0.5 * std::abs(b[k].b.s - b[k].a.s);
  }

  double worst = 0.0;
  for (const Segment& seg : a) {
    const double scale0 = reference_fiber_scale(geom, wrap_into(seg.a.s, sp),
                                                 fper ? wrap_into(seg.a.f, fp) : seg.a.f);
    const double len = std::hypot(seg.b.s - seg.a.s, scale0 * (seg.b.f - seg.a.f));
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / sampling)));
    for (int q = 0; q <= pieces; ++q) {
      const double t = static_cast<double>(q) / pieces;
      const double ps = seg.a.s + t * (seg.b.s - seg.a.s);
      const double pf = seg.a.f + t * (seg.b.f - seg.a.f);
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < b.size(); ++k) {
        const double shift_s = periodic_delta(mid_s[k], ps, sp) - (mid_s[k] - ps);
        const double lower = std::abs(mid_s[k] + shift_s - ps) - half_s[k];
        if (lower >= best) continue;
        const Segment& o = b[k];
        double shift_f = 0.0;
        if (fper) {
          const double mf = 0.5 * (o.a.f + o.b.f);
          shift_f = periodic_delta(mf, pf, fp) - (mf - pf);
        }
        const double ms = 0.5 * (ps + mid_s[k] + shift_s);
        const double mf = 0.5 * (pf + 0.5 * (o.a.f + o.b.f) + shift_f);
        const double c = reference_fiber_scale(geom, wrap_into(ms, sp), fper ? wrap_into(mf, fp) : mf);
        const double d = point_segment(ps, c * pf, o.a.s + shift_s, c * (o.a.f + shift_f),
                                       o.b.s + shift_s, c * (o.b.f + shift_f));
        best = std::min(best, d);
      }
      worst = std::max(worst, best);
    }
  }
  return worst;
}

}  // namespace

double periodic_delta(double x, double y, double period) {
  double d = std::fmod(x - y, period);
  if (d >= 0.5 * period) d -= period;
  if (d < -0.5 * period) d += period;
  return d;
}

ScalarField field_from_vector(const BundleGeometry& geom, const GridSpec& spec,
                              const Eigen::VectorXd& v) {
  Grid g;
  ScalarField field = empty_field(geom, spec, g);
  if (v.size() != g.size()) throw Error(ErrorKind::InvalidArgument, "vector does not match grid");
  fill_field(field, g, [&](int i, int j) { return v[g.index(i, j)]; });
  return field;
}

ScalarField sample_field(const BundleGeometry& geom, const GridSpec& spec,
                         const std::function<double(double, double)>& f) {
  Grid g;
  ScalarField field = empty_field(geom, spec, g);
  fill_field(field, g, [&](int i, int j) { return f(g.s(i), g.f(j)); });
  return field;
}

NodalSet extract_nodal_set(const ScalarField& field) {
  const int ns = field.n_s;
  const int nr = field.n_rows();
  std::size_t zeros = 0;
  for (double x : field.values) zeros += (x == 0.0);
  if (zeros * 100 > field.values.size()) {
    throw Error(ErrorKind::DegenerateField, "more than 1% of the samples are exactly zero");
  }

  NodalSet out;
  out.row_coords = field.rows;
  out.has_walls = field.has_walls;
  out.h_s = field.h_s;
  out.s_period = field.s_period;
  out.fiber_period = field.fiber_period;
  out.fiber_periodic = field.fiber_periodic;

  auto s_edge = [nr](int i, int r) { return 2LL * (static_cast<long long>(i) * nr + r); };
  auto f_edge = [nr](int i, int r) { return 2LL * (static_cast<long long>(i) * nr + r) + 1; };

  const int cell_rows = field.fiber_periodic ? nr : nr - 1;
  for (int i = 0; i < ns; ++i) {
    const int i1 = (i + 1) % ns;
    const double s0 = field.s(i);
    const double s1 = s0 + field.h_s;
    for (int r = 0; r < cell_rows; ++r) {
      const int r1 = (r + 1) % nr;
      const double f0 = field.rows[r];
      const double f1 = r + 1 < nr ? field.rows[r + 1] : field.rows[0] + field.fiber_period;
      const double v[4] = {field.at(i, r), field.at(i1, r), field.at(i1, r1), field.at(i, r1)};
      const bool pos[4] = {v[0] >= 0.0, v[1] >= 0.0, v[2] >= 0.0, v[3] >= 0.0};

      struct Cross {
        Point2 p;
        long long edge;
        int row;
      };
      auto lerp = [&](int e) -> Cross {
        auto t = [&](int p, int q) { return v[p] / (v[p] - v[q]); };
        switch (e) {
          case 0: return {{s0 + t(0, 1) * field.h_s, f0}, s_edge(i, r), r};
          case 1: return {{s1, f0 + t(1, 2) * (f1 - f0)}, f_edge(i1, r), -1};
          case 2: return {{s0 + t(3, 2) * field.h_s, f1}, s_edge(i, r1), r1};
          default: return {{s0, f0 + t(0, 3) * (f1 - f0)}, f_edge(i, r), -1};
        }
      };
      auto emit = [&](int e, int g) {
        const Cross a = lerp(e);
        const Cross b = lerp(g);
        out.segments.push_back({a.p, b.p});
        out.edge_a.push_back(a.edge);
        out.edge_b.push_back(b.edge);
        out.row_a.push_back(a.row);
        out.row_b.push_back(b.row);
      };

      int crossing[4];
      int nc = 0;
      for (int e = 0; e < 4; ++e) {
        if (pos[e] != pos[(e + 1) % 4]) crossing[nc++] = e;
      }
      if (nc == 2) {
        emit(crossing[0], crossing[1]);
      } else if (nc == 4) {
        const bool centre = 0.25 * (v[0] + v[1] + v[2] + v[3]) >= 0.0;
        if (centre == pos[0]) {
          emit(0, 1);
          emit(2, 3);
        } else {
          emit(3, 0);
          emit(1, 2);
        }
      }
    }
  }

  DisjointSets sets(static_cast<std::size_t>(2) * ns * nr);
  for (std::size_t k = 0; k < out.segments.size(); ++k) {
    sets.unite(static_cast<std::size_t>(out.edge_a[k]), static_cast<std::size_t>(out.edge_b[k]));
  }
  std::vector<int> relabel(static_cast<std::size_t>(2) * ns * nr, -1);
  for (std::size_t k = 0; k < out.segments.size(); ++k) {
    const std::size_t root = sets.find(static_cast<std::size_t>(out.edge_a[k]));
    if (relabel[root] < 0) relabel[root] = out.component_count++;
    out.labels.push_back(relabel[root]);
  }
  return out;
}

int count_nodal_domains(const ScalarField& field) {
  const int ns = field.n_s;
  const int nr = field.n_rows();
  const int r_lo = field.has_walls ? 1 : 0;
  const int r_hi = field.has_walls ? nr - 1 : nr;
  DisjointSets sets(field.values.size());
  auto id = [nr](int i, int r) { return static_cast<std::size_t>(i) * nr + r; };
  auto sign = [&](int i, int r) {
    const double x = field.at(i, r);
    return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0);
  };
  for (int i = 0; i < ns; ++i) {
    for (int r = r_lo; r < r_hi; ++r) {
      const int sg = sign(i, r);
      if (sg == 0) continue;
      const int i1 = (i + 1) % ns;
      if (sign(i1, r) == sg) sets.unite(id(i, r), id(i1, r));
      int r1 = r + 1;
      if (r1 == r_hi) {
        if (!field.fiber_periodic) continue;
        r1 = r_lo;
      }
      if (sign(i, r1) == sg) sets.unite(id(i, r), id(i, r1));
    }
  }
  std::set<std::size_t> roots;
  for (int i = 0; i < ns; ++i) {
    for (int r = r_lo; r < r_hi; ++r) {
      if (sign(i, r) != 0) roots.insert(sets.find(id(i, r)));
    }
  }
  return static_cast<int>(roots.size());
}

std::vector<BaseZero> zeros_of_base(const std::vector<double>& values, double s_start, double h,
                                    double period) {
  const int n = static_cast<int>(values.size());
  double max_slope = 0.0;
  for (int i = 0; i < n; ++i) {
    max_slope = std::max(max_slope, std::abs(values[(i + 1) % n] - values[i]) / h);
  }
  std::vector<BaseZero> out;
  auto sgn = [](double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); };
  for (int i = 0; i < n; ++i) {
    const double a = values[i];
    const double b = values[(i + 1) % n];
    const double prev = values[(i + n - 1) % n];
    if (a == 0.0) {
      if (sgn(prev) * sgn(b) < 0) out.push_back({s_start + i * h, (b - prev) / (2.0 * h)});
    } else if (sgn(a) * sgn(b) < 0) {
      out.push_back({s_start + (i + a / (a - b)) * h, (b - a) / h});
    }
  }
  for (BaseZero& z : out) {
    z.s -= period * std::floor(z.s / period);
    if (std::abs(z.slope) < 1e-6 * max_slope) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "zero at s = %.6g has slope %.3g", z.s, z.slope);
      throw Error(ErrorKind::NonTransversalZero, buf);
    }
  }
  std::sort(out.begin(), out.end(), [](const BaseZero& x, const BaseZero& y) { return x.s < y.s; });
  return out;
}

std::vector<Segment> fiber_set(const BundleGeometry& geom, const std::vector<double>& base_points,
                               double sampling) {
  const bool dir = fiber_dirichlet(geom);
  const double lo = dir ? -1.0 : 0.0;
  const double extent = fiber_extent(geom);
  std::vector<Segment> out;
  for (double s : base_points) {
    const int pieces = std::max(1, static_cast<int>(std::ceil(extent / sampling)));
    for (int q = 0; q < pieces; ++q) {
      out.push_back({{s, lo + extent * q / pieces}, {s, lo + extent * (q + 1) / pieces}});
    }
  }
  return out;
}

double hausdorff_distance(const std::vector<Segment>& a, const std::vector<Segment>& b,
                          const BundleGeometry& geom, double sampling) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::EmptySet, "Hausdorff distance of an empty set");
  if (!(sampling > 0.0)) throw Error(ErrorKind::InvalidArgument, "sampling must be positive");
  return std::max(directed_hausdorff(a, b, geom, sampling), directed_hausdorff(b, a, geom, sampling));
}

int boundary_trace_components(const NodalSet& nodal) {
  if (!nodal.has_walls) return 0;
  const int last = static_cast<int>(nodal.row_coords.size()) - 1;
  int total = 0;
  for (int wall : {0, last}) {
    std::vector<double> hits;
    std::set<long long> seen;
    for (std::size_t k = 0; k < nodal.segments.size(); ++k) {
      if (nodal.row_a[k] == wall && seen.insert(nodal.edge_a[k]).second) {
        hits.push_back(nodal.segments[k].a.s);
      }
      if (nodal.row_b[k] == wall && seen.insert(nodal.edge_b[k]).second) {
        hits.push_back(nodal.segments[k].b.s);
      }
    }
    if (hits.empty()) continue;
    for (double& s : hits) s -= nodal.s_period * std::floor(s / nodal.s_period);
    std::sort(hits.begin(), hits.end());
    const double join = nodal.h_s * (1.0 + 1e-9);
    int clusters = 1;
    for (std::size_t k = 1; k < hits.size(); ++k) clusters += (hits[k] - hits[k - 1] > join);
    if (clusters > 1 && hits.front() + nodal.s_period - hits.back() <= join) --clusters;
    total += clusters;
  }
  return total;
}

GraphCheck graph_over_fiber_check(const NodalSet& nodal, const std::vector<double>& zeros,
                                  double tube_radius) {
  GraphCheck out;
  out.component_match = nodal.component_count == static_cast<int>(zeros.size());
  if (zeros.empty()) {
    out.inside_tubes = nodal.segments.empty();
    out.single_crossing = true;
    out.passed = out.inside_tubes && out.component_match;
    return out;
  }
  auto nearest = [&](double s, int& which) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t z = 0; z < zeros.size(); ++z) {
      const double d = std::abs(periodic_delta(s, zeros[z], nodal.s_period));
      if (d < best) {
        best = d;
        which = static_cast<int>(z);
      }
    }
    return best;
  };
  const int rows = static_cast<int>(nodal.row_coords.size());
  std::vector<std::set<long long>> crossings(zeros.size() * rows);
  for (std::size_t k = 0; k < nodal.segments.size(); ++k) {
    const Point2 pts[2] = {nodal.segments[k].a, nodal.segments[k].b};
    const int row[2] = {nodal.row_a[k], nodal.row_b[k]};
    const long long edge[2] = {nodal.edge_a[k], nodal.edge_b[k]};
    for (int e = 0; e < 2; ++e) {
      int which = 0;
      const double d = nearest(pts[e].s, which);
      out.max_offset = std::max(out.max_offset, d);
      if (row[e] >= 0 && d <= tube_radius) crossings[which * rows + row[e]].insert(edge[e]);
    }
  }
  out.inside_tubes = out.max_offset <= tube_radius;
  out.single_crossing = true;
  for (const auto& c : crossings) out.single_crossing = out.single_crossing && c.size() == 1;
  out.passed = out.inside_tubes && out.single_crossing && out.component_match;
  return out;
}

void write_nodal_csv(std::ostream& out, const NodalSet& nodal) {
  out << "s0,f0,s1,f1,component\n";
  char buf[160];
  for (std::size_t k = 0; k < nodal.segments.size(); ++k) {
    const Segment& g = nodal.segments[k];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%d\n", g.a.s, g.a.f, g.b.s, g.b.f,
                  nodal.labels[k]);
    out << buf;
  }
}

}  // namespace fibrelab
