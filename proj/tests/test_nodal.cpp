#include <doctest.h>

#include <map>
#include <sstream>

#include "fibrelab/error.hpp"
#include "fibrelab/nodal.hpp"
#include "support.hpp"

using namespace fibrelab;
using testing::pi;

namespace {

const GridSpec kTorusGrid{64, 32, 2, 0.5};
const GridSpec kGuideGrid{64, 33, 2, 0.5};

ScalarField on_torus(const std::function<double(double, double)>& f, GridSpec spec = kTorusGrid) {
  return sample_field(testing::torus(), spec, f);
}

ScalarField on_guide(const std::function<double(double, double)>& f) {
  return sample_field(testing::guide(1.0), kGuideGrid, f);
}

// Circular mean of the segment midpoints, in [0, 2 pi).
std::vector<double> mean_s_per_component(const NodalSet& n) {
  std::map<int, std::pair<double, double>> acc;
  for (std::size_t k = 0; k < n.segments.size(); ++k) {
    const double s = 0.5 * (n.segments[k].a.s + n.segments[k].b.s);
    acc[n.labels[k]].first += std::cos(s);
    acc[n.labels[k]].second += std::sin(s);
  }
  std::vector<double> out;
  for (const auto& [label, v] : acc) out.push_back(std::fmod(std::atan2(v.second, v.first) + 2 * pi, 2 * pi));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("nodal set of cos s on the torus") {
  const NodalSet n = extract_nodal_set(on_torus([](double s, double) { return std::cos(s); }));
  CHECK(n.component_count == 2);
  const std::vector<double> where = mean_s_per_component(n);
  REQUIRE(where.size() == 2);
  CHECK(where[0] == doctest::Approx(pi / 2).epsilon(1e-3));
  CHECK(where[1] == doctest::Approx(3 * pi / 2).epsilon(1e-3));
  // each component closes around the fibre: one segment per row
  CHECK(n.segments.size() == 2 * 32);
}

TEST_CASE("nodal components of cos(m s)") {
  for (int m = 1; m <= 3; ++m) {
    const NodalSet n = extract_nodal_set(on_torus([m](double s, double) { return std::cos(m * s); }));
    CHECK(n.component_count == 2 * m);
  }
}

TEST_CASE("nodal set on the waveguide") {
  const NodalSet n = extract_nodal_set(on_guide([](double s, double u) { return std::sin(s) * std::cos(pi * u / 2); }));
  CHECK(n.component_count == 2);
  const std::vector<double> where = mean_s_per_component(n);
  REQUIRE(where.size() == 2);
  CHECK(std::abs(periodic_delta(where[0], 0.0, 2 * pi)) < 1e-3);
  CHECK(where[1] == doctest::Approx(pi).epsilon(1e-3));
  double umin = 1, umax = -1;
  for (const Segment& g : n.segments) {
    umin = std::min({umin, g.a.f, g.b.f});
    umax = std::max({umax, g.a.f, g.b.f});
  }
  CHECK(umin == -1.0);
  CHECK(umax == 1.0);
  CHECK(boundary_trace_components(n) == 4);

  const NodalSet two = extract_nodal_set(on_guide([](double s, double u) { return std::sin(2 * s) * std::cos(pi * u / 2); }));
  CHECK(boundary_trace_components(two) == 8);
}

TEST_CASE("sign-definite fields have no nodal set") {
  const NodalSet n = extract_nodal_set(on_torus([](double s, double t) { return 2 + std::cos(s) * std::sin(t); }));
  CHECK(n.segments.empty());
  CHECK(n.component_count == 0);
  const NodalSet w = extract_nodal_set(on_guide([](double, double u) { return std::cos(pi * u / 2); }));
  CHECK(boundary_trace_components(w) == 0);
}

TEST_CASE("exact zeros are rejected") {
  try {
    (void)extract_nodal_set(on_torus([](double s, double) { return s < 1.0 ? 0.0 : 1.0; }));
    FAIL("expected DegenerateField");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateField);
  }
}

TEST_CASE("nodal domains") {
  CHECK(count_nodal_domains(on_torus([](double s, double) { return std::cos(s); })) == 2);
  CHECK(count_nodal_domains(on_torus([](double, double) { return 1.0; })) == 1);
  CHECK(count_nodal_domains(on_torus([](double s, double) { return std::cos(2 * s); })) == 4);
  CHECK(count_nodal_domains(on_torus([](double s, double t) { return std::cos(s) * std::cos(t); })) == 4);
  CHECK(count_nodal_domains(on_guide([](double s, double u) { return std::sin(s) * std::cos(pi * u / 2); })) == 2);
}

TEST_CASE("sign partition is complete and symmetric") {
  auto f = [](double s, double t) { return std::sin(2 * s + 0.3) * std::cos(t) + 0.4 * std::cos(3 * s) - 0.1; };
  const ScalarField a = on_torus(f);
  const ScalarField b = on_torus([&](double s, double t) { return -f(s, t); });
  CHECK(count_nodal_domains(a) == count_nodal_domains(b));
  std::size_t pos = 0, neg = 0, zero = 0;
  for (double v : a.values) (v > 0 ? pos : v < 0 ? neg : zero)++;
  CHECK(pos + neg + zero == a.values.size());
}

TEST_CASE("every sign-changing edge carries one endpoint per cell") {
  auto f = [](double s, double t) { return std::sin(2 * s + 0.3) * std::cos(t) + 0.4 * std::cos(3 * s) - 0.1; };
  const ScalarField field = on_torus(f);
  const NodalSet n = extract_nodal_set(field);
  std::map<long long, int> hits;
  for (std::size_t k = 0; k < n.segments.size(); ++k) {
    ++hits[n.edge_a[k]];
    ++hits[n.edge_b[k]];
  }
  const int ns = field.n_s, nr = field.n_rows();
  int changing = 0;
  for (int i = 0; i < ns; ++i) {
    for (int r = 0; r < nr; ++r) {
      const bool p = field.at(i, r) >= 0;
      const long long se = 2LL * (i * nr + r), fe = se + 1;
      const bool s_change = p != (field.at((i + 1) % ns, r) >= 0);
      const bool f_change = p != (field.at(i, (r + 1) % nr) >= 0);
      changing += s_change + f_change;
      CHECK(hits.count(se) == static_cast<std::size_t>(s_change));
      CHECK(hits.count(fe) == static_cast<std::size_t>(f_change));
      if (s_change) CHECK(hits[se] == 2);
      if (f_change) CHECK(hits[fe] == 2);
    }
  }
  CHECK(static_cast<int>(hits.size()) == changing);
}

TEST_CASE("zeros of base functions") {
  const int n = 256;
  const double h = 2 * pi / n, start = 0.5 * h;
  auto sample = [&](const std::function<double(double)>& f) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = f(start + i * h);
    return v;
  };
  const auto sin_zeros = zeros_of_base(sample([](double s) { return std::sin(s); }), start, h, 2 * pi);
  REQUIRE(sin_zeros.size() == 2);
  std::vector<BaseZero> z = sin_zeros;
  std::sort(z.begin(), z.end(), [](auto& a, auto& b) { return a.s < b.s; });
  CHECK(std::abs(periodic_delta(z[0].s, 0.0, 2 * pi)) < 1e-4);
  CHECK(z[0].slope == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(z[1].s == doctest::Approx(pi).epsilon(1e-4));
  CHECK(z[1].slope == doctest::Approx(-1.0).epsilon(1e-3));

  CHECK(zeros_of_base(sample([](double) { return 1.0; }), start, h, 2 * pi).empty());

  auto four = zeros_of_base(sample([](double s) { return std::sin(2 * s); }), start, h, 2 * pi);
  REQUIRE(four.size() == 4);
  std::sort(four.begin(), four.end(), [](auto& a, auto& b) {
    return std::fmod(a.s + 2 * pi, 2 * pi) < std::fmod(b.s + 2 * pi, 2 * pi);
  });
  const double want[] = {0, pi / 2, pi, 3 * pi / 2};
  for (int i = 0; i < 4; ++i) CHECK(std::abs(periodic_delta(four[i].s, want[i], 2 * pi)) < 1e-4);

  try {
    (void)zeros_of_base(sample([](double s) { return std::pow(std::sin(s), 5); }), start, h, 2 * pi);
    FAIL("expected NonTransversalZero");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonTransversalZero);
  }
}

TEST_CASE("hausdorff distances") {
  const WarpedTorusGeometry flat = testing::torus();
  const double sampling = 0.01;
  const auto a = fiber_set(flat, {1.0}, sampling);
  CHECK(hausdorff_distance(a, a, flat, sampling) == 0.0);

  for (double delta : {0.3, 0.05}) {
    const auto b = fiber_set(flat, {1.0 + delta}, sampling);
    CHECK(hausdorff_distance(a, b, flat, sampling) == doctest::Approx(delta).epsilon(0.02));
  }

  const std::vector<Segment> p{{{0.0, 0.0}, {0.0, 0.0}}};
  const std::vector<Segment> q{{{2.0, 0.0}, {2.0, 0.0}}};
  CHECK(hausdorff_distance(p, q, flat, sampling) == doctest::Approx(2.0).epsilon(1e-12));

  const NodalSet n = extract_nodal_set(on_torus([](double s, double t) { return std::cos(s) + 0.2 * std::sin(t); }));
  const auto fibres = fiber_set(flat, {pi / 2, 3 * pi / 2}, sampling);
  const double ab = hausdorff_distance(n.segments, fibres, flat, sampling);
  const double ba = hausdorff_distance(fibres, n.segments, flat, sampling);
  CHECK(ab == ba);
  CHECK(ab == doctest::Approx(std::asin(0.2)).epsilon(0.02));

  CHECK_THROWS_AS(hausdorff_distance({}, a, flat, sampling), Error);
}

TEST_CASE("graph over fibre check") {
  const NodalSet plain = extract_nodal_set(on_torus([](double s, double) { return std::cos(s); }));
  CHECK(graph_over_fiber_check(plain, {pi / 2, 3 * pi / 2}, 0.1).passed);

  const NodalSet cross = extract_nodal_set(on_torus([](double s, double t) { return std::cos(s) * std::cos(t); }));
  CHECK_FALSE(graph_over_fiber_check(cross, {pi / 2, 3 * pi / 2}, 0.1).passed);

  const NodalSet none = extract_nodal_set(on_torus([](double, double) { return 1.0; }));
  CHECK_FALSE(graph_over_fiber_check(none, {pi / 2}, 0.1).passed);
}

TEST_CASE("nodal csv") {
  const NodalSet n = extract_nodal_set(on_torus([](double s, double) { return std::cos(s); }));
  std::ostringstream out;
  write_nodal_csv(out, n);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "s0,f0,s1,f1,component");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 4);
  }
  CHECK(rows == n.segments.size());
}
