#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "fibrelab/error.hpp"
#include "fibrelab/study.hpp"

namespace fibrelab {

namespace {

using nlohmann::json;

std::string number(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Keys come out sorted (nlohmann objects are ordered maps); floats use 17
// significant digits so the bytes depend only on the values.
void write(std::ostream& out, const json& j, int depth) {
  const std::string pad(2 * (depth + 1), ' ');
  const std::string end_pad(2 * depth, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        out << (first ? "" : ",\n") << pad << json(key).dump() << ": ";
        write(out, value, depth + 1);
        first = false;
      }
      out << "\n" << end_pad << "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      out << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        out << (i ? ",\n" : "") << pad;
        write(out, j[i], depth + 1);
      }
      out << "\n" << end_pad << "]";
      return;
    }
    case json::value_t::number_float:
      out << number(j.get<double>());
      return;
    default:
      out << j.dump();
  }
}

json fit_json(const std::optional<RateFit>& fit) {
  if (!fit) return nullptr;
  return {{"slope", fit->slope},
          {"intercept", fit->intercept},
          {"constant", fit->constant},
          {"r_squared", fit->r_squared},
          {"used_epsilons", fit->used},
          {"excluded_epsilons", fit->excluded}};
}

json record_json(const StudyRecord& r) {
  const DiscrepancyRecord& d = r.record;
  const NodalReport& n = r.nodal;
  return {{"epsilon", d.epsilon},
          {"mode", d.mode},
          {"lambda_full", d.lambda_full},
          {"rescaled", d.rescaled},
          {"mu_eff", d.mu_eff},
          {"mu_gap", d.mu_gap},
          {"eig_gap", d.eig_gap},
          {"supnorm", d.supnorm},
          {"hausdorff", d.hausdorff},
          {"disc_err_est", d.disc_err_eig},
          {"disc_err_supnorm", d.disc_err_supnorm},
          {"disc_err_hausdorff", d.disc_err_hausdorff},
          {"nodal_domains", n.domains},
          {"nodal_components", n.components},
          {"zeros", n.zeros},
          {"boundary_components", n.boundary_components},
          {"graph_check", n.graph.passed},
          {"graph_inside_tubes", n.graph.inside_tubes},
          {"graph_single_crossing", n.graph.single_crossing},
          {"graph_component_match", n.graph.component_match},
          {"tube_radius", n.tube_radius},
          {"tube_constant", n.tube_constant},
          {"courant_counts", n.courant_counts},
          {"courant_counts_coarse", r.courant_coarse},
          {"courant_ok", n.courant_ok}};
}

// Fixed-template log-log plot.
std::string svg_plot(const StudyReport& report, const char* quantity,
                     double DiscrepancyRecord::*value, double DiscrepancyRecord::*floor) {
  constexpr double W = 480, H = 360, L = 70, R = 20, T = 30, B = 50;
  std::vector<std::pair<double, double>> pts;
  std::vector<bool> in;
  for (const StudyRecord& r : report.records) {
    const double v = r.record.*value;
    if (!r.ok || !(v > 0.0) || !std::isfinite(v)) continue;
    pts.emplace_back(std::log10(r.record.epsilon), std::log10(v));
    in.push_back(v >= 10.0 * (r.record.*floor));
  }
  std::ostringstream s;
  char buf[512];
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"360\" viewBox=\"0 0 480 360\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"480\" height=\"360\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<text x=\"240\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">%s: %s</text>\n",
                report.config.name.c_str(), quantity);
  s << buf;
  s << "<rect x=\"70\" y=\"30\" width=\"390\" height=\"280\" fill=\"none\" stroke=\"black\"/>\n";
  s << "<text x=\"265\" y=\"345\" text-anchor=\"middle\" font-size=\"12\">log10 eps</text>\n";
  std::snprintf(buf, sizeof buf,
                "<text x=\"15\" y=\"170\" text-anchor=\"middle\" font-size=\"12\" "
                "transform=\"rotate(-90 15 170)\">log10 %s</text>\n", quantity);
  s << buf;
  if (!pts.empty()) {
    double x0 = pts[0].first, x1 = x0, y0 = pts[0].second, y1 = y0;
    for (const auto& [x, y] : pts) {
      x0 = std::min(x0, x); x1 = std::max(x1, x);
      y0 = std::min(y0, y); y1 = std::max(y1, y);
    }
    x0 -= 0.1; x1 += 0.1; y0 -= 0.25; y1 += 0.25;
    auto px = [&](double x) { return L + (W - L - R) * (x - x0) / (x1 - x0); };
    auto py = [&](double y) { return H - B - (H - T - B) * (y - y0) / (y1 - y0); };
    std::snprintf(buf, sizeof buf,
                  "<text x=\"70\" y=\"325\" font-size=\"10\">%.3f</text>\n"
                  "<text x=\"460\" y=\"325\" text-anchor=\"end\" font-size=\"10\">%.3f</text>\n"
                  "<text x=\"66\" y=\"310\" text-anchor=\"end\" font-size=\"10\">%.2f</text>\n"
                  "<text x=\"66\" y=\"40\" text-anchor=\"end\" font-size=\"10\">%.2f</text>\n",
                  x0, x1, y0, y1);
    s << buf;
    const auto& fit = report.fits.at(quantity);
    if (fit) {
      const double ya = fit->intercept + fit->slope * x0;
      const double yb = fit->intercept + fit->slope * x1;
      std::snprintf(buf, sizeof buf,
                    "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"steelblue\"/>\n"
                    "<text x=\"80\" y=\"48\" font-size=\"12\">slope %.3f</text>\n",
                    px(x0), py(ya), px(x1), py(yb), fit->slope);
      s << buf;
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      std::snprintf(buf, sizeof buf,
                    "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"4\" stroke=\"black\" fill=\"%s\"/>\n",
                    px(pts[i].first), py(pts[i].second), in[i] ? "black" : "none");
      s << buf;
    }
  }
  s << "</svg>\n";
  return s.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace

std::string report_json(const StudyReport& report) {
  json root;
  root["name"] = report.config.name;
  json config;
  try {
    config = json::parse(report.config.source);
  } catch (const json::exception&) {
    config = report.config.source;
  }
  root["config"] = config;
  root["records"] = json::array();
  root["failures"] = json::array();
  for (const StudyRecord& r : report.records) {
    if (r.ok) {
      root["records"].push_back(record_json(r));
    } else {
      root["failures"].push_back({{"epsilon", r.record.epsilon}, {"error", r.error}});
    }
  }
  root["fits"] = json::object();
  for (const auto& [name, fit] : report.fits) root["fits"][name] = fit_json(fit);
  root["checks"] = json::array();
  for (const CheckResult& c : report.checks) {
    root["checks"].push_back({{"name", c.name},
                              {"verdict", c.verdict},
                              {"threshold", c.threshold},
                              {"theory", c.theory},
                              {"detail", c.detail}});
  }
  root["passed"] = report.passed();
  std::ostringstream out;
  write(out, root, 0);
  out << "\n";
  return out.str();
}

std::string records_csv(const StudyReport& report) {
  std::ostringstream out;
  out << "epsilon,mode,lambda_full,mu_eff,eig_gap,supnorm,hausdorff,nodal_domains,"
         "nodal_components,boundary_components,graph_check,disc_err_est\n";
  for (const StudyRecord& r : report.records) {
    if (!r.ok) continue;
    const DiscrepancyRecord& d = r.record;
    out << number(d.epsilon) << ',' << d.mode << ',' << number(d.lambda_full) << ','
        << number(d.mu_eff) << ',' << number(d.eig_gap) << ',' << number(d.supnorm) << ','
        << number(d.hausdorff) << ',' << r.nodal.domains << ',' << r.nodal.components << ','
        << r.nodal.boundary_components << ',' << (r.nodal.graph.passed ? "true" : "false") << ','
        << number(d.disc_err_eig) << '\n';
  }
  return out.str();
}

void emit_report(const StudyReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "report.json", report_json(report));
  write_file(dir / "records.csv", records_csv(report));
  write_file(dir / "eig_gap.svg",
             svg_plot(report, "eig_gap", &DiscrepancyRecord::eig_gap, &DiscrepancyRecord::disc_err_eig));
  write_file(dir / "supnorm.svg", svg_plot(report, "supnorm", &DiscrepancyRecord::supnorm,
                                           &DiscrepancyRecord::disc_err_supnorm));
  write_file(dir / "hausdorff.svg", svg_plot(report, "hausdorff", &DiscrepancyRecord::hausdorff,
                                             &DiscrepancyRecord::disc_err_hausdorff));
}

}  // namespace fibrelab
