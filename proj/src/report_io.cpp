#include "cloudvision/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "cloudvision/error.hpp"

namespace cloudvision {

namespace {

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

nlohmann::json points_to_json(const std::vector<RecallPoint>& pts) {
  auto arr = nlohmann::json::array();
  for (const auto& p : pts) {
    arr.push_back({{"t_trans_m", p.threshold.trans_m}, {"t_rot_deg", p.threshold.rot_deg}, {"recall_pct", p.recall_pct}});
  }
  return arr;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["n_queries"] = report.n_queries;
  j["n_converged"] = report.n_converged;
  j["median_trans_m"] = finite_or_null(report.median_trans);
  j["median_rot_deg"] = finite_or_null(report.median_rot);
  j["recall"] = points_to_json(report.recall_at);
  j["curve"] = points_to_json(report.curve);
  return j;
}

std::string curve_csv(const EvalReport& report) {
  std::string out = "t_trans_m,t_rot_deg,recall_pct\n";
  for (const auto& p : report.curve) {
    out += fmt("%.6g", p.threshold.trans_m) + "," + fmt("%.6g", p.threshold.rot_deg) + "," +
           fmt("%.4f", p.recall_pct) + "\n";
  }
  return out;
}

std::string curve_svg(const EvalReport& report, const std::string& title) {
  constexpr double kW = 640, kH = 400, kLeft = 60, kRight = 150, kTop = 40, kBottom = 50;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  std::map<double, std::vector<std::pair<double, double>>> series;  // rot -> (trans cm, recall)
  double max_cm = 0.0;
  for (const auto& p : report.curve) {
    series[p.threshold.rot_deg].emplace_back(100.0 * p.threshold.trans_m, p.recall_pct);
    max_cm = std::max(max_cm, 100.0 * p.threshold.trans_m);
  }
  if (max_cm <= 0.0) max_cm = 1.0;
  auto x_of = [&](double cm) { return kLeft + pw * cm / max_cm; };
  auto y_of = [&](double pct) { return kTop + ph * (1.0 - pct / 100.0); };

  static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"};
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" font-family=\"sans-serif\" "
       "font-size=\"12\">\n";
  s += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt("%.1f", kLeft) + "\" y=\"24\" font-size=\"14\">" + title + "</text>\n";
  for (int pct = 0; pct <= 100; pct += 20) {
    const std::string y = fmt("%.1f", y_of(pct));
    s += "<line x1=\"" + fmt("%.1f", kLeft) + "\" y1=\"" + y + "\" x2=\"" + fmt("%.1f", kLeft + pw) + "\" y2=\"" + y +
         "\" stroke=\"#ddd\"/>\n";
    s += "<text x=\"" + fmt("%.1f", kLeft - 8) + "\" y=\"" + y + "\" text-anchor=\"end\">" + std::to_string(pct) +
         "</text>\n";
  }
  s += "<line x1=\"" + fmt("%.1f", kLeft) + "\" y1=\"" + fmt("%.1f", kTop + ph) + "\" x2=\"" + fmt("%.1f", kLeft + pw) +
       "\" y2=\"" + fmt("%.1f", kTop + ph) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + fmt("%.1f", kLeft) + "\" y1=\"" + fmt("%.1f", kTop) + "\" x2=\"" + fmt("%.1f", kLeft) +
       "\" y2=\"" + fmt("%.1f", kTop + ph) + "\" stroke=\"black\"/>\n";
  if (!series.empty()) {
    for (const auto& [cm, pct] : series.begin()->second) {
      (void)pct;
      s += "<text x=\"" + fmt("%.1f", x_of(cm)) + "\" y=\"" + fmt("%.1f", kTop + ph + 18) +
           "\" text-anchor=\"middle\">" + fmt("%g", cm) + "</text>\n";
    }
  }
  s += "<text x=\"" + fmt("%.1f", kLeft + pw / 2) + "\" y=\"" + fmt("%.1f", kH - 10) +
       "\" text-anchor=\"middle\">translation threshold [cm]</text>\n";
  s += "<text x=\"16\" y=\"" + fmt("%.1f", kTop + ph / 2) + "\" transform=\"rotate(-90 16 " +
       fmt("%.1f", kTop + ph / 2) + ")\" text-anchor=\"middle\">queries within limits [%]</text>\n";
  int i = 0;
  for (const auto& [rot, pts] : series) {
    const char* color = kColors[i % 7];
    std::string poly;
    for (const auto& [cm, pct] : pts) poly += fmt("%.1f", x_of(cm)) + "," + fmt("%.1f", y_of(pct)) + " ";
    if (!poly.empty()) poly.pop_back();
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"" + poly + "\"/>\n";
    const std::string ly = fmt("%.1f", kTop + 10 + 18 * i);
    s += "<line x1=\"" + fmt("%.1f", kLeft + pw + 15) + "\" y1=\"" + ly + "\" x2=\"" + fmt("%.1f", kLeft + pw + 35) +
         "\" y2=\"" + ly + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + fmt("%.1f", kLeft + pw + 40) + "\" y=\"" + fmt("%.1f", kTop + 14 + 18 * i) + "\">" +
         fmt("%g", rot) + " deg</text>\n";
    ++i;
  }
  s += "</svg>\n";
  return s;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

void write_report_files(const EvalReport& report, const std::filesystem::path& stem) {
  auto with_ext = [&](const char* ext) {
    auto p = stem;
    p += ext;
    return p;
  };
  write_text_file(with_ext(".json"), report_to_json(report).dump(2) + "\n");
  write_text_file(with_ext(".csv"), curve_csv(report));
  write_text_file(with_ext(".svg"), curve_svg(report));
}

std::string diagnostics_line(const std::string& query, const LocalizationResult* result,
                             const std::optional<std::string>& error) {
  nlohmann::json j;
  j["query"] = query;
  if (result) {
    j["retrieved_image"] = result->retrieved_image;
    j["similarity"] = result->retrieval_similarity;
    j["converged"] = result->converged;
    j["final_cost"] = result->final_cost;
    j["iterations"] = result->iterations;
    j["inliers"] = result->inlier_counts;
    auto cands = nlohmann::json::array();
    for (const auto& c : result->candidates) cands.push_back({{"image", c.image_id}, {"similarity", c.similarity}});
    j["candidates"] = cands;
  } else {
    j["converged"] = false;
  }
  if (error) j["error"] = *error;
  return j.dump();
}

nlohmann::json ablation_to_json(std::span<const AblationResult> results) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& r : results) {
    nlohmann::json v = report_to_json(r.report);
    v["map_points"] = r.map_points;
    j[to_string(r.variant)] = v;
  }
  return j;
}

}  // namespace cloudvision
