#include "scolab/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "scolab/errors.hpp"

namespace scolab {
namespace {

std::string num(double v) { return nlohmann::json(v).dump(); }

struct Series {
  std::string label;
  std::string color;
  std::string dash;
  bool squares = false;
  std::vector<std::pair<double, double>> points;
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string render(const std::vector<Series>& series, const std::string& x_label,
                   const std::string& y_label, bool log_y) {
  const double W = 640, H = 420, left = 70, right = 170, top = 20, bottom = 50;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const Series& s : series)
    for (auto [x, y] : s.points) {
      xmin = std::min(xmin, x), xmax = std::max(xmax, x);
      if (!log_y || y > 0) ymin = std::min(ymin, y), ymax = std::max(ymax, y);
    }
  if (!std::isfinite(xmin)) xmin = 1, xmax = 2;
  if (!std::isfinite(ymin)) ymin = log_y ? 1 : 0, ymax = 1;
  auto tx = [&](double x) { return std::log(x); };
  auto ty = [&](double y) { return log_y ? std::log(std::max(y, ymin)) : y; };
  double x0 = tx(xmin), x1 = tx(xmax), y0 = ty(ymin), y1 = ty(ymax);
  if (x1 - x0 < 1e-9) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-9) y0 -= 0.5, y1 += 0.5;
  const double pw = W - left - right, ph = H - top - bottom;
  auto px = [&](double x) { return left + (tx(x) - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + ph - (ty(y) - y0) / (y1 - y0) * ph; };

  std::ostringstream svg;
  svg.setf(std::ios::fixed);
  svg.precision(2);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  auto x_tick = [&](double x) {
    svg << "<text x=\"" << px(x) << "\" y=\"" << top + ph + 15 << "\" text-anchor=\"middle\">"
        << num(x) << "</text>\n";
  };
  auto y_tick = [&](double y) {
    svg << "<text x=\"" << left - 5 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">"
        << num(y) << "</text>\n";
  };
  x_tick(xmin);
  if (xmax != xmin) x_tick(xmax);
  y_tick(ymin);
  if (ymax != ymin) y_tick(ymax);
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << x_label
      << " (log)</text>\n";
  svg << "<text x=\"16\" y=\"" << top + ph / 2 << "\" transform=\"rotate(-90 16 " << top + ph / 2
      << ")\" text-anchor=\"middle\">" << y_label << (log_y ? " (log)" : "") << "</text>\n";

  double legend_y = top + 10;
  for (const Series& s : series) {
    if (s.points.empty()) continue;
    svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
    if (!s.dash.empty()) svg << " stroke-dasharray=\"" << s.dash << "\"";
    svg << " points=\"";
    for (auto [x, y] : s.points) svg << px(x) << ',' << py(y) << ' ';
    svg << "\"/>\n";
    for (auto [x, y] : s.points) {
      if (s.squares)
        svg << "<rect x=\"" << px(x) - 3 << "\" y=\"" << py(y) - 3 << "\" width=\"6\" height=\"6\" fill=\""
            << s.color << "\"/>\n";
      else
        svg << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
    }
    svg << "<line x1=\"" << W - right + 10 << "\" y1=\"" << legend_y << "\" x2=\"" << W - right + 30
        << "\" y2=\"" << legend_y << "\" stroke=\"" << s.color << "\"";
    if (!s.dash.empty()) svg << " stroke-dasharray=\"" << s.dash << "\"";
    svg << "/>\n<text x=\"" << W - right + 35 << "\" y=\"" << legend_y + 4 << "\">" << s.label << "</text>\n";
    legend_y += 16;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

std::string results_csv(const SweepResult& result) {
  std::ostringstream csv;
  csv << "d,eps,n,trials,failures,freq,ci_lo,ci_hi,n0_theorem\n";
  for (const CellResult& c : result.cells) {
    if (c.kind != "erm") continue;
    csv << c.d << ',' << num(c.eps) << ',' << c.n << ',' << c.trials << ',' << c.failures << ','
        << num(c.freq) << ',' << num(c.ci_lo) << ',' << num(c.ci_hi) << ',';
    if (c.n0_theorem) csv << *c.n0_theorem;
    csv << '\n';
  }
  return csv.str();
}

std::string results_svg(const SweepResult& result) {
  std::vector<Series> series;
  if (!result.thresholds.empty()) {
    std::map<double, std::size_t> eps_slot;
    for (const ThresholdResult& t : result.thresholds) eps_slot.emplace(t.eps, eps_slot.size());
    for (const auto& [eps, slot] : eps_slot) {
      const char* color = kPalette[slot % 6];
      Series erm{"n* eps=" + num(eps), color, "", false, {}};
      Series uc{"uniform eps=" + num(eps), color, "6,3", true, {}};
      Series n0{"theorem n0 eps=" + num(eps), color, "2,3", false, {}};
      for (const ThresholdResult& t : result.thresholds) {
        if (t.eps != eps) continue;
        if (t.erm.resolved) erm.points.emplace_back(t.d, static_cast<double>(t.erm.n_star));
        if (t.uniform && t.uniform->resolved)
          uc.points.emplace_back(t.d, static_cast<double>(t.uniform->n_star));
        if (t.n0_theorem) n0.points.emplace_back(t.d, static_cast<double>(*t.n0_theorem));
      }
      for (Series* s : {&erm, &uc, &n0})
        if (!s->points.empty()) series.push_back(std::move(*s));
    }
    return render(series, "d", "sample size", true);
  }
  std::map<std::pair<int, std::size_t>, std::size_t> slot;
  for (const CellResult& c : result.cells)
    if (c.kind == "erm" && !c.skipped) slot.emplace(std::make_pair(c.d, c.eps_index), slot.size());
  for (const auto& [key, k] : slot) {
    Series s{"", kPalette[k % 6], "", false, {}};
    for (const CellResult& c : result.cells) {
      if (c.kind != "erm" || c.skipped || c.d != key.first || c.eps_index != key.second) continue;
      s.label = "d=" + std::to_string(c.d) + " eps=" + num(c.eps);
      s.points.emplace_back(static_cast<double>(c.n), c.freq);
    }
    series.push_back(std::move(s));
  }
  return render(series, "n", "failure frequency", false);
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
    if (!out.flush()) throw Error("cannot write " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot write " + path.string());
  }
}

ReportFiles emit_report(const SweepResult& result, const std::filesystem::path& dir) {
  if (result.empty()) throw InputError("refusing to write a report for an empty sweep result");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  const std::string json = result.to_json().dump(1) + "\n";
  const std::string csv = results_csv(result);
  const std::string svg = results_svg(result);
  ReportFiles files{dir / "results.json", dir / "results.csv", dir / "plots.svg"};
  write_text_file(files.json, json);
  write_text_file(files.csv, csv);
  write_text_file(files.svg, svg);
  return files;
}

SweepResult read_results(const std::filesystem::path& results_json) {
  std::ifstream in(results_json);
  if (!in) throw Error("cannot read " + results_json.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(results_json.string() + ": " + e.what());
  }
  return SweepResult::from_json(j);
}

ReportFiles regenerate_report(const std::filesystem::path& results_json) {
  const SweepResult result = read_results(results_json);
  if (result.empty()) throw InputError("results document has no cells");
  const auto dir = results_json.parent_path();
  ReportFiles files{results_json, dir / "results.csv", dir / "plots.svg"};
  write_text_file(files.csv, results_csv(result));
  write_text_file(files.svg, results_svg(result));
  return files;
}

}  // namespace scolab
