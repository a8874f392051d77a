#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "aggcorr/harness.hpp"

namespace aggcorr {

namespace {

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  return fmt::format("{:.17g}", x);
}

std::string snr(const std::optional<double>& db) { return db ? fmt::format("{:g}", *db) : "off"; }

std::string scenario_columns(const EstimateSummary& s) {
  return fmt::format("{},{},{},{}", s.scenario_id, s.intra_model, snr(s.noise.snr_eps_db), snr(s.noise.snr_e_db));
}

// Type-7 quantile of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("error while writing " + path.string());
}

std::string file_safe(std::string s) {
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.') c = '_';
  }
  return s;
}

}  // namespace

std::string estimates_csv(const std::vector<EstimateSummary>& summaries) {
  std::string out = "scenario_id,intra_model,snr_eps_db,snr_e_db,method,rep,estimate,discarded\n";
  for (const auto& s : summaries) {
    for (std::size_t k = 0; k < s.estimates.size(); ++k) {
      out += fmt::format("{},{},{},{},{}\n", scenario_columns(s), method_name(s.method), k + 1,
                         s.errors[k].empty() ? num(s.estimates[k]) : "nan", s.discarded[k]);
    }
  }
  return out;
}

std::string summary_csv(const std::vector<EstimateSummary>& summaries) {
  std::string out =
      "scenario_id,intra_model,snr_eps_db,snr_e_db,method,reps,mean,sd,limit,bias_vs_r,bias_vs_limit,"
      "discarded,errors\n";
  for (const auto& s : summaries) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", scenario_columns(s), method_name(s.method),
                       s.estimates.size(), num(s.mean), num(s.sd), num(s.limit), num(s.bias_vs_r),
                       num(s.bias_vs_limit), s.discarded_total, s.error_count);
  }
  return out;
}

std::string boxplot_svg(const std::vector<EstimateSummary>& rows) {
  constexpr double width = 80.0, height = 320.0, left = 60.0, top = 30.0, bottom = 40.0;
  const double plot_w = width * static_cast<double>(rows.size());

  std::vector<std::vector<double>> data;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : rows) {
    std::vector<double> v;
    for (std::size_t k = 0; k < s.estimates.size(); ++k) {
      if (s.errors[k].empty() && std::isfinite(s.estimates[k])) v.push_back(s.estimates[k]);
    }
    std::sort(v.begin(), v.end());
    if (!v.empty()) {
      lo = std::min(lo, v.front());
      hi = std::max(hi, v.back());
    }
    if (std::isfinite(s.limit)) {
      lo = std::min(lo, s.limit);
      hi = std::max(hi, s.limit);
    }
    lo = std::min(lo, s.r);
    hi = std::max(hi, s.r);
    data.push_back(std::move(v));
  }
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  const auto y = [&](double v) { return top + (hi - v) / (hi - lo) * height; };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" font-family=\"sans-serif\" "
      "font-size=\"11\">\n",
      left + plot_w + 20.0, top + height + bottom);
  svg += fmt::format("<text x=\"{:.1f}\" y=\"18\" font-size=\"13\">{}</text>\n", left,
                     rows.empty() ? "" : rows.front().scenario_id);
  svg += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" stroke=\"#444\"/>\n",
                     left, top, plot_w, height);
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3f}</text>\n", left - 4.0, y(v) + 4.0, v);
  }
  if (!rows.empty()) {
    svg += fmt::format(
        "<line x1=\"{:.1f}\" x2=\"{:.1f}\" y1=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#c00\" stroke-dasharray=\"4,3\"/>\n",
        left, left + plot_w, y(rows.front().r), y(rows.front().r));
  }
  for (std::size_t m = 0; m < rows.size(); ++m) {
    const double cx = left + width * (static_cast<double>(m) + 0.5);
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", cx, top + height + 16.0,
                       method_name(rows[m].method));
    const auto& v = data[m];
    if (!v.empty()) {
      const double q1 = quantile(v, 0.25), med = quantile(v, 0.5), q3 = quantile(v, 0.75);
      const double iqr = q3 - q1;
      const double wlo = *std::find_if(v.begin(), v.end(), [&](double x) { return x >= q1 - 1.5 * iqr; });
      const double whi = *std::find_if(v.rbegin(), v.rend(), [&](double x) { return x <= q3 + 1.5 * iqr; });
      svg += fmt::format("<line x1=\"{0:.1f}\" x2=\"{0:.1f}\" y1=\"{1:.2f}\" y2=\"{2:.2f}\" stroke=\"#000\"/>\n", cx,
                         y(whi), y(wlo));
      svg += fmt::format(
          "<rect x=\"{:.1f}\" y=\"{:.2f}\" width=\"{:.1f}\" height=\"{:.2f}\" fill=\"#9cc3e6\" stroke=\"#000\"/>\n",
          cx - 0.3 * width, y(q3), 0.6 * width, std::max(0.5, y(q1) - y(q3)));
      svg += fmt::format("<line x1=\"{:.1f}\" x2=\"{:.1f}\" y1=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#000\" stroke-width=\"2\"/>\n",
                         cx - 0.3 * width, cx + 0.3 * width, y(med), y(med));
      for (double x : v) {
        if (x < wlo || x > whi) {
          svg += fmt::format("<circle cx=\"{:.1f}\" cy=\"{:.2f}\" r=\"2\" fill=\"none\" stroke=\"#000\"/>\n", cx, y(x));
        }
      }
    }
    if (std::isfinite(rows[m].limit)) {
      svg += fmt::format("<path d=\"M {:.1f} {:.2f} l 6 -5 l 0 10 z\" fill=\"#2a2\"/>\n", cx + 0.3 * width,
                         y(rows[m].limit));
    }
  }
  svg += "</svg>\n";
  return svg;
}

OutputFiles write_outputs(const std::vector<EstimateSummary>& summaries, const std::filesystem::path& dir,
                          bool boxplots) {
  if (summaries.empty()) throw std::invalid_argument("write_outputs: no summaries");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());

  OutputFiles files;
  files.estimates = dir / "estimates.csv";
  files.summary = dir / "summary.csv";
  write_file(files.estimates, estimates_csv(summaries));
  write_file(files.summary, summary_csv(summaries));
  if (boxplots) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<EstimateSummary>> by_scenario;
    for (const auto& s : summaries) {
      if (!by_scenario.count(s.scenario_id)) order.push_back(s.scenario_id);
      by_scenario[s.scenario_id].push_back(s);
    }
    for (const auto& id : order) {
      const auto path = dir / ("boxplot_" + file_safe(id) + ".svg");
      write_file(path, boxplot_svg(by_scenario[id]));
      files.boxplots.push_back(path);
    }
  }
  return files;
}

}  // namespace aggcorr
