#include "mirlab/cli/plot.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <array>
#include <map>
#include <optional>
#include <sstream>

#include "mirlab/common/errors.h"

namespace mirlab::cli {

namespace {

constexpr double kWidth = 640.0, kHeight = 400.0;
constexpr double kLeft = 60.0, kRight = 150.0, kTop = 40.0, kBottom = 50.0;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2",
                                    "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* color(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

double parse_number(const std::string& cell, std::string_view column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw SchemaError("column '" + std::string(column) + "' holds a non-numeric value '" + cell + "'");
  }
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void header(std::ostringstream& svg, const std::string& title) {
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
      << "</text>\n";
}

void axes(std::ostringstream& svg, const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  const double left = kLeft, right = kWidth - kRight, top = kTop, bottom = kHeight - kBottom;
  svg << "<path d=\"M" << num(left) << " " << num(top) << " L" << num(left) << " " << num(bottom) << " L"
      << num(right) << " " << num(bottom) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = f.y0 + (f.y1 - f.y0) * i / 4.0;
    svg << "<text x=\"" << num(left - 6) << "\" y=\"" << num(f.py(y) + 4) << "\" text-anchor=\"end\">"
        << label_num(y) << "</text>\n";
    const double x = f.x0 + (f.x1 - f.x0) * i / 4.0;
    svg << "<text x=\"" << num(f.px(x)) << "\" y=\"" << num(bottom + 16) << "\" text-anchor=\"middle\">"
        << label_num(x) << "</text>\n";
  }
  svg << "<text x=\"" << num((left + right) / 2) << "\" y=\"" << num(kHeight - 12) << "\" text-anchor=\"middle\">"
      << escape(xlabel) << "</text>\n";
  svg << "<text x=\"16\" y=\"" << num((top + bottom) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << num((top + bottom) / 2) << ")\">" << escape(ylabel) << "</text>\n";
}

void legend(std::ostringstream& svg, const std::vector<std::string>& labels) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double y = kTop + 14.0 * static_cast<double>(i);
    svg << "<rect x=\"" << num(kWidth - kRight + 12) << "\" y=\"" << num(y) << "\" width=\"10\" height=\"10\" fill=\""
        << color(i) << "\"/>\n";
    svg << "<text x=\"" << num(kWidth - kRight + 26) << "\" y=\"" << num(y + 9) << "\">" << escape(labels[i])
        << "</text>\n";
  }
}

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

std::string line_plot(const std::vector<Series>& series, const std::string& title, const std::string& xlabel,
                      const std::string& ylabel, std::optional<std::pair<double, double>> yrange) {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  bool any = false;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!any) {
        x0 = x1 = x;
        y0 = y1 = y;
        any = true;
      }
      x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
  }
  if (yrange) std::tie(y0, y1) = *yrange;
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 <= y0) y1 = y0 + 1.0;
  const Frame f{x0, x1, y0, y1};
  std::ostringstream svg;
  header(svg, title);
  axes(svg, f, xlabel, ylabel);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < series.size(); ++i) {
    labels.push_back(series[i].label);
    svg << "<polyline fill=\"none\" stroke=\"" << color(i) << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < series[i].points.size(); ++k) {
      svg << (k ? " " : "") << num(f.px(series[i].points[k].first)) << "," << num(f.py(series[i].points[k].second));
    }
    svg << "\"/>\n";
  }
  legend(svg, labels);
  svg << "</svg>\n";
  return svg.str();
}

std::string reachability_plot(const std::vector<PlotInput>& inputs, const std::string& title) {
  std::vector<Series> series;
  for (const auto& in : inputs) {
    const auto fc = in.table.column("frame"), dc = in.table.column("normalized_distance");
    Series s{in.label, {}};
    for (const auto& row : in.table.rows) {
      s.points.emplace_back(parse_number(row.at(fc), "frame"), parse_number(row.at(dc), "normalized_distance"));
    }
    series.push_back(std::move(s));
  }
  return line_plot(series, title, "frame", "normalized distance", std::pair{0.0, 1.0});
}

std::string loss_plot(const std::vector<PlotInput>& inputs, const std::string& title) {
  std::vector<Series> series;
  for (const auto& in : inputs) {
    const auto sc = in.table.column("step");
    in.table.column("loss");
    for (std::size_t c = 0; c < in.table.header.size(); ++c) {
      if (c == sc) continue;
      Series s{in.label + " " + in.table.header[c], {}};
      for (const auto& row : in.table.rows) {
        if (row.at(c).empty()) continue;  // optional columns are blank for other objectives
        s.points.emplace_back(parse_number(row.at(sc), "step"), parse_number(row.at(c), in.table.header[c]));
      }
      if (!s.points.empty()) series.push_back(std::move(s));
    }
  }
  return line_plot(series, title, "step", "loss", std::nullopt);
}

std::string success_plot(const std::vector<PlotInput>& inputs, const std::string& title) {
  // Mean over demos per (method, domain), in first-appearance order.
  std::vector<std::string> methods, domains;
  std::map<std::pair<std::string, std::string>, std::array<double, 3>> acc;  // lift sum, stack sum, count
  for (const auto& in : inputs) {
    const auto mc = in.table.column("method"), dc = in.table.column("domain");
    const auto lc = in.table.column("lift_rate"), sc = in.table.column("stack_rate");
    for (const auto& row : in.table.rows) {
      const auto& m = row.at(mc);
      const auto& d = row.at(dc);
      if (std::find(methods.begin(), methods.end(), m) == methods.end()) methods.push_back(m);
      if (std::find(domains.begin(), domains.end(), d) == domains.end()) domains.push_back(d);
      auto& a = acc[{m, d}];
      a[0] += parse_number(row.at(lc), "lift_rate");
      a[1] += parse_number(row.at(sc), "stack_rate");
      a[2] += 1.0;
    }
  }
  const Frame f{0.0, 1.0, 0.0, 1.0};
  std::ostringstream svg;
  header(svg, title);
  const double left = kLeft, right = kWidth - kRight, bottom = kHeight - kBottom;
  svg << "<path d=\"M" << num(left) << " " << num(kTop) << " L" << num(left) << " " << num(bottom) << " L"
      << num(right) << " " << num(bottom) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    svg << "<text x=\"" << num(left - 6) << "\" y=\"" << num(f.py(i / 4.0) + 4) << "\" text-anchor=\"end\">"
        << label_num(i / 4.0) << "</text>\n";
  }
  const double group = (right - left) / static_cast<double>(std::max<std::size_t>(domains.size(), 1));
  const double bar = group * 0.8 / static_cast<double>(std::max<std::size_t>(methods.size(), 1));
  for (std::size_t g = 0; g < domains.size(); ++g) {
    const double gx = left + group * static_cast<double>(g) + group * 0.1;
    svg << "<text x=\"" << num(gx + group * 0.4) << "\" y=\"" << num(bottom + 16) << "\" text-anchor=\"middle\">"
        << escape(domains[g]) << "</text>\n";
    for (std::size_t m = 0; m < methods.size(); ++m) {
      const auto it = acc.find({methods[m], domains[g]});
      if (it == acc.end()) continue;
      const double lift = it->second[0] / it->second[2], stack = it->second[1] / it->second[2];
      const double x = gx + bar * static_cast<double>(m);
      svg << "<rect x=\"" << num(x) << "\" y=\"" << num(f.py(lift)) << "\" width=\"" << num(bar * 0.9)
          << "\" height=\"" << num(bottom - f.py(lift)) << "\" fill=\"" << color(m) << "\" fill-opacity=\"0.45\"/>\n";
      svg << "<rect x=\"" << num(x) << "\" y=\"" << num(f.py(stack)) << "\" width=\"" << num(bar * 0.9)
          << "\" height=\"" << num(bottom - f.py(stack)) << "\" fill=\"" << color(m) << "\"/>\n";
    }
  }
  svg << "<text x=\"16\" y=\"" << num((kTop + bottom) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << num((kTop + bottom) / 2) << ")\">success rate (light: lift, dark: stack)</text>\n";
  legend(svg, methods);
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

std::size_t CsvTable::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw SchemaError("missing column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has(std::string_view name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

CsvTable parse_csv(std::string_view text) {
  CsvTable t;
  auto split = [](std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return cells;
  };
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    if (line.empty()) continue;
    if (first) {
      t.header = split(line);
      first = false;
      continue;
    }
    auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw SchemaError("row " + std::to_string(t.rows.size() + 1) + " has " + std::to_string(cells.size()) +
                        " cells, header has " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (first) throw SchemaError("empty CSV, no header");
  return t;
}

PlotKind parse_plot_kind(std::string_view name) {
  if (name == "reachability") return PlotKind::kReachability;
  if (name == "loss") return PlotKind::kLoss;
  if (name == "success") return PlotKind::kSuccess;
  throw ContractError("unknown plot kind '" + std::string(name) + "' (reachability, loss, success)");
}

std::string plot_svg(PlotKind kind, const std::vector<PlotInput>& inputs, const std::string& title) {
  switch (kind) {
    case PlotKind::kReachability: return reachability_plot(inputs, title);
    case PlotKind::kLoss: return loss_plot(inputs, title);
    case PlotKind::kSuccess: return success_plot(inputs, title);
  }
  return {};
}

}  // namespace mirlab::cli
