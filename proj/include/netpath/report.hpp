#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "netpath/errors.hpp"
#include "netpath/network.hpp"
#include "netpath/stats.hpp"

namespace netpath {
namespace detail {

inline std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

inline std::string fmt_q(double q) { return fmt("%.4g", q); }

/// Text reports round p-values to three significant digits; JSON keeps
/// full precision.
inline std::string fmt_p(double p) {
  if (std::isnan(p)) return "NA";
  return fmt("%.3g", p);
}

inline std::string node_list(const EvidenceNetwork& net, const EvidencePath& path) {
  std::string out = "{";
  for (std::size_t k = 0; k < path.nodes.size(); ++k) {
    if (k) out += ", ";
    out += net.nodes()[path.nodes[k]].label;
  }
  out += "}";
  return out;
}

inline std::string pad(std::string s, std::size_t width) {
  while (s.size() < width) s.push_back(' ');
  return s;
}

inline std::string format_matrix(const Eigen::MatrixXd& m, const char* spec = "%.6g") {
  std::vector<std::string> cells;
  cells.reserve(static_cast<std::size_t>(m.size()));
  std::size_t width = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      cells.push_back(fmt(spec, m(r, c)));
      width = std::max(width, cells.back().size());
    }
  }
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out += "  ";
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::string cell = cells[static_cast<std::size_t>(r * m.cols() + c)];
      while (cell.size() < width) cell.insert(cell.begin(), ' ');
      out += cell;
      if (c + 1 < m.cols()) out += "  ";
    }
    out += '\n';
  }
  return out;
}

}  // namespace detail

/// Four-column summary table, one line per comparison. When color is on,
/// p-values below 0.05 are highlighted.
inline std::string render_report_text(const std::vector<PathAnalysis>& analyses,
                                      bool color = false) {
  struct Row {
    std::string comparison, q, p, paths;
    bool significant = false;
  };
  std::vector<Row> rows;
  rows.reserve(analyses.size());
  std::size_t w0 = 10, w1 = 5, w2 = 7;
  for (const auto& an : analyses) {
    const InconsistencyReport& rep = an.report;
    Row row;
    row.comparison = rep.source.label + ":" + rep.sink.label;
    row.q = detail::fmt_q(rep.q);
    row.p = detail::fmt_p(rep.p_value);
    row.paths = std::to_string(rep.n_independent);
    row.significant = !std::isnan(rep.p_value) && rep.p_value < 0.05;
    w0 = std::max(w0, row.comparison.size());
    w1 = std::max(w1, row.q.size());
    w2 = std::max(w2, row.p.size());
    rows.push_back(std::move(row));
  }
  const char* bold = color ? "\x1b[1m" : "";
  const char* red = color ? "\x1b[31m" : "";
  const char* reset = color ? "\x1b[0m" : "";

  std::string out;
  out += bold;
  out += detail::pad("Comparison", w0 + 2) + detail::pad("Q", w1 + 2) +
         detail::pad("p_value", w2 + 2) + "No. of independent paths";
  out += reset;
  out += '\n';
  for (const auto& row : rows) {
    out += detail::pad(row.comparison, w0 + 2) + detail::pad(row.q, w1 + 2);
    if (row.significant) out += red;
    out += detail::pad(row.p, w2 + 2);
    if (row.significant) out += reset;
    out += row.paths;
    out += '\n';
  }
  return out;
}

/// Complete-path listing in the verbose layout: node sequence, size,
/// total effect, total variance per path, then the removed-path note.
inline std::string render_paths_verbose(const EvidenceNetwork& net, const PathAnalysis& an) {
  std::string out = "The total number of paths detected between treatment " +
                    an.report.source.label + " and treatment " + an.report.sink.label +
                    " is " + std::to_string(an.report.n_paths) + "\n";
  for (std::size_t k = 0; k < an.all_paths.paths.size(); ++k) {
    const auto idx = static_cast<Eigen::Index>(k);
    out += "path # " + std::to_string(k + 1) + " : " +
           detail::node_list(net, an.all_paths.paths[k]) + "\n";
    out += " size: " + std::to_string(an.all_paths.paths[k].size()) +
           "     total effect: " + detail::fmt("%.6g", an.all_paths.effects[idx]) +
           "   total variance: " + detail::fmt("%.6g", an.all_paths.variances[idx]) + "\n";
  }
  if (!an.report.removed.empty()) {
    out += "The following paths are removed from calculation due to linear dependency: \n";
    for (const auto& r : an.report.removed) {
      out += "  path #" + std::to_string(r.index + 1) + "\n";
    }
  }
  return out;
}

/// Machine-readable report, schema version 1. Numbers are emitted at
/// full precision; undefined p-values become null.
inline std::string render_report_json(const EvidenceNetwork& net,
                                      const std::vector<PathAnalysis>& analyses) {
  nlohmann::ordered_json doc;
  doc["schema"] = 1;
  doc["comparisons"] = nlohmann::ordered_json::array();
  for (const auto& an : analyses) {
    const InconsistencyReport& rep = an.report;
    nlohmann::ordered_json c;
    c["from"] = rep.source.label;
    c["to"] = rep.sink.label;
    c["status"] = to_string(rep.status);
    c["q"] = rep.q;
    c["dof"] = rep.dof;
    if (std::isnan(rep.p_value)) {
      c["p_value"] = nullptr;
    } else {
      c["p_value"] = rep.p_value;
    }
    c["n_paths"] = rep.n_paths;
    c["n_independent"] = rep.n_independent;
    c["nma"] = {{"effect", an.nma.effect}, {"variance", an.nma.variance}};
    c["sigma_ill_conditioned"] = rep.sigma_ill_conditioned;

    std::vector<bool> kept(an.all_paths.paths.size(), true);
    for (const auto& r : rep.removed) {
      if (r.index < kept.size()) kept[r.index] = false;
    }
    c["paths"] = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < an.all_paths.paths.size(); ++k) {
      const auto idx = static_cast<Eigen::Index>(k);
      nlohmann::ordered_json p;
      p["index"] = k + 1;
      p["nodes"] = nlohmann::ordered_json::array();
      for (const std::size_t n : an.all_paths.paths[k].nodes) {
        p["nodes"].push_back(net.nodes()[n].label);
      }
      p["size"] = an.all_paths.paths[k].size();
      p["effect"] = an.all_paths.effects[idx];
      p["variance"] = an.all_paths.variances[idx];
      p["kept"] = static_cast<bool>(kept[k]);
      c["paths"].push_back(std::move(p));
    }
    c["removed"] = nlohmann::ordered_json::array();
    for (const auto& r : rep.removed) {
      c["removed"].push_back({{"path", r.index + 1}, {"step", r.step}});
    }
    if (an.netpath.m.size() > 0) {
      nlohmann::ordered_json np;
      np["labels"] = an.netpath.labels;
      np["degenerate"] = an.netpath.degenerate;
      np["m"] = nlohmann::ordered_json::array();
      for (Eigen::Index r = 0; r < an.netpath.m.rows(); ++r) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (Eigen::Index q = 0; q < an.netpath.m.cols(); ++q) {
          row.push_back(an.netpath.m(r, q));
        }
        np["m"].push_back(std::move(row));
      }
      c["netpath"] = std::move(np);
    }
    doc["comparisons"].push_back(std::move(c));
  }
  return doc.dump(2) + "\n";
}

/// Arc list of a flow graph as CSV.
inline std::string render_flow_csv(const EvidenceNetwork& net, const EvidenceFlow& flow) {
  std::string out = "from,to,flow\n";
  char buf[64];
  for (const auto& arcs : flow.out) {
    for (const auto& arc : arcs) {
      out += net.nodes()[arc.from].label;
      out += ',';
      out += net.nodes()[arc.to].label;
      std::snprintf(buf, sizeof(buf), ",%.17g\n", arc.flow);
      out += buf;
    }
  }
  return out;
}

/// One hat-matrix row as CSV: a column per observed edge.
inline std::string render_hatrow_csv(const EvidenceNetwork& net, const HatRow& row) {
  std::string header;
  std::string values;
  char buf[64];
  for (std::size_t e = 0; e < net.n_edges(); ++e) {
    if (e) {
      header += ',';
      values += ',';
    }
    header += net.edges()[e].t1.label + ":" + net.edges()[e].t2.label;
    std::snprintf(buf, sizeof(buf), "%.17g", row.coefficients[static_cast<Eigen::Index>(e)]);
    values += buf;
  }
  return header + "\n" + values + "\n";
}

/// The disagreement matrix as CSV with row/column labels.
inline std::string render_netpath_csv(const NetpathMatrix& matrix) {
  if (matrix.m.rows() < 2) {
    throw InsufficientPaths("render_netpath_csv: need at least two paths");
  }
  std::string out = "path";
  for (const auto& l : matrix.labels) {
    out += ',';
    out += l;
  }
  out += '\n';
  char buf[64];
  for (Eigen::Index r = 0; r < matrix.m.rows(); ++r) {
    out += matrix.labels[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < matrix.m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), ",%.10g", matrix.m(r, c));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

namespace detail {

/// Fixed monotone light-to-dark ramp; t in [0,1].
inline std::string ramp_color(double t) {
  t = std::min(std::max(t, 0.0), 1.0);
  const int r = static_cast<int>(std::lround(247 + t * (8 - 247)));
  const int g = static_cast<int>(std::lround(251 + t * (48 - 251)));
  const int b = static_cast<int>(std::lround(255 + t * (107 - 255)));
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

inline std::string svg_label(const std::string& ascii_label) {
  // "pi_7" renders as the Greek letter with its index.
  if (ascii_label.rfind("pi_", 0) == 0) return "\xcf\x80 " + ascii_label.substr(3);
  return ascii_label;
}

}  // namespace detail

/// Deterministic standalone SVG heatmap: shaded grid, axis labels, the
/// value printed in each cell, and a small legend. Darker means more
/// disagreement.
inline std::string render_netpath_svg(const NetpathMatrix& matrix,
                                      const std::string& title = "") {
  const Eigen::Index p = matrix.m.rows();
  if (p < 2) {
    throw InsufficientPaths("render_netpath_svg: need at least two paths");
  }
  const int cell = 64;
  const int left = 72;
  const int top = title.empty() ? 56 : 84;
  const int legend_h = 64;
  const int width = left + static_cast<int>(p) * cell + 24;
  const int height = top + static_cast<int>(p) * cell + legend_h + (matrix.degenerate ? 24 : 0);

  std::string svg;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                "viewBox=\"0 0 %d %d\" font-family=\"DejaVu Sans, Arial, sans-serif\">\n",
                width, height, width, height);
  svg += buf;
  std::snprintf(buf, sizeof(buf),
                "<rect x=\"0\" y=\"0\" width=\"%d\" height=\"%d\" fill=\"#ffffff\"/>\n", width,
                height);
  svg += buf;
  if (!title.empty()) {
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"28\" font-size=\"18\" fill=\"#102a43\">%s</text>\n", left,
                  title.c_str());
    svg += buf;
  }

  for (Eigen::Index r = 0; r < p; ++r) {
    const std::string label = detail::svg_label(matrix.labels[static_cast<std::size_t>(r)]);
    // Column header.
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"%d\" font-size=\"13\" fill=\"#102a43\" "
                  "text-anchor=\"middle\">%s</text>\n",
                  left + static_cast<int>(r) * cell + cell / 2, top - 10, label.c_str());
    svg += buf;
    // Row label.
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"%d\" font-size=\"13\" fill=\"#102a43\" "
                  "text-anchor=\"end\">%s</text>\n",
                  left - 10, top + static_cast<int>(r) * cell + cell / 2 + 5, label.c_str());
    svg += buf;
  }

  for (Eigen::Index r = 0; r < p; ++r) {
    for (Eigen::Index c = 0; c < p; ++c) {
      const double v = matrix.m(r, c);
      const int x = left + static_cast<int>(c) * cell;
      const int y = top + static_cast<int>(r) * cell;
      std::snprintf(buf, sizeof(buf),
                    "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"%s\" "
                    "stroke=\"#c3cdd9\" stroke-width=\"1\"/>\n",
                    x, y, cell, cell, detail::ramp_color(v).c_str());
      svg += buf;
      const char* text_fill = v > 0.55 ? "#ffffff" : "#102a43";
      std::snprintf(buf, sizeof(buf),
                    "<text x=\"%d\" y=\"%d\" font-size=\"14\" fill=\"%s\" "
                    "text-anchor=\"middle\">%s</text>\n",
                    x + cell / 2, y + cell / 2 + 5, text_fill, detail::fmt("%.2g", v).c_str());
      svg += buf;
    }
  }

  // Legend: a discrete gradient strip labeled 0..1.
  const int ly = top + static_cast<int>(p) * cell + 22;
  const int steps = 24;
  const int strip_w = 192;
  for (int s = 0; s < steps; ++s) {
    const double t = static_cast<double>(s) / (steps - 1);
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"12\" fill=\"%s\"/>\n",
                  left + s * (strip_w / steps), ly, strip_w / steps, detail::ramp_color(t).c_str());
    svg += buf;
  }
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%d\" y=\"%d\" font-size=\"12\" fill=\"#102a43\" "
                "text-anchor=\"end\">0</text>\n",
                left - 6, ly + 11);
  svg += buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%d\" y=\"%d\" font-size=\"12\" fill=\"#102a43\">1</text>\n",
                left + strip_w + 6, ly + 11);
  svg += buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%d\" y=\"%d\" font-size=\"12\" fill=\"#486581\">darker = larger "
                "disagreement between paths</text>\n",
                left, ly + 30);
  svg += buf;
  if (matrix.degenerate) {
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"%d\" font-size=\"12\" fill=\"#b00020\">all path effects "
                  "are equal; the matrix is degenerate</text>\n",
                  left, ly + 50);
    svg += buf;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace netpath
