// Command-line front end: analyze | paths | flow | hatmatrix | netpath.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include <netpath/netpath.hpp>

namespace {

using namespace netpath;

struct CommonArgs {
  std::string input;
  std::string from;
  std::string to;
  std::string positional;  // "A:B"
  bool all = false;
  double flow_tol = 1e-10;
  double ref_tol = 1e-9;
  std::size_t path_cap = 10000;
  std::string format = "text";
  std::string heatmap;
  bool verbose = false;
};

void add_common_flags(CLI::App* cmd, CommonArgs& args, bool with_selection) {
  cmd->add_option("--input,-i", args.input, "network file (CSV or JSON)")->required();
  if (with_selection) {
    cmd->add_option("--from", args.from, "first treatment of the comparison");
    cmd->add_option("--to", args.to, "second treatment of the comparison");
  }
  cmd->add_option("--flow-tol", args.flow_tol,
                  "relative cutoff for treating a hat-row entry as zero");
  cmd->add_option("--ref-tol", args.ref_tol,
                  "relative cutoff for a zero row in the dependency reduction");
  cmd->add_option("--path-cap", args.path_cap, "maximum number of paths per comparison");
}

/// Resolves the comparison selection to a pair of labels. Accepts either
/// --from/--to or a positional "A:B".
std::pair<TreatmentId, TreatmentId> resolve_pair(const CommonArgs& args) {
  std::string from = args.from;
  std::string to = args.to;
  if (!args.positional.empty()) {
    if (!from.empty() || !to.empty()) {
      throw InvalidConfig("give either a positional comparison or --from/--to, not both");
    }
    const auto colon = args.positional.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == args.positional.size()) {
      throw InvalidConfig("comparison must look like A:B, got '" + args.positional + "'");
    }
    from = args.positional.substr(0, colon);
    to = args.positional.substr(colon + 1);
  }
  if (from.empty() || to.empty()) {
    throw InvalidConfig("select a comparison with A:B or --from/--to");
  }
  return {TreatmentId{from}, TreatmentId{to}};
}

void validate_options(const CommonArgs& args) {
  if (!(args.flow_tol > 0.0)) throw InvalidConfig("--flow-tol must be > 0");
  if (!(args.ref_tol > 0.0)) throw InvalidConfig("--ref-tol must be > 0");
  if (args.path_cap < 1) throw InvalidConfig("--path-cap must be >= 1");
  if (args.format != "text" && args.format != "json") {
    throw InvalidConfig("--format must be text or json, got '" + args.format + "'");
  }
}

AnalysisOptions to_options(const CommonArgs& args) {
  AnalysisOptions opt;
  opt.flow_tol = args.flow_tol;
  opt.ref_tol = args.ref_tol;
  opt.path_cap = args.path_cap;
  return opt;
}

bool color_enabled() {
  if (std::getenv("NETPATH_NO_COLOR") != nullptr) return false;
  return isatty(fileno(stdout)) != 0;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InvalidConfig("cannot write to '" + path + "'");
  }
  out << content;
}

void write_heatmap(const std::string& path, const NetpathMatrix& matrix,
                   const std::string& title) {
  const auto dot = path.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".svg") {
    write_file(path, render_netpath_svg(matrix, title));
  } else if (ext == ".csv") {
    write_file(path, render_netpath_csv(matrix));
  } else {
    throw InvalidConfig("--heatmap path must end in .svg or .csv, got '" + path + "'");
  }
}

/// Every unordered node pair, lexicographic, smaller label first.
std::vector<std::pair<TreatmentId, TreatmentId>> all_pairs(const EvidenceNetwork& net) {
  std::vector<std::pair<TreatmentId, TreatmentId>> pairs;
  for (std::size_t a = 0; a < net.n_nodes(); ++a) {
    for (std::size_t b = a + 1; b < net.n_nodes(); ++b) {
      pairs.emplace_back(net.nodes()[a], net.nodes()[b]);
    }
  }
  return pairs;
}

std::vector<PathAnalysis> analyze_pairs(const EvidenceNetwork& net,
                                        const std::vector<std::pair<TreatmentId, TreatmentId>>& pairs,
                                        const AnalysisOptions& opt) {
  const LaplacianSystem sys = laplacian_pinv(net);
  std::vector<std::future<PathAnalysis>> futures;
  futures.reserve(pairs.size());
  for (const auto& [from, to] : pairs) {
    futures.push_back(std::async(std::launch::async, [&net, &sys, &opt, from, to] {
      return q_path(net, sys, from, to, opt);
    }));
  }
  std::vector<PathAnalysis> analyses;
  analyses.reserve(pairs.size());
  for (auto& f : futures) analyses.push_back(f.get());
  return analyses;
}

void print_verbose_block(const EvidenceNetwork& net, const PathAnalysis& an) {
  const std::string cname = an.report.source.label + ":" + an.report.sink.label;
  std::printf("network estimate %s: effect %.6g, variance %.6g\n", cname.c_str(),
              an.nma.effect, an.nma.variance);
  std::printf("hat row (columns follow the edge order below):\n");
  std::string edge_names;
  for (std::size_t e = 0; e < net.n_edges(); ++e) {
    if (e) edge_names += "  ";
    edge_names += net.edges()[e].t1.label + ":" + net.edges()[e].t2.label;
  }
  std::printf("  %s\n", edge_names.c_str());
  std::fputs(detail::format_matrix(an.hat.coefficients.transpose()).c_str(), stdout);
  std::printf("path-adjacency matrix A (%zu x %zu):\n", an.report.n_paths, an.report.n_paths);
  std::fputs(detail::format_matrix(an.all_paths.adjacency).c_str(), stdout);
  std::printf("covariance matrix Sigma (%zu x %zu):\n", an.report.n_paths, an.report.n_paths);
  std::fputs(detail::format_matrix(an.all_paths.sigma).c_str(), stdout);
  std::fputs(render_paths_verbose(net, an).c_str(), stdout);

  // Comparator tests on the same comparison, when they apply.
  try {
    const ZTestResult ss = side_split(net, an.report.source, an.report.sink);
    std::printf("side-splitting: omega %.6g, se %.6g, z %.6g, p %.3g\n", ss.omega, ss.se,
                ss.z, ss.p_value);
  } catch (const Error& e) {
    std::printf("side-splitting: not applicable (%s)\n", e.what());
  }
  try {
    const auto loops = enumerate_loops(net, an.report.source, an.report.sink,
                                       std::max<std::size_t>(net.n_nodes(), 3));
    for (const auto& loop : loops) {
      std::string name;
      for (const auto& t : loop) name += t.label;
      const ZTestResult lt = loop_test(net, loop);
      std::printf("loop %s: omega %.6g, se %.6g, z %.6g, p %.3g\n", name.c_str(), lt.omega,
                  lt.se, lt.z, lt.p_value);
    }
    if (loops.empty()) {
      std::printf("loops: none through this comparison\n");
    }
  } catch (const Error& e) {
    std::printf("loops: not applicable (%s)\n", e.what());
  }
  std::printf("design-by-treatment interaction: not supported\n");
}

int run_analyze(const CommonArgs& args) {
  validate_options(args);
  const bool selected = !args.positional.empty() || !args.from.empty() || !args.to.empty();
  if (args.all && selected) {
    throw InvalidConfig("--all cannot be combined with a comparison selection");
  }
  if (!args.all && !selected) {
    throw InvalidConfig("select a comparison with A:B, --from/--to, or --all");
  }
  if (args.all && !args.heatmap.empty()) {
    throw InvalidConfig("--heatmap needs a single comparison, not --all");
  }

  const EvidenceNetwork net = load_network_file(args.input);
  const AnalysisOptions opt = to_options(args);

  std::vector<std::pair<TreatmentId, TreatmentId>> pairs;
  if (args.all) {
    pairs = all_pairs(net);
  } else {
    pairs.push_back(resolve_pair(args));
  }
  const std::vector<PathAnalysis> analyses = analyze_pairs(net, pairs, opt);

  for (const auto& an : analyses) {
    if (an.report.sigma_ill_conditioned) {
      std::fprintf(stderr,
                   "warning: %s:%s covariance condition estimate exceeds 1e12; "
                   "the statistic may be inaccurate\n",
                   an.report.source.label.c_str(), an.report.sink.label.c_str());
    }
  }

  if (args.format == "json") {
    std::fputs(render_report_json(net, analyses).c_str(), stdout);
  } else {
    std::fputs(render_report_text(analyses, color_enabled()).c_str(), stdout);
    if (args.verbose) {
      for (const auto& an : analyses) {
        std::printf("\n");
        print_verbose_block(net, an);
      }
    }
  }

  if (!args.heatmap.empty()) {
    const PathAnalysis& an = analyses.front();
    const std::string title =
        "Netpath " + an.report.source.label + ":" + an.report.sink.label;
    write_heatmap(args.heatmap, an.netpath, title);
  }
  return 0;
}

int run_paths(const CommonArgs& args) {
  validate_options(args);
  const EvidenceNetwork net = load_network_file(args.input);
  const auto [from, to] = resolve_pair(args);
  const PathAnalysis an = q_path(net, from, to, to_options(args));
  std::fputs(render_paths_verbose(net, an).c_str(), stdout);
  if (args.verbose) {
    std::printf("independent paths: %zu of %zu\n", an.report.n_independent,
                an.report.n_paths);
  }
  return 0;
}

int run_flow(const CommonArgs& args) {
  validate_options(args);
  const EvidenceNetwork net = load_network_file(args.input);
  const auto [from, to] = resolve_pair(args);
  const LaplacianSystem sys = laplacian_pinv(net);
  const HatRow row = hat_row(sys, net, from, to);
  const EvidenceFlow flow = evidence_flow(net, row, args.flow_tol);
  std::fputs(render_flow_csv(net, flow).c_str(), stdout);
  return 0;
}

int run_hatmatrix(const CommonArgs& args) {
  validate_options(args);
  const EvidenceNetwork net = load_network_file(args.input);
  const auto [from, to] = resolve_pair(args);
  const LaplacianSystem sys = laplacian_pinv(net);
  const HatRow row = hat_row(sys, net, from, to);
  std::fputs(render_hatrow_csv(net, row).c_str(), stdout);
  return 0;
}

int run_netpath(const CommonArgs& args) {
  validate_options(args);
  const EvidenceNetwork net = load_network_file(args.input);
  const auto [from, to] = resolve_pair(args);
  const PathAnalysis an = q_path(net, from, to, to_options(args));
  if (an.netpath.m.rows() < 2) {
    throw InsufficientPaths("netpath: fewer than two independent paths for " +
                            from.label + ":" + to.label);
  }
  if (!args.heatmap.empty()) {
    write_heatmap(args.heatmap, an.netpath, "Netpath " + from.label + ":" + to.label);
  } else {
    std::fputs(render_netpath_csv(an.netpath).c_str(), stdout);
  }
  if (an.netpath.degenerate) {
    std::fprintf(stderr, "warning: all path effects are equal; the matrix is degenerate\n");
  }
  return 0;
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::input: return 2;
    case ErrorKind::numerical: return 3;
    case ErrorKind::explosion: return 4;
  }
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"path-based inconsistency diagnostics for network meta-analysis"};
  app.require_subcommand(1);

  CommonArgs analyze_args, paths_args, flow_args, hat_args, netpath_args;

  CLI::App* analyze = app.add_subcommand(
      "analyze", "Q statistic, p-value and path counts for one or all comparisons");
  add_common_flags(analyze, analyze_args, true);
  analyze->add_option("comparison", analyze_args.positional, "comparison as A:B");
  analyze->add_flag("--all", analyze_args.all, "analyze every treatment pair");
  analyze->add_option("--format", analyze_args.format, "output format: text or json");
  analyze->add_option("--heatmap", analyze_args.heatmap,
                      "write the disagreement heatmap to this .svg or .csv path");
  analyze->add_flag("--verbose", analyze_args.verbose,
                    "print hat row, path matrices, path list and comparator tests");

  CLI::App* paths = app.add_subcommand("paths", "list every evidence path for a comparison");
  add_common_flags(paths, paths_args, true);
  paths->add_option("comparison", paths_args.positional, "comparison as A:B");
  paths->add_flag("--verbose", paths_args.verbose, "add the independent-path count");

  CLI::App* flow = app.add_subcommand("flow", "evidence-flow arcs for a comparison as CSV");
  add_common_flags(flow, flow_args, true);
  flow->add_option("comparison", flow_args.positional, "comparison as A:B");

  CLI::App* hat = app.add_subcommand("hatmatrix", "hat-matrix row for a comparison as CSV");
  add_common_flags(hat, hat_args, true);
  hat->add_option("comparison", hat_args.positional, "comparison as A:B");

  CLI::App* netpath_cmd =
      app.add_subcommand("netpath", "pairwise path-disagreement matrix / heatmap");
  add_common_flags(netpath_cmd, netpath_args, true);
  netpath_cmd->add_option("comparison", netpath_args.positional, "comparison as A:B");
  netpath_cmd->add_option("--heatmap", netpath_args.heatmap,
                          "write the heatmap to this .svg or .csv path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);  // --help and friends
    }
    app.exit(e);
    return 2;
  }

  try {
    if (analyze->parsed()) return run_analyze(analyze_args);
    if (paths->parsed()) return run_paths(paths_args);
    if (flow->parsed()) return run_flow(flow_args);
    if (hat->parsed()) return run_hatmatrix(hat_args);
    if (netpath_cmd->parsed()) return run_netpath(netpath_args);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 2;
}
