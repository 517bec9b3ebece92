// qkforge command-line driver: verify, eval-metric, report.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qkforge/harness.hpp"

using namespace qkforge;

namespace {

std::vector<double> parse_point(const std::string& text, int n) {
  // "rho1=1,eta1=0" in any order, or plain values in chart order
  auto names = chart_variable_names(n);
  std::vector<double> c(names.size(), 0.0);
  std::vector<bool> seen(names.size(), false);
  std::stringstream ss(text);
  std::string item;
  size_t plain = 0;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) {
      if (plain >= c.size()) throw ConfigError("too many coordinates in --point");
      c[plain] = std::stod(item);
      seen[plain++] = true;
      continue;
    }
    std::string key = item.substr(0, eq);
    auto it = std::find(names.begin(), names.end(), key);
    if (it == names.end()) throw ConfigError("unknown coordinate '" + key + "'");
    c[it - names.begin()] = std::stod(item.substr(eq + 1));
    seen[it - names.begin()] = true;
  }
  for (size_t a = 0; a < names.size(); ++a)
    if (!seen[a] && names[a].rfind("rho", 0) == 0) throw ConfigError("--point is missing " + names[a]);
  return c;
}

int write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream out(path);
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    return 2;
  }
  out << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Toric quaternionic Kahler metrics from c-map prepotentials"};
  app.require_subcommand(1);

  std::string config_file, model, prepotential, out, point;
  double degree = 2.0;
  int points = -1;
  long long seed = -1;
  std::vector<std::string> tols;
  bool exhaustive = false, cp = false;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "key=value config file (flags override it)");
    sub->add_option("--model", model, "built-in model id");
    sub->add_option("--prepotential", prepotential, "prepotential in X1..Xn");
    sub->add_option("--degree", degree, "declared homogeneity degree of the prepotential");
    sub->add_option("--out", out, "write the JSON here instead of stdout");
  };
  auto* verify = app.add_subcommand("verify", "run every check and emit a JSON report");
  common(verify);
  verify->add_option("--points", points, "sample points per check");
  verify->add_option("--seed", seed, "sampling seed");
  verify->add_option("--tol", tols, "<class>=<value> tolerance override");
  verify->add_flag("--exhaustive", exhaustive, "evaluate the full redundant V constraint set");

  auto* eval = app.add_subcommand("eval-metric", "QK metric and connection at one chart point");
  common(eval);
  eval->add_option("--point", point, "chart point, e.g. rho1=1,eta1=0")->required();
  eval->add_flag("--cp", cp, "add the Calderbank-Pedersen form (n = 1)");

  std::string report_path;
  auto* report = app.add_subcommand("report", "pretty-print a JSON report");
  report->add_option("path", report_path, "report file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (report->parsed()) {
      std::ifstream in(report_path);
      if (!in) throw ConfigError("cannot read " + report_path);
      Report r = report_from_json(nlohmann::json::parse(in));
      std::cout << format_report(r);
      return exit_status(r);
    }

    RunConfig cfg = config_file.empty() ? RunConfig{} : parse_config_file(config_file);
    if (!model.empty()) {
      cfg.model = model;
      cfg.prepotential.clear();
    }
    if (!prepotential.empty()) {
      cfg.prepotential = prepotential;
      cfg.model.clear();
    }
    if (cfg.model.empty() && cfg.prepotential.empty()) cfg.model = "x1sq";
    if (!app.get_subcommand(verify->parsed() ? "verify" : "eval-metric")->get_option("--degree")->empty())
      cfg.degree = degree;
    if (points >= 0) cfg.points = points;
    if (points == 0) throw ConfigError("points must be >= 1");
    if (seed >= 0) cfg.seed = static_cast<unsigned long>(seed);
    for (const auto& t : tols) apply_tolerance(cfg, t);
    if (exhaustive) cfg.exhaustive = true;
    if (!out.empty()) cfg.out = out;
    cfg.validate();

    if (verify->parsed()) {
      Report r = cli_verify(cfg);
      std::cerr << format_report(r);
      int w = write_output(serialize(r), cfg.out);
      return w ? w : exit_status(r);
    }

    ResolvedModel m = resolve_model(cfg);
    auto c = parse_point(point, m.n());
    try {
      auto j = cli_eval_metric(cfg, c, cp);
      return write_output(j.dump(2) + "\n", cfg.out);
    } catch (const SingularPointError& e) {
      std::cerr << "singular point: " << e.what() << "\n";
      return 3;
    } catch (const DomainError& e) {
      std::cerr << "singular point: " << e.what() << "\n";
      return 3;
    } catch (const DegeneratePointError& e) {
      std::cerr << "degenerate point: " << e.what() << "\n";
      return 3;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "bad report: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
