#include "cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "gexp/errors.hpp"
#include "gexp/gheat_pde.hpp"
#include "gexp/girsanov.hpp"
#include "gexp/harness.hpp"
#include "gexp/phi_lang.hpp"
#include "gexp/scenario_tree.hpp"
#include "gexp/simple_process.hpp"
#include "gexp/uncertainty.hpp"

namespace gexp::cli {

namespace {

constexpr const char* kVersion =
    "gexp 0.1.0 (pde: explicit monotone FD, dt = 0.9 dx^2/sigma_max^2, half width 6 sd; "
    "tree: Rademacher scenario DP, predictable brackets)";

struct Settings {
  std::vector<double> sigma2;
  std::string phi;
  int phi_arity = 0;
  double phi_bound = 10.0;
  std::vector<double> times;
  double t = 1.0;
  std::string accuracy = "medium";
  int steps = 0;
  int sigma_levels = 0;
  std::string mode = "upper";
  bool product_space = false;
  std::string h;
  std::vector<int> m_list = {6, 8, 10, 12};
  std::string engine = "tree";
  double delta = 0.5;
  double alpha = 1.0;
  double beta = 1.0;
  std::optional<double> eps;
  std::vector<double> eps_list;
  long long seed = 0;
  std::string output;
  bool no_timing = false;
  bool quick = false;
  double inject_bias = 0.0;
  int trials = 100;
};

std::string num(double v) {
  // Shortest form that reads back to the same double.
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

template <typename T>
std::string list(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    if constexpr (std::is_integral_v<T>) {
      out += std::to_string(v[i]);
    } else {
      out += num(v[i]);
    }
  }
  return out;
}

// CSV body plus the echoed command line that reproduces it.
class Report {
 public:
  explicit Report(std::string subcommand) : echo_("# gexp " + std::move(subcommand)) {}

  void flag(const std::string& name, const std::string& value, bool quote = true) {
    echo_ += " --" + name;
    if (value.empty()) return;
    const bool plain = !quote || value.find_first_of(" '\"()*$") == std::string::npos;
    echo_ += " " + (plain ? value : "'" + value + "'");
  }
  void header(std::initializer_list<const char*> names) {
    std::string line;
    for (const char* n : names) line += (line.empty() ? "" : ",") + std::string(n);
    rows_.push_back(line);
  }
  void row(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) line += (i ? "," : "") + csv_cell(cells[i]);
    rows_.push_back(line);
  }
  [[nodiscard]] std::string text() const {
    std::string out = echo_ + "\n";
    for (const auto& r : rows_) out += r + "\n";
    return out;
  }

 private:
  std::string echo_;
  std::vector<std::string> rows_;
};

class Stopwatch {
 public:
  explicit Stopwatch(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
  [[nodiscard]] std::string seconds() const {
    if (!enabled_) return "0";
    return num(std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count());
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

VolatilityBand band_of(const Settings& s, VolatilityBand fallback) {
  if (s.sigma2.empty()) return fallback;
  if (s.sigma2.size() != 2) throw ConfigError("--sigma2 takes two values: MIN MAX (variances)");
  if (s.sigma2[0] == 0.0 && s.sigma2[1] == 0.0) return VolatilityBand::totally_degenerate();
  try {
    return VolatilityBand(s.sigma2[0], s.sigma2[1]);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("--sigma2: ") + e.what());
  }
}

std::vector<double> times_of(const Settings& s) {
  return s.times.empty() ? std::vector<double>{s.t} : s.times;
}

// Catalog name or expression; an arity-1 functional observed at several
// times becomes the average of its values.
Functional functional_of(const Settings& s, const std::string& fallback, std::size_t n_times) {
  const std::string source = s.phi.empty() ? fallback : s.phi;
  const int n = static_cast<int>(n_times);
  const bool named = catalog(source).has_value();
  const int arity = s.phi_arity > 0 ? s.phi_arity : (named ? 1 : n);
  Functional f = resolve_functional(source, arity, s.phi_bound);
  if (f.arity() == n) return f;
  if (f.arity() == 1) return mean_lift(f, n);
  throw ConfigError("functional '" + source + "' has arity " + std::to_string(f.arity()) +
                    " but " + std::to_string(n) + " observation time(s) were given");
}

void echo_band(Report& r, VolatilityBand b) {
  r.flag("sigma2", num(b.sigma_min_sq()) + " " + num(b.sigma_max_sq()), false);
}

void echo_phi(Report& r, const Settings& s, const std::string& fallback) {
  r.flag("phi", s.phi.empty() ? fallback : s.phi);
  if (s.phi_arity > 0) r.flag("phi-arity", std::to_string(s.phi_arity));
  r.flag("phi-bound", num(s.phi_bound));
}

std::string cmd_pde(const Settings& s) {
  const VolatilityBand band = band_of(s, {0.25, 1.0});
  const Generator gen(band);
  const Accuracy acc = parse_accuracy(s.accuracy);
  const auto times = s.times.empty() ? std::vector<double>{s.t} : s.times;
  const Functional phi = functional_of(s, "sq", times.size());

  Report r("pde");
  echo_band(r, band);
  echo_phi(r, s, "sq");
  if (s.times.empty()) {
    r.flag("t", num(s.t));
  } else {
    r.flag("times", list(times));
  }
  r.flag("accuracy", std::string(to_string(acc)));
  r.header({"value", "nx", "dt", "runtime_s"});

  const Stopwatch clock(!s.no_timing);
  if (times.size() == 1) {
    const PdeGrid grid = make_grid(gen, times[0], acc);
    const SolutionField field = solve(gen, phi, grid);
    r.row({num(field.center_value()), std::to_string(grid.nx), num(field.dt), clock.seconds()});
  } else {
    // dt differs per increment; left blank.
    const double v = expect_cylinder(gen, phi, times, acc);
    r.row({num(v), std::to_string(tier_nodes(acc)), "", clock.seconds()});
  }
  return r.text();
}

TreeSpec tree_of(const Settings& s, VolatilityBand band, int steps, int levels, bool product) {
  TreeSpec spec;
  spec.steps = s.steps > 0 ? s.steps : steps;
  spec.sigma_levels = s.sigma_levels > 0 ? s.sigma_levels : levels;
  spec.t_final = s.t;
  spec.band = band;
  spec.product_space = product || s.product_space;
  spec.validate();
  return spec;
}

std::string cmd_tree(const Settings& s) {
  const VolatilityBand band = band_of(s, {0.25, 1.0});
  const TreeSpec spec = tree_of(s, band, 6, 5, false);
  const auto times = times_of(s);
  const Functional phi = functional_of(s, "sq", times.size());
  if (s.mode != "upper" && s.mode != "lower") throw ConfigError("--mode must be upper or lower");
  const Mode mode = s.mode == "upper" ? Mode::Upper : Mode::Lower;

  Report r("tree");
  echo_band(r, band);
  echo_phi(r, s, "sq");
  r.flag("times", list(times));
  r.flag("t", num(spec.t_final));
  r.flag("steps", std::to_string(spec.steps));
  r.flag("sigma-levels", std::to_string(spec.sigma_levels));
  r.flag("mode", s.mode);
  if (spec.product_space) r.flag("product-space", "");
  r.header({"value", "m", "levels", "leaves", "runtime_s"});

  const Stopwatch clock(!s.no_timing);
  const double v = expectation(spec, observe(phi, times), mode);
  r.row({num(v), std::to_string(spec.steps), std::to_string(spec.control_variances().size()),
         num(spec.leaf_count()), clock.seconds()});
  return r.text();
}

std::string cmd_girsanov(const Settings& s) {
  const VolatilityBand band = band_of(s, {0.25, 1.0});
  const Generator gen(band);
  const auto times = times_of(s);
  const Functional phi = functional_of(s, "cos1", times.size());
  const std::string h_text = s.h.empty() ? "const:0.5" : s.h;
  const IntegrandSpec h = IntegrandSpec::parse(h_text);
  IdentityOptions opt;
  opt.sigma_levels = s.sigma_levels > 0 ? s.sigma_levels : 2;
  opt.t_final = s.t;
  opt.engine = s.engine;
  opt.inject_bias = s.inject_bias;
  if (s.m_list.empty()) throw ConfigError("--m-list needs at least one step count");

  Report r("girsanov-check");
  echo_band(r, band);
  r.flag("h", h_text);
  echo_phi(r, s, "cos1");
  r.flag("times", list(times));
  r.flag("t", num(s.t));
  r.flag("m-list", list(s.m_list));
  r.flag("sigma-levels", std::to_string(opt.sigma_levels));
  r.flag("engine", s.engine);
  r.flag("delta", num(s.delta));
  if (s.inject_bias != 0.0) r.flag("inject-bias", num(s.inject_bias));
  r.header({"m", "sigma_levels", "engine", "lhs", "rhs", "abs_error", "novikov_value",
            "novikov_bound", "runtime_s"});

  for (int m : s.m_list) {
    const Stopwatch clock(!s.no_timing);
    const GirsanovReport g = verify_identity(gen, h, phi, times, {m}, opt).front();
    const NovikovCertificate nc = novikov_bound(gen, h.sample(m), s.delta, s.t, opt.sigma_levels);
    r.row({std::to_string(m), std::to_string(g.sigma_levels), g.engine, num(g.lhs), num(g.rhs),
           num(g.abs_error()), num(nc.tree_value), num(nc.closed_form_bound), clock.seconds()});
  }
  return r.text();
}

std::string cmd_jeps(const Settings& s) {
  const VolatilityBand band = band_of(s, {0.25, 1.0});
  const std::string h_text = s.h.empty() ? "const:1" : s.h;
  std::vector<double> eps = s.eps_list.empty() ? std::vector<double>{0.4, 0.2, 0.1, 0.05} : s.eps_list;
  if (s.eps) eps = {*s.eps};
  const int steps = s.steps > 0 ? s.steps : 12;
  const int levels = s.sigma_levels > 0 ? s.sigma_levels : 2;

  Report r("jeps-sweep");
  echo_band(r, band);
  r.flag("h", h_text);
  r.flag("alpha", num(s.alpha));
  r.flag("beta", num(s.beta));
  r.flag("eps-list", list(eps));
  r.flag("steps", std::to_string(steps));
  r.flag("sigma-levels", std::to_string(levels));
  r.flag("t", num(s.t));
  r.header({"eps", "upper", "lower", "dev_upper", "dev_lower", "slope_upper", "slope_lower",
            "runtime_s"});

  const Stopwatch clock(!s.no_timing);
  const JepsSweep sweep = jeps_sweep(Generator(band), IntegrandSpec::parse(h_text), s.alpha,
                                     s.beta, eps, steps, s.t, levels);
  const std::string elapsed = clock.seconds();
  for (const auto& row : sweep.rows) {
    r.row({num(row.eps), num(row.upper), num(row.lower), num(std::abs(row.upper - 1.0)),
           num(std::abs(row.lower - 1.0)), num(sweep.slope_upper), num(sweep.slope_lower),
           elapsed});
  }
  return r.text();
}

std::string cmd_degenerate(const Settings& s) {
  const VolatilityBand band = band_of(s, {0.0, 1.0});
  const Generator gen(band);
  const auto times = times_of(s);
  const Functional phi = functional_of(s, "cos1", times.size());
  const std::string h_text = s.h.empty() ? "const:0.5" : s.h;
  const std::vector<double> eps = s.eps_list.empty() ? std::vector<double>{0.4, 0.2, 0.1} : s.eps_list;
  DegenerateOptions opt;
  opt.sigma_levels = s.sigma_levels > 0 ? s.sigma_levels : 2;
  opt.t_final = s.t;
  opt.inject_bias = s.inject_bias;
  const int steps = s.steps > 0 ? s.steps : 8;

  Report r("degenerate");
  echo_band(r, band);
  r.flag("h", h_text);
  echo_phi(r, s, "cos1");
  r.flag("times", list(times));
  r.flag("t", num(s.t));
  r.flag("eps-list", list(eps));
  r.flag("steps", std::to_string(steps));
  r.flag("sigma-levels", std::to_string(opt.sigma_levels));
  if (s.inject_bias != 0.0) r.flag("inject-bias", num(s.inject_bias));
  r.header({"eps", "perturbed_lhs", "perturbed_rhs", "identity_error", "step1", "step1_bound",
            "step2", "lhs", "rhs", "lipschitz", "mean_abs_w", "runtime_s"});

  const Stopwatch clock(!s.no_timing);
  const DegenerateReport rep =
      degenerate_pipeline(gen, IntegrandSpec::parse(h_text), phi, times, eps, steps, opt);
  const std::string elapsed = clock.seconds();
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& row = rep.rows[i];
    const bool base = i + 1 == rep.rows.size();
    r.row({num(row.eps), num(row.perturbed_lhs), num(row.perturbed_rhs), num(row.identity_error()),
           base ? "" : num(row.step1), base ? "" : num(row.step1_bound), base ? "" : num(row.step2),
           num(rep.lhs), num(rep.rhs), num(rep.lipschitz), num(rep.mean_abs_w), elapsed});
  }
  return r.text();
}

std::string cmd_axioms(const Settings& s, bool& all_passed) {
  const int steps = s.steps > 0 ? s.steps : 8;
  const int levels = s.sigma_levels > 0 ? s.sigma_levels : 2;
  Report r("axioms");
  r.flag("trials", std::to_string(s.trials));
  r.flag("steps", std::to_string(steps));
  r.flag("sigma-levels", std::to_string(levels));
  r.header({"axiom", "passed", "trials", "worst_violation"});
  all_passed = true;
  for (const auto& t : run_axiom_suite(s.trials, 20240601, steps, levels)) {
    r.row({t.axiom, std::to_string(t.passed), std::to_string(t.trials), num(t.worst)});
    all_passed = all_passed && t.passed == t.trials;
  }
  return r.text();
}

// Destination for CSV: --output, else $GEXP_OUTPUT_DIR/<subcommand>.csv, else stdout.
std::optional<std::filesystem::path> destination(const Settings& s, const std::string& sub) {
  if (!s.output.empty() && s.output != "-") return std::filesystem::path(s.output);
  if (s.output == "-") return std::nullopt;
  if (const char* dir = std::getenv("GEXP_OUTPUT_DIR"); dir != nullptr && *dir != '\0') {
    return std::filesystem::path(dir) / (sub + ".csv");
  }
  return std::nullopt;
}

void emit(const std::string& text, const Settings& s, const std::string& sub, std::ostream& out) {
  const auto path = destination(s, sub);
  if (!path) {
    out << text;
    return;
  }
  if (path->has_parent_path()) std::filesystem::create_directories(path->parent_path());
  std::ofstream file(*path, std::ios::binary);
  if (!file) throw ConfigError("cannot open output file '" + path->string() + "'");
  file << text;
}

void add_options(CLI::App& app, Settings& s) {
  app.add_option("--sigma2", s.sigma2, "Variance band MIN MAX (variances, not standard deviations)")
      ->expected(2);
  app.add_option("--phi,--functional", s.phi, "Catalog name (cos1, sq, lin) or expression");
  app.add_option("--phi-arity", s.phi_arity, "Arity of an expression functional");
  app.add_option("--phi-bound", s.phi_bound, "Clip bound M of an expression functional");
  app.add_option("--times", s.times, "Observation times, comma separated")->delimiter(',');
  app.add_option("--t", s.t, "Horizon T");
  app.add_option("--accuracy", s.accuracy, "PDE tier")
      ->check(CLI::IsMember({"coarse", "medium", "fine"}));
  app.add_option("--steps", s.steps, "Tree steps m");
  app.add_option("--sigma-levels", s.sigma_levels, "Control grid size");
  app.add_option("--mode", s.mode, "upper or lower")->check(CLI::IsMember({"upper", "lower"}));
  app.add_flag("--product-space", s.product_space, "Add the independent driver W");
  app.add_option("--h", s.h, "Integrand: const:<v> or steps:v0,v1,...");
  app.add_option("--m-list", s.m_list, "Step counts, comma separated")->delimiter(',');
  app.add_option("--engine", s.engine, "Left side engine: tree or pde-tree")
      ->check(CLI::IsMember({"tree", "pde-tree"}));
  app.add_option("--delta", s.delta, "Novikov exponent margin");
  app.add_option("--alpha", s.alpha, "J_eps alpha");
  app.add_option("--beta", s.beta, "J_eps beta");
  app.add_option("--eps", s.eps, "Single eps for the sweep");
  app.add_option("--eps-list", s.eps_list, "Perturbation sizes, comma separated")->delimiter(',');
  app.add_option("--seed", s.seed, "Accepted for uniformity; every engine is deterministic");
  app.add_option("--output,-o", s.output, "CSV destination ('-' for stdout)");
  app.add_flag("--no-timing", s.no_timing, "Write 0 in runtime columns (byte-stable output)");
  app.add_flag("--quick", s.quick, "reproduce-all: coarse tiers and shallow trees");
  app.add_option("--inject-bias", s.inject_bias, "Self-test: add to identity right-hand sides");
  app.add_option("--trials", s.trials, "Axiom suite trials");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sublinear expectation engines: G-heat PDE and scenario tree", "gexp"};
  // --h is the integrand, so help is long-form only.
  app.set_help_flag("--help", "Print this help message and exit");
  Settings s;
  add_options(app, s);
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "File of key = value lines; flags given on the command line win");
  app.require_subcommand(1, 1);

  const std::vector<std::pair<const char*, const char*>> subcommands = {
      {"pde", "E^[phi(B_t)] by the G-heat equation"},
      {"tree", "Upper or lower expectation on the scenario tree"},
      {"girsanov-check", "Both sides of the Girsanov identity over --m-list"},
      {"jeps-sweep", "E^[J_eps] and -E^[-J_eps] over --eps-list"},
      {"degenerate", "Perturbation pipeline for a degenerate band"},
      {"axioms", "Sublinear-expectation axioms on random functionals"},
      {"reproduce-all", "Run every acceptance criterion"},
  };
  for (const auto& [name, help] : subcommands) {
    app.add_subcommand(name, help)->fallthrough()->set_help_flag("--help", "Print this help message and exit");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    if (sub == "reproduce-all") {
      HarnessOptions opt;
      opt.quick = s.quick;
      opt.inject_bias = s.inject_bias;
      bool ok = true;
      (void)run_acceptance(opt, [&](const CriterionResult& r) {
        out << format_result(r) << std::endl;
        ok = ok && r.passed;
      });
      return ok ? 0 : 1;
    }
    if (sub == "axioms") {
      bool ok = false;
      emit(cmd_axioms(s, ok), s, sub, out);
      return ok ? 0 : 1;
    }
    std::string text;
    if (sub == "pde") text = cmd_pde(s);
    if (sub == "tree") text = cmd_tree(s);
    if (sub == "girsanov-check") text = cmd_girsanov(s);
    if (sub == "jeps-sweep") text = cmd_jeps(s);
    if (sub == "degenerate") text = cmd_degenerate(s);
    emit(text, s, sub, out);
    return 0;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    err << "error: malformed functional: " << e.what() << "\n";
    return 2;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const UnsupportedError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("gexp");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace gexp::cli
