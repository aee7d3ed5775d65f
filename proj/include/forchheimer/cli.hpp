#pragma once

/// \file
/// Command-line driver: flag parsing, study execution, CSV emission.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "forchheimer/analysis.hpp"
#include "forchheimer/manufactured.hpp"
#include "forchheimer/property_checks.hpp"

namespace forchheimer::cli {

enum class Command { convergence, dependence, properties, consistency };

struct RunConfig {
  Command command = Command::convergence;
  int example = 1;
  std::vector<char> variants{'A'};
  std::vector<std::size_t> levels{4, 8, 16, 32};
  DtRule dt_rule;
  double final_time = 1.0;
  NewtonConfig newton;
  std::string output;
  std::uint64_t seed = 20240607;
  unsigned jobs = 1;
  std::size_t samples = 100;
  double fd_step = 1e-5;
  std::size_t random_polynomials = 20;
};

struct ParseOutcome {
  std::optional<RunConfig> config;
  /// Exit code when no config was produced: 0 for --help, 2 for bad input.
  int exit_code = 0;
  std::string message;
};

inline std::string format_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5e", v);
  return buf;
}

namespace detail {

inline std::vector<std::size_t> parse_levels(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    const long long v = std::stoll(item, &pos);
    if (pos != item.size() || v <= 0) throw std::invalid_argument(item);
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

inline std::vector<char> parse_variants(const std::string& text) {
  std::vector<char> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item != "A" && item != "B") throw std::invalid_argument(item);
    out.push_back(item[0]);
  }
  return out;
}

inline DtRule parse_dt(const std::string& text) {
  if (text == "proportional-to-h" || text == "proportional") return DtRule::proportional();
  const std::string prefix = "fixed:";
  if (text.rfind(prefix, 0) == 0) {
    std::size_t pos = 0;
    const std::string num = text.substr(prefix.size());
    const double v = std::stod(num, &pos);
    if (pos != num.size() || !(v > 0.0)) throw std::invalid_argument(text);
    return DtRule::fixed_step(v);
  }
  throw std::invalid_argument(text);
}

}  // namespace detail

inline ParseOutcome parse_args(int argc, const char* const* argv) {
  CLI::App app{"Mixed finite element solver for generalized Forchheimer flows"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string levels_text = "4,8,16,32";
  std::string variant_text = "A";
  std::string variants_text = "A,B";
  std::string dt_text = "proportional-to-h";

  auto add_study_flags = [&](CLI::App* sub, bool single_variant) {
    sub->add_option("--example", cfg.example, "Manufactured example (1 or 2)")
        ->check(CLI::IsMember({1, 2}));
    if (single_variant) {
      sub->add_option("--variant", variant_text, "Coefficient variant: A (g=1+s) or B (g=1+0.95s)");
    } else {
      sub->add_option("--variants", variants_text, "Two variants to compare, e.g. A,B");
    }
  };
  auto add_solver_flags = [&](CLI::App* sub) {
    sub->add_option("--levels", levels_text, "Comma-separated mesh subdivisions, increasing");
    sub->add_option("--dt", dt_text, "Time step rule: proportional-to-h | fixed:<dt>");
    sub->add_option("--T", cfg.final_time, "Final time")->check(CLI::PositiveNumber);
    sub->add_option("--newton-tol", cfg.newton.tolerance, "Newton relative residual tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--newton-max-iter", cfg.newton.max_iterations, "Newton iteration cap")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", cfg.output, "CSV output path");
    sub->add_option("--jobs", cfg.jobs, "Worker threads for independent levels")
        ->check(CLI::PositiveNumber);
  };

  auto* conv = app.add_subcommand("convergence", "Error and rate table against the exact solution");
  add_study_flags(conv, true);
  add_solver_flags(conv);

  auto* dep = app.add_subcommand("dependence", "Difference between solutions for two coefficient vectors");
  add_study_flags(dep, false);
  add_solver_flags(dep);

  auto* props = app.add_subcommand("properties", "Sampled inequalities of the conductivity K");
  props->add_option("--seed", cfg.seed, "Seed for random polynomials and vector pairs");
  props->add_option("--random", cfg.random_polynomials, "Number of random polynomials");

  auto* cons = app.add_subcommand("consistency", "Finite-difference check of a manufactured case");
  add_study_flags(cons, true);
  cons->add_option("--samples", cfg.samples, "Number of sample points")->check(CLI::PositiveNumber);
  cons->add_option("--fd-step", cfg.fd_step, "Central difference step")->check(CLI::Range(1e-12, 1e-3));
  cons->add_option("--seed", cfg.seed, "Sampling seed");

  ParseOutcome outcome;
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    outcome.exit_code = 0;
    outcome.message = app.help();
    return outcome;
  } catch (const CLI::CallForAllHelp&) {
    outcome.exit_code = 0;
    outcome.message = app.help("", CLI::AppFormatMode::All);
    return outcome;
  } catch (const CLI::ParseError& e) {
    outcome.exit_code = 2;
    outcome.message = e.what();
    return outcome;
  }

  auto fail = [&](const std::string& msg) {
    outcome.exit_code = 2;
    outcome.message = msg;
    return outcome;
  };

  if (conv->parsed()) cfg.command = Command::convergence;
  if (dep->parsed()) cfg.command = Command::dependence;
  if (props->parsed()) cfg.command = Command::properties;
  if (cons->parsed()) cfg.command = Command::consistency;

  if (cfg.command == Command::convergence || cfg.command == Command::dependence) {
    try {
      cfg.levels = detail::parse_levels(levels_text);
      validate_levels(cfg.levels);
    } catch (const std::exception&) {
      return fail("--levels: expected increasing power-of-two refinements, got '" + levels_text + "'");
    }
    try {
      cfg.dt_rule = detail::parse_dt(dt_text);
    } catch (const std::exception&) {
      return fail("--dt: expected proportional-to-h or fixed:<positive dt>, got '" + dt_text + "'");
    }
  }
  if (cfg.command == Command::convergence || cfg.command == Command::consistency) {
    try {
      cfg.variants = detail::parse_variants(variant_text);
      if (cfg.variants.size() != 1) throw std::invalid_argument(variant_text);
    } catch (const std::exception&) {
      return fail("--variant: expected A or B, got '" + variant_text + "'");
    }
  }
  if (cfg.command == Command::dependence) {
    try {
      cfg.variants = detail::parse_variants(variants_text);
      if (cfg.variants.size() != 2) throw std::invalid_argument(variants_text);
    } catch (const std::exception&) {
      return fail("--variants: expected two of A,B, got '" + variants_text + "'");
    }
  }
  outcome.config = cfg;
  return outcome;
}

inline ManufacturedCase configured_case(const RunConfig& cfg, char variant) {
  ManufacturedCase c = find_case(cfg.example, variant);
  c.final_time = cfg.final_time;
  return c;
}

inline std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

inline void write_newton_metadata(std::ostream& os, const NewtonConfig& n) {
  os << "# newton_tolerance=" << n.tolerance << " newton_max_iterations=" << n.max_iterations
     << " backtrack_factor=" << n.backtrack_factor << " max_backtracks=" << n.max_backtracks
     << "\n";
}

inline void write_level_metadata(std::ostream& os, const LevelRun& run) {
  os << "# level n=" << run.n << " dt=" << format_sci(run.grid.dt) << " steps=" << run.grid.steps
     << " newton_iterations=" << run.newton_iterations
     << " max_mass_defect=" << format_sci(run.max_mass_defect);
}

inline std::string rate_cell(const std::optional<double>& r) {
  return r ? format_sci(*r) : std::string();
}

inline void write_csv(std::ostream& os, const ConvergenceReport& rep) {
  os << "# study=convergence case=" << rep.case_id << "\n";
  os << "# poly_exponents=" << join(rep.exponents) << " poly_coefficients=" << join(rep.coefficients)
     << "\n";
  os << "# final_time=" << rep.final_time << " error_time=final dt_rule=" << rep.dt_rule.describe()
     << "\n";
  write_newton_metadata(os, rep.newton);
  for (const auto& l : rep.levels) {
    write_level_metadata(os, l.run);
    os << " grad_err_lbeta=" << format_sci(l.gradient_error_lbeta) << "\n";
  }
  if (rep.failure) os << "# failure=" << *rep.failure << "\n";
  os << "n,err_rho_l2,rate_rho,err_m_l2,rate_m\n";
  for (const auto& l : rep.levels) {
    os << l.run.n << "," << format_sci(l.rho_error) << "," << rate_cell(l.rho_rate) << ","
       << format_sci(l.m_error) << "," << rate_cell(l.m_rate) << "\n";
  }
}

inline void write_csv(std::ostream& os, const DependenceReport& rep) {
  os << "# study=dependence cases=" << rep.case_a << "," << rep.case_b << "\n";
  os << "# poly_coefficients_a=" << join(rep.coefficients_a)
     << " poly_coefficients_b=" << join(rep.coefficients_b) << "\n";
  os << "# final_time=" << rep.final_time << " error_time=final dt_rule=" << rep.dt_rule.describe()
     << "\n";
  write_newton_metadata(os, rep.newton);
  for (const auto& l : rep.levels) {
    write_level_metadata(os, l.run);
    os << "\n";
  }
  if (rep.failure) os << "# failure=" << *rep.failure << "\n";
  os << "n,diff_rho_l2,rate_rho,diff_m_l2,rate_m\n";
  for (const auto& l : rep.levels) {
    os << l.run.n << "," << format_sci(l.rho_difference) << "," << rate_cell(l.rho_rate) << ","
       << format_sci(l.m_difference) << "," << rate_cell(l.m_rate) << "\n";
  }
}

inline void print_table(std::ostream& os, const std::string& col1, const std::string& col2,
                        const std::vector<std::size_t>& n, const std::vector<double>& e1,
                        const std::vector<std::optional<double>>& r1, const std::vector<double>& e2,
                        const std::vector<std::optional<double>>& r2) {
  char line[160];
  std::snprintf(line, sizeof line, "%-6s %14s %8s %14s %8s\n", "N", col1.c_str(), "Rates",
                col2.c_str(), "Rates");
  os << line;
  for (std::size_t i = 0; i < n.size(); ++i) {
    auto rate = [](const std::optional<double>& r) {
      char b[16];
      if (r) std::snprintf(b, sizeof b, "%.3f", *r); else std::snprintf(b, sizeof b, "--");
      return std::string(b);
    };
    std::snprintf(line, sizeof line, "%-6zu %14.3E %8s %14.3E %8s\n", n[i], e1[i], rate(r1[i]).c_str(),
                  e2[i], rate(r2[i]).c_str());
    os << line;
  }
}

inline bool write_output(const RunConfig& cfg, const auto& report, std::ostream& err) {
  if (cfg.output.empty()) return true;
  std::ofstream file(cfg.output, std::ios::binary);
  if (!file) {
    err << "error: cannot open '" << cfg.output << "' for writing\n";
    return false;
  }
  write_csv(file, report);
  return static_cast<bool>(file);
}

/// Executes a parsed configuration. Exit codes: 0 success, 1 solver failure
/// or failed check, 2 I/O error.
inline int run(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  switch (cfg.command) {
    case Command::convergence: {
      const ManufacturedCase c = configured_case(cfg, cfg.variants.front());
      const auto rep = run_convergence(c, cfg.levels, cfg.dt_rule, cfg.newton, cfg.jobs);
      out << "Convergence study, example " << c.id << " (dt rule: " << cfg.dt_rule.describe() << ")\n";
      std::vector<std::size_t> n;
      std::vector<double> e1, e2;
      std::vector<std::optional<double>> r1, r2;
      for (const auto& l : rep.levels) {
        n.push_back(l.run.n);
        e1.push_back(l.rho_error);
        e2.push_back(l.m_error);
        r1.push_back(l.rho_rate);
        r2.push_back(l.m_rate);
      }
      print_table(out, "|rho-rho_h|", "|m-m_h|", n, e1, r1, e2, r2);
      if (!write_output(cfg, rep, err)) return 2;
      if (rep.failure) {
        err << "error: " << *rep.failure << "\n";
        return 1;
      }
      return 0;
    }
    case Command::dependence: {
      const ManufacturedCase a = configured_case(cfg, cfg.variants[0]);
      const ManufacturedCase b = configured_case(cfg, cfg.variants[1]);
      const auto rep = run_dependence(a, b, cfg.levels, cfg.dt_rule, cfg.newton, cfg.jobs);
      out << "Dependence study, examples " << a.id << " vs " << b.id << " (dt rule: "
          << cfg.dt_rule.describe() << ")\n";
      std::vector<std::size_t> n;
      std::vector<double> e1, e2;
      std::vector<std::optional<double>> r1, r2;
      for (const auto& l : rep.levels) {
        n.push_back(l.run.n);
        e1.push_back(l.rho_difference);
        e2.push_back(l.m_difference);
        r1.push_back(l.rho_rate);
        r2.push_back(l.m_rate);
      }
      print_table(out, "|rho1-rho2|", "|m1-m2|", n, e1, r1, e2, r2);
      if (!write_output(cfg, rep, err)) return 2;
      if (rep.failure) {
        err << "error: " << *rep.failure << "\n";
        return 1;
      }
      return 0;
    }
    case Command::properties: {
      PropertySampling sampling;
      sampling.seed = cfg.seed;
      bool all = true;
      const auto polys = property_polynomials(cfg.random_polynomials, cfg.seed);
      for (const auto& p : polys) {
        out << "g(s) = " << describe(p) << "\n";
        auto results = check_scalar_properties(p, sampling);
        const auto vec = check_vector_properties(p, sampling);
        results.insert(results.end(), vec.begin(), vec.end());
        for (const auto& r : results) {
          out << "  " << (r.passed ? "PASS" : "FAIL") << "  " << r.name << "  (" << r.detail << ")\n";
          all = all && r.passed;
        }
      }
      out << (all ? "all properties hold\n" : "some properties FAILED\n");
      return all ? 0 : 1;
    }
    case Command::consistency: {
      const ManufacturedCase c = configured_case(cfg, cfg.variants.front());
      const auto rep = consistency_check(c, cfg.samples, cfg.fd_step, cfg.seed);
      out << "Consistency of example " << c.id << " (" << cfg.samples << " points, step "
          << cfg.fd_step << ")\n";
      out << "  max |m + K(|grad rho|) grad rho| = " << format_sci(rep.max_flux_residual) << "\n";
      out << "  max |rho_t + div m - f|         = " << format_sci(rep.max_continuity_residual) << "\n";
      return 0;
    }
  }
  return 2;
}

}  // namespace forchheimer::cli
