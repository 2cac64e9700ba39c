#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "pgcl/checker.hpp"
#include "pgcl/operational.hpp"
#include "pgcl/parser.hpp"
#include "pgcl/transformer.hpp"

using namespace pgcl;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitInconclusive = 2;
constexpr int kExitUsage = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string render_rational(const Rational& r) {
  std::string s = r.str();
  if (!r.is_integer()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " (%.6f)", r.to_double());
    s += buf;
  }
  return s;
}

State parse_state(const std::string& text) {
  State s;
  std::istringstream in(text);
  std::string entry;
  while (std::getline(in, entry, ',')) {
    auto eq = entry.find('=');
    if (eq == std::string::npos)
      throw SyntaxError(1, 1, "expected 'var=value' in '" + entry + "'");
    auto strip = [](std::string t) {
      auto a = t.find_first_not_of(" \t");
      auto b = t.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : t.substr(a, b - a + 1);
    };
    s[strip(entry.substr(0, eq))] = Rational::parse(strip(entry.substr(eq + 1)));
  }
  return s;
}

std::vector<Rational> parse_rational_list(const std::string& text) {
  std::vector<Rational> out;
  std::istringstream in(text);
  std::string entry;
  while (std::getline(in, entry, ',')) out.push_back(Rational::parse(entry));
  if (out.empty()) throw SyntaxError(1, 1, "empty list");
  return out;
}

std::pair<Rational, Rational> parse_pd_grid(const std::string& text) {
  Rational step(1, 4), max(10000);
  std::istringstream in(text);
  std::string entry;
  while (std::getline(in, entry, ',')) {
    auto eq = entry.find('=');
    if (eq == std::string::npos)
      throw SyntaxError(1, 1, "expected 'step=..' or 'max=..'");
    std::string key = entry.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t") + 1);
    Rational val = Rational::parse(entry.substr(eq + 1));
    if (key == "step")
      step = val;
    else if (key == "max")
      max = val;
    else
      throw SyntaxError(1, 1, "unknown grid key '" + key + "'");
  }
  if (!(step > Rational(0))) throw SyntaxError(1, 1, "grid step must be > 0");
  return {step, max};
}

Scheduler parse_scheduler(const std::string& text) {
  if (text == "left") return Scheduler::left();
  if (text == "right") return Scheduler::right();
  if (text == "alternate") return Scheduler::alternate();
  if (text == "random") return Scheduler::random();
  const std::string prefix = "greedy-min(";
  if (text.rfind(prefix, 0) == 0 && text.back() == ')')
    return Scheduler::greedy_min(
        parse_expr(text.substr(prefix.size(),
                               text.size() - prefix.size() - 1)));
  throw SyntaxError(1, 1, "unknown scheduler '" + text + "'");
}

std::string scheduler_name(const Scheduler& s) {
  switch (s.policy) {
  case Scheduler::Policy::Left:
    return "left";
  case Scheduler::Policy::Right:
    return "right";
  case Scheduler::Policy::Alternate:
    return "alternate";
  case Scheduler::Policy::Random:
    return "random";
  case Scheduler::Policy::GreedyMin:
    return "greedy-min(" + pretty_print(s.objective) + ")";
  }
  return "?";
}

/// Splits "x := 1; ...; while (G) {B}" into the folded initial state of the
/// straight-line prefix and the remaining program.
std::pair<State, ProgramPtr> fold_leading_assignments(ProgramPtr prog) {
  State init;
  for (;;) {
    if (prog->kind == StmtKind::Assign) {
      init[prog->target] = eval_expr(prog->expr, init);
      return {init, nullptr};
    }
    if (prog->kind == StmtKind::Seq && prog->first->kind == StmtKind::Assign) {
      init[prog->first->target] = eval_expr(prog->first->expr, init);
      prog = prog->second;
      continue;
    }
    return {init, prog};
  }
}

int verdict_exit(Verdict v) {
  switch (v) {
  case Verdict::Pass:
    return kExitPass;
  case Verdict::Fail:
    return kExitFail;
  case Verdict::Inconclusive:
    return kExitInconclusive;
  }
  return kExitUsage;
}

struct ManifestRow {
  std::string id, program, cert, domain, expected, note;
};

std::vector<ManifestRow> load_manifest(const std::string& dir) {
  std::string text = read_file(dir + "/manifest.txt");
  std::vector<ManifestRow> rows;
  std::istringstream in(text);
  std::string line;
  auto strip = [](std::string t) {
    auto a = t.find_first_not_of(" \t\r");
    auto b = t.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : t.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    line = strip(line);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream cols(line);
    std::string col;
    std::vector<std::string> parts;
    while (std::getline(cols, col, '|')) parts.push_back(strip(col));
    if (parts.size() != 6)
      throw std::runtime_error("malformed manifest line: " + line);
    rows.push_back({parts[0], parts[1], parts[2], parts[3], parts[4],
                    parts[5]});
  }
  return rows;
}

Report run_check(const ProgramPtr& raw_prog, const Certificate& cert,
                 const CheckConfig& cfg) {
  auto [init, loop] = fold_leading_assignments(raw_prog);
  if (!loop)
    throw EvalError(EvalError::Kind::InvalidParameters,
                    "program has no loop to check");
  return check_certificate(to_loop_spec(loop), cert, cfg);
}

std::string render_summary(const SimSummary& s, const Scheduler& sched,
                           std::uint64_t seed) {
  char buf[256];
  std::string out;
  out += "trials = " + std::to_string(s.trials) + "\n";
  out += "terminated = " + std::to_string(s.terminated) + "\n";
  out += "censored = " + std::to_string(s.censored) + "\n";
  out += "errored = " + std::to_string(s.errored) + "\n";
  out += "termination_fraction = " + render_rational(s.termination_fraction) +
         "\n";
  std::snprintf(buf, sizeof buf, "wilson95 = [%.6f, %.6f]\n", s.wilson.lo,
                s.wilson.hi);
  out += buf;
  std::snprintf(buf, sizeof buf, "mean_steps_terminated = %.3f\n",
                s.mean_steps_terminated.to_double());
  out += buf;
  out += "scheduler = " + scheduler_name(sched) + "\n";
  out += "seed = " + std::to_string(seed) + "\n";
  return out;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact pGCL toolkit: pre-expectations, termination "
               "certificates, and seeded simulation"};
  app.require_subcommand(1);

  // check
  auto* check = app.add_subcommand(
      "check", "check a termination or non-termination certificate");
  std::string c_prog, c_cert, c_domain;
  std::string c_h = "1,10,100,1000,10000", c_grid = "step=1/4,max=10000";
  int c_fuel = 64;
  check->add_option("program", c_prog, "program file")->required();
  check->add_option("certificate", c_cert, "certificate file")->required();
  check->add_option("--domain", c_domain, "state grid, e.g. \"x=0..200\"")
      ->required();
  check->add_option("--h-samples", c_h, "H ladder for loopy bodies");
  check->add_option("--pd-grid", c_grid, "p,d shape grid \"step=..,max=..\"");
  check->add_option("--fuel", c_fuel, "loop unrolling bound");

  // wp
  auto* wp = app.add_subcommand("wp", "evaluate a weakest pre-expectation");
  std::string w_prog, w_post, w_state;
  int w_fuel = 64;
  wp->add_option("program", w_prog, "program file")->required();
  wp->add_option("--post", w_post, "post-expectation")->required();
  wp->add_option("--state", w_state, "initial state \"x=1,y=2\"");
  wp->add_option("--fuel", w_fuel, "loop unrolling bound");

  // viter
  auto* viter =
      app.add_subcommand("viter", "value iteration for a single loop");
  std::string v_prog, v_post = "1", v_domain, v_init;
  int v_iters = 1000, v_fuel = 64;
  viter->add_option("program", v_prog, "program file")->required();
  viter->add_option("--domain", v_domain, "state grid")->required();
  viter->add_option("--iters", v_iters, "number of iterations");
  viter->add_option("--post", v_post, "post-expectation (default 1)");
  viter->add_option("--fuel", v_fuel, "fuel for nested loops");
  viter->add_option("--init", v_init,
                    "print the value at this state instead of the table");

  // simulate
  auto* sim = app.add_subcommand("simulate", "seeded Monte-Carlo trials");
  std::string s_prog, s_init, s_sched = "left";
  long long s_trials = 10000, s_cap = 10000;
  std::uint64_t s_seed = 42;
  int s_threads = 1;
  sim->add_option("program", s_prog, "program file")->required();
  sim->add_option("--init", s_init, "initial state")->required();
  sim->add_option("--scheduler", s_sched,
                  "left|right|alternate|random|greedy-min(expr)");
  sim->add_option("--trials", s_trials, "number of trials");
  sim->add_option("--max-steps", s_cap, "step cap per trial");
  sim->add_option("--seed", s_seed, "master seed");
  sim->add_option("--threads", s_threads,
                  "worker count (results are thread-count independent)");

  // corpus
  auto* corpus = app.add_subcommand("corpus", "bundled fixture programs");
  std::string f_dir = "fixtures";
  bool f_list = false, f_golden = false;
  corpus->add_option("--fixtures", f_dir, "fixture directory");
  corpus->add_flag("--list", f_list, "list fixtures");
  corpus->add_flag("--run-golden", f_golden,
                   "re-check every fixture against its expected verdict");

  try {
    app.parse(argc, argv);

    if (check->parsed()) {
      ProgramPtr prog = parse_program(read_file(c_prog));
      Certificate cert = parse_certificate(read_file(c_cert));
      CheckConfig cfg;
      cfg.domain = parse_domain(c_domain);
      cfg.h_samples = parse_rational_list(c_h);
      std::tie(cfg.pd_step, cfg.pd_max) = parse_pd_grid(c_grid);
      cfg.fuel = c_fuel;
      Report rep = run_check(prog, cert, cfg);
      std::cout << rep.render();
      return verdict_exit(rep.overall());
    }

    if (wp->parsed()) {
      ProgramPtr prog = parse_program(read_file(w_prog));
      ExprPtr post = parse_expr(w_post);
      State sigma = w_state.empty() ? State{} : parse_state(w_state);
      WpResult r = wp_eval(prog, post, sigma, w_fuel);
      std::cout << "wp = " << render_rational(r.value)
                << (r.exact ? " (exact)" : " (lower bound)") << "\n";
      if (!has_loop(prog))
        std::cout << "awp = " << render_rational(awp_eval(prog, post, sigma))
                  << " (exact)\n";
      return kExitPass;
    }

    if (viter->parsed()) {
      auto [folded, loop] = fold_leading_assignments(
          parse_program(read_file(v_prog)));
      if (!loop || loop->kind != StmtKind::While)
        throw EvalError(EvalError::Kind::InvalidParameters,
                        "viter needs a program ending in a single loop");
      ExprPtr post = parse_expr(v_post);
      Domain dom = parse_domain(v_domain);
      if (!v_init.empty()) {
        State at = folded;
        for (const auto& [k, v] : parse_state(v_init)) at[k] = v;
        auto trace = loop_value_iteration(loop, post, dom, at, v_iters,
                                          v_fuel);
        std::cout << render_rational(trace.back()) << "\n";
      } else {
        for (const State& s : dom.states()) {
          auto trace = loop_value_iteration(loop, post, dom, s, v_iters,
                                            v_fuel);
          bool first = true;
          for (const auto& [k, v] : s) {
            std::cout << (first ? "" : ",") << k << "=" << v.str();
            first = false;
          }
          std::cout << " -> " << render_rational(trace.back()) << "\n";
        }
      }
      return kExitPass;
    }

    if (sim->parsed()) {
      ProgramPtr prog = parse_program(read_file(s_prog));
      Scheduler sched = parse_scheduler(s_sched);
      SimSummary s = simulate(prog, parse_state(s_init), sched, s_trials,
                              s_cap, s_seed);
      std::cout << render_summary(s, sched, s_seed);
      return kExitPass;
    }

    if (corpus->parsed()) {
      auto rows = load_manifest(f_dir);
      if (f_list) {
        for (const auto& r : rows)
          std::cout << r.id << "  (" << r.note << ")\n";
        return kExitPass;
      }
      if (f_golden) {
        int bad = 0;
        for (const auto& r : rows) {
          ProgramPtr prog = parse_program(read_file(f_dir + "/" + r.program));
          if (r.cert == "-") {
            std::cout << r.id << ": parsed ok (no certificate)\n";
            continue;
          }
          Certificate cert = parse_certificate(read_file(f_dir + "/" + r.cert));
          CheckConfig cfg;
          cfg.domain = parse_domain(r.domain);
          Report rep = run_check(prog, cert, cfg);
          std::string got = verdict_name(rep.overall());
          bool ok = got == r.expected;
          std::cout << r.id << ": " << got << (ok ? "" : " (expected " +
                                                            r.expected + ")")
                    << "\n";
          if (!ok) ++bad;
        }
        if (bad) {
          std::cout << bad << " fixture(s) deviated from golden verdicts\n";
          return kExitFail;
        }
        return kExitPass;
      }
      std::cout << "nothing to do (use --list or --run-golden)\n";
      return kExitUsage;
    }
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  } catch (const SyntaxError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const EvalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
