#include "qtangent/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "qtangent/freeprob.hpp"
#include "qtangent/report.hpp"
#include "qtangent/simulate.hpp"
#include "qtangent/tangent.hpp"

namespace qtangent {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw UsageError(what + ": cannot parse '" + text + "' as a number");
  return v;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() != 3) throw UsageError("--grid expects lo:hi:count, got '" + text + "'");
  const double lo = parse_double(parts[0], "--grid lo");
  const double hi = parse_double(parts[1], "--grid hi");
  const double count = parse_double(parts[2], "--grid count");
  if (!(count >= 1.0) || count != std::floor(count) || count > 1e7) {
    throw UsageError("--grid count must be a positive integer");
  }
  if (!std::isfinite(lo) || !std::isfinite(hi) || hi < lo) throw UsageError("--grid needs finite lo <= hi");
  const int n = int(count);
  if (n > 1 && hi == lo) throw UsageError("--grid with count > 1 needs lo < hi");
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) xs[i] = n == 1 ? lo : (i == n - 1 ? hi : lo + (hi - lo) * i / (n - 1));
  return xs;
}

std::vector<double> parse_ladder(const std::string& text) {
  std::vector<double> ladder;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) ladder.push_back(parse_double(item, "--ladder"));
  if (ladder.empty()) throw UsageError("--ladder is empty");
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    if (!(ladder[k] > 0.0) || (k > 0 && !(ladder[k] < ladder[k - 1]))) {
      throw UsageError("--ladder must be a comma-separated decreasing list of positive numbers");
    }
  }
  return ladder;
}

// Writes to `path`, or to `out` when path is empty.
void emit(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& write) {
  if (path.empty()) {
    write(out);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw UsageError("cannot open output file '" + path + "'");
  write(file);
  if (!file) throw UsageError("failed writing '" + path + "'");
}

std::string one_line(std::string text) {
  for (char& ch : text) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  while (!text.empty() && text.back() == ' ') text.pop_back();
  return text;
}

struct Common {
  std::string out_path;
  std::string format = "csv";
  std::uint64_t seed = 0;
  int threads = 0;
};

void add_format(CLI::App* cmd, Common& c, const std::string& fallback) {
  c.format = fallback;
  cmd->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--out", c.out_path, "output file (default: stdout)");
}

void add_random(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "base seed for every random stream");
  cmd->add_option("--threads", c.threads, "worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"q-Gaussian processes: densities, paths, tangent limits and free-probability checks", "qtangent"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // density
  Common dc;
  std::string d_process = "qnormal", d_grid;
  double d_q = 0.0, d_t1 = 0.0, d_t2 = 1.0, d_y1 = 0.0;
  auto* density = app.add_subcommand("density", "tabulate a marginal or transition density");
  density->add_option("--process", d_process, "qnormal, qou, qbm, cauchy, biane_half, biane_shifted, "
                                              "half_stable_marginal, cauchy_marginal");
  density->add_option("--q", d_q, "q in (-1, 1)");
  density->add_option("--t1", d_t1, "start time");
  density->add_option("--t2", d_t2, "end time (q-OU uses the lag t2 - t1)");
  density->add_option("--y1,--x", d_y1, "start state");
  density->add_option("--grid", d_grid, "lo:hi:count")->required();
  add_format(density, dc, "csv");

  // simulate
  Common sc;
  std::string s_process = "qbm", s_init = "auto", s_dir = ".", s_prefix = "path";
  double s_q = 0.0, s_t0 = 0.0, s_t1 = 1.0, s_x0 = 0.0;
  int s_steps = 1000, s_paths = 1;
  auto* simulate = app.add_subcommand("simulate", "simulate paths, one CSV file (t,value) per path");
  simulate->add_option("--process", s_process, "qou or qbm");
  simulate->add_option("--q", s_q, "q in (-1, 1)");
  simulate->add_option("--t0", s_t0, "first grid time");
  simulate->add_option("--t1", s_t1, "last grid time");
  simulate->add_option("--steps", s_steps, "grid steps")->check(CLI::PositiveNumber);
  simulate->add_option("--paths", s_paths, "number of paths")->check(CLI::PositiveNumber);
  simulate->add_option("--init", s_init, "auto, stationary, fixed or origin")
      ->check(CLI::IsMember({"auto", "stationary", "fixed", "origin"}));
  simulate->add_option("--x0", s_x0, "start value for --init fixed");
  simulate->add_option("--out-dir", s_dir, "directory for the path files");
  simulate->add_option("--prefix", s_prefix, "file name prefix");
  simulate->add_option("--format", sc.format, "listing of written files: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  add_random(simulate, sc);

  // tangent
  Common tc;
  std::string t_case = "qou_interior", t_ladder = "0.2,0.1,0.05,0.02,0.01";
  double t_q = 0.0, t_s = 1.0, t_x = 0.0, t_threshold = 0.02, t_slack = 0.10;
  double t_t1 = 0.0, t_t2 = 1.0, t_y1 = 0.0;
  int t_resolution = 4001;
  auto* tangent = app.add_subcommand("tangent", "epsilon-ladder study of a local tangent limit");
  tangent->add_option("--case", t_case, "qou_interior, qou_boundary, qbm_interior or qbm_boundary");
  tangent->add_option("--q", t_q, "q in (-1, 1)");
  tangent->add_option("--s", t_s, "base time for q-BM cases");
  tangent->add_option("--x", t_x, "base point for interior cases");
  tangent->add_option("--ladder", t_ladder, "comma-separated decreasing eps values");
  tangent->add_option("--threshold", t_threshold, "terminal L1 threshold")->check(CLI::PositiveNumber);
  tangent->add_option("--slack", t_slack, "allowed relative increase between rungs")->check(CLI::NonNegativeNumber);
  tangent->add_option("--resolution", t_resolution, "quadrature points")->check(CLI::Range(3, 10000001));
  tangent->add_option("--t1", t_t1, "rescaled start time");
  tangent->add_option("--t2", t_t2, "rescaled end time");
  tangent->add_option("--y1", t_y1, "rescaled start state");
  add_format(tangent, tc, "json");

  // jumps
  Common jc;
  double j_q = 0.5, j_S = 0.0, j_T = 1.0, j_a = 1.0;
  int j_paths = 500, j_steps = 500;
  auto* jumps = app.add_subcommand("jumps", "large-jump frequency against its upper bound");
  jumps->add_option("--q", j_q, "q in (-1, 1)");
  jumps->add_option("--S", j_S, "window start");
  jumps->add_option("--T", j_T, "window end");
  jumps->add_option("--a", j_a, "jump threshold");
  jumps->add_option("--paths", j_paths, "ensemble size")->check(CLI::PositiveNumber);
  jumps->add_option("--steps", j_steps, "grid steps per path")->check(CLI::PositiveNumber);
  add_random(jumps, jc);
  add_format(jumps, jc, "json");

  // biane
  Common bc;
  double b_s = 1.0, b_t = 2.0, b_x = 1.0;
  std::string b_grid, b_ladder = "0.01,0.001,0.0001";
  auto* biane = app.add_subcommand("biane", "Biane kernel next to its Stieltjes-inversion recovery");
  biane->add_option("--s", b_s, "start time");
  biane->add_option("--t", b_t, "end time");
  biane->add_option("--x", b_x, "start state (> 0)");
  biane->add_option("--grid", b_grid, "lo:hi:count of end states")->required();
  biane->add_option("--ladder", b_ladder, "comma-separated decreasing eps values");
  add_format(biane, bc, "csv");

  // verify
  Common vc;
  std::string v_suite = "freeprob", v_kind;
  int v_samples = 0;
  auto* verify = app.add_subcommand("verify", "run the identity residual sweeps");
  verify->add_option("--suite", v_suite, "freeprob")->check(CLI::IsMember({"freeprob"}));
  verify->add_option("--kind", v_kind, "restrict to one identity kind");
  verify->add_option("--samples", v_samples, "sample points per kind (default: per-kind)")
      ->check(CLI::NonNegativeNumber);
  add_random(verify, vc);
  add_format(verify, vc, "json");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* shown = &app;
    for (const auto* sub : app.get_subcommands()) shown = sub;
    out << shown->help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return 1;
  }

  try {
    if (*density) {
      KernelQuery query{parse_process(d_process), d_q, d_t1, d_t2, d_y1};
      const auto xs = parse_grid(d_grid);
      std::vector<double> pdf(xs.size());
      for (std::size_t i = 0; i < xs.size(); ++i) pdf[i] = evaluate(query, xs[i]);
      emit(dc.out_path, out, [&](std::ostream& os) {
        if (dc.format == "csv") {
          os << "x,pdf\n";
          for (std::size_t i = 0; i < xs.size(); ++i) os << fmt17(xs[i]) << "," << fmt17(pdf[i]) << "\n";
        } else {
          nlohmann::json result{{"process", d_process}, {"q", d_q}, {"t1", d_t1}, {"t2", d_t2},
                                {"y1", d_y1},           {"x", xs},  {"pdf", pdf}};
          os << wrap_result("density", result).dump(2) << "\n";
        }
      });
      return 0;
    }

    if (*simulate) {
      const Process process = parse_process(s_process);
      if (process != Process::QOU && process != Process::QBM) {
        throw UsageError("--process must be qou or qbm for simulate");
      }
      const QParamsd p(s_q);
      const TimeGrid grid{s_t0, s_t1, s_steps};
      grid.validate();
      InitialCondition init = InitialCondition::stationary();
      if (s_init == "fixed") init = InitialCondition::fixed(s_x0);
      if (s_init == "origin") init = InitialCondition::origin();
      if (s_init == "auto" && process == Process::QBM && s_t0 == 0.0) init = InitialCondition::origin();

      std::error_code ec;
      std::filesystem::create_directories(s_dir, ec);
      if (ec) throw UsageError("cannot create output directory '" + s_dir + "'");

      const int workers = std::min(resolve_threads(sc.threads), s_paths);
      std::vector<std::unique_ptr<TransitionSampler>> samplers;
      for (int w = 0; w < workers; ++w) samplers.push_back(std::make_unique<TransitionSampler>(p));
      std::vector<std::string> files(static_cast<std::size_t>(s_paths));
      parallel_for(files.size(), workers, [&](std::size_t i, int worker) {
        const PathSample path = simulate_path(process, p, grid, init, {sc.seed, i}, *samplers[worker]);
        const std::string file = (std::filesystem::path(s_dir) / (s_prefix + "_" + std::to_string(i) + ".csv")).string();
        emit(file, out, [&](std::ostream& os) {
          os << "t,value\n";
          for (Eigen::Index k = 0; k < path.values.size(); ++k) {
            os << fmt17(path.times[k]) << "," << fmt17(path.values[k]) << "\n";
          }
        });
        files[i] = file;
      });
      if (sc.format == "json") {
        nlohmann::json result{{"process", s_process}, {"q", s_q},         {"t0", s_t0},     {"t1", s_t1},
                              {"steps", s_steps},     {"paths", s_paths}, {"seed", sc.seed}, {"files", files}};
        out << wrap_result("simulate", result).dump(2) << "\n";
      } else {
        for (const auto& f : files) out << f << "\n";
      }
      return 0;
    }

    if (*tangent) {
      TangentCase c;
      switch (parse_case(t_case)) {
        case CaseTag::QouInterior: c = TangentCase::qou_interior(t_q, t_x); break;
        case CaseTag::QouBoundary: c = TangentCase::qou_boundary(t_q); break;
        case CaseTag::QbmInterior: c = TangentCase::qbm_interior(t_q, t_s, t_x); break;
        case CaseTag::QbmBoundary: c = TangentCase::qbm_boundary(t_q, t_s); break;
      }
      const auto ladder = parse_ladder(t_ladder);
      const auto window = default_window(c, t_t1, t_t2, t_y1);
      const auto report = convergence_study(c, ladder, window, {t_threshold, t_slack, t_resolution});
      emit(tc.out_path, out, [&](std::ostream& os) {
        if (tc.format == "csv") {
          os << "eps,l1,sup\n";
          for (const auto& r : report.ladder) {
            os << fmt17(r.eps) << "," << fmt17(r.distance.l1) << "," << fmt17(r.distance.sup) << "\n";
          }
        } else {
          os << wrap_result("tangent", to_json(report)).dump(2) << "\n";
        }
      });
      return report.verdict ? 0 : 2;
    }

    if (*jumps) {
      const double bound = jump_bound(j_q, j_S, j_T, j_a);
      const auto stats = sup_jump_estimate(j_q, j_S, j_T, j_a, j_paths, j_steps, {jc.seed, 0}, jc.threads);
      const double se = binomial_std_error(bound, stats.ensemble_size);
      const bool pass = stats.fraction() <= bound + 3.0 * se;
      emit(jc.out_path, out, [&](std::ostream& os) {
        if (jc.format == "csv") {
          os << "q,S,T,a,paths,steps,fraction,bound,std_error,pass\n";
          os << fmt17(j_q) << "," << fmt17(j_S) << "," << fmt17(j_T) << "," << fmt17(j_a) << "," << j_paths << ","
             << j_steps << "," << fmt17(stats.fraction()) << "," << fmt17(bound) << "," << fmt17(se) << ","
             << (pass ? "true" : "false") << "\n";
        } else {
          nlohmann::json result = to_json(stats);
          result.update({{"q", j_q},
                         {"S", j_S},
                         {"T", j_T},
                         {"a", j_a},
                         {"paths", j_paths},
                         {"steps", j_steps},
                         {"seed", jc.seed},
                         {"bound", bound},
                         {"std_error", se},
                         {"pass", pass}});
          os << wrap_result("jumps", result).dump(2) << "\n";
        }
      });
      return pass ? 0 : 2;
    }

    if (*biane) {
      const auto ys = parse_grid(b_grid);
      const auto ladder = parse_ladder(b_ladder);
      if (ladder.size() < 2) throw UsageError("--ladder needs at least two rungs");
      biane_H(b_s, b_t, b_x, {-1.0, 0.0});  // validates s, t, x
      std::vector<double> pdf(ys.size()), inverted(ys.size());
      auto transform = [&](ComplexPoint z) { return biane_H(b_s, b_t, b_x, z); };
      for (std::size_t i = 0; i < ys.size(); ++i) {
        pdf[i] = biane_shifted_pdf(b_s, b_t, b_x, ys[i]);
        inverted[i] = stieltjes_invert(transform, ys[i], ladder).value;
      }
      emit(bc.out_path, out, [&](std::ostream& os) {
        if (bc.format == "csv") {
          os << "y,pdf,inverted\n";
          for (std::size_t i = 0; i < ys.size(); ++i) {
            os << fmt17(ys[i]) << "," << fmt17(pdf[i]) << "," << fmt17(inverted[i]) << "\n";
          }
        } else {
          nlohmann::json result{{"s", b_s}, {"t", b_t}, {"x", b_x}, {"y", ys}, {"pdf", pdf}, {"inverted", inverted}};
          os << wrap_result("biane", result).dump(2) << "\n";
        }
      });
      return 0;
    }

    if (*verify) {
      std::vector<IdentityKind> kinds = all_identity_kinds();
      if (!v_kind.empty()) kinds = {parse_identity_kind(v_kind)};
      nlohmann::json reports = nlohmann::json::array();
      bool pass = true;
      for (auto kind : kinds) {
        int n = v_samples;
        if (n == 0) {
          n = (kind == IdentityKind::Subordination || kind == IdentityKind::FUnique) ? 1000
              : kind == IdentityKind::Inversion                                        ? 40
                                                                                       : 200;
        }
        const std::uint64_t stream = std::uint64_t(kind) << 32;
        const auto report = verify_identities(kind, n, {vc.seed, stream}, vc.threads);
        pass = pass && report.pass;
        reports.push_back(to_json(report));
      }
      emit(vc.out_path, out, [&](std::ostream& os) {
        if (vc.format == "csv") {
          os << "kind,samples,max_residual,threshold,pass\n";
          for (const auto& r : reports) {
            os << r["kind"].get<std::string>() << "," << r["samples"].get<int>() << ","
               << (r["max_residual"].is_null() ? std::string("nan") : fmt17(r["max_residual"].get<double>())) << ","
               << fmt17(r["threshold"].get<double>()) << "," << (r["pass"].get<bool>() ? "true" : "false") << "\n";
          }
        } else {
          nlohmann::json result{{"suite", v_suite}, {"pass", pass}, {"reports", reports}};
          os << wrap_result("verify", result).dump(2) << "\n";
        }
      });
      return pass ? 0 : 2;
    }
  } catch (const UsageError& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return 1;
  }
  err << "error: no subcommand\n";
  return 1;
}

}  // namespace qtangent
