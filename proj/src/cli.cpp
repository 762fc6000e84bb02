#include "microem/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "microem/config.hpp"
#include "microem/eoc.hpp"
#include "microem/io.hpp"
#include "microem/stepper.hpp"

namespace microem {

namespace {

namespace fs = std::filesystem;

struct Overrides {
  std::string out_dir;
  std::optional<int> snapshot_every;
  std::optional<int> threads;
  bool quiet = false;
};

RunConfig load_with_overrides(const std::string& path, const Overrides& o) {
  RunConfig cfg = load_config(path);
  if (!o.out_dir.empty()) cfg.output.directory = o.out_dir;
  if (o.snapshot_every) cfg.output.snapshot_every = *o.snapshot_every;
  if (o.threads) cfg.threads = *o.threads;
  validate(cfg);
  return cfg;
}

std::string in_dir(const std::string& dir, const std::string& file) {
  const fs::path p(file);
  return p.is_absolute() || dir.empty() ? file : (fs::path(dir) / p).string();
}

std::string shortest(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// The bound is a product of decimal inputs; 15 digits drop the binary noise.
std::string g15(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

nlohmann::json bound_json(double bound) {
  return std::isfinite(bound) ? nlohmann::json(bound) : nlohmann::json("inf");
}

int cmd_info(const std::string& path, const Overrides& o, std::ostream& out) {
  const RunConfig cfg = load_with_overrides(path, o);
  const StructuredMesh mesh = cfg.mesh.build();
  const double bound = dt_safety_bound(cfg.params);
  const std::size_t nn = mesh.num_nodes();
  // Every P1 row couples to itself and its mesh neighbours; the block system has 7 nonzero blocks.
  std::size_t pattern_nnz = nn;
  {
    std::vector<std::vector<int>> adj(nn);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
      const auto c = mesh.element(e);
      for (int a : c) {
        for (int b : c) {
          if (a != b) adj[static_cast<std::size_t>(a)].push_back(b);
        }
      }
    }
    for (auto& row : adj) {
      std::sort(row.begin(), row.end());
      pattern_nnz += static_cast<std::size_t>(std::unique(row.begin(), row.end()) - row.begin());
    }
  }
  const std::size_t block_nnz = 7 * pattern_nnz;
  const double matrix_mib = static_cast<double>(block_nnz * 12 + 3 * nn * 4) / (1024.0 * 1024.0);
  const double vectors_mib = static_cast<double>(3 * nn * 8 * 12) / (1024.0 * 1024.0);
  const double quad_mib = static_cast<double>(mesh.num_elements() * 100 * 8) / (1024.0 * 1024.0);

  out << "dt_safety_bound = " << (std::isfinite(bound) ? g15(bound) : std::string("inf")) << "\n";
  out << "dt = " << shortest(cfg.dt) << (cfg.dt > bound ? " (exceeds bound)" : " (within bound)") << "\n";
  out << "steps = " << step_count(cfg.t_end, cfg.dt) << "\n";
  out << "mesh: dim " << mesh.dim() << ", nodes " << nn << ", elements " << mesh.num_elements() << ", h "
      << shortest(mesh.h()) << "\n";
  out << "unknowns = " << 3 * nn << ", system nonzeros = " << block_nnz << "\n";
  char buf[128];
  std::snprintf(buf, sizeof buf, "estimated memory = %.1f MiB (system %.1f, vectors %.1f, quadrature %.1f; LU fill excluded)\n",
                matrix_mib + vectors_mib + quad_mib, matrix_mib, vectors_mib, quad_mib);
  out << buf;
  return kExitOk;
}

int cmd_run(const std::string& path, const Overrides& o, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load_with_overrides(path, o);
  const std::string dir = cfg.output.directory;
  ensure_directory(dir);

  const long steps = step_count(cfg.t_end, cfg.dt);
  const long progress_every = std::max(1L, steps / 20);
  int snapshot_index = 0;
  char name[64];
  RunSinks sinks;
  sinks.on_warning = [&](const DtSafety& s) { err << "warning: " << s.message << "\n"; };
  sinks.on_snapshot = [&](const StructuredMesh& mesh, const State& s) {
    std::snprintf(name, sizeof name, "snapshot_%06ld.vtk", s.step);
    write_vtk(mesh, s, in_dir(dir, name));
    ++snapshot_index;
  };
  sinks.on_record = [&](const StepRecord& r) {
    if (o.quiet || (r.step % progress_every != 0 && r.step != steps)) return;
    out << "step " << r.step << "/" << steps << "  t = " << shortest(r.time) << "  E = " << shortest(r.energy)
        << "  iters = " << r.picard_iters << "\n";
  };

  const RunResult result = run_simulation(cfg, sinks);
  const std::string csv = in_dir(dir, cfg.output.csv_path);
  write_csv(result.records, csv);

  nlohmann::json meta;
  meta["config"] = serialize_config(cfg);
  meta["dt_safety_bound"] = bound_json(result.safety.bound);
  meta["dt_warning"] = result.safety.warn;
  meta["steps_planned"] = steps;
  meta["steps_completed"] = result.records.size();
  meta["initial_energy"] = result.initial_energy;
  meta["initial_mass"] = result.initial_mass;
  meta["snapshots"] = snapshot_index;
  meta["completed"] = result.completed();
  if (result.failure) {
    meta["failure"] = *result.failure;
    meta["failure_history"] = result.failure_history;
  }
  std::ofstream(in_dir(dir, "run.json")) << meta.dump(2) << "\n";

  if (!result.completed()) {
    err << "error: " << *result.failure << "\n";
    err << "partial series (" << result.records.size() << " steps) written to " << csv << "\n";
    return result.failure_kind == FailureKind::non_convergence ? kExitNonConvergence : kExitFailure;
  }
  if (!o.quiet) out << "wrote " << csv << " and " << snapshot_index << " snapshots to " << dir << "\n";
  return kExitOk;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && item[used] == ' ') ++used;
    if (used != item.size() || item.empty()) throw std::invalid_argument("--dts: cannot parse '" + item + "'");
    out.push_back(v);
  }
  return out;
}

int cmd_eoc(const std::string& path, const Overrides& o, const std::string& dts, double dt_ref, std::ostream& out,
            std::ostream& err) {
  const RunConfig cfg = load_with_overrides(path, o);
  const std::vector<double> ladder = dts.empty() ? std::vector<double>{1e-6, 1e-6 / 2, 1e-6 / 3, 1e-6 / 4, 1e-6 / 5}
                                                 : parse_list(dts);
  validate_eoc(cfg, ladder, dt_ref);
  try {
    const EocReport report = run_eoc_study(cfg, ladder, dt_ref);
    report.write_table(out);
    ensure_directory(cfg.output.directory);
    const std::string csv = in_dir(cfg.output.directory, "eoc.csv");
    std::ofstream f(csv);
    report.write_csv(f);
    if (!f) throw IoError("write to '" + csv + "' failed");
    if (!o.quiet) out << "\nwrote " << csv << "\n";
  } catch (const EocFailure& e) {
    err << "error: " << e.what() << "\n";
    return e.non_convergence() ? kExitNonConvergence : kExitFailure;
  }
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sixth-order Cahn-Hilliard microemulsion simulator", "microem"};
  app.require_subcommand(1);

  Overrides o;
  std::string config;
  std::string dts;
  double dt_ref = 1e-8;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config, "configuration file")->required();
    sub->add_option("--out-dir", o.out_dir, "output directory (overrides [output] directory)");
    sub->add_option("--threads", o.threads, "assembly worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", o.quiet, "suppress progress output");
  };
  CLI::App* run = app.add_subcommand("run", "simulate and write CSV + VTK snapshots");
  add_common(run);
  run->add_option("--snapshot-every", o.snapshot_every, "steps between VTK snapshots (0: first and last only)")
      ->check(CLI::NonNegativeNumber);
  CLI::App* eoc = app.add_subcommand("eoc", "temporal convergence study");
  add_common(eoc);
  eoc->add_option("--dts", dts, "comma-separated decreasing time-step ladder");
  eoc->add_option("--dt-ref", dt_ref, "reference time step")->capture_default_str();
  CLI::App* info = app.add_subcommand("info", "print the time-step bound and mesh statistics");
  add_common(info);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*run) return cmd_run(config, o, out, err);
    if (*eoc) return cmd_eoc(config, o, dts, dt_ref, out, err);
    return cmd_info(config, o, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const NonConvergence& e) {
    err << "error: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace microem
