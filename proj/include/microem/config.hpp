#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "microem/stepper.hpp"

namespace microem {

/// Parse or validation failure; line() is 0 when no single line is to blame.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

  /// Same error with the message prefixed by the file name.
  ConfigError in_file(const std::string& path) const { return ConfigError(path + ": " + what(), line_); }

 private:
  ConfigError(const std::string& full, int line) : std::runtime_error(full), line_(line) {}
  int line_;
};

/// INI-style document:
///
///   [domain]  bounds = x0 x1 y0 y1 [z0 z1]     divisions = nx ny [nz]
///   [params]  M lambda beta h0 g0 g2            (each optional, standard set by default)
///   [time]    dt  t_end
///   [picard]  tol max_iter extrapolate
///   [solver]  backend (direct|gmres) direct_tol gmres_tol gmres_restart gmres_max_iter threads
///   [ic]      preset (two_droplets|droplet_array|uniform|random) and its keys:
///             lambda; droplets = "x y [z] r phase; ..."; value; mean amplitude seed
///   [output]  directory snapshot_every csv_path
///
/// '#' and ';' at line start begin comments. Unknown sections or keys and
/// duplicate keys are rejected.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Canonical text form; parse_config(serialize_config(c)) == c field for field.
std::string serialize_config(const RunConfig& cfg);

}  // namespace microem
