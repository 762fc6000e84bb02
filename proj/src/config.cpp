#include "microem/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace microem {

namespace {

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

using Section = std::map<std::string, Entry>;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(sep, start);
    const auto piece = s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    out.push_back(trim(piece));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

template <class T>
T parse_number(std::string_view text, int line, const std::string& key) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ConfigError(line, "key '" + key + "': cannot parse '" + std::string(text) + "' as a number");
  }
  return value;
}

class Document {
 public:
  explicit Document(std::string_view text) {
    static const std::map<std::string, std::set<std::string>> schema{
        {"domain", {"bounds", "divisions"}},
        {"params", {"M", "lambda", "beta", "h0", "g0", "g2"}},
        {"time", {"dt", "t_end"}},
        {"picard", {"tol", "max_iter", "extrapolate"}},
        {"solver", {"backend", "direct_tol", "gmres_tol", "gmres_restart", "gmres_max_iter", "threads"}},
        {"ic", {"preset", "lambda", "droplets", "value", "mean", "amplitude", "seed"}},
        {"output", {"directory", "snapshot_every", "csv_path"}},
    };
    std::string current;
    int line_no = 0;
    for (std::string_view rest = text; !rest.empty() || line_no == 0;) {
      const auto nl = rest.find('\n');
      const std::string_view raw = rest.substr(0, nl);
      rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
      ++line_no;
      const auto line = trim(raw);
      if (line.empty() || line[0] == '#' || line[0] == ';') {
        if (rest.empty()) break;
        continue;
      }
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError(line_no, "malformed section header");
        current = std::string(trim(line.substr(1, line.size() - 2)));
        if (!schema.count(current)) throw ConfigError(line_no, "unknown section [" + current + "]");
        if (seen_sections_.count(current)) throw ConfigError(line_no, "duplicate section [" + current + "]");
        seen_sections_.insert(current);
        sections_[current];
      } else {
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(line_no, "expected 'key = value'");
        if (current.empty()) throw ConfigError(line_no, "key outside of any section");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (!schema.at(current).count(key)) {
          throw ConfigError(line_no, "unknown key '" + key + "' in section [" + current + "]");
        }
        auto& sec = sections_[current];
        if (sec.count(key)) throw ConfigError(line_no, "duplicate key '" + key + "' in [" + current + "]");
        sec[key] = Entry{value, line_no, false};
      }
      if (rest.empty()) break;
    }
  }

  const Entry* find(const std::string& section, const std::string& key) {
    auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    k->second.used = true;
    return &k->second;
  }

  const Entry& require(const std::string& section, const std::string& key) {
    const Entry* e = find(section, key);
    if (!e) throw ConfigError(0, "missing required key '" + key + "' in section [" + section + "]");
    return *e;
  }

  template <class T>
  T number(const std::string& section, const std::string& key, T fallback) {
    const Entry* e = find(section, key);
    return e ? parse_number<T>(e->value, e->line, key) : fallback;
  }

  template <class T>
  T required_number(const std::string& section, const std::string& key) {
    const Entry& e = require(section, key);
    return parse_number<T>(e.value, e.line, key);
  }

 private:
  std::map<std::string, Section> sections_;
  std::set<std::string> seen_sections_;
};

bool parse_bool(const Entry& e, const std::string& key) {
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  throw ConfigError(e.line, "key '" + key + "': expected true or false");
}

std::string num(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <class Fn>
void at_line(int line, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(line, e.what());
  }
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  Document doc(text);
  RunConfig cfg;

  // [domain]
  {
    const Entry& b = doc.require("domain", "bounds");
    const auto tokens = words(b.value);
    if (tokens.size() != 4 && tokens.size() != 6) {
      throw ConfigError(b.line, "bounds needs 4 (2D) or 6 (3D) numbers");
    }
    std::vector<double> v;
    for (auto t : tokens) v.push_back(parse_number<double>(t, b.line, "bounds"));
    cfg.mesh.box = tokens.size() == 4 ? Box::rect(v[0], v[1], v[2], v[3]) : Box::cuboid(v[0], v[1], v[2], v[3], v[4], v[5]);
    if (cfg.mesh.box.degenerate()) throw ConfigError(b.line, "bounds describe an empty box (need lower < upper)");

    const Entry& d = doc.require("domain", "divisions");
    const auto dt = words(d.value);
    if (static_cast<int>(dt.size()) != cfg.mesh.box.dim) {
      throw ConfigError(d.line, "divisions needs " + std::to_string(cfg.mesh.box.dim) + " integers to match bounds");
    }
    cfg.mesh.divisions = {0, 0, 0};
    for (std::size_t k = 0; k < dt.size(); ++k) {
      const int n = parse_number<int>(dt[k], d.line, "divisions");
      if (n < 1) throw ConfigError(d.line, "divisions must be >= 1");
      cfg.mesh.divisions[k] = n;
    }
  }

  // [params]
  {
    const ModelParams def;
    const double m = doc.number("params", "M", def.mobility());
    const double lambda = doc.number("params", "lambda", def.lambda());
    const double beta = doc.number("params", "beta", def.beta());
    const double h0 = doc.number("params", "h0", def.h0());
    const double g0 = doc.number("params", "g0", def.g0());
    const double g2 = doc.number("params", "g2", def.g2());
    try {
      cfg.params = ModelParams(m, lambda, beta, h0, g0, g2);
    } catch (const std::invalid_argument& e) {
      int line = 0;
      for (const char* key : {"M", "lambda", "beta", "h0", "g0", "g2"}) {
        const Entry* en = doc.find("params", key);
        if (en && std::string(e.what()).find(std::string("parameter ") + key + " ") != std::string::npos) {
          line = en->line;
        }
      }
      throw ConfigError(line, e.what());
    }
  }

  // [time]
  {
    const Entry& dt = doc.require("time", "dt");
    cfg.dt = parse_number<double>(dt.value, dt.line, "dt");
    if (!(cfg.dt > 0.0)) throw ConfigError(dt.line, "dt must be > 0");
    const Entry& te = doc.require("time", "t_end");
    cfg.t_end = parse_number<double>(te.value, te.line, "t_end");
    if (!(cfg.t_end >= cfg.dt)) throw ConfigError(te.line, "t_end must be >= dt");
  }

  // [picard]
  cfg.picard.tol = doc.number("picard", "tol", cfg.picard.tol);
  cfg.picard.max_iter = doc.number("picard", "max_iter", cfg.picard.max_iter);
  if (const Entry* e = doc.find("picard", "extrapolate")) cfg.picard.extrapolate = parse_bool(*e, "extrapolate");

  // [solver]
  if (const Entry* e = doc.find("solver", "backend")) {
    at_line(e->line, [&] { cfg.solver.backend = solver_backend_from_string(e->value); });
  }
  cfg.solver.direct_tol = doc.number("solver", "direct_tol", cfg.solver.direct_tol);
  cfg.solver.gmres_tol = doc.number("solver", "gmres_tol", cfg.solver.gmres_tol);
  cfg.solver.gmres_restart = doc.number("solver", "gmres_restart", cfg.solver.gmres_restart);
  cfg.solver.gmres_max_iter = doc.number("solver", "gmres_max_iter", cfg.solver.gmres_max_iter);
  cfg.threads = doc.number("solver", "threads", cfg.threads);

  // [ic]
  {
    const Entry& preset = doc.require("ic", "preset");
    if (preset.value == "two_droplets") {
      cfg.ic = TwoDroplets{doc.number("ic", "lambda", cfg.params.lambda())};
    } else if (preset.value == "droplet_array") {
      DropletArray arr;
      arr.lambda = doc.number("ic", "lambda", cfg.params.lambda());
      const Entry& d = doc.require("ic", "droplets");
      const std::size_t expect = static_cast<std::size_t>(cfg.mesh.box.dim) + 2;
      for (auto item : split(d.value, ';')) {
        if (item.empty()) continue;
        const auto t = words(item);
        if (t.size() != expect) {
          throw ConfigError(d.line, "each droplet needs " + std::to_string(expect) +
                                        " values (center coordinates, radius, phase)");
        }
        Droplet drop;
        for (int k = 0; k < cfg.mesh.box.dim; ++k) drop.center[k] = parse_number<double>(t[k], d.line, "droplets");
        drop.radius = parse_number<double>(t[expect - 2], d.line, "droplets");
        drop.phase = parse_number<int>(t[expect - 1], d.line, "droplets");
        arr.droplets.push_back(drop);
      }
      if (arr.droplets.empty()) throw ConfigError(d.line, "droplet_array needs at least one droplet");
      cfg.ic = arr;
    } else if (preset.value == "uniform") {
      cfg.ic = Uniform{doc.required_number<double>("ic", "value")};
    } else if (preset.value == "random") {
      RandomNoise r;
      r.mean = doc.number("ic", "mean", r.mean);
      r.amplitude = doc.number("ic", "amplitude", r.amplitude);
      r.seed = doc.required_number<std::uint64_t>("ic", "seed");
      cfg.ic = r;
    } else {
      throw ConfigError(preset.line, "unknown ic preset '" + preset.value + "'");
    }
    at_line(preset.line, [&] { validate(cfg.ic); });
  }

  // [output]
  if (const Entry* e = doc.find("output", "directory")) cfg.output.directory = e->value;
  cfg.output.snapshot_every = doc.number("output", "snapshot_every", cfg.output.snapshot_every);
  if (const Entry* e = doc.find("output", "csv_path")) cfg.output.csv_path = e->value;

  // Keys valid in the schema but meaningless for the chosen preset.
  for (const char* key : {"lambda", "droplets", "value", "mean", "amplitude", "seed"}) {
    const Entry* e = doc.find("ic", key);
    if (!e) continue;
    const std::string name = preset_name(cfg.ic);
    const std::string k = key;
    const bool ok = (name == "two_droplets" && k == "lambda") ||
                    (name == "droplet_array" && (k == "lambda" || k == "droplets")) ||
                    (name == "uniform" && k == "value") ||
                    (name == "random" && (k == "mean" || k == "amplitude" || k == "seed"));
    if (!ok) throw ConfigError(e->line, "key '" + k + "' does not apply to ic preset " + name);
  }

  try {
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(0, e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw e.in_file(path);
  }
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream os;
  const Box& b = cfg.mesh.box;
  os << "[domain]\nbounds =";
  for (int k = 0; k < b.dim; ++k) os << ' ' << num(b.lower[k]) << ' ' << num(b.upper[k]);
  os << "\ndivisions =";
  for (int k = 0; k < b.dim; ++k) os << ' ' << cfg.mesh.divisions[k];
  const ModelParams& p = cfg.params;
  os << "\n\n[params]\nM = " << num(p.mobility()) << "\nlambda = " << num(p.lambda()) << "\nbeta = " << num(p.beta())
     << "\nh0 = " << num(p.h0()) << "\ng0 = " << num(p.g0()) << "\ng2 = " << num(p.g2());
  os << "\n\n[time]\ndt = " << num(cfg.dt) << "\nt_end = " << num(cfg.t_end);
  os << "\n\n[picard]\ntol = " << num(cfg.picard.tol) << "\nmax_iter = " << cfg.picard.max_iter
     << "\nextrapolate = " << (cfg.picard.extrapolate ? "true" : "false");
  os << "\n\n[solver]\nbackend = " << (cfg.solver.backend == SolverBackend::direct_lu ? "direct" : "gmres")
     << "\ndirect_tol = " << num(cfg.solver.direct_tol) << "\ngmres_tol = " << num(cfg.solver.gmres_tol)
     << "\ngmres_restart = " << cfg.solver.gmres_restart << "\ngmres_max_iter = " << cfg.solver.gmres_max_iter
     << "\nthreads = " << cfg.threads;
  os << "\n\n[ic]\npreset = " << preset_name(cfg.ic) << "\n";
  if (const auto* t = std::get_if<TwoDroplets>(&cfg.ic)) {
    os << "lambda = " << num(t->lambda) << "\n";
  } else if (const auto* a = std::get_if<DropletArray>(&cfg.ic)) {
    os << "lambda = " << num(a->lambda) << "\ndroplets =";
    for (std::size_t i = 0; i < a->droplets.size(); ++i) {
      const auto& d = a->droplets[i];
      os << (i ? "; " : " ");
      for (int k = 0; k < b.dim; ++k) os << num(d.center[k]) << ' ';
      os << num(d.radius) << ' ' << d.phase;
    }
    os << "\n";
  } else if (const auto* u = std::get_if<Uniform>(&cfg.ic)) {
    os << "value = " << num(u->value) << "\n";
  } else if (const auto* r = std::get_if<RandomNoise>(&cfg.ic)) {
    os << "mean = " << num(r->mean) << "\namplitude = " << num(r->amplitude) << "\nseed = " << r->seed << "\n";
  }
  os << "\n[output]\ndirectory = " << cfg.output.directory << "\nsnapshot_every = " << cfg.output.snapshot_every
     << "\ncsv_path = " << cfg.output.csv_path << "\n";
  return os.str();
}

}  // namespace microem
