#include "microem/io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace microem {

namespace {

std::string shortest(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

void append_g17(std::string& s, double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  s.append(buf, static_cast<std::size_t>(n));
}

}  // namespace

void write_vtk(const StructuredMesh& mesh, const State& state, const std::string& path) {
  const std::size_t nn = mesh.num_nodes();
  if (state.phi.size() != nn || state.mu.size() != nn || state.sigma.size() != nn) {
    throw std::invalid_argument("write_vtk: state does not match mesh");
  }
  std::string s;
  s.reserve(nn * 120);
  s += "# vtk DataFile Version 3.0\nmicroem t=";
  append_g17(s, state.time);
  s += " step=" + std::to_string(state.step) + "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  s += "POINTS " + std::to_string(nn) + " double\n";
  for (std::size_t i = 0; i < nn; ++i) {
    const auto x = mesh.node(i);
    for (int d = 0; d < 3; ++d) {
      if (d) s += ' ';
      append_g17(s, d < mesh.dim() ? x[static_cast<std::size_t>(d)] : 0.0);
    }
    s += '\n';
  }
  const std::size_t ne = mesh.num_elements();
  const int npe = mesh.nodes_per_element();
  s += "CELLS " + std::to_string(ne) + " " + std::to_string(ne * static_cast<std::size_t>(npe + 1)) + "\n";
  for (std::size_t e = 0; e < ne; ++e) {
    s += std::to_string(npe);
    for (int v : mesh.element(e)) s += " " + std::to_string(v);
    s += '\n';
  }
  s += "CELL_TYPES " + std::to_string(ne) + "\n";
  const char* type = mesh.dim() == 2 ? "5\n" : "10\n";
  for (std::size_t e = 0; e < ne; ++e) s += type;
  s += "POINT_DATA " + std::to_string(nn) + "\n";
  const std::pair<const char*, const Vector*> fields[] = {{"phi", &state.phi}, {"mu", &state.mu}, {"sigma", &state.sigma}};
  for (const auto& [name, values] : fields) {
    s += std::string("SCALARS ") + name + " double 1\nLOOKUP_TABLE default\n";
    for (double v : *values) {
      append_g17(s, v);
      s += '\n';
    }
  }
  auto out = open_out(path);
  out << s;
  finish(out, path);
}

VtkData read_vtk(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  std::getline(in, line);
  if (line.rfind("# vtk DataFile", 0) != 0) throw IoError(path + ": missing VTK header");
  std::getline(in, line);  // title
  std::getline(in, line);
  if (line != "ASCII") throw IoError(path + ": only ASCII files are supported");
  std::getline(in, line);
  if (line != "DATASET UNSTRUCTURED_GRID") throw IoError(path + ": expected DATASET UNSTRUCTURED_GRID");

  VtkData data;
  std::string keyword;
  std::size_t point_data = 0;
  while (in >> keyword) {
    if (keyword == "POINTS") {
      std::size_t n = 0;
      std::string type;
      in >> n >> type;
      data.points.resize(n);
      for (auto& p : data.points) in >> p[0] >> p[1] >> p[2];
    } else if (keyword == "CELLS") {
      std::size_t n = 0, total = 0, read = 0;
      in >> n >> total;
      data.cells.resize(n);
      for (auto& c : data.cells) {
        int k = 0;
        in >> k;
        if (k < 1) throw IoError(path + ": bad cell size");
        c.resize(static_cast<std::size_t>(k));
        for (int& v : c) in >> v;
        read += static_cast<std::size_t>(k) + 1;
      }
      if (read != total) throw IoError(path + ": CELLS size field does not match contents");
    } else if (keyword == "CELL_TYPES") {
      std::size_t n = 0;
      in >> n;
      data.cell_types.resize(n);
      for (int& t : data.cell_types) in >> t;
    } else if (keyword == "POINT_DATA") {
      in >> point_data;
    } else if (keyword == "SCALARS") {
      std::string name, type, lut, table;
      int comps = 1;
      in >> name >> type >> comps >> lut >> table;
      if (lut != "LOOKUP_TABLE" || comps != 1) throw IoError(path + ": unsupported SCALARS block");
      std::vector<double> values(point_data);
      for (double& v : values) in >> v;
      data.point_scalars[name] = std::move(values);
    } else {
      throw IoError(path + ": unexpected keyword '" + keyword + "'");
    }
    if (in.fail()) throw IoError(path + ": truncated section " + keyword);
  }
  if (data.cell_types.size() != data.cells.size()) throw IoError(path + ": CELL_TYPES count mismatch");
  if (point_data != 0 && point_data != data.points.size()) throw IoError(path + ": POINT_DATA count mismatch");
  for (const auto& c : data.cells) {
    for (int v : c) {
      if (v < 0 || static_cast<std::size_t>(v) >= data.points.size()) throw IoError(path + ": cell index out of range");
    }
  }
  return data;
}

std::string format_csv(const std::vector<StepRecord>& records) {
  std::string s = kCsvHeader;
  s += '\n';
  for (const auto& r : records) {
    s += std::to_string(r.step) + ',' + shortest(r.time) + ',' + shortest(r.energy) + ',' + shortest(r.mass) + ',' +
         shortest(r.phi_min) + ',' + shortest(r.phi_max) + ',' + std::to_string(r.picard_iters) + ',' +
         shortest(r.grad_mu_sq) + ',' + shortest(r.energy_law_residual) + '\n';
  }
  return s;
}

void write_csv(const std::vector<StepRecord>& records, const std::string& path) {
  auto out = open_out(path);
  out << format_csv(records);
  finish(out, path);
}

std::vector<StepRecord> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw IoError(path + ": unexpected CSV header");
  std::vector<StepRecord> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9) throw IoError(path + ": line " + std::to_string(line_no) + ": expected 9 columns");
    auto real = [&](const std::string& c) {
      double v = 0.0;
      const auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc() || p != c.data() + c.size()) {
        throw IoError(path + ": line " + std::to_string(line_no) + ": bad number '" + c + "'");
      }
      return v;
    };
    StepRecord r;
    r.step = static_cast<long>(real(cells[0]));
    r.time = real(cells[1]);
    r.energy = real(cells[2]);
    r.mass = real(cells[3]);
    r.phi_min = real(cells[4]);
    r.phi_max = real(cells[5]);
    r.picard_iters = static_cast<int>(real(cells[6]));
    r.grad_mu_sq = real(cells[7]);
    r.energy_law_residual = real(cells[8]);
    out.push_back(r);
  }
  return out;
}

void ensure_directory(const std::string& path) {
  if (path.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw IoError("cannot create directory '" + path + "': " + ec.message());
}

}  // namespace microem
