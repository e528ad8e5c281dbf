#include "fvdeg/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fvdeg/errors.hpp"

namespace fvdeg::io {

namespace fs = std::filesystem;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  if (dir.empty()) return;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorKind::Io, "cannot create directory " + dir.string());
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  out.close();
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json(const fs::path& path, const Json& doc) { write_text(path, doc.dump(2) + "\n"); }

namespace {

std::string position(const Mesh& mesh, int k) {
  const auto& c = mesh.cell(k).center;
  return mesh.dim() == 1 ? num(c[0]) : num(c[0]) + "," + num(c[1]);
}

std::string coord_header(const Mesh& mesh) { return mesh.dim() == 1 ? "x" : "x,y"; }

}  // namespace

void write_trajectory_csv(const fs::path& path, const DiscreteSolution& solution) {
  const Mesh& mesh = *solution.mesh;
  std::string s = "t,cell," + coord_header(mesh) + ",u\n";
  std::vector<std::string> pos;
  for (int k = 0; k < mesh.num_cells(); ++k) pos.push_back(position(mesh, k));
  for (int n = 0; n <= solution.num_steps(); ++n) {
    const std::string t = num(solution.time(n));
    for (int k = 0; k < mesh.num_cells(); ++k) {
      s += t;
      s += ',';
      s += std::to_string(k);
      s += ',';
      s += pos[k];
      s += ',';
      s += num(solution.steps[n][k]);
      s += '\n';
    }
  }
  write_text(path, s);
}

void write_profile_csv(const fs::path& path, const Mesh& mesh, const std::vector<double>& u,
                       const std::vector<double>* extra, const std::string& extra_name) {
  std::string s = "cell," + coord_header(mesh) + ",u" + (extra ? "," + extra_name : "") + "\n";
  for (int k = 0; k < mesh.num_cells(); ++k) {
    s += std::to_string(k) + "," + position(mesh, k) + "," + num(u[k]);
    if (extra) s += "," + num((*extra)[k]);
    s += "\n";
  }
  write_text(path, s);
}

void write_mass_log_csv(const fs::path& path, const DiscreteSolution& solution) {
  std::string s = "step,t,mass,drift,min,max,iterations,residual\n";
  const double m0 = solution.stats.at(0).mass;
  for (std::size_t n = 0; n < solution.stats.size(); ++n) {
    const auto& st = solution.stats[n];
    s += std::to_string(n) + "," + num(solution.time(static_cast<int>(n))) + "," + num(st.mass) + "," +
         num(st.mass - m0) + "," + num(st.min_value) + "," + num(st.max_value) + "," +
         std::to_string(st.iterations) + "," + num(st.residual) + "\n";
  }
  write_text(path, s);
}

void write_entropy_csv(const fs::path& path, const EntropyReport& report) {
  std::string s = "k,xi,residual,discrete_residual\n";
  for (const auto& e : report.entries)
    s += num(e.k) + "," + report.xi_ids[e.xi] + "," + num(e.residual) + "," + num(e.discrete_residual) + "\n";
  write_text(path, s);
}

void write_convergence_csv(const fs::path& path, const ConvergenceTable& table,
                           const std::vector<double>& oscillation) {
  std::string s = "level,cells,h,dt,difference,ratio,oscillation\n";
  for (std::size_t j = 0; j < table.rows.size(); ++j) {
    const auto& r = table.rows[j];
    s += std::to_string(j) + "," + std::to_string(r.cells) + "," + num(r.h) + "," + num(r.dt) + "," +
         num(r.difference) + "," + num(r.ratio) + "," + (j < oscillation.size() ? num(oscillation[j]) : "nan") +
         "\n";
  }
  write_text(path, s);
}

void write_boundary_layer_csv(const fs::path& path, const BoundaryLayerReport& report) {
  std::string s = "h,boundary_cell_max,interior_l1,interior_max,interior_difference\n";
  for (const auto& r : report.rows)
    s += num(r.h) + "," + num(r.boundary_cell_max) + "," + num(r.interior_l1) + "," + num(r.interior_max) + "," +
         num(r.interior_difference) + "\n";
  write_text(path, s);
}

Trajectory read_trajectory_csv(const fs::path& path, const Mesh& mesh) {
  const std::string text = read_text(path);
  std::istringstream in(text);
  std::string line;
  const std::string expected = "t,cell," + coord_header(mesh) + ",u";
  if (!std::getline(in, line) || line != expected)
    throw Error(ErrorKind::Parse, path.string() + ":1: expected header '" + expected + "'");
  const int ncols = mesh.dim() == 1 ? 4 : 5;
  Trajectory tr;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> cols;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string field = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      char* end = nullptr;
      const double v = std::strtod(field.c_str(), &end);
      if (field.empty() || end != field.c_str() + field.size())
        throw Error(ErrorKind::Parse, path.string() + ":" + std::to_string(lineno) + ": bad number '" + field + "'");
      cols.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (static_cast<int>(cols.size()) != ncols)
      throw Error(ErrorKind::Parse, path.string() + ":" + std::to_string(lineno) + ": expected " +
                                        std::to_string(ncols) + " columns");
    const int cell = static_cast<int>(cols[1]);
    if (cell == 0) {
      tr.times.push_back(cols[0]);
      tr.steps.emplace_back();
    }
    if (tr.steps.empty() || cell != static_cast<int>(tr.steps.back().size()) || cell >= mesh.num_cells() ||
        cols[0] != tr.times.back())
      throw Error(ErrorKind::Parse, path.string() + ":" + std::to_string(lineno) +
                                        ": rows must list cells 0..n-1 of the mesh for each time in order");
    tr.steps.back().push_back(cols.back());
  }
  if (tr.steps.empty()) throw Error(ErrorKind::Parse, path.string() + ": no data rows");
  for (std::size_t n = 0; n < tr.steps.size(); ++n)
    if (static_cast<int>(tr.steps[n].size()) != mesh.num_cells())
      throw Error(ErrorKind::Parse, path.string() + ": time " + num(tr.times[n]) + " lists " +
                                        std::to_string(tr.steps[n].size()) + " cells, mesh has " +
                                        std::to_string(mesh.num_cells()));
  return tr;
}

Json mesh_to_json(const Mesh& mesh) {
  const auto& d = mesh.description();
  Json j;
  j["dim"] = mesh.dim();
  if (d.kind == MeshDescription::Kind::Interval) {
    j["kind"] = "interval";
    j["a"] = d.a;
    j["b"] = d.b;
    j["n"] = mesh.num_cells();
    j["grading"] = d.grading.empty() ? Json(nullptr) : Json(d.grading);
    j["cell_boundaries"] = d.nodes;
  } else {
    j["kind"] = "rectangle";
    j["lx"] = d.lx;
    j["ly"] = d.ly;
    j["nx"] = d.nx;
    j["ny"] = d.ny;
  }
  j["h"] = mesh.h();
  return j;
}

Json model_to_json(const Model& model) {
  const auto& s = model.spec;
  Json j;
  j["name"] = s.name;
  j["f"] = s.f;
  j["phi"] = s.phi;
  j["u0"] = s.u0;
  j["g"] = s.g;
  j["u_c"] = model.u_c;
  j["u_max"] = model.u_max;
  j["T"] = model.T;
  j["lipschitz_f"] = model.lipschitz_f;
  j["lipschitz_phi"] = model.lipschitz_phi;
  j["flux_ceiling"] = model.flux_ceiling;
  j["direction"] = {model.direction[0], model.direction[1]};
  j["h1_satisfied"] = model.h1_satisfied;
  return j;
}

std::string profile_plot_script(const std::vector<std::string>& csv_files, const std::string& title,
                                const std::string& png) {
  std::string s = "set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,600\n";
  s += "set output '" + png + "'\nset title '" + title + "'\nset xlabel 'x'\nset ylabel 'u'\nplot ";
  for (std::size_t i = 0; i < csv_files.size(); ++i) {
    if (i) s += ", ";
    s += "'" + csv_files[i] + "' using 2:3 with lines title '" + csv_files[i] + "'";
  }
  return s + "\n";
}

std::string ladder_plot_script(const std::string& csv_file, const std::string& title, const std::string& png) {
  return "set datafile separator ','\nset terminal pngcairo size 900,600\nset output '" + png + "'\nset title '" +
         title + "'\nset logscale xy\nset xlabel 'h'\nplot '" + csv_file +
         "' using 3:5 with linespoints title 'Cauchy difference'\n";
}

}  // namespace fvdeg::io
