#pragma once

// CSV / JSON output and trajectory input. Floats are written with 17
// significant digits so that a trajectory read back is bit-identical.
//
//   trajectory.csv   t,cell,x[,y],u        one row per step and cell
//   profile csv      cell,x[,y],u[,u0 or g]
//   mass_log.csv     step,t,mass,drift,min,max,iterations,residual
//   entropy_sweep.csv k,xi,residual,discrete_residual
//   convergence.csv  level,cells,h,dt,difference,ratio,oscillation
//   boundary_layer.csv h,boundary_cell_max,interior_l1,interior_max,interior_difference

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fvdeg/diagnostics.hpp"

namespace fvdeg::io {

using Json = nlohmann::ordered_json;

std::string num(double v);

void ensure_directory(const std::filesystem::path& dir);
void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& doc);

void write_trajectory_csv(const std::filesystem::path& path, const DiscreteSolution& solution);
void write_profile_csv(const std::filesystem::path& path, const Mesh& mesh, const std::vector<double>& u,
                       const std::vector<double>* extra = nullptr, const std::string& extra_name = "u0");
void write_mass_log_csv(const std::filesystem::path& path, const DiscreteSolution& solution);
void write_entropy_csv(const std::filesystem::path& path, const EntropyReport& report);
void write_convergence_csv(const std::filesystem::path& path, const ConvergenceTable& table,
                           const std::vector<double>& oscillation = {});
void write_boundary_layer_csv(const std::filesystem::path& path, const BoundaryLayerReport& report);

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> steps;
};

/// Reads a trajectory.csv written for `mesh`; checks cell count and ordering.
Trajectory read_trajectory_csv(const std::filesystem::path& path, const Mesh& mesh);

Json mesh_to_json(const Mesh& mesh);
Json model_to_json(const Model& model);

/// gnuplot scripts reading the CSVs above (no plotting runtime is linked).
std::string profile_plot_script(const std::vector<std::string>& csv_files, const std::string& title,
                                const std::string& png);
std::string ladder_plot_script(const std::string& csv_file, const std::string& title, const std::string& png);

}  // namespace fvdeg::io
