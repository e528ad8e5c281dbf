#pragma once

#include <filesystem>
#include <optional>
#include <ostream>

#include "fvdeg/errors.hpp"

namespace fvdeg::cli {

struct Options {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;  // overrides output.directory
  bool emit_plots = false;                   // or-ed with output.emit_plots
  int jobs = 0;                              // OpenMP threads; 0 keeps the runtime default
};

// Exit codes
inline constexpr int kOk = 0;
inline constexpr int kValidation = 1;
inline constexpr int kSolver = 2;
inline constexpr int kVerification = 3;
inline constexpr int kIo = 4;

int exit_code(ErrorKind kind);

// Each command writes its artifacts and a manifest.json into the output
// directory, reports progress on `log` and errors on `err`, and returns an
// exit code. They never throw.
int cmd_run(const Options& opts, std::ostream& log, std::ostream& err);
int cmd_stationary(const Options& opts, std::ostream& log, std::ostream& err);
int cmd_verify(const Options& opts, std::ostream& log, std::ostream& err);
int cmd_converge(const Options& opts, std::ostream& log, std::ostream& err);
/// Uses only opts.out (default "fig1"), opts.emit_plots and opts.jobs.
int cmd_reproduce_fig1(const Options& opts, std::ostream& log, std::ostream& err);

int main(int argc, char** argv);

}  // namespace fvdeg::cli
