#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "etcnet/trajectory.hpp"

namespace etcnet {

/// Eigen-decomposition of a small symmetric matrix (row-major, d x d) by
/// cyclic Jacobi rotations, off-diagonal tolerance 1e-10. Eigenvalues are
/// returned in descending order with matching unit eigenvectors.
struct SymEigen {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
};
SymEigen jacobi_eigen_sym(const std::vector<std::vector<double>>& matrix);

struct Pca2d {
  std::vector<std::array<double, 2>> points;
  std::vector<int> gates;              // per-point markers; empty if none given
  std::array<double, 2> explained{};   // top-2 eigenvalues of the covariance
  double total_variance = 0.0;         // trace of the covariance
};

/// Mean-centered projection onto the top-2 principal axes of the sample
/// covariance. gates, when non-empty, must pair 1:1 with observations.
Pca2d pca2d(const std::vector<std::vector<double>>& observations, const std::vector<int>& gates = {});

void write_pca_csv(const Pca2d& pca, const std::filesystem::path& path);
void write_pca_svg(const Pca2d& pca, const std::filesystem::path& path);

/// One SVG per key with one polyline per input CSV, plus a merged
/// (run, step, value) CSV per key. Returns the paths written.
/// Unknown keys raise std::runtime_error listing the available ones.
std::vector<std::filesystem::path> render_curves(const std::vector<std::filesystem::path>& csv_paths,
                                                 const std::vector<std::string>& keys,
                                                 const std::filesystem::path& out_dir);

/// Flat per-agent gate event table from a trajectory dump, with the
/// episode-relative annotations behind the qualitative gating analysis.
struct TimelineRow {
  long t = 0;
  int episode = 0;
  int ep_t = 0;
  int agent = 0;
  int gate = 0;
  bool forced = false;              // bootstrap trigger at episode start
  bool reached_dest = false;        // nav: agent sits on its destination
  bool observed_dest_moved = false; // nav: the destination this agent watches moved
  bool prey_visible = false;        // pp: a prey is inside the local view
};

std::vector<TimelineRow> gating_timeline(const std::vector<DumpRow>& dump);
void write_timeline_csv(const std::vector<TimelineRow>& rows, const std::filesystem::path& path);

}  // namespace etcnet
