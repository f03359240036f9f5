#pragma once

// Plain CSV: comma separated, one header row, LF line endings, numbers with
// 17 significant digits so that doubles round-trip exactly. Writes go to a
// temporary file that is renamed into place.

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fracctl/trajectory.hpp"

namespace fracctl {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::string format_number(double value);

void write_csv(const std::filesystem::path& path, const CsvTable& table);
/// Reads a table with a header row. Throws ConfigError on malformed input.
CsvTable read_csv(const std::filesystem::path& path);
/// Reads a headerless numeric matrix.
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

/// Header t,x_1..x_d and one row per grid time.
void write_trajectory(const std::filesystem::path& path, const Trajectory& trajectory);
/// Values of a trajectory file (rows = times); the time column is checked
/// against the grid when one is given.
TrajectoryValues read_trajectory_values(const std::filesystem::path& path, const TimeGrid* grid = nullptr);

}  // namespace fracctl
