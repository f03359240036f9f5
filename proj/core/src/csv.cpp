#include "fracctl/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "fracctl/errors.hpp"

namespace fracctl {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_cell(const std::string& cell, const std::filesystem::path& path, std::size_t line) {
  const std::string text = trim(cell);
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
    throw ConfigError(fmt::format("{}:{}: '{}' is not a number", path.string(), line, text));
  }
  return value;
}

std::vector<std::vector<double>> read_rows(std::ifstream& in, const std::filesystem::path& path, std::size_t first_line) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t number = first_line;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split(line)) row.push_back(parse_cell(cell, path, number));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ConfigError(fmt::format("{}:{}: expected {} columns, found {}", path.string(), number, rows.front().size(),
                                    row.size()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string format_number(double value) { return fmt::format("{:.17g}", value); }

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path temp = path;
  temp += ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", temp.string()));
    for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
    out << '\n';
    for (const auto& row : table.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
      out << '\n';
    }
    if (!out) throw std::runtime_error(fmt::format("failed writing {}", temp.string()));
  }
  std::filesystem::rename(temp, path);
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open {}", path.string()));
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(fmt::format("{} is empty", path.string()));
  for (const auto& cell : split(line)) table.header.push_back(trim(cell));
  table.rows = read_rows(in, path, 1);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) {
      throw ConfigError(fmt::format("{}: rows have {} columns but the header has {}", path.string(), row.size(),
                                    table.header.size()));
    }
  }
  return table;
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open {}", path.string()));
  const auto rows = read_rows(in, path, 0);
  if (rows.empty()) throw ConfigError(fmt::format("{} is empty", path.string()));
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return out;
}

void write_trajectory(const std::filesystem::path& path, const Trajectory& trajectory) {
  CsvTable table;
  table.header.emplace_back("t");
  for (std::size_t i = 1; i <= trajectory.dofs(); ++i) table.header.push_back(fmt::format("x_{}", i));
  for (std::size_t n = 0; n <= trajectory.grid.steps(); ++n) {
    std::vector<double> row{trajectory.grid.time(n)};
    for (std::size_t i = 0; i < trajectory.dofs(); ++i) {
      row.push_back(trajectory.values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i)));
    }
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

TrajectoryValues read_trajectory_values(const std::filesystem::path& path, const TimeGrid* grid) {
  const CsvTable table = read_csv(path);
  if (table.header.empty() || table.header.front() != "t") {
    throw ConfigError(fmt::format("{}: first column must be 't'", path.string()));
  }
  TrajectoryValues values(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(table.header.size() - 1));
  for (std::size_t n = 0; n < table.rows.size(); ++n) {
    if (grid) {
      if (n > grid->steps() || std::abs(table.rows[n][0] - grid->time(n)) > 1e-9 * grid->final_time()) {
        throw ConfigError(fmt::format("{}: row {} has t = {}, which is not on the time grid", path.string(), n + 2,
                                      table.rows[n][0]));
      }
    }
    for (std::size_t i = 1; i < table.rows[n].size(); ++i) {
      values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i - 1)) = table.rows[n][i];
    }
  }
  return values;
}

}  // namespace fracctl
