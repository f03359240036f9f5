#include <filesystem>
#include <fstream>

#include "doctest.h"

#include "fracctl/csv.hpp"
#include "fracctl/errors.hpp"

using namespace fracctl;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fracctl_csv_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("numbers round-trip exactly") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125, 0.0}) CHECK(std::stod(format_number(v)) == v);
}

TEST_CASE("table round-trip") {
  const fs::path dir = scratch_dir("table");
  const CsvTable table{{"a", "b"}, {{1.0, 2.0 / 3.0}, {-4.0, 1e-17}}};
  write_csv(dir / "nested" / "t.csv", table);
  CHECK_FALSE(fs::exists(dir / "nested" / "t.csv.tmp"));
  const CsvTable back = read_csv(dir / "nested" / "t.csv");
  CHECK(back.header == table.header);
  CHECK(back.rows == table.rows);

  std::ifstream raw(dir / "nested" / "t.csv", std::ios::binary);
  const std::string text((std::istreambuf_iterator<char>(raw)), {});
  CHECK(text.find('\r') == std::string::npos);
}

TEST_CASE("trajectory round-trip checks the time column") {
  const fs::path dir = scratch_dir("trajectory");
  const TimeGrid grid(1.0, 4);
  Trajectory tr = Trajectory::zeros(grid, 2);
  tr.values << 0, 0, 1, 2, 3, 4, 5, 6, 7, 8;
  write_trajectory(dir / "u.csv", tr);
  const CsvTable raw = read_csv(dir / "u.csv");
  CHECK(raw.header == std::vector<std::string>{"t", "x_1", "x_2"});
  CHECK(read_trajectory_values(dir / "u.csv", &grid) == tr.values);
  const TimeGrid other(2.0, 4);
  CHECK_THROWS_AS(read_trajectory_values(dir / "u.csv", &other), ConfigError);
}

TEST_CASE("malformed files") {
  const fs::path dir = scratch_dir("bad");
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "ragged.csv");
    out << "a,b\n1,2\n3\n";
  }
  {
    std::ofstream out(dir / "text.csv");
    out << "a,b\n1,zz\n";
  }
  CHECK_THROWS_AS(read_csv(dir / "ragged.csv"), ConfigError);
  CHECK_THROWS_AS(read_csv(dir / "text.csv"), ConfigError);
  CHECK_THROWS_AS(read_csv(dir / "missing.csv"), ConfigError);
  {
    std::ofstream out(dir / "m.csv");
    out << "1,0\n0,2\n";
  }
  const Eigen::MatrixXd m = read_matrix_csv(dir / "m.csv");
  CHECK(m(1, 1) == 2.0);
  CHECK(m.rows() == 2);
}
