#include "fracctl/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "fracctl/csv.hpp"
#include "fracctl/errors.hpp"
#include "fracctl/expression.hpp"

namespace fracctl {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

std::optional<double> to_real(const std::string& s) {
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<std::size_t> to_count(const std::string& s) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) return std::nullopt;
  errno = 0;
  const unsigned long long v = std::strtoull(s.c_str(), nullptr, 10);
  if (errno == ERANGE) return std::nullopt;
  return static_cast<std::size_t>(v);
}

constexpr std::string_view kFilePrefix = "file:";

bool is_file_reference(const std::string& value) { return value.rfind(kFilePrefix, 0) == 0; }

std::filesystem::path file_of(const std::string& value, const std::filesystem::path& base) {
  std::filesystem::path p = trim(std::string_view(value).substr(kFilePrefix.size()));
  return p.is_absolute() ? p : base / p;
}

/// Piecewise-linear interpolant of an `x,value` CSV.
SpaceField space_field_from_file(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  if (table.header.size() != 2) throw ConfigError(fmt::format("{}: expected columns x,value", path.string()));
  std::vector<std::pair<double, double>> points;
  for (const auto& row : table.rows) points.emplace_back(row[0], row[1]);
  std::sort(points.begin(), points.end());
  if (points.size() < 2) throw ConfigError(fmt::format("{}: need at least two samples", path.string()));
  return [points](double x) {
    auto it = std::upper_bound(points.begin(), points.end(), x, [](double v, const auto& p) { return v < p.first; });
    std::size_t hi = static_cast<std::size_t>(it - points.begin());
    hi = std::clamp<std::size_t>(hi, 1, points.size() - 1);
    const auto& [x0, y0] = points[hi - 1];
    const auto& [x1, y1] = points[hi];
    const double theta = std::clamp((x - x0) / (x1 - x0), 0.0, 1.0);
    return y0 + theta * (y1 - y0);
  };
}

struct Pending {
  std::optional<std::string> nonlinearity;
  std::optional<double> rate;
  std::optional<std::string> table;
  std::vector<double> weights;
  std::vector<double> times;
  bool has_weights = false;
  bool has_times = false;
  bool has_initial_state = false;
  std::optional<std::filesystem::path> control_file;
};

}  // namespace

std::optional<SolverKind> parse_solver_kind(std::string_view name) {
  if (name == "l1") return SolverKind::L1;
  if (name == "gl") return SolverKind::GL;
  if (name == "mild") return SolverKind::Mild;
  return std::nullopt;
}

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::L1: return "l1";
    case SolverKind::GL: return "gl";
    case SolverKind::Mild: return "mild";
  }
  return "unknown";
}

std::string to_string(CostKind kind) {
  return kind == CostKind::QuadraticIntegral ? "quadratic_integral" : "final_tracking";
}

LoadedConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir,
                               const ConfigOverrides& overrides) {
  LoadedConfig loaded;
  ProblemConfig& cfg = loaded.problem;
  std::vector<std::string> problems;
  Pending pending;
  std::optional<double> alpha;

  auto real = [&](const std::string& key, const std::string& value, double& target) {
    if (auto v = to_real(value)) target = *v;
    else problems.push_back(fmt::format("{}: '{}' is not a number", key, value));
  };
  auto count = [&](const std::string& key, const std::string& value, std::size_t& target) {
    if (auto v = to_count(value)) target = *v;
    else problems.push_back(fmt::format("{}: '{}' is not a non-negative integer", key, value));
  };
  auto real_list = [&](const std::string& key, const std::string& value, std::vector<double>& target) {
    for (const auto& item : split_list(value)) {
      if (auto v = to_real(item)) target.push_back(*v);
      else problems.push_back(fmt::format("{}: '{}' is not a number", key, item));
    }
  };
  auto guarded = [&](const std::string& key, const std::function<void()>& body) {
    try {
      body();
    } catch (const ConfigError& e) {
      for (const auto& p : e.problems()) problems.push_back(fmt::format("{}: {}", key, p));
    } catch (const std::exception& e) {
      problems.push_back(fmt::format("{}: {}", key, e.what()));
    }
  };
  auto space_field = [&](const std::string& key, const std::string& value, SpaceField& target) {
    guarded(key, [&] {
      if (is_file_reference(value)) {
        target = space_field_from_file(file_of(value, base_dir));
      } else {
        const SpaceTimeField f = compile_expression(value);
        target = [f](double x) { return f(0.0, x); };
      }
    });
  };

  using Handler = std::function<void(const std::string& key, const std::string& value)>;
  const std::map<std::string, std::map<std::string, Handler>> grammar{
      {"problem",
       {
           {"alpha", [&](const auto& k, const auto& v) {
              double a = 0.0;
              real(k, v, a);
              alpha = a;
            }},
           {"T", [&](const auto& k, const auto& v) { real(k, v, cfg.final_time); }},
           {"N", [&](const auto& k, const auto& v) { count(k, v, cfg.steps); }},
           {"x_lo", [&](const auto& k, const auto& v) { real(k, v, cfg.x_lo); }},
           {"x_hi", [&](const auto& k, const auto& v) { real(k, v, cfg.x_hi); }},
           {"n_elems", [&](const auto& k, const auto& v) { count(k, v, cfg.n_elems); }},
           {"diffusion", [&](const auto& k, const auto& v) { real(k, v, cfg.diffusion); }},
           {"nonlinearity", [&](const auto&, const auto& v) { pending.nonlinearity = v; }},
           {"rate", [&](const auto& k, const auto& v) {
              double r = 0.0;
              real(k, v, r);
              pending.rate = r;
            }},
           {"table", [&](const auto&, const auto& v) { pending.table = v; }},
           {"B", [&](const auto& k, const auto& v) {
              if (v == "identity") return;
              if (!is_file_reference(v)) {
                problems.push_back(fmt::format("{}: expected 'identity' or 'file:PATH', got '{}'", k, v));
                return;
              }
              guarded(k, [&] { cfg.control_map = read_matrix_csv(file_of(v, base_dir)); });
            }},
           {"initial_state", [&](const auto& k, const auto& v) {
              pending.has_initial_state = true;
              space_field(k, v, cfg.initial_state);
            }},
           {"control", [&](const auto& k, const auto& v) {
              if (is_file_reference(v)) {
                pending.control_file = file_of(v, base_dir);
              } else {
                guarded(k, [&] { cfg.control = compile_expression(v); });
              }
            }},
       }},
      {"nonlocal",
       {
           {"c", [&](const auto& k, const auto& v) {
              pending.has_weights = true;
              real_list(k, v, pending.weights);
            }},
           {"t", [&](const auto& k, const auto& v) {
              pending.has_times = true;
              real_list(k, v, pending.times);
            }},
       }},
      {"cost",
       {
           {"kind", [&](const auto& k, const auto& v) {
              if (v == "quadratic_integral") cfg.cost.kind = CostKind::QuadraticIntegral;
              else if (v == "final_tracking") cfg.cost.kind = CostKind::FinalTracking;
              else problems.push_back(fmt::format("{}: expected quadratic_integral or final_tracking, got '{}'", k, v));
            }},
           {"epsilon", [&](const auto& k, const auto& v) { real(k, v, cfg.cost.epsilon); }},
           {"R0_scale", [&](const auto& k, const auto& v) { real(k, v, cfg.cost.r0_scale); }},
           {"W0_scale", [&](const auto& k, const auto& v) { real(k, v, cfg.cost.w0_scale); }},
           {"scale", [&](const auto& k, const auto& v) { real(k, v, cfg.cost.scale); }},
           {"target", [&](const auto& k, const auto& v) { space_field(k, v, cfg.cost.target); }},
       }},
      {"solver",
       {
           {"method", [&](const auto& k, const auto& v) {
              if (auto s = parse_solver_kind(v)) cfg.solver = *s;
              else problems.push_back(fmt::format("{}: expected l1, gl or mild, got '{}'", k, v));
            }},
           {"step_tol", [&](const auto& k, const auto& v) { real(k, v, cfg.tol.step_tol); }},
           {"nonlocal_tol", [&](const auto& k, const auto& v) { real(k, v, cfg.tol.nonlocal_tol); }},
           {"hammerstein_tol", [&](const auto& k, const auto& v) { real(k, v, cfg.tol.hammerstein_tol); }},
           {"eps1", [&](const auto& k, const auto& v) { real(k, v, cfg.tol.eps1); }},
           {"eps2", [&](const auto& k, const auto& v) { real(k, v, cfg.tol.eps2); }},
           {"delta", [&](const auto& k, const auto& v) { real(k, v, cfg.tol.delta); }},
           {"max_iter", [&](const auto& k, const auto& v) { count(k, v, cfg.tol.max_iter); }},
           {"max_outer", [&](const auto& k, const auto& v) { count(k, v, cfg.tol.max_outer); }},
           {"max_step_sweeps", [&](const auto& k, const auto& v) { count(k, v, cfg.tol.max_step_sweeps); }},
           {"hammerstein_max_iter", [&](const auto& k, const auto& v) { count(k, v, cfg.tol.hammerstein_max_iter); }},
       }},
  };

  std::set<std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_number = 0;
  while (std::getline(in, raw)) {
    ++line_number;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        problems.push_back(fmt::format("line {}: malformed section header '{}'", line_number, line));
        continue;
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!grammar.contains(section)) problems.push_back(fmt::format("line {}: unknown section [{}]", line_number, section));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      problems.push_back(fmt::format("line {}: expected 'key = value', got '{}'", line_number, line));
      continue;
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (section.empty()) {
      problems.push_back(fmt::format("line {}: key '{}' appears before any section", line_number, key));
      continue;
    }
    const auto sec = grammar.find(section);
    if (sec == grammar.end()) continue;
    const std::string qualified = section + "." + key;
    const auto handler = sec->second.find(key);
    if (handler == sec->second.end()) {
      problems.push_back(fmt::format("line {}: unknown key '{}' in [{}]", line_number, key, section));
      continue;
    }
    if (!seen.insert(qualified).second) {
      problems.push_back(fmt::format("line {}: duplicate key '{}'", line_number, qualified));
      continue;
    }
    loaded.entries.emplace_back(qualified, value);
    handler->second(qualified, value);
  }

  // Required keys.
  if (overrides.alpha) alpha = overrides.alpha;
  if (overrides.solver) cfg.solver = *overrides.solver;
  for (const char* key : {"T", "N", "x_lo", "x_hi", "n_elems"}) {
    if (!seen.contains(std::string("problem.") + key)) problems.push_back(fmt::format("missing required key problem.{}", key));
  }
  if (!alpha) {
    problems.push_back("missing required key problem.alpha (or pass --alpha)");
  } else {
    try {
      cfg.alpha = FractionalOrder(*alpha);
    } catch (const DomainError& e) {
      problems.push_back(fmt::format("problem.alpha: {}", e.what()));
    }
  }

  // Nonlinearity.
  guarded("problem.nonlinearity", [&] {
    const std::string name = pending.nonlinearity.value_or("zero");
    const double rate = pending.rate.value_or(1.0);
    if (name == "zero") {
      cfg.nonlinearity = Nonlinearity::zero();
    } else if (name == "linear_decay") {
      cfg.nonlinearity = Nonlinearity::linear_decay(rate);
    } else if (name == "cubic_decay") {
      cfg.nonlinearity = Nonlinearity::cubic_decay(rate);
    } else if (name == "table") {
      if (!pending.table) throw ConfigError("nonlinearity = table needs a 'table' key with u:f pairs");
      std::vector<std::pair<double, double>> points;
      for (const auto& item : split_list(*pending.table)) {
        const auto colon = item.find(':');
        const auto u = colon == std::string::npos ? std::nullopt : to_real(trim(item.substr(0, colon)));
        const auto f = colon == std::string::npos ? std::nullopt : to_real(trim(item.substr(colon + 1)));
        if (!u || !f) throw ConfigError(fmt::format("table entry '{}' is not of the form u:f", item));
        points.emplace_back(*u, *f);
      }
      cfg.nonlinearity = Nonlinearity::table(std::move(points));
    } else {
      throw ConfigError(fmt::format("expected zero, linear_decay, cubic_decay or table, got '{}'", name));
    }
  });
  if (pending.table && pending.nonlinearity.value_or("zero") != "table") {
    problems.push_back("problem.table is only used with nonlinearity = table");
  }

  // Nonlocal pairs, snapped to the grid.
  if (pending.has_weights != pending.has_times) {
    problems.push_back("[nonlocal] needs both c and t");
  } else if (pending.weights.size() != pending.times.size()) {
    problems.push_back(fmt::format("[nonlocal] has {} weights but {} times", pending.weights.size(), pending.times.size()));
  } else {
    const bool grid_known = cfg.final_time > 0.0 && cfg.steps >= 1 && seen.contains("problem.T") && seen.contains("problem.N");
    for (std::size_t k = 0; k < pending.weights.size(); ++k) {
      double time = pending.times[k];
      if (grid_known) {
        const TimeGrid grid(cfg.final_time, cfg.steps);
        const long index = grid.nearest_index(time);
        if (index <= 0) {
          problems.push_back(fmt::format("nonlocal.t: {} is not within dt/2 = {} of a grid point in (0, T]", time,
                                         0.5 * grid.dt()));
        } else {
          time = grid.time(static_cast<std::size_t>(index));
        }
      }
      cfg.nonlocal.pairs.push_back({pending.weights[k], time});
    }
    const H1Report h1 = validate_h1(cfg.nonlocal);
    if (!h1.pass) {
      problems.push_back(fmt::format("nonlocal.c: sum |c_k| = {} violates sum |c_k| < 1 (margin {})", h1.weight_sum,
                                     h1.margin));
    }
  }
  if (cfg.nonlocal.empty() && !pending.has_initial_state) {
    problems.push_back("missing required key problem.initial_state (needed when [nonlocal] is empty)");
  }

  if (pending.control_file) {
    guarded("problem.control", [&] {
      const TimeGrid grid(cfg.final_time, std::max<std::size_t>(cfg.steps, 1));
      cfg.control_values = read_trajectory_values(*pending.control_file, &grid);
    });
  }

  if (!problems.empty()) throw ConfigError(problems);
  try {
    (void)discretize(cfg);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return loaded;
}

LoadedConfig parse_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file {}", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), path.parent_path(), overrides);
}

}  // namespace fracctl
