#include "wdn/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace wdn {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json matrix_to_json(const Matrix& M) {
  json rows = json::array();
  for (int r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, int rows, int cols, const std::string& name) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows)
    throw IoError("model json: field '" + name + "' must have " + std::to_string(rows) + " rows");
  Matrix M(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const json& row = j[r];
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      throw IoError("model json: field '" + name + "' row " + std::to_string(r) +
                    " must have " + std::to_string(cols) + " entries");
    for (int c = 0; c < cols; ++c) {
      if (!row[c].is_number())
        throw IoError("model json: field '" + name + "' has a non-numeric entry");
      M(r, c) = row[c].get<double>();
    }
  }
  return M;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  return out;
}

double parse_number(const std::string& tok, int lineno) {
  try {
    size_t pos = 0;
    const double v = std::stod(tok, &pos);
    while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos]))) ++pos;
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw IoError("csv line " + std::to_string(lineno) + ": '" + tok + "' is not a number");
  }
}

}  // namespace

void save_model_json(const LinearTankModel& model, const std::string& path) {
  model.validate();
  json j;
  j["n"] = model.n();
  j["m"] = model.m();
  j["dt"] = model.dt;
  j["Ad"] = matrix_to_json(model.Ad);
  j["Bd1"] = matrix_to_json(model.Bd1);
  j["Bd2"] = matrix_to_json(model.Bd2);
  j["Bd3"] = matrix_to_json(model.Bd3);
  if (model.source) {
    j["source"]["A"] = matrix_to_json(model.source->A);
    j["source"]["B1"] = matrix_to_json(model.source->B1);
    j["source"]["B2"] = matrix_to_json(model.source->B2);
  }
  open_out(path) << j.dump(2) << '\n';
}

LinearTankModel load_model_json(const std::string& path) {
  json j;
  try {
    j = json::parse(open_in(path), nullptr, true, true);
  } catch (const json::exception& e) {
    throw IoError("model json '" + path + "': " + e.what());
  }
  for (const char* key : {"n", "m", "dt", "Ad", "Bd1", "Bd2", "Bd3"})
    if (!j.contains(key)) throw IoError("model json: missing field '" + std::string(key) + "'");
  const int n = j["n"].get<int>();
  const int m = j["m"].get<int>();
  if (n < 1 || m < 1) throw IoError("model json: dimensions must be positive");
  LinearTankModel mdl;
  mdl.dt = j["dt"].get<double>();
  mdl.Ad = matrix_from_json(j["Ad"], n, n, "Ad");
  mdl.Bd1 = matrix_from_json(j["Bd1"], n, m, "Bd1");
  mdl.Bd2 = matrix_from_json(j["Bd2"], n, 1, "Bd2");
  mdl.Bd3 = matrix_from_json(j["Bd3"], n, n, "Bd3");
  if (j.contains("source")) {
    ContinuousTankModel src;
    src.A = matrix_from_json(j["source"]["A"], n, n, "source.A");
    src.B1 = matrix_from_json(j["source"]["B1"], n, m, "source.B1");
    src.B2 = matrix_from_json(j["source"]["B2"], n, 1, "source.B2");
    mdl.source = src;
  }
  mdl.validate();
  return mdl;
}

void save_dataset_csv(const TrajectoryDataset& data, const std::string& path) {
  data.validate();
  std::ofstream out = open_out(path);
  for (const auto& e : data.edges)
    out << "# edge," << e.id << ',' << e.tank << ',' << e.neighbor << ',' << fmt(e.tank_area)
        << '\n';
  for (int i = 0; i < data.n(); ++i) out << 'h' << i + 1 << ',';
  for (int i = 0; i < data.m(); ++i) out << 'u' << i + 1 << ',';
  out << "d_a";
  for (size_t e = 0; e < data.edges.size(); ++e) out << ",q" << e + 1;
  out << '\n';
  for (int t = 0; t < data.samples(); ++t) {
    for (int i = 0; i < data.n(); ++i) out << fmt(data.h(t, i)) << ',';
    for (int i = 0; i < data.m(); ++i) out << fmt(data.u(t, i)) << ',';
    out << fmt(data.d_a(t));
    for (size_t e = 0; e < data.edges.size(); ++e) out << ',' << fmt(data.q(t, e));
    out << '\n';
  }
}

TrajectoryDataset load_dataset_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  TrajectoryDataset data;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  int n = 0, m = 0, ne = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto toks = split_csv(line.substr(1));
      if (toks.size() != 5 || toks[0].find("edge") == std::string::npos)
        throw IoError("csv line " + std::to_string(lineno) + ": bad edge metadata");
      TrajectoryDataset::Edge e;
      e.id = toks[1];
      e.tank = static_cast<int>(parse_number(toks[2], lineno));
      e.neighbor = static_cast<int>(parse_number(toks[3], lineno));
      e.tank_area = parse_number(toks[4], lineno);
      data.edges.push_back(std::move(e));
      continue;
    }
    const auto toks = split_csv(line);
    if (!have_header) {
      for (const std::string& t : toks) {
        if (!t.empty() && t[0] == 'h') ++n;
        else if (!t.empty() && t[0] == 'u') ++m;
        else if (!t.empty() && t[0] == 'q') ++ne;
      }
      if (n < 1 || m < 1) throw IoError("csv line " + std::to_string(lineno) + ": bad header");
      if (ne != static_cast<int>(data.edges.size()))
        throw IoError("csv line " + std::to_string(lineno) +
                      ": flow columns do not match edge metadata");
      have_header = true;
      continue;
    }
    if (static_cast<int>(toks.size()) != n + m + 1 + ne)
      throw IoError("csv line " + std::to_string(lineno) + ": expected " +
                    std::to_string(n + m + 1 + ne) + " columns, got " +
                    std::to_string(toks.size()));
    std::vector<double> row;
    row.reserve(toks.size());
    for (const std::string& t : toks) row.push_back(parse_number(t, lineno));
    rows.push_back(std::move(row));
  }
  if (!have_header) throw IoError("dataset csv '" + path + "': missing header row");
  const int S = static_cast<int>(rows.size());
  data.h = Matrix(S, n);
  data.u = Matrix(S, m);
  data.d_a = Vector(S);
  data.q = Matrix(S, ne);
  for (int t = 0; t < S; ++t) {
    int c = 0;
    for (int i = 0; i < n; ++i) data.h(t, i) = rows[t][c++];
    for (int i = 0; i < m; ++i) data.u(t, i) = rows[t][c++];
    data.d_a(t) = rows[t][c++];
    for (int e = 0; e < ne; ++e) data.q(t, e) = rows[t][c++];
  }
  data.validate();
  return data;
}

void save_trace_csv(const ClosedLoopTrace& trace, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "hour";
  const int n = trace.h0.size() ? static_cast<int>(trace.h0.size()) : 0;
  const int m = trace.steps.empty() ? 0 : static_cast<int>(trace.steps[0].u.size());
  for (int i = 0; i < n; ++i) out << ",h" << i + 1;
  for (int i = 0; i < m; ++i) out << ",u" << i + 1;
  for (int i = 0; i < n; ++i) out << ",w" << i + 1;
  out << ",price,demand,cost,slack,feasible,violations\n";
  for (const StepRecord& r : trace.steps) {
    out << r.hour;
    for (int i = 0; i < n; ++i) out << ',' << fmt(r.h(i));
    for (int i = 0; i < m; ++i) out << ',' << fmt(r.u(i));
    for (int i = 0; i < n; ++i) out << ',' << fmt(r.w(i));
    out << ',' << fmt(r.price) << ',' << fmt(r.demand) << ',' << fmt(r.cost) << ','
        << fmt(r.slack) << ',' << (r.feasible ? 1 : 0) << ',' << r.violations << '\n';
  }
}

std::string summary_csv_string(const std::vector<CellSummary>& cells) {
  std::ostringstream out;
  out << "controller,scenario,hours,total_cost,mean_daily_cost,violations,infeasible_steps\n";
  for (const CellSummary& c : cells)
    out << c.controller << ',' << c.scenario << ',' << c.hours << ',' << fmt(c.total_cost) << ','
        << fmt(c.mean_daily_cost) << ',' << c.violations << ',' << c.infeasible_steps << '\n';
  return out.str();
}

void save_summary_csv(const std::vector<CellSummary>& cells, const std::string& path) {
  open_out(path) << summary_csv_string(cells);
}

ExperimentConfig load_experiment_config(const std::string& path) {
  json j;
  try {
    j = json::parse(open_in(path), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw IoError("config '" + path + "': " + e.what());
  }
  ExperimentConfig cfg;
  try {
    if (j.contains("controllers")) cfg.controllers = j["controllers"].get<std::vector<std::string>>();
    if (j.contains("scenarios")) cfg.scenarios = j["scenarios"].get<std::vector<std::string>>();
    if (j.contains("days")) cfg.days = j["days"].get<int>();
    if (j.contains("horizon")) cfg.horizon = j["horizon"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("workers")) cfg.workers = j["workers"].get<int>();
    if (j.contains("soft")) cfg.soft = j["soft"].get<bool>();
    if (j.contains("rho")) cfg.rho = j["rho"].get<double>();
    if (j.contains("h0")) {
      const auto v = j["h0"].get<std::vector<double>>();
      cfg.h0 = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
  } catch (const json::exception& e) {
    throw IoError("config '" + path + "': " + e.what());
  }
  if (cfg.days < 1) throw IoError("config: days must be positive");
  if (cfg.horizon < 1) throw IoError("config: horizon must be positive");
  if (cfg.workers < 1) throw IoError("config: workers must be positive");
  return cfg;
}

void save_experiment_config(const ExperimentConfig& cfg, const std::string& path) {
  json j;
  j["controllers"] = cfg.controllers;
  j["scenarios"] = cfg.scenarios;
  j["days"] = cfg.days;
  j["horizon"] = cfg.horizon;
  j["seed"] = cfg.seed;
  j["workers"] = cfg.workers;
  j["soft"] = cfg.soft;
  j["rho"] = cfg.rho;
  if (cfg.h0.size()) j["h0"] = std::vector<double>(cfg.h0.data(), cfg.h0.data() + cfg.h0.size());
  open_out(path) << j.dump(2) << '\n';
}

void save_triplets_csv(const SpMat& A, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "row,col,value\n";
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      out << it.row() << ',' << it.col() << ',' << fmt(it.value()) << '\n';
}

void write_levels_svg(const ClosedLoopTrace& trace, const ConstraintSpec& spec,
                      const std::string& path) {
  if (trace.steps.empty()) throw ValidationError("svg plot: empty trace");
  const int n = static_cast<int>(trace.h0.size());
  const int T = trace.hours();
  const double width = 960, height = 220.0 * n, margin = 45;
  const double plot_w = width - 2 * margin, plot_h = 220 - 2 * margin;

  // Per-tank bounds from the +/- identity stage rows.
  Vector lo = Vector::Constant(n, std::numeric_limits<double>::quiet_NaN());
  Vector hi = lo;
  for (int r : spec.state_rows())
    for (int i = 0; i < n; ++i) {
      if (spec.K(r, i) == 1.0) hi(i) = spec.b(r);
      if (spec.K(r, i) == -1.0) lo(i) = -spec.b(r);
    }

  std::ofstream out = open_out(path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
      << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
  for (int i = 0; i < n; ++i) {
    double ymin = trace.h0(i), ymax = trace.h0(i);
    for (const StepRecord& r : trace.steps) {
      ymin = std::min(ymin, r.h_next(i));
      ymax = std::max(ymax, r.h_next(i));
    }
    if (std::isfinite(lo(i))) ymin = std::min(ymin, lo(i));
    if (std::isfinite(hi(i))) ymax = std::max(ymax, hi(i));
    const double pad = 0.05 * std::max(1e-9, ymax - ymin);
    ymin -= pad;
    ymax += pad;
    const double y0 = 220.0 * i + margin;
    auto X = [&](int t) { return margin + plot_w * t / std::max(1, T); };
    auto Y = [&](double v) { return y0 + plot_h * (1.0 - (v - ymin) / (ymax - ymin)); };

    out << "<text x='" << margin << "' y='" << y0 - 12 << "' font-size='13'>tank " << i + 1
        << " level (m), " << trace.controller << " / " << trace.scenario << "</text>\n";
    for (double bound : {lo(i), hi(i)})
      if (std::isfinite(bound))
        out << "<line x1='" << X(0) << "' y1='" << Y(bound) << "' x2='" << X(T) << "' y2='"
            << Y(bound) << "' stroke='gray' stroke-dasharray='5,4'/>\n";
    out << "<polyline fill='none' stroke='steelblue' stroke-width='1' points='";
    out << X(0) << ',' << Y(trace.h0(i)) << ' ';
    for (int t = 0; t < T; ++t) out << X(t + 1) << ',' << Y(trace.steps[t].h_next(i)) << ' ';
    out << "'/>\n";
    for (int t = 0; t < T; ++t) {
      const double v = trace.steps[t].h_next(i);
      const bool bad = (std::isfinite(hi(i)) && v > hi(i) + 1e-6) ||
                       (std::isfinite(lo(i)) && v < lo(i) - 1e-6);
      if (bad)
        out << "<circle cx='" << X(t + 1) << "' cy='" << Y(v) << "' r='2.5' fill='red'/>\n";
    }
  }
  out << "</svg>\n";
}

}  // namespace wdn
