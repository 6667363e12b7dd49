#include "specdec/io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace specdec::io {

using nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  return is;
}

json signal_to_json(const Signal& s) {
  json arr = json::array();
  for (int i = 0; i < s.size(); ++i) arr.push_back(s.values[i]);
  return arr;
}

Signal signal_from_json(const json& arr, const Shape& shape) {
  Vector v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) v[static_cast<int>(i)] = arr[i].get<double>();
  return Signal(std::move(v), shape);
}

const char* method_str(Method m) {
  switch (m) {
    case Method::VM: return "vm";
    case Method::GF: return "gf";
    case Method::IS: return "iss";
  }
  return "gf";
}

Method method_from(const std::string& s) {
  if (s == "vm") return Method::VM;
  if (s == "gf") return Method::GF;
  if (s == "iss" || s == "is") return Method::IS;
  throw std::runtime_error("unknown method: " + s);
}

const char* kind_str(FilterKind k) {
  switch (k) {
    case FilterKind::lowpass: return "lowpass";
    case FilterKind::highpass: return "highpass";
    case FilterKind::bandpass: return "bandpass";
    case FilterKind::bandstop: return "bandstop";
    case FilterKind::custom: return "custom";
  }
  return "custom";
}

FilterKind kind_from(const std::string& s) {
  if (s == "lowpass") return FilterKind::lowpass;
  if (s == "highpass") return FilterKind::highpass;
  if (s == "bandpass") return FilterKind::bandpass;
  if (s == "bandstop") return FilterKind::bandstop;
  if (s == "custom") return FilterKind::custom;
  throw std::runtime_error("unknown filter kind: " + s);
}

Shape shape_from_json(const json& j) {
  if (j.size() == 1) return Shape{j[0].get<int>(), 1};
  return Shape{j[0].get<int>(), j[1].get<int>()};
}

json shape_to_json(const Shape& s) {
  if (s.cols == 1) return json::array({s.rows});
  return json::array({s.rows, s.cols});
}

}  // namespace

Signal read_signal(const std::string& path) {
  if (path.size() > 4 && path.substr(path.size() - 4) == ".pgm") return read_pgm(path);
  auto is = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("empty signal file: " + path);
  const size_t cols = rows[0].size();
  for (const auto& r : rows)
    if (r.size() != cols) throw std::runtime_error("ragged signal file: " + path);
  Vector v(rows.size() * cols);
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < cols; ++c) v[static_cast<int>(r * cols + c)] = rows[r][c];
  return Signal(std::move(v), Shape{static_cast<int>(rows.size()), static_cast<int>(cols)});
}

void write_signal(const std::string& path, const Signal& s) {
  if (path.size() > 4 && path.substr(path.size() - 4) == ".pgm") {
    write_pgm(path, s);
    return;
  }
  auto os = open_out(path);
  const int cols = s.shape.cols;
  for (int r = 0; r < s.shape.rows; ++r) {
    for (int c = 0; c < cols; ++c)
      os << fmt17(s.values[r * cols + c]) << (c + 1 < cols ? "," : "");
    os << "\n";
  }
}

void write_pgm(const std::string& path, const Signal& s) {
  auto os = open_out(path);
  const double lo = s.values.minCoeff(), hi = s.values.maxCoeff();
  const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
  os << "P2\n" << s.shape.cols << " " << s.shape.rows << "\n255\n";
  for (int r = 0; r < s.shape.rows; ++r) {
    for (int c = 0; c < s.shape.cols; ++c) {
      const int g = static_cast<int>(std::lround((s.values[r * s.shape.cols + c] - lo) * scale));
      os << g << (c + 1 < s.shape.cols ? " " : "");
    }
    os << "\n";
  }
}

Signal read_pgm(const std::string& path) {
  auto is = open_in(path);
  std::string magic;
  is >> magic;
  if (magic != "P2") throw std::runtime_error("only plain PGM (P2) is supported: " + path);
  int cols = 0, rows = 0, maxval = 255;
  is >> cols >> rows >> maxval;
  Vector v(rows * cols);
  for (int i = 0; i < rows * cols; ++i) {
    int g;
    if (!(is >> g)) throw std::runtime_error("truncated PGM: " + path);
    v[i] = static_cast<double>(g) / maxval;
  }
  return Signal(std::move(v), Shape{rows, cols});
}

Regularizer regularizer_from_json_text(const std::string& text) {
  json j = json::parse(text);
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "tv1d") return make_tv1d(j.at("shape")[0].get<int>());
  if (kind == "l1") return make_l1(j.at("shape")[0].get<int>());
  if (kind == "tv2d_aniso")
    return make_tv2d_aniso(j.at("shape")[0].get<int>(), j.at("shape")[1].get<int>());
  if (kind == "tv2d_iso")
    return make_tv2d_iso(j.at("shape")[0].get<int>(), j.at("shape")[1].get<int>());
  if (kind == "matrix") {
    const int m = j.at("shape")[0].get<int>();
    const int n = j.at("shape")[1].get<int>();
    const auto& arr = j.at("matrix");
    if (static_cast<int>(arr.size()) != m * n)
      throw std::runtime_error("matrix spec: need m*n row-major entries");
    Eigen::MatrixXd K(m, n);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < n; ++c) K(r, c) = arr[r * n + c].get<double>();
    return make_matrix(K);
  }
  throw std::runtime_error("unknown operator kind: " + kind);
}

Regularizer read_regularizer(const std::string& path) {
  auto is = open_in(path);
  std::stringstream ss;
  ss << is.rdbuf();
  return regularizer_from_json_text(ss.str());
}

void write_regularizer_spec(const std::string& path, const std::string& kind,
                            const Shape& shape, const Eigen::MatrixXd* matrix) {
  json j;
  j["kind"] = kind;
  if (kind == "matrix") {
    if (!matrix) throw std::runtime_error("matrix spec requires coefficients");
    j["shape"] = json::array({static_cast<int>(matrix->rows()), static_cast<int>(matrix->cols())});
    json arr = json::array();
    for (int r = 0; r < matrix->rows(); ++r)
      for (int c = 0; c < matrix->cols(); ++c) arr.push_back((*matrix)(r, c));
    j["matrix"] = arr;
  } else {
    j["shape"] = shape_to_json(shape);
  }
  open_out(path) << j.dump(2) << "\n";
}

namespace {

json trajectory_to_json(const FlowTrajectory& traj) {
  json j;
  j["method"] = method_str(traj.method);
  j["mode"] = traj.mode == Mode::exact ? "exact" : "gridded";
  j["extinction_time"] = traj.extinction_time;
  j["nullspace_part"] = signal_to_json(traj.nullspace_part);
  j["input"] = signal_to_json(traj.input);
  j["shape"] = shape_to_json(traj.input.shape);
  j["ddl1_path"] = traj.ddl1_path;
  if (traj.mode == Mode::exact) {
    json events = json::array();
    for (const auto& e : traj.events) {
      json je;
      je["t"] = e.t;
      je["u"] = signal_to_json(e.u);
      je["p"] = signal_to_json(e.p);
      events.push_back(std::move(je));
    }
    j["events"] = std::move(events);
  } else {
    json grid = json::array();
    for (size_t k = 0; k < traj.grid_t.size(); ++k) {
      json je;
      je["t"] = traj.grid_t[k];
      je["u"] = signal_to_json(traj.grid_u[k]);
      je["p"] = signal_to_json(traj.grid_p[k]);
      grid.push_back(std::move(je));
    }
    j["grid"] = std::move(grid);
  }
  return j;
}

FlowTrajectory trajectory_from_json(const json& j) {
  FlowTrajectory traj;
  traj.method = method_from(j.at("method").get<std::string>());
  traj.mode = j.at("mode").get<std::string>() == "exact" ? Mode::exact : Mode::gridded;
  traj.extinction_time = j.at("extinction_time").get<double>();
  const Shape shape = shape_from_json(j.at("shape"));
  traj.nullspace_part = signal_from_json(j.at("nullspace_part"), shape);
  traj.input = signal_from_json(j.at("input"), shape);
  traj.ddl1_path = j.value("ddl1_path", false);
  if (traj.mode == Mode::exact) {
    for (const auto& je : j.at("events"))
      traj.events.push_back({je.at("t").get<double>(), signal_from_json(je.at("u"), shape),
                             signal_from_json(je.at("p"), shape)});
  } else {
    for (const auto& je : j.at("grid")) {
      traj.grid_t.push_back(je.at("t").get<double>());
      traj.grid_u.push_back(signal_from_json(je.at("u"), shape));
      traj.grid_p.push_back(signal_from_json(je.at("p"), shape));
    }
  }
  return traj;
}

}  // namespace

void write_trajectory(const std::string& path, const FlowTrajectory& traj) {
  open_out(path) << trajectory_to_json(traj).dump(2) << "\n";
}

FlowTrajectory read_trajectory(const std::string& path) {
  auto is = open_in(path);
  json j;
  is >> j;
  return trajectory_from_json(j);
}

void write_decomposition(const std::string& path, const SpectralDecomposition& dec) {
  json j;
  j["method"] = method_str(dec.method);
  j["mode"] = dec.mode == Mode::exact ? "exact" : "gridded";
  j["nullspace_part"] = signal_to_json(dec.nullspace_part);
  j["input"] = signal_to_json(dec.input);
  j["shape"] = shape_to_json(dec.input.shape);
  if (dec.mode == Mode::exact) {
    json atoms = json::array();
    for (const auto& a : dec.atoms) {
      json ja;
      ja["t"] = a.t;
      ja["phi"] = signal_to_json(a.phi);
      atoms.push_back(std::move(ja));
    }
    j["atoms"] = std::move(atoms);
  } else {
    json grid = json::array();
    for (size_t k = 0; k < dec.grid_t.size(); ++k) {
      json jg;
      jg["t"] = dec.grid_t[k];
      jg["phi"] = signal_to_json(dec.density[k]);
      jg["du"] = signal_to_json(dec.du[k]);
      grid.push_back(std::move(jg));
    }
    j["grid"] = std::move(grid);
  }
  open_out(path) << j.dump(2) << "\n";
}

SpectralDecomposition read_decomposition(const std::string& path) {
  auto is = open_in(path);
  json j;
  is >> j;
  SpectralDecomposition dec;
  dec.method = method_from(j.at("method").get<std::string>());
  dec.mode = j.at("mode").get<std::string>() == "exact" ? Mode::exact : Mode::gridded;
  const Shape shape = shape_from_json(j.at("shape"));
  dec.nullspace_part = signal_from_json(j.at("nullspace_part"), shape);
  dec.input = signal_from_json(j.at("input"), shape);
  if (dec.mode == Mode::exact) {
    for (const auto& ja : j.at("atoms"))
      dec.atoms.push_back({ja.at("t").get<double>(), signal_from_json(ja.at("phi"), shape)});
  } else {
    for (const auto& jg : j.at("grid")) {
      dec.grid_t.push_back(jg.at("t").get<double>());
      dec.density.push_back(signal_from_json(jg.at("phi"), shape));
      dec.du.push_back(signal_from_json(jg.at("du"), shape));
    }
  }
  return dec;
}

FilterSpec read_filter_spec(const std::string& path) {
  auto is = open_in(path);
  json j;
  is >> j;
  FilterSpec spec;
  spec.w0 = j.value("w0", 1.0);
  spec.kind = kind_from(j.value("kind", std::string("custom")));
  spec.t1 = j.value("t1", 0.0);
  spec.t2 = j.value("t2", 0.0);
  if (j.contains("breakpoints"))
    for (const auto& bp : j.at("breakpoints"))
      spec.breakpoints.emplace_back(bp[0].get<double>(), bp[1].get<double>());
  return spec;
}

void write_filter_spec(const std::string& path, const FilterSpec& spec) {
  json j;
  j["w0"] = spec.w0;
  j["kind"] = kind_str(spec.kind);
  j["t1"] = spec.t1;
  j["t2"] = spec.t2;
  json bps = json::array();
  for (const auto& [t, w] : spec.breakpoints) bps.push_back(json::array({t, w}));
  j["breakpoints"] = std::move(bps);
  open_out(path) << j.dump(2) << "\n";
}

void write_spectrum(const std::string& path, const Spectrum& s) {
  auto os = open_out(path);
  os << "t,mass_or_density\n";
  if (!s.grid_t.empty()) {
    for (size_t i = 0; i < s.grid_t.size(); ++i)
      os << fmt17(s.grid_t[i]) << "," << fmt17(s.density[i]) << "\n";
  } else {
    for (const auto& [t, mass] : s.atoms) os << fmt17(t) << "," << fmt17(mass) << "\n";
  }
}

void write_report(const std::string& path, const VerificationReport& report) {
  json j;
  json checks = json::array();
  for (const auto& c : report.checks) {
    json jc;
    jc["name"] = c.name;
    jc["pass"] = c.pass;
    jc["residual"] = c.residual;
    jc["tolerance"] = c.tolerance;
    jc["context"] = c.context;
    jc["informative"] = c.informative;
    checks.push_back(std::move(jc));
  }
  j["checks"] = std::move(checks);
  j["summary"] = report.summary();
  open_out(path) << j.dump(2) << "\n";
}

void print_report(std::ostream& os, const VerificationReport& report) {
  os << std::left << std::setw(24) << "check" << std::setw(8) << "status"
     << std::setw(14) << "residual" << std::setw(14) << "tolerance"
     << "\n";
  for (const auto& c : report.checks) {
    os << std::left << std::setw(24) << c.name << std::setw(8)
       << (c.pass ? "PASS" : (c.informative ? "info" : "FAIL")) << std::setw(14)
       << std::scientific << std::setprecision(3) << c.residual << std::setw(14)
       << c.tolerance << "\n";
  }
  os << report.summary() << "\n";
}

}  // namespace specdec::io
