// Copyright 2026 The LR-GMML Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lrgmml/io.h"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "json.hpp"
#include "lrgmml/errors.h"

namespace lrgmml {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

// Strict full-string parse; accepts "nan" and "inf" spellings.
bool parse_number(const std::string& s, double* value) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  *value = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && errno != ERANGE;
}

bool parse_int(const std::string& s, long long* value) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  *value = std::strtoll(s.c_str(), &end, 10);
  return end == s.c_str() + s.size() && errno != ERANGE;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return in;
}

std::string stem_of(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

class LabelIndexer {
 public:
  explicit LabelIndexer(Dataset* data) : data_(data) {}
  int id(const std::string& label) {
    auto it = ids_.find(label);
    if (it != ids_.end()) return it->second;
    const int next = static_cast<int>(data_->class_names.size());
    ids_.emplace(label, next);
    data_->class_names.push_back(label);
    return next;
  }

 private:
  Dataset* data_;
  std::unordered_map<std::string, int> ids_;
};

std::vector<std::string> read_csv_header(std::istream& in, const char* expected,
                                         const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw IoError(std::string(what) + ": empty file");
  if (trim(line) != expected) {
    throw IoError(std::string(what) + ": unexpected header '" + trim(line) + "'");
  }
  return split(trim(line), ',');
}

double field_double(const std::string& s, int line_no, const char* what) {
  double v = 0.0;
  if (!parse_number(s, &v)) {
    throw IoError(std::string(what) + ": line " + std::to_string(line_no) +
                  ": bad number '" + s + "'");
  }
  return v;
}

int field_int(const std::string& s, int line_no, const char* what) {
  long long v = 0;
  if (!parse_int(s, &v)) {
    throw IoError(std::string(what) + ": line " + std::to_string(line_no) +
                  ": bad integer '" + s + "'");
  }
  return static_cast<int>(v);
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

Dataset parse_csv(std::istream& in, const std::string& name,
                  LabelColumn label_column, bool has_header) {
  Dataset data;
  data.name = name;
  LabelIndexer indexer(&data);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (has_header && line_no == 1) continue;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split(line, ',');
    if (width == 0) {
      width = fields.size();
      if (width < 2) {
        throw IoError(name + ": line " + std::to_string(line_no) +
                      ": need at least one feature and a label");
      }
    } else if (fields.size() != width) {
      throw IoError(name + ": line " + std::to_string(line_no) + ": expected " +
                    std::to_string(width) + " fields, found " +
                    std::to_string(fields.size()));
    }
    const std::size_t label_at = label_column.index == LabelColumn::kLast
                                     ? width - 1
                                     : static_cast<std::size_t>(label_column.index);
    if (label_at >= width) {
      throw IoError(name + ": label column " + std::to_string(label_column.index) +
                    " out of range for " + std::to_string(width) + " columns");
    }
    std::vector<double> row;
    row.reserve(width - 1);
    for (std::size_t c = 0; c < width; ++c) {
      if (c == label_at) continue;
      double v = 0.0;
      if (!parse_number(fields[c], &v) || !std::isfinite(v)) {
        throw IoError(name + ": line " + std::to_string(line_no) + ", column " +
                      std::to_string(c + 1) + ": non-numeric feature '" + fields[c] + "'");
      }
      row.push_back(v);
    }
    data.labels.push_back(indexer.id(fields[label_at]));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(name + ": no data rows");
  data.features.resize(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(width - 1));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j + 1 < width; ++j) {
      data.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return data;
}

Dataset load_csv(const std::string& path, LabelColumn label_column, bool has_header) {
  std::ifstream in = open_input(path);
  return parse_csv(in, stem_of(path), label_column, has_header);
}

Dataset parse_libsvm(std::istream& in, const std::string& name) {
  Dataset data;
  data.name = name;
  LabelIndexer indexer(&data);
  std::vector<std::vector<std::pair<int, double>>> rows;
  std::string line;
  int line_no = 0;
  int d = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    std::istringstream ss(body);
    std::string label;
    ss >> label;
    std::vector<std::pair<int, double>> entries;
    std::string token;
    int previous = 0;
    while (ss >> token) {
      const auto colon = token.find(':');
      long long idx = 0;
      double v = 0.0;
      if (colon == std::string::npos || !parse_int(token.substr(0, colon), &idx) ||
          !parse_number(token.substr(colon + 1), &v) || !std::isfinite(v)) {
        throw IoError(name + ": line " + std::to_string(line_no) +
                      ": malformed entry '" + token + "'");
      }
      if (idx <= previous) {
        throw IoError(name + ": line " + std::to_string(line_no) +
                      ": feature indices must be 1-based and ascending");
      }
      previous = static_cast<int>(idx);
      d = std::max(d, previous);
      entries.emplace_back(previous, v);
    }
    data.labels.push_back(indexer.id(label));
    rows.push_back(std::move(entries));
  }
  if (rows.empty()) throw IoError(name + ": no data rows");
  if (d == 0) throw IoError(name + ": no features");
  data.features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& [idx, v] : rows[i]) {
      data.features(static_cast<Eigen::Index>(i), idx - 1) = v;
    }
  }
  return data;
}

Dataset load_libsvm(const std::string& path) {
  std::ifstream in = open_input(path);
  return parse_libsvm(in, stem_of(path));
}

void write_model(std::ostream& out, const MetricModel& model) {
  out << kModelMagic << '\n'
      << model.d() << ' ' << model.r() << ' ' << format_double(model.t) << '\n';
  auto write_rows = [&out](const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        out << (j ? " " : "") << format_double(m(i, j));
      }
      out << '\n';
    }
  };
  write_rows(model.u.matrix());
  write_rows(model.b.matrix());
}

MetricModel read_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("model file is empty");
  if (trim(line) != kModelMagic) {
    if (trim(line).rfind("LRGMML ", 0) == 0) {
      throw IoError("unsupported model file version '" + trim(line) +
                    "' (expected '" + kModelMagic + "')");
    }
    throw IoError("not a model file: bad magic line '" + trim(line) + "'");
  }
  if (!std::getline(in, line)) throw IoError("model file: missing header");
  const std::vector<std::string> header = split(trim(line), ' ');
  long long d = 0;
  long long r = 0;
  double t = 0.0;
  if (header.size() != 3 || !parse_int(header[0], &d) || !parse_int(header[1], &r) ||
      !parse_number(header[2], &t) || d < 1 || r < 1 || r > d) {
    throw IoError("model file: malformed header '" + trim(line) + "'");
  }
  if (!std::isnan(t) && !(t >= 0.0 && t <= 1.0)) {
    throw IoError("model file: t outside [0, 1]");
  }
  auto read_rows = [&in](long long rows, long long cols, const char* what) {
    Eigen::MatrixXd m(rows, cols);
    std::string row_line;
    for (long long i = 0; i < rows; ++i) {
      if (!std::getline(in, row_line)) {
        throw IoError(std::string("model file: ") + what + " has fewer than " +
                      std::to_string(rows) + " rows (dimension mismatch vs header)");
      }
      std::istringstream ss(row_line);
      std::string tok;
      long long j = 0;
      while (ss >> tok) {
        double v = 0.0;
        if (j >= cols || !parse_number(tok, &v)) {
          throw IoError(std::string("model file: ") + what + " row " +
                        std::to_string(i + 1) + " does not have " +
                        std::to_string(cols) + " numbers (dimension mismatch vs header)");
        }
        m(i, j++) = v;
      }
      if (j != cols) {
        throw IoError(std::string("model file: ") + what + " row " +
                      std::to_string(i + 1) + " does not have " +
                      std::to_string(cols) + " numbers (dimension mismatch vs header)");
      }
    }
    return m;
  };
  const Eigen::MatrixXd u = read_rows(d, r, "U");
  const Eigen::MatrixXd b = read_rows(r, r, "B");
  while (std::getline(in, line)) {
    if (!trim(line).empty()) {
      throw IoError("model file: trailing data after B (dimension mismatch vs header)");
    }
  }
  return MetricModel{StiefelPoint::checked(u, 1e-10), SpdMatrix::validated(b, "model B"), t};
}

void save_model(const MetricModel& model, const std::string& path) {
  std::ostringstream out;
  write_model(out, model);
  write_file_atomic(path, out.str());
}

MetricModel load_model(const std::string& path) {
  std::ifstream in = open_input(path);
  return read_model(in);
}

void write_results(std::ostream& out, const std::vector<ResultRecord>& records) {
  out << "dataset,method,rank,t,run,error,seconds,iterations\n";
  for (const ResultRecord& rec : records) {
    if (!rec.ok()) continue;
    out << rec.dataset << ',' << to_string(rec.method) << ',' << rec.rank << ','
        << format_double(rec.t) << ',' << rec.run << ',' << format_double(rec.error)
        << ',' << format_double(rec.seconds) << ',' << rec.iterations << '\n';
  }
}

std::vector<ResultRecord> read_results(std::istream& in) {
  constexpr const char* kWhat = "results file";
  read_csv_header(in, "dataset,method,rank,t,run,error,seconds,iterations", kWhat);
  std::vector<ResultRecord> out;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 8) {
      throw IoError(std::string(kWhat) + ": line " + std::to_string(line_no) +
                    ": expected 8 fields");
    }
    ResultRecord rec;
    rec.dataset = f[0];
    rec.method = method_from_string(f[1]);
    rec.rank = field_int(f[2], line_no, kWhat);
    rec.t = field_double(f[3], line_no, kWhat);
    rec.run = field_int(f[4], line_no, kWhat);
    rec.error = field_double(f[5], line_no, kWhat);
    rec.seconds = field_double(f[6], line_no, kWhat);
    rec.iterations = field_int(f[7], line_no, kWhat);
    if (!(rec.error >= 0.0 && rec.error <= 1.0)) {
      throw IoError(std::string(kWhat) + ": line " + std::to_string(line_no) +
                    ": error rate outside [0, 1]");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<PlotPoint> summarize(const std::vector<ResultRecord>& records) {
  std::map<std::tuple<std::string, int, Method>, std::vector<double>> groups;
  for (const ResultRecord& rec : records) {
    if (rec.ok()) groups[{rec.dataset, rec.rank, rec.method}].push_back(rec.error);
  }
  std::vector<PlotPoint> out;
  for (const auto& [key, errors] : groups) {
    PlotPoint p;
    p.dataset = std::get<0>(key);
    p.rank = std::get<1>(key);
    p.method = std::get<2>(key);
    p.runs = static_cast<int>(errors.size());
    double sum = 0.0;
    for (double e : errors) sum += e;
    p.mean_error = sum / p.runs;
    if (p.runs > 1) {
      double ss = 0.0;
      for (double e : errors) ss += (e - p.mean_error) * (e - p.mean_error);
      p.std_error = std::sqrt(ss / (p.runs - 1));
    }
    out.push_back(std::move(p));
  }
  return out;
}

void write_plot_data(std::ostream& out, const std::vector<PlotPoint>& points) {
  out << "dataset,method,rank,mean_error,std_error,runs\n";
  for (const PlotPoint& p : points) {
    out << p.dataset << ',' << to_string(p.method) << ',' << p.rank << ','
        << format_double(p.mean_error) << ',' << format_double(p.std_error) << ','
        << p.runs << '\n';
  }
}

std::vector<PlotPoint> read_plot_data(std::istream& in) {
  constexpr const char* kWhat = "plot data";
  read_csv_header(in, "dataset,method,rank,mean_error,std_error,runs", kWhat);
  std::vector<PlotPoint> out;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 6) {
      throw IoError(std::string(kWhat) + ": line " + std::to_string(line_no) +
                    ": expected 6 fields");
    }
    PlotPoint p;
    p.dataset = f[0];
    p.method = method_from_string(f[1]);
    p.rank = field_int(f[2], line_no, kWhat);
    p.mean_error = field_double(f[3], line_no, kWhat);
    p.std_error = field_double(f[4], line_no, kWhat);
    p.runs = field_int(f[5], line_no, kWhat);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<IterationRecord> read_trace_csv(std::istream& in) {
  constexpr const char* kWhat = "trace file";
  read_csv_header(in, "iter,cost,grad_norm,step,ls_evals,restarted", kWhat);
  std::vector<IterationRecord> out;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 6) {
      throw IoError(std::string(kWhat) + ": line " + std::to_string(line_no) +
                    ": expected 6 fields");
    }
    IterationRecord rec;
    rec.iter = field_int(f[0], line_no, kWhat);
    rec.cost = field_double(f[1], line_no, kWhat);
    rec.grad_norm = field_double(f[2], line_no, kWhat);
    rec.step = field_double(f[3], line_no, kWhat);
    rec.ls_evals = field_int(f[4], line_no, kWhat);
    rec.restarted = field_int(f[5], line_no, kWhat) != 0;
    out.push_back(rec);
  }
  return out;
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("config: top level must be an object");
  ExperimentConfig cfg;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "rank_list") {
        cfg.rank_list = value.get<std::vector<int>>();
      } else if (key == "t_grid") {
        cfg.t_grid = value.get<std::vector<double>>();
      } else if (key == "k_neighbors") {
        cfg.k_neighbors = value.get<int>();
      } else if (key == "num_runs") {
        cfg.num_runs = value.get<int>();
      } else if (key == "train_fraction") {
        cfg.train_fraction = value.get<double>();
      } else if (key == "pairs_per_class_pair") {
        cfg.pairs_per_class_pair = value.get<int>();
      } else if (key == "seed") {
        cfg.seed = value.get<std::uint64_t>();
      } else if (key == "include_gmml") {
        cfg.include_gmml = value.get<bool>();
      } else if (key == "include_euclidean") {
        cfg.include_euclidean = value.get<bool>();
      } else if (key == "solver") {
        for (const auto& [skey, svalue] : value.items()) {
          SolverOptions& s = cfg.solver;
          if (skey == "max_iters") {
            s.max_iters = svalue.get<int>();
          } else if (skey == "grad_tol") {
            s.grad_tol = svalue.get<double>();
          } else if (skey == "armijo_c1") {
            s.armijo_c1 = svalue.get<double>();
          } else if (skey == "backtrack_factor") {
            s.backtrack_factor = svalue.get<double>();
          } else if (skey == "max_line_search") {
            s.max_line_search = svalue.get<int>();
          } else if (skey == "initial_step") {
            s.initial_step = svalue.get<double>();
          } else if (skey == "beta_rule") {
            const auto rule = svalue.get<std::string>();
            if (rule == "hestenes_stiefel") {
              s.beta_rule = BetaRule::kHestenesStiefel;
            } else if (rule == "polak_ribiere") {
              s.beta_rule = BetaRule::kPolakRibiere;
            } else if (rule == "steepest_descent") {
              s.beta_rule = BetaRule::kSteepestDescent;
            } else {
              throw InvalidArgument("config: unknown beta_rule '" + rule + "'");
            }
          } else {
            throw InvalidArgument("config: unknown solver key '" + skey + "'");
          }
        }
      } else {
        throw InvalidArgument("config: unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  return cfg;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << contents;
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw IoError("failed while writing '" + path + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw IoError("cannot move output into '" + path + "': " + ec.message());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace lrgmml
