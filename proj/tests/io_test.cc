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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "gtest/gtest.h"
#include "lrgmml/errors.h"
#include "lrgmml/rcg_solver.h"
#include "test_util.h"

namespace lrgmml {
namespace {

namespace fs = std::filesystem;

Dataset csv(const std::string& text, LabelColumn col = {}, bool header = false) {
  std::istringstream in(text);
  return parse_csv(in, "test.csv", col, header);
}

Dataset libsvm(const std::string& text) {
  std::istringstream in(text);
  return parse_libsvm(in, "test.svm");
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

MetricModel random_model(int d, int r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return MetricModel{random_point(d, r, seed), testing::random_spd(r, rng), 0.3};
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("lrgmml_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST(ParseCsvTest, LabelsInFirstAppearanceOrder) {
  const Dataset data = csv("1,2,a\n3,4,b\n");
  ASSERT_EQ(data.n(), 2);
  ASSERT_EQ(data.d(), 2);
  EXPECT_EQ(data.features(0, 0), 1.0);
  EXPECT_EQ(data.features(1, 1), 4.0);
  EXPECT_EQ(data.labels, (std::vector<int>{0, 1}));
  EXPECT_EQ(data.class_names, (std::vector<std::string>{"a", "b"}));
}

TEST(ParseCsvTest, HeaderAndLabelIndex) {
  const Dataset data = csv("cls,x,y\nb,1,2\na,3,4\nb,5,6\n", LabelColumn{0}, true);
  ASSERT_EQ(data.n(), 3);
  EXPECT_EQ(data.features(2, 1), 6.0);
  EXPECT_EQ(data.labels, (std::vector<int>{0, 1, 0}));
}

TEST(ParseCsvTest, ErrorsNameTheLocation) {
  const std::string bad = error_of([] { csv("1,2,a\n3,4,b\n5,x,c\n"); });
  EXPECT_NE(bad.find("line 3, column 2"), std::string::npos) << bad;
  const std::string ragged = error_of([] { csv("1,2,a\n3,b\n"); });
  EXPECT_NE(ragged.find("line 2"), std::string::npos) << ragged;
  EXPECT_THROW(csv(""), IoError);
  EXPECT_THROW(csv("1,2,a\n", LabelColumn{5}), IoError);
}

TEST(ParseLibsvmTest, SparseRowsBecomeDense) {
  const Dataset one = libsvm("1 1:0.5 3:2.0\n");
  ASSERT_EQ(one.d(), 3);
  EXPECT_EQ(one.features(0, 0), 0.5);
  EXPECT_EQ(one.features(0, 1), 0.0);
  EXPECT_EQ(one.features(0, 2), 2.0);
  EXPECT_EQ(one.class_names, (std::vector<std::string>{"1"}));

  const Dataset mixed = libsvm("+1 2:1\n-1\n+1 4:3 5:1\n");
  EXPECT_EQ(mixed.d(), 5);
  EXPECT_EQ(mixed.features.row(1).norm(), 0.0);
  EXPECT_EQ(mixed.labels, (std::vector<int>{0, 1, 0}));
}

TEST(ParseLibsvmTest, NonAscendingIndicesRejected) {
  const std::string msg = error_of([] { libsvm("1 1:1\n2 3:1 2:1\n"); });
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
  EXPECT_THROW(libsvm("1 0:1\n"), IoError);
  EXPECT_THROW(libsvm("1 1:abc\n"), IoError);
}

TEST(ModelIoTest, RoundTripIsBitwise) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const MetricModel model = random_model(9, 4, seed);
    std::stringstream buf;
    write_model(buf, model);
    const MetricModel back = read_model(buf);
    EXPECT_TRUE(back.u.matrix() == model.u.matrix());
    EXPECT_TRUE(back.b.matrix() == model.b.matrix());
    EXPECT_EQ(back.t, model.t);
  }
}

TEST(ModelIoTest, VersionAndMagicErrorsAreDistinct) {
  std::stringstream buf;
  write_model(buf, random_model(3, 2, 1));
  std::string text = buf.str();
  std::istringstream v2("LRGMML v2" + text.substr(text.find('\n')));
  const std::string version = error_of([&] { read_model(v2); });
  EXPECT_NE(version.find("version"), std::string::npos) << version;
  std::istringstream junk("hello\n");
  const std::string magic = error_of([&] { read_model(junk); });
  EXPECT_NE(magic.find("magic"), std::string::npos) << magic;
}

TEST(ModelIoTest, DimensionMismatchIsReported) {
  std::stringstream buf;
  write_model(buf, random_model(3, 2, 2));
  std::string text = buf.str();
  const std::size_t eol = text.find('\n', text.find('\n') + 1);
  std::istringstream wrong("LRGMML v1\n4 2 0.3" + text.substr(eol));
  const std::string msg = error_of([&] { read_model(wrong); });
  EXPECT_NE(msg.find("dimension mismatch"), std::string::npos) << msg;
}

TEST(ModelIoTest, TamperedEigenvalueIsRejected) {
  const MetricModel model = random_model(5, 3, 3);
  // Flip the sign of the smallest eigenvalue of B.
  const EigenPair eig = model.b.eig();
  Eigen::VectorXd lambda = eig.eigenvalues;
  lambda(2) = -lambda(2);
  const Eigen::MatrixXd tampered =
      eig.eigenvectors * lambda.asDiagonal() * eig.eigenvectors.transpose();
  std::ostringstream out;
  out << kModelMagic << "\n5 3 0.3\n";
  auto rows = [&out](const Eigen::MatrixXd& m) {
    for (int i = 0; i < m.rows(); ++i) {
      for (int j = 0; j < m.cols(); ++j) out << (j ? " " : "") << format_double(m(i, j));
      out << "\n";
    }
  };
  rows(model.u.matrix());
  rows(0.5 * (tampered + tampered.transpose()));
  std::istringstream in(out.str());
  const std::string msg = error_of([&] { read_model(in); });
  EXPECT_NE(msg.find("positive definite"), std::string::npos) << msg;
}

TEST(ModelIoTest, NonOrthonormalUIsRejected) {
  std::istringstream in(std::string(kModelMagic) + "\n2 1 0.5\n1\n1\n2\n");
  const std::string msg = error_of([&] { read_model(in); });
  EXPECT_NE(msg.find("orthonormal"), std::string::npos) << msg;
}

TEST_F(TempDir, SaveLoadAndAtomicWrite) {
  const MetricModel model = random_model(6, 2, 4);
  save_model(model, path("m.txt"));
  const MetricModel back = load_model(path("m.txt"));
  EXPECT_TRUE(back.u.matrix() == model.u.matrix());
  EXPECT_THROW(load_model(path("missing.txt")), IoError);
  write_file_atomic(path("a.txt"), "one");
  write_file_atomic(path("a.txt"), "two");
  EXPECT_EQ(read_file(path("a.txt")), "two");
  int entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir_)) ++entries;
  EXPECT_EQ(entries, 2);  // no leftover temporaries
  EXPECT_THROW(write_file_atomic(path("no/such/dir/x.txt"), "x"), IoError);
}

TEST(ResultsIoTest, WriterOutputReadsBack) {
  std::vector<ResultRecord> recs(3);
  recs[0] = {"wine", Method::kEuclidean, 13, std::numeric_limits<double>::quiet_NaN(), 0,
             0.05, 0.0, 0, ""};
  recs[1] = {"wine", Method::kLrgmml, 6, 0.3, 0, 1.0 / 3.0, 0.25, 17, ""};
  recs[2] = {"wine", Method::kLrgmml, 9, 0.5, 1, 0.0, 0.0, 0, "failed"};
  std::stringstream buf;
  write_results(buf, recs);
  EXPECT_EQ(buf.str().substr(0, buf.str().find('\n')),
            "dataset,method,rank,t,run,error,seconds,iterations");
  const std::vector<ResultRecord> back = read_results(buf);
  ASSERT_EQ(back.size(), 2u);  // failed cells are not written
  EXPECT_EQ(back[0].method, Method::kEuclidean);
  EXPECT_TRUE(std::isnan(back[0].t));
  EXPECT_EQ(back[1].error, recs[1].error);
  EXPECT_EQ(back[1].iterations, 17);
  EXPECT_EQ(back[1].rank, 6);
}

TEST(ResultsIoTest, ErrorOutsideUnitIntervalRejected) {
  std::istringstream in(
      "dataset,method,rank,t,run,error,seconds,iterations\nw,lrgmml,2,0.5,0,1.5,0,3\n");
  EXPECT_THROW(read_results(in), IoError);
}

TEST(PlotDataTest, SummaryMatchesHandComputedStatistics) {
  std::vector<ResultRecord> recs;
  for (int run = 0; run < 3; ++run) {
    recs.push_back({"w", Method::kLrgmml, 4, 0.5, run, 0.1 * (run + 1), 0.0, 1, ""});
  }
  recs.push_back({"w", Method::kGmml, 13, 0.5, 0, 0.2, 0.0, 0, ""});
  const std::vector<PlotPoint> pts = summarize(recs);
  ASSERT_EQ(pts.size(), 2u);
  const PlotPoint& lr = pts[0].method == Method::kLrgmml ? pts[0] : pts[1];
  EXPECT_NEAR(lr.mean_error, 0.2, 1e-15);
  EXPECT_NEAR(lr.std_error, 0.1, 1e-15);
  EXPECT_EQ(lr.runs, 3);
  std::stringstream buf;
  write_plot_data(buf, pts);
  const std::vector<PlotPoint> back = read_plot_data(buf);
  ASSERT_EQ(back.size(), pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_EQ(back[i].mean_error, pts[i].mean_error);
    EXPECT_EQ(back[i].std_error, pts[i].std_error);
    EXPECT_EQ(back[i].rank, pts[i].rank);
  }
}

TEST(TraceIoTest, SolverTraceReadsBack) {
  SolverTrace trace;
  trace.records.push_back({0, 3.5, 0.25, 0.0, 0, 0.0, false});
  trace.records.push_back({1, 1.0 / 3.0, 1e-7, 0.125, 4, -1.0, true});
  std::stringstream buf;
  trace.write_csv(buf);
  const std::vector<IterationRecord> back = read_trace_csv(buf);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].cost, 1.0 / 3.0);
  EXPECT_EQ(back[1].step, 0.125);
  EXPECT_EQ(back[1].ls_evals, 4);
  EXPECT_TRUE(back[1].restarted);
  EXPECT_FALSE(back[0].restarted);
}

TEST(ConfigTest, ParsesKnownKeys) {
  const ExperimentConfig cfg = parse_experiment_config(R"({
    "rank_list": [2, 4], "t_grid": [0.25, 0.75], "k_neighbors": 3, "num_runs": 2,
    "seed": 11, "include_gmml": false,
    "solver": {"max_iters": 50, "beta_rule": "polak_ribiere"}
  })");
  EXPECT_EQ(cfg.rank_list, (std::vector<int>{2, 4}));
  EXPECT_EQ(cfg.t_grid, (std::vector<double>{0.25, 0.75}));
  EXPECT_EQ(cfg.k_neighbors, 3);
  EXPECT_EQ(cfg.num_runs, 2);
  EXPECT_EQ(cfg.seed, 11u);
  EXPECT_FALSE(cfg.include_gmml);
  EXPECT_EQ(cfg.solver.max_iters, 50);
  EXPECT_EQ(cfg.solver.beta_rule, BetaRule::kPolakRibiere);
}

TEST(ConfigTest, RejectsUnknownKeysAndBadJson) {
  EXPECT_THROW(parse_experiment_config(R"({"ranks": [2]})"), InvalidArgument);
  EXPECT_THROW(parse_experiment_config(R"({"solver": {"beta": "hs"}})"), InvalidArgument);
  EXPECT_THROW(parse_experiment_config("{"), InvalidArgument);
  EXPECT_THROW(parse_experiment_config("[]"), InvalidArgument);
}

TEST(FormatDoubleTest, SeventeenSignificantDigits) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

}  // namespace
}  // namespace lrgmml
