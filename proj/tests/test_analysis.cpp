#include <doctest.h>

#include <stdexcept>

#include <Eigen/Dense>
#include <cmath>
#include <fstream>

#include "etcnet/analysis.hpp"
#include "etcnet/csv.hpp"
#include "etcnet/rng.hpp"
#include "test_support.hpp"

using namespace etcnet;
using test::scratch_dir;
using test::slurp;

TEST_SUITE("analysis") {

TEST_CASE("jacobi matches the dense eigensolver oracle") {
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 6;
    Eigen::MatrixXd m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j <= i; ++j) {
        const double v = rng.uniform(-2.0, 2.0);
        m(i, j) = v;
        m(j, i) = v;
      }
    std::vector<std::vector<double>> rows(d, std::vector<double>(d));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) rows[i][j] = m(i, j);

    const SymEigen got = jacobi_eigen_sym(rows);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    REQUIRE(solver.info() == Eigen::Success);
    // The oracle sorts ascending; ours descends.
    for (int k = 0; k < d; ++k)
      CHECK(got.values[k] == doctest::Approx(solver.eigenvalues()(d - 1 - k)).epsilon(1e-8));
    // Eigenvectors satisfy A v = lambda v.
    for (int k = 0; k < d; ++k) {
      Eigen::VectorXd v(d);
      for (int j = 0; j < d; ++j) v(j) = got.vectors[k][j];
      CHECK((m * v - got.values[k] * v).norm() < 1e-8);
      CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("pca explained variance matches the oracle on random 6-D data") {
  Rng rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<double>> obs;
    for (int i = 0; i < 40; ++i) {
      std::vector<double> o(6);
      for (auto& v : o) v = rng.uniform(-1.0, 1.0);
      obs.push_back(o);
    }
    const Pca2d pca = pca2d(obs);

    Eigen::MatrixXd x(40, 6);
    for (int i = 0; i < 40; ++i)
      for (int j = 0; j < 6; ++j) x(i, j) = obs[i][j];
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::MatrixXd centered = x.rowwise() - mean;
    const Eigen::MatrixXd cov = centered.transpose() * centered / 40.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    CHECK(pca.explained[0] == doctest::Approx(solver.eigenvalues()(5)).epsilon(1e-8));
    CHECK(pca.explained[1] == doctest::Approx(solver.eigenvalues()(4)).epsilon(1e-8));
    CHECK(pca.total_variance == doctest::Approx(cov.trace()).epsilon(1e-10));
  }
}

TEST_CASE("collinear points have a vanishing second coordinate") {
  std::vector<std::vector<double>> obs;
  for (int i = 0; i < 20; ++i) {
    const double t = 0.37 * i - 2.0;
    obs.push_back({1.0 * t, -2.0 * t, 0.5 * t, 3.0 * t});
  }
  const Pca2d pca = pca2d(obs);
  for (const auto& p : pca.points) CHECK(std::abs(p[1]) < 1e-8);
  CHECK(pca.explained[1] == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("identical points project to the origin") {
  std::vector<std::vector<double>> obs(5, std::vector<double>{0.3, 0.7, -0.1});
  const Pca2d pca = pca2d(obs);
  for (const auto& p : pca.points) {
    CHECK(p[0] == 0.0);
    CHECK(p[1] == 0.0);
  }
}

TEST_CASE("2-D data keeps its pairwise distances") {
  Rng rng(47);
  std::vector<std::vector<double>> obs;
  for (int i = 0; i < 25; ++i) obs.push_back({rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)});
  const Pca2d pca = pca2d(obs);
  for (std::size_t a = 0; a < obs.size(); ++a)
    for (std::size_t b = a + 1; b < obs.size(); ++b) {
      const double orig = std::hypot(obs[a][0] - obs[b][0], obs[a][1] - obs[b][1]);
      const double proj = std::hypot(pca.points[a][0] - pca.points[b][0],
                                     pca.points[a][1] - pca.points[b][1]);
      CHECK(proj == doctest::Approx(orig).epsilon(1e-9));
    }
}

TEST_CASE("pca validates its inputs") {
  CHECK_THROWS_AS(pca2d({{1.0, 2.0}, {2.0, 3.0}}), std::invalid_argument);
  CHECK_THROWS_AS(pca2d({{1.0}, {2.0, 3.0}, {1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(pca2d({{1.0}, {2.0}, {3.0}}, {1, 0}), std::invalid_argument);
}

TEST_CASE("curves render deterministically") {
  const auto dir = scratch_dir("curves");
  const auto csv_path = dir / "run_a.csv";
  {
    CsvWriter csv(csv_path, {"step", "eval_mean_steps", "mean_penalty_per_step"});
    csv.row({"1000", "40.5", "1"});
    csv.row({"2000", "30.25", "0.8"});
    csv.row({"3000", "22", "0.55"});
  }

  const auto written = render_curves({csv_path}, {"eval_mean_steps"}, dir / "out");
  REQUIRE(written.size() == 2);
  const std::string svg = slurp(written[0]);
  CHECK(svg.find("<svg") != std::string::npos);
  // one run -> one polyline
  std::size_t count = 0;
  for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos;
       pos = svg.find("<polyline", pos + 1))
    count += 1;
  CHECK(count == 1);
  // y extent labels follow the 5% margin rule: [22, 40.5] spans 18.5.
  CHECK(svg.find(">21.075<") != std::string::npos);
  CHECK(svg.find(">41.425<") != std::string::npos);

  const auto again = render_curves({csv_path}, {"eval_mean_steps"}, dir / "out2");
  CHECK(slurp(again[0]) == svg);
  CHECK(slurp(again[1]) == slurp(written[1]));
}

TEST_CASE("curves reject unknown keys and name the available ones") {
  const auto dir = scratch_dir("curves_bad");
  const auto csv_path = dir / "run.csv";
  {
    CsvWriter csv(csv_path, {"step", "eval_mean_steps"});
    csv.row({"1", "2"});
  }
  CHECK_THROWS_WITH_AS(render_curves({csv_path}, {"nope"}, dir / "out"),
                       doctest::Contains("eval_mean_steps"), std::runtime_error);
}

TEST_CASE("timeline flattens a dump into per-agent rows") {
  std::vector<DumpRow> dump;
  for (int t = 0; t < 3; ++t) {
    DumpRow row;
    row.t = t;
    row.episode = 0;
    row.ep_t = t;
    row.gates = {1, t == 0 ? 1 : 0};
    row.actions = {0, 1};
    row.rewards = {-0.1, -0.1};
    row.obs = {{0.0}, {0.0}};
    row.messages = {{0.0}, {0.0}};
    row.info = {{"reached", {false, true}}, {"dest_moved", {true, false}}};
    dump.push_back(row);
  }
  const auto rows = gating_timeline(dump);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].forced);
  CHECK(rows[1].forced);
  CHECK_FALSE(rows[2].forced);
  CHECK(rows[2].gate == 1);
  CHECK(rows[3].gate == 0);
  // Agent 0 watches agent 1's destination and vice versa.
  CHECK_FALSE(rows[0].observed_dest_moved);
  CHECK(rows[1].observed_dest_moved);
  CHECK(rows[1].reached_dest);
  CHECK_FALSE(rows[0].reached_dest);
}

}  // TEST_SUITE
