// Copyright 2026 The hstrat Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance checks. Prints one [PASS]/[FAIL] line per criterion and exits
// non-zero if any criterion fails.

#include <unistd.h>

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "hstrat/ingest.hpp"
#include "hstrat/metrics.hpp"
#include "hstrat/mixture.hpp"
#include "hstrat/pca.hpp"
#include "hstrat/pipeline.hpp"
#include "hstrat/synthworld.hpp"
#include "support/oracles.hpp"

namespace {

using namespace hstrat;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

int failures = 0;

void criterion(const std::string& name, double limit_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (seconds > limit_seconds) out.pass = false;
  std::printf("[%s] %s: %s; %.1f s (limit %.0f s)\n", out.pass ? "PASS" : "FAIL", name.c_str(),
              out.detail.c_str(), seconds, limit_seconds);
  std::fflush(stdout);
  if (!out.pass) ++failures;
}

SampleIds ids(std::size_t n) {
  SampleIds out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("s" + std::to_string(i));
  return out;
}

SubgroupAssignment assignment_of(const std::vector<std::size_t>& groups, std::size_t k) {
  SubgroupAssignment a;
  a.sample_ids = ids(groups.size());
  a.hard_labels = groups;
  a.n_components = k;
  a.responsibilities = Matrix::Zero(static_cast<Eigen::Index>(groups.size()), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < groups.size(); ++i) a.responsibilities(i, groups[i]) = 1.0;
  return a;
}

MetadataTable one_column(const std::vector<std::optional<std::string>>& values) {
  return MetadataTable{ids(values.size()), {"attr"}, {values}};
}

SubgroupPerformance perf_of(std::initializer_list<double> values) {
  SubgroupPerformance p;
  std::size_t id = 0;
  for (const double v : values) p.subgroups.push_back({id++, 100, v, true});
  return p;
}

Outcome em_monotonicity() {
  std::mt19937_64 rng(2026);
  FitConfig config;
  double worst = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = testing::random_instance(rng, 500, 8, 5, {0.0, 1.0, 10.0});
    const MixtureParams init = initialize_params(inst.z, inst.yhat, inst.k, inst.gamma, rng);
    const EmRun run = run_em(inst.z, inst.yhat, init, config);
    const auto& ll = run.trace.log_likelihoods;
    for (std::size_t t = 1; t < ll.size(); ++t) worst = std::min(worst, ll[t] - ll[t - 1]);
    iterations += run.trace.iterations;
  }
  return {worst >= -1e-9, fmt("100 instances, %zu iterations, smallest step %.3g", iterations, worst)};
}

Outcome gamma_zero_oracle() {
  std::mt19937_64 rng(77);
  constexpr std::size_t kIterations = 60;
  FitConfig config;
  config.max_iterations = kIterations;
  config.max_rescues = 0;
  config.tolerance = -std::numeric_limits<double>::infinity();
  double worst_resp = 0.0, worst_ll = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = testing::random_instance(rng, 400, 6, 5, {0.0});
    const MixtureParams init = initialize_params(inst.z, inst.yhat, inst.k, 0.0, rng);
    const EmRun run = run_em(inst.z, inst.yhat, init, config);
    const EStepResult final_step = e_step(run.params, inst.z, inst.yhat);

    testing::PlainGmm g;
    const testing::Rows means = testing::to_rows(init.means);
    const testing::Rows variances = testing::to_rows(init.variances);
    for (Eigen::Index j = 0; j < init.priors.size(); ++j) {
      g.priors.push_back(init.priors(j));
      g.means.push_back(means[j]);
      g.variances.push_back(variances[j]);
    }
    const testing::Rows z = testing::to_rows(inst.z);
    testing::PlainEStep e = testing::plain_e_step(g, z);
    for (std::size_t t = 0; t < kIterations; ++t) {
      g = testing::plain_m_step(e.responsibilities, z, kVarianceFloor);
      e = testing::plain_e_step(g, z);
    }
    for (std::size_t i = 0; i < z.size(); ++i)
      for (std::size_t j = 0; j < inst.k; ++j)
        worst_resp = std::max(worst_resp, std::abs(final_step.responsibilities(i, j) - e.responsibilities[i][j]));
    worst_ll = std::max(worst_ll, std::abs(final_step.log_likelihood - e.log_likelihood) / std::abs(e.log_likelihood));
  }
  const bool pass = worst_resp <= 1e-6 && worst_ll <= 1e-6;
  return {pass, fmt("20 instances x %zu iterations, max |dr| %.3g, max rel dl %.3g", kIterations, worst_resp, worst_ll)};
}

Outcome metric_fixtures() {
  std::vector<std::string> bad;
  auto check = [&](const char* name, double got, double want) {
    if (!(std::abs(got - want) <= 1e-12)) bad.push_back(fmt("%s=%.17g (want %.17g)", name, got, want));
  };
  check("gap{0.9,0.6}", performance_gap(perf_of({0.9, 0.6})), 0.3);
  check("gap{single}", performance_gap(perf_of({0.7})), 0.0);
  check("gap{0.05,0.9,0.95}", performance_gap(perf_of({0.05, 0.90, 0.95})), 0.90);
  check("ap{pure}",
        average_purity(assignment_of({0, 0, 1, 1}, 2), one_column({"a", "a", "b", "b"}), {"attr"}, 0.0).average_purity,
        1.0);
  std::vector<std::optional<std::string>> values;
  std::vector<std::size_t> groups;
  for (int i = 0; i < 20; ++i) {
    groups.push_back(i < 10 ? 0 : 1);
    values.emplace_back((i < 8 || (i >= 10 && i < 13)) ? "a" : "b");
  }
  check("ap{8a2b,3a7b}", average_purity(assignment_of(groups, 2), one_column(values), {"attr"}, 0.0).average_purity,
        0.75);
  check("ap{10a,c=10}",
        average_purity(assignment_of(std::vector<std::size_t>(10, 0), 1),
                       one_column(std::vector<std::optional<std::string>>(10, "a")), {"attr"}, 10.0)
            .average_purity,
        0.5);
  check("accuracy{3/4}", division_performance({0, 0, 0, 0}, {1, 1, 0, 1}, {}, Metric::kAccuracy, 1).subgroups[0].performance,
        0.75);

  std::mt19937_64 rng(5);
  std::size_t checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 40 + rng() % 300;
    std::vector<std::size_t> g(n);
    std::vector<std::optional<std::string>> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = rng() % 8;
      v[i] = std::string(1, static_cast<char>('a' + rng() % 5));
    }
    double previous = std::numeric_limits<double>::infinity();
    for (const double c : {0.0, 1.0, 10.0, 100.0}) {
      const double ap = average_purity(assignment_of(g, 8), one_column(v), {"attr"}, c).average_purity;
      if (ap > previous) bad.push_back(fmt("AP increased at c=%g", c));
      previous = ap;
      ++checked;
    }
  }
  std::string detail = fmt("7 fixtures, %zu monotonicity evaluations", checked);
  for (const auto& b : bad) detail += "; " + b;
  return {bad.empty(), detail};
}

const SynthWorld& default_world() {
  static const SynthWorld world = generate_world(SynthSpec{});
  return world;
}

Outcome synthetic_recovery() {
  const SynthWorld& world = default_world();
  const SubgroupModel model =
      fit(world.validation.bundle.embeddings, world.validation.bundle.predictions, 15, 10.0, FitConfig{}, 0);
  const SubgroupAssignment a = assign(model, world.test.bundle.embeddings, world.test.bundle.predictions);
  const double gap = performance_gap(subgroup_performance(a, *world.test.bundle.labels, world.test.bundle.predictions,
                                                          Metric::kAccuracy, kDefaultMinSize));
  const OracleGap oracle = oracle_gap(world.test);
  const double ap = average_purity(a, world.test.truth.as_metadata(),
                                   {std::string(kKnownArtifact), std::string(kHiddenArtifact)}, 10.0)
                        .average_purity;
  const bool pass = gap >= 0.35 && gap >= oracle.known_only_gap && ap >= 0.8;
  return {pass, fmt("discovered gap %.4f (>= 0.35), known-only gap %.4f, true gap %.4f, artifact AP(c=10) %.4f (>= 0.8)",
                    gap, oracle.known_only_gap, oracle.true_gap, ap)};
}

Outcome sweep_behavior() {
  const SynthWorld& world = default_world();
  SweepConfig config;
  const SweepResult r = run_sweep(world.validation.bundle, world.test.bundle, world.test.truth.as_metadata(),
                                  {0, 1, 5, 10, 50, 200}, {0, 1, 2}, config);
  double best = 0.0, gap0 = 0.0, chosen_gap = 0.0, chosen_ap = 0.0;
  std::string table;
  for (const auto& p : r.points) {
    best = std::max(best, p.mean_purity);
    if (p.gamma == 0.0) gap0 = p.mean_gap;
    if (p.gamma == r.chosen_gamma) chosen_gap = p.mean_gap, chosen_ap = p.mean_purity;
    table += fmt(" g=%g:(%.3f,%.3f)", p.gamma, p.mean_gap, p.mean_purity);
  }
  const bool pass = chosen_gap >= gap0 && chosen_ap >= best - 0.02;
  return {pass, fmt("chosen gamma %g, gap %.4f vs %.4f at gamma 0, AP %.4f vs max %.4f; (gap,AP):", r.chosen_gamma,
                    chosen_gap, gap0, chosen_ap, best) +
                    table};
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / ("hstrat_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  AuditConfig audit;
  auto full_run = [&](const fs::path& out) {
    const SynthWorld world = generate_world(SynthSpec{});
    std::vector<SubgroupModel> models;
    for (const std::uint64_t seed : {0, 1}) {
      models.push_back(
          fit(world.validation.bundle.embeddings, world.validation.bundle.predictions, 15, 10.0, FitConfig{}, seed));
    }
    write_report(run_report(models, world.test.bundle, world.test.truth.as_metadata(), audit), out);
  };
  full_run(dir / "first.json");
  full_run(dir / "second.json");
  const std::string a = read_file(dir / "first.json");
  const std::string b = read_file(dir / "second.json");
  fs::remove_all(dir);
  return {a == b && !a.empty(), fmt("two runs, %zu and %zu bytes, %s", a.size(), b.size(), a == b ? "identical" : "differ")};
}

Outcome pca_checks() {
  std::vector<std::string> bad;
  // Three collinear points (0,0), (1,1), (2,2).
  EmbeddingMatrix line{ids(3), Matrix(3, 2)};
  line.data << 0, 0, 1, 1, 2, 2;
  const PcaModel m = fit_pca(line, 1);
  const double r = 1.0 / std::sqrt(2.0);
  const Matrix proj = pca_transform(m, line).data;
  if (std::abs(m.explained_variance(0) - 2.0) > 1e-12)
    bad.push_back(fmt("variance %.17g", m.explained_variance(0)));
  if (std::abs(m.components(0, 0) - r) > 1e-12 || std::abs(m.components(0, 1) - r) > 1e-12)
    bad.push_back("fixture components");
  if (std::abs(proj(0, 0) + std::sqrt(2.0)) > 1e-12 || std::abs(proj(1, 0)) > 1e-12 ||
      std::abs(proj(2, 0) - std::sqrt(2.0)) > 1e-12)
    bad.push_back("fixture projections");

  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  double worst_ortho = 0.0, worst_recon = 0.0;
  for (const auto& [n, d, q] : std::vector<std::tuple<int, int, int>>{{200, 32, 16}, {300, 20, 20}, {12, 50, 11}}) {
    EmbeddingMatrix x{ids(static_cast<std::size_t>(n)), Matrix(n, d)};
    for (Eigen::Index i = 0; i < x.data.size(); ++i) x.data.data()[i] = normal(rng) * (1 + i % d);
    const PcaModel p = fit_pca(x, static_cast<std::size_t>(q));
    worst_ortho = std::max(worst_ortho,
                           (p.components * p.components.transpose() - Matrix::Identity(q, q)).cwiseAbs().maxCoeff());
    if (q == d) {
      const Matrix back = pca_transform(p, x).data * p.components;
      const Matrix centred = x.data.rowwise() - p.mean.transpose();
      worst_recon = std::max(worst_recon, (back - centred).cwiseAbs().maxCoeff());
    }
  }
  if (worst_ortho > 1e-8) bad.push_back(fmt("orthonormality error %.3g", worst_ortho));
  if (worst_recon >= 1e-9) bad.push_back(fmt("reconstruction error %.3g", worst_recon));
  std::string detail = fmt("max |VV^T - I| %.3g, q=d reconstruction %.3g, fixture %s", worst_ortho, worst_recon,
                           bad.empty() ? "matches" : "differs");
  for (const auto& b : bad) detail += "; " + b;
  return {bad.empty(), detail};
}

}  // namespace

int main() {
  criterion("EM monotonicity", 30, em_monotonicity);
  criterion("gamma=0 oracle equivalence", 10, gamma_zero_oracle);
  criterion("metric fixtures", 60, metric_fixtures);
  criterion("synthetic recovery", 120, synthetic_recovery);
  criterion("sweep behavior", 600, sweep_behavior);
  criterion("determinism", 600, determinism);
  criterion("PCA checks", 60, pca_checks);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
