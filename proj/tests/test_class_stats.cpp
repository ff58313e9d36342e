#include "nc/class_stats.hpp"

#include "nc/linalg.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace nc;

namespace {

ClassStatistics stats_of(const Matrix& samples,
                         const std::vector<std::int32_t>& labels,
                         Index class_count) {
  return compute_class_statistics(samples, labels, class_count);
}

}  // namespace

TEST_CASE("class stats: one sample per class gives zero within-class scatter") {
  std::mt19937_64 rng(3);
  const Matrix samples = nc::testing::random_matrix(4, 5, rng);
  const std::vector<std::int32_t> labels{0, 1, 2, 3};
  const ClassStatistics stats = stats_of(samples, labels, 4);
  CHECK(stats.sigma_w.cwiseAbs().maxCoeff() == 0.0);
  CHECK((stats.class_means - samples).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("class stats: two antipodal singletons") {
  Matrix samples(2, 2);
  samples << 1.0, 0.0, -1.0, 0.0;
  const std::vector<std::int32_t> labels{0, 1};
  const ClassStatistics stats = stats_of(samples, labels, 2);
  CHECK(stats.global_mean.norm() == 0.0);
  Matrix expected_b(2, 2);
  expected_b << 1.0, 0.0, 0.0, 0.0;
  CHECK((stats.sigma_b - expected_b).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("class stats: constant data collapses both scatters") {
  Matrix samples(6, 3);
  for (Index i = 0; i < 6; ++i) samples.row(i) << 2.0, -1.0, 0.5;
  const std::vector<std::int32_t> labels{0, 0, 1, 1, 2, 2};
  const ClassStatistics stats = stats_of(samples, labels, 3);
  CHECK((stats.global_mean.transpose() - samples.row(0)).norm() == 0.0);
  CHECK(stats.sigma_w.cwiseAbs().maxCoeff() == 0.0);
  CHECK(stats.sigma_b.cwiseAbs().maxCoeff() < 1e-30);
}

TEST_CASE("class stats: stream order does not matter") {
  std::mt19937_64 rng(5);
  const Index n = 100, p = 7, c_count = 4;
  const Matrix samples = nc::testing::random_matrix(n, p, rng);
  std::vector<std::int32_t> labels = nc::testing::random_labels(n, c_count, rng);
  labels[0] = 0;
  labels[1] = 1;
  labels[2] = 2;
  labels[3] = 3;  // every class present

  const ClassStatistics ordered = stats_of(samples, labels, c_count);

  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix shuffled(n, p);
  std::vector<std::int32_t> shuffled_labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    shuffled.row(i) = samples.row(perm[static_cast<std::size_t>(i)]);
    shuffled_labels[static_cast<std::size_t>(i)] =
        labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
  }
  const ClassStatistics permuted = stats_of(shuffled, shuffled_labels, c_count);

  const double scale = ordered.sigma_w.norm();
  CHECK((ordered.sigma_w - permuted.sigma_w).norm() / scale < 1e-12);
  CHECK((ordered.sigma_b - permuted.sigma_b).norm() /
            ordered.sigma_b.norm() <
        1e-12);
  CHECK((ordered.global_mean - permuted.global_mean).norm() < 1e-12);
}

TEST_CASE("class stats: batch split and merge match the single pass") {
  std::mt19937_64 rng(9);
  const Index n = 60, p = 6, c_count = 3;
  const Matrix samples = nc::testing::random_matrix(n, p, rng);
  std::vector<std::int32_t> labels = nc::testing::random_labels(n, c_count, rng);
  labels[0] = 0;
  labels[1] = 1;
  labels[2] = 2;

  const ClassStatistics whole = stats_of(samples, labels, c_count);

  // Same data streamed in three chunks.
  StreamingClassAccumulator chunked(c_count, p);
  const Index cut1 = 17, cut2 = 41;
  auto feed = [&](StreamingClassAccumulator& acc) {
    acc.accumulate(samples.topRows(cut1),
                   std::span(labels).subspan(0, static_cast<std::size_t>(cut1)));
    acc.accumulate(samples.middleRows(cut1, cut2 - cut1),
                   std::span(labels).subspan(static_cast<std::size_t>(cut1),
                                             static_cast<std::size_t>(cut2 - cut1)));
    acc.accumulate(samples.bottomRows(n - cut2),
                   std::span(labels).subspan(static_cast<std::size_t>(cut2)));
  };
  feed(chunked);
  chunked.begin_scatter_pass();
  feed(chunked);
  const ClassStatistics from_chunks = chunked.finalize();
  CHECK((whole.sigma_w - from_chunks.sigma_w).norm() < 1e-12);
  CHECK((whole.sigma_b - from_chunks.sigma_b).norm() < 1e-12);

  // Disjoint partial accumulators merged per pass.
  const auto head = std::span(labels).subspan(0, static_cast<std::size_t>(cut2));
  const auto tail = std::span(labels).subspan(static_cast<std::size_t>(cut2));
  StreamingClassAccumulator left(c_count, p);
  StreamingClassAccumulator right(c_count, p);
  left.accumulate(samples.topRows(cut2), head);
  right.accumulate(samples.bottomRows(n - cut2), tail);
  left.merge(right);
  left.begin_scatter_pass();

  StreamingClassAccumulator part_a = left;  // frozen means, empty scatter
  StreamingClassAccumulator part_b = left;
  part_a.accumulate(samples.topRows(cut2), head);
  part_b.accumulate(samples.bottomRows(n - cut2), tail);
  part_a.merge(part_b);
  const ClassStatistics merged = part_a.finalize();
  CHECK((whole.sigma_w - merged.sigma_w).norm() / whole.sigma_w.norm() < 1e-12);
  CHECK((whole.sigma_b - merged.sigma_b).norm() / whole.sigma_b.norm() < 1e-12);
  CHECK((whole.global_mean - merged.global_mean).norm() < 1e-12);
}

TEST_CASE("class stats: merge is associative within tolerance") {
  std::mt19937_64 rng(31);
  const Index n = 90, p = 5, c_count = 3;
  const Matrix samples = nc::testing::random_matrix(n, p, rng);
  std::vector<std::int32_t> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    labels[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(i % c_count);

  auto partial = [&](Index lo, Index hi) {
    StreamingClassAccumulator acc(c_count, p);
    acc.accumulate(samples.middleRows(lo, hi - lo),
                   std::span(labels).subspan(static_cast<std::size_t>(lo),
                                             static_cast<std::size_t>(hi - lo)));
    return acc;
  };

  StreamingClassAccumulator ab = partial(0, 30);
  ab.merge(partial(30, 60));
  ab.merge(partial(60, 90));

  StreamingClassAccumulator bc = partial(30, 60);
  bc.merge(partial(60, 90));
  StreamingClassAccumulator a = partial(0, 30);
  a.merge(bc);

  ab.begin_scatter_pass();
  a.begin_scatter_pass();
  ab.accumulate(samples, labels);
  a.accumulate(samples, labels);
  const ClassStatistics left_assoc = ab.finalize();
  const ClassStatistics right_assoc = a.finalize();
  CHECK((left_assoc.sigma_w - right_assoc.sigma_w).norm() /
            left_assoc.sigma_w.norm() <
        1e-12);
  CHECK((left_assoc.class_means - right_assoc.class_means).norm() < 1e-12);
}

TEST_CASE("class stats: random instance matches the naive dense oracle") {
  std::mt19937_64 rng(21);
  const Index n = 40, p = 6, c_count = 4;
  const Matrix samples = nc::testing::random_matrix(n, p, rng);
  std::vector<std::int32_t> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    labels[static_cast<std::size_t>(i)] =
        static_cast<std::int32_t>(i % c_count);

  const ClassStatistics streaming = stats_of(samples, labels, c_count);
  const nc::testing::NaiveStats naive =
      nc::testing::naive_statistics(samples, labels, c_count);

  CHECK((streaming.global_mean - naive.mu_g).norm() < 1e-12);
  CHECK((streaming.class_means - naive.mu_c).norm() < 1e-12);
  CHECK((streaming.sigma_w - naive.sigma_w).norm() / naive.sigma_w.norm() <
        1e-12);
  CHECK((streaming.sigma_b - naive.sigma_b).norm() / naive.sigma_b.norm() <
        1e-12);
}

TEST_CASE("class stats: streaming equals naive on larger random instances") {
  std::mt19937_64 rng(23);
  for (const auto [n, p, c_count] :
       {std::tuple<Index, Index, Index>{500, 32, 10}, {120, 16, 2}}) {
    const Matrix samples = nc::testing::random_matrix(n, p, rng);
    std::vector<std::int32_t> labels(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
      labels[static_cast<std::size_t>(i)] =
          static_cast<std::int32_t>(i % c_count);
    const ClassStatistics streaming = stats_of(samples, labels, c_count);
    const nc::testing::NaiveStats naive =
        nc::testing::naive_statistics(samples, labels, c_count);
    CHECK((streaming.sigma_w - naive.sigma_w).norm() / naive.sigma_w.norm() <
          1e-12);
    CHECK((streaming.sigma_b - naive.sigma_b).norm() / naive.sigma_b.norm() <
          1e-12);
  }
}

TEST_CASE("class stats: scatters are symmetric PSD, sigma_b has rank <= C-1") {
  std::mt19937_64 rng(25);
  const Index n = 90, p = 12, c_count = 5;
  const Matrix samples = nc::testing::random_matrix(n, p, rng);
  std::vector<std::int32_t> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    labels[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(i % c_count);
  const ClassStatistics stats = stats_of(samples, labels, c_count);

  CHECK((stats.sigma_w - stats.sigma_w.transpose()).cwiseAbs().maxCoeff() <
        1e-10);
  CHECK((stats.sigma_b - stats.sigma_b.transpose()).cwiseAbs().maxCoeff() <
        1e-10);
  Eigen::SelfAdjointEigenSolver<Matrix> eig_w(stats.sigma_w);
  Eigen::SelfAdjointEigenSolver<Matrix> eig_b(stats.sigma_b);
  CHECK(eig_w.eigenvalues().minCoeff() > -1e-10);
  CHECK(eig_b.eigenvalues().minCoeff() > -1e-10);

  const SvdResult f = svd(stats.sigma_b);
  const double cutoff =
      default_pinv_rel_tol(p) * f.singular_values.maxCoeff();
  for (Index i = c_count - 1; i < p; ++i)
    CHECK(f.singular_values[i] <= cutoff);

  // Global mean is the class-size-weighted average of the class means.
  Vector weighted = Vector::Zero(p);
  for (Index c = 0; c < c_count; ++c)
    weighted += static_cast<double>(stats.per_class_counts[static_cast<std::size_t>(c)]) *
                stats.class_means.row(c).transpose();
  weighted /= static_cast<double>(n);
  CHECK((weighted - stats.global_mean).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("class stats: errors") {
  StreamingClassAccumulator acc(3, 4);
  const Matrix batch = Matrix::Ones(2, 4);
  const std::vector<std::int32_t> labels{0, 1};

  SUBCASE("dimension mismatch") {
    const Matrix wrong = Matrix::Ones(2, 5);
    CHECK_THROWS_AS(acc.accumulate(wrong, labels), std::invalid_argument);
  }
  SUBCASE("label out of range") {
    const std::vector<std::int32_t> bad{0, 3};
    CHECK_THROWS_WITH_AS(acc.accumulate(batch, bad), doctest::Contains("3"),
                         std::invalid_argument);
  }
  SUBCASE("missing class reported by index") {
    acc.accumulate(batch, labels);  // class 2 never seen
    CHECK_THROWS_WITH_AS(acc.begin_scatter_pass(), doctest::Contains("class 2"),
                         std::runtime_error);
  }
  SUBCASE("finalize before scatter pass") {
    acc.accumulate(batch, labels);
    CHECK_THROWS_AS(acc.finalize(), std::logic_error);
  }
}
