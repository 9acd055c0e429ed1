#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "ipslab/error.hpp"
#include "ipslab/lattice.hpp"

using namespace ipslab;

TEST(Lattice, TorusCycleStructure) {
  const auto lat = GroupLattice::torus(1, 5);
  EXPECT_EQ(lat.size(), 5u);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    EXPECT_EQ(lat.neighbors(i).size(), 2u);
    for (auto j : lat.neighbors(i)) EXPECT_EQ(lat.distance(i, j), 1);
  }
  EXPECT_EQ(lat.coord(lat.origin()), Coord{0});
}

TEST(Lattice, TreeBallCount) {
  const auto lat = GroupLattice::tree_ball(2, 2);
  EXPECT_EQ(lat.size(), 10u);
  EXPECT_EQ(lat.neighbors(lat.origin()).size(), 3u);
  EXPECT_FALSE(lat.group_closed());
  EXPECT_FALSE(lat.op(0, 1).has_value());
  std::size_t leaves = 0;
  for (std::size_t i = 0; i < lat.size(); ++i)
    if (lat.distance(0, i) == 2) ++leaves;
  EXPECT_EQ(leaves, 6u);
}

TEST(Lattice, HierarchicalDistances) {
  const auto lat = GroupLattice::hierarchical(2, 3);
  EXPECT_EQ(lat.size(), 8u);
  std::set<int> seen;
  for (std::size_t i = 0; i < lat.size(); ++i)
    for (std::size_t j = 0; j < lat.size(); ++j) seen.insert(lat.distance(i, j));
  EXPECT_EQ(seen, (std::set<int>{0, 1, 2, 3}));
}

TEST(Lattice, GroupIdentityAndClosure) {
  for (const auto& lat : {GroupLattice::torus(2, 4), GroupLattice::hierarchical(3, 3), GroupLattice::torus(1, 7)}) {
    for (std::size_t i = 0; i < lat.size(); ++i) {
      EXPECT_EQ(*lat.op(lat.origin(), i), i);
      EXPECT_EQ(*lat.op(i, *lat.inverse(i)), lat.origin());
      for (std::size_t j = 0; j < lat.size(); ++j) EXPECT_TRUE(lat.op(i, j).has_value());
    }
  }
}

TEST(Lattice, InvalidParameters) {
  EXPECT_THROW(GroupLattice::torus(0, 5), Error);
  EXPECT_THROW(GroupLattice::torus(1, 1), Error);
  EXPECT_THROW(GroupLattice::tree_ball(1, 2), Error);
  EXPECT_THROW(GroupLattice::hierarchical(1, 2), Error);
  EXPECT_THROW(GroupLattice::hierarchical(2, 0), Error);
}

// ---------------------------------------------------------------- kernels

TEST(Kernel, NearestNeighborRowSums) {
  const auto lat = GroupLattice::torus(1, 5);
  const auto k = nearest_neighbor_kernel(lat, 1.0);
  EXPECT_DOUBLE_EQ(k.total, 2.0);
  for (std::size_t i = 0; i < k.n; ++i) EXPECT_DOUBLE_EQ(k.row_sum(i), 2.0);
}

TEST(Kernel, NegativeRateRejected) {
  const auto lat = GroupLattice::torus(1, 5);
  EXPECT_THROW(kernel_from_base(lat, {{Coord{1}, -1.0}}), Error);
}

TEST(Kernel, HierarchicalPartialSums) {
  const auto lat = GroupLattice::hierarchical(2, 3);
  const auto k = hierarchical_kernel(lat, [](int) { return 1.0; });
  // Direct summation: sum_{k >= r} 1/2^{2k-1}, 200 terms.
  auto direct = [](int r) {
    double s = 0.0;
    for (int kk = r; kk < r + 200; ++kk) s += 1.0 / std::pow(2.0, 2 * kk - 1);
    return s;
  };
  for (std::size_t j = 0; j < lat.size(); ++j) {
    const int r = lat.distance(0, j);
    if (r == 0) continue;
    EXPECT_NEAR(k.rate(0, j), direct(r), 1e-12);
  }
  EXPECT_NEAR(direct(1), 2.0 / 3.0, 1e-15);
  EXPECT_LT(translation_defect(lat, k), 1e-15);
}

TEST(Kernel, ReverseOfSymmetricIsItself) {
  const auto lat = GroupLattice::torus(2, 4);
  const auto k = nearest_neighbor_kernel(lat, 1.5);
  EXPECT_TRUE(same_kernel(reverse_kernel(k), k));
}

TEST(Kernel, ReverseTransposesDrift) {
  const auto lat = GroupLattice::torus(1, 6);
  const auto k = drift_kernel_1d(lat, 2.0, 1.0);
  const auto r = reverse_kernel(k);
  const std::size_t o = lat.origin();
  const auto right = *lat.shift(o, {1});
  const auto left = *lat.shift(o, {-1});
  EXPECT_DOUBLE_EQ(r.rate(o, right), 1.0);
  EXPECT_DOUBLE_EQ(r.rate(o, left), 2.0);
  EXPECT_TRUE(same_kernel(r, drift_kernel_1d(lat, 1.0, 2.0)));
}

TEST(Kernel, DoubleReversalIsIdentity) {
  const auto lat = GroupLattice::torus(1, 9, Boundary::killed);
  const auto k = drift_kernel_1d(lat, 2.0, 0.5);
  EXPECT_TRUE(same_kernel(reverse_kernel(reverse_kernel(k)), k, 1e-14));
  const auto tree = GroupLattice::tree_ball(3, 2);
  const auto kt = nearest_neighbor_kernel(tree, 0.7);
  EXPECT_TRUE(same_kernel(reverse_kernel(reverse_kernel(kt)), kt, 1e-14));
}

TEST(Kernel, KilledWindowLeak) {
  const auto lat = GroupLattice::torus(1, 5, Boundary::killed);
  const auto k = drift_kernel_1d(lat, 2.0, 1.0);
  for (std::size_t i = 0; i < k.n; ++i) EXPECT_DOUBLE_EQ(k.row_sum(i) + k.leak[i], 3.0);
  const auto right_end = *lat.find({2});
  EXPECT_DOUBLE_EQ(k.leak[right_end], 2.0);
  const auto r = reverse_kernel(k);
  // Reversed: a^dagger(i, i+1) = a(i+1, i) = 1 leaves at the right end.
  EXPECT_DOUBLE_EQ(r.leak[right_end], 1.0);
}

TEST(Kernel, TranslationInvarianceScan) {
  const auto lat = GroupLattice::torus(2, 6);
  const auto k = kernel_from_base(lat, {{Coord{1, 0}, 0.3}, {Coord{-1, 2}, 1.1}, {Coord{0, -1}, 0.2}});
  EXPECT_EQ(translation_defect(lat, k), 0.0);
  for (std::size_t i = 0; i < k.n; ++i) EXPECT_NEAR(k.row_sum(i), k.total, 1e-14);
}

TEST(Kernel, CsvExport) {
  const auto lat = GroupLattice::torus(1, 3);
  const auto csv = nearest_neighbor_kernel(lat, 1.0).to_csv();
  EXPECT_EQ(csv.substr(0, 9), "i,j,rate\n");
}

// ---------------------------------------------------------------- LS weights

TEST(LSWeights, ConstantWeightsOnPeriodicWindow) {
  const auto lat = GroupLattice::torus(1, 8);
  const auto k = drift_kernel_1d(lat, 2.0, 0.5);
  std::vector<double> ones(lat.size(), 1.0);
  EXPECT_LE(ls_domination_constant(k, ones), 2.0 * k.total + 1e-12);
}

TEST(LSWeights, AsymmetricScan) {
  const auto lat = GroupLattice::torus(1, 31, Boundary::killed);
  const auto k = drift_kernel_1d(lat, 2.0, 0.5);
  const auto w = ls_weights(lat, k, 0.5);
  std::vector<double> ag(k.n, 0.0);
  for (std::size_t i = 0; i < k.n; ++i)
    for (std::size_t j = 0; j < k.n; ++j) ag[i] += (k.rate(i, j) + k.rate(j, i)) * w.gamma[j];
  for (std::size_t i = 0; i < k.n; ++i) {
    EXPECT_GT(w.gamma[i], 0.0);
    EXPECT_LE(ag[i], w.K * w.gamma[i] * (1 + 1e-12));
  }
}

TEST(LSWeights, LargeEpsilonApproachesSeed) {
  const auto lat = GroupLattice::torus(1, 11);
  const auto k = nearest_neighbor_kernel(lat, 1.0);
  const auto w = ls_weights(lat, k, 30.0);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const double phi = std::exp(-static_cast<double>(lat.distance(lat.origin(), i)));
    EXPECT_NEAR(w.gamma[i] / w.gamma[lat.origin()], phi, 1e-10);
  }
}

// ---------------------------------------------------------------- d_k series

TEST(DkSeries, ConstantScheduleIsRecurrent) {
  const auto s = dk_series([](int) { return 1.0; }, 2, 40);
  for (double d : s.d) EXPECT_NEAR(d, 2.0, 1e-14);
  EXPECT_NEAR(s.partial.back(), 41 * 0.5, 1e-12);
  EXPECT_EQ(s.verdict, Recurrence::recurrent);
}

TEST(DkSeries, GeometricScheduleIsTransient) {
  const auto s = dk_series([](int k) { return std::pow(4.0, k); }, 8, 30);
  for (std::size_t k = 0; k < s.d.size(); ++k) EXPECT_NEAR(s.d[k] / (2.0 * std::pow(4.0, k)), 1.0, 1e-13);
  EXPECT_EQ(s.verdict, Recurrence::transient);
  // Remaining tail sum_{k>30} 1/(2*4^k).
  const double tail = 1.0 / (2.0 * std::pow(4.0, 31)) * 4.0 / 3.0;
  EXPECT_NEAR(s.tail_estimate / tail, 1.0, 1e-9);
}

TEST(DkSeries, DivergentInnerSeries) {
  EXPECT_THROW(dk_series([](int k) { return std::pow(4.0, k); }, 2, 3), Error);
}

TEST(DkSeries, SingleTerm) {
  const auto s = dk_series([](int k) { return 1.0 + k; }, 3, 0);
  ASSERT_EQ(s.d.size(), 1u);
  EXPECT_GE(s.d[0], 1.0);
  EXPECT_EQ(s.verdict, Recurrence::undetermined);
}

TEST(DkSeries, NonPositiveConstant) {
  EXPECT_THROW(dk_series([](int) { return 0.0; }, 2, 3), Error);
}
