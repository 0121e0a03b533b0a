// Copyright 2026 The bevrpn Authors
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

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "bevrpn/voxelizer.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace bevrpn;

namespace
{

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

// Relative for large values, absolute near zero where cancellation dominates.
void expect_close(double got, double want, double scale)
{
  EXPECT_LE(std::abs(got - want), 1e-9 * std::max(std::abs(want), scale)) << got << " vs " << want;
}

}  // namespace

TEST(Voxelize, SameCellAndStraddle)
{
  const auto g = GridSpec::default_input();
  PointCloud c;
  c.points = {{1.01, 0.01, 0}, {1.02, 0.02, 1}};
  auto vox = voxelize(c, g);
  ASSERT_EQ(vox.size(), 1u);
  EXPECT_EQ(vox[0].point_indices, (std::vector<std::size_t>{0, 1}));

  const double edge = g.x_min() + g.s_x();
  c.points = {{std::nextafter(edge, 0.0), 0.01, 0}, {edge, 0.01, 0}};
  vox = voxelize(c, g);
  ASSERT_EQ(vox.size(), 2u);
  EXPECT_EQ(vox[0].u, 0);
  EXPECT_EQ(vox[1].u, 1);
}

TEST(Voxelize, EmptyAndOutOfBounds)
{
  const auto g = GridSpec::default_input();
  EXPECT_TRUE(voxelize(PointCloud{}, g).empty());
  PointCloud c;
  c.points = {{-1, 0, 0}, {50, 0, 0}, {10, 25, 0}};
  EXPECT_TRUE(voxelize(c, g).empty());
}

TEST(Voxelize, MatchesBruteForceBinning)
{
  gen::Engine e(21);
  for (const auto & g : {GridSpec::default_input(), GridSpec(-2, 3, -1, 1.5, 0.5, 0.25)}) {
    for (int t = 0; t < 30; ++t) {
      const auto cloud = gen::random_cloud(e, g, 1000);
      const auto vox = voxelize(cloud, g);
      const auto want = oracle::brute_force_voxels(cloud.points, g);
      ASSERT_EQ(vox.size(), want.size());
      std::size_t i = 0;
      for (const auto & [cell, members] : want) {
        // Oracle map orders by (u, v), as voxelize must.
        EXPECT_EQ(vox[i].u, cell.first);
        EXPECT_EQ(vox[i].v, cell.second);
        EXPECT_EQ(vox[i].point_indices, members);
        ++i;
      }
    }
  }
}

TEST(Voxelize, SubsetProperty)
{
  gen::Engine e(22);
  const auto g = GridSpec(0, 10, -5, 5, 0.5, 0.5);
  for (int t = 0; t < 30; ++t) {
    const auto cloud = gen::random_cloud(e, g, 500);
    std::set<std::pair<int, int>> full;
    for (const auto & v : voxelize(cloud, g)) {
      full.insert({v.u, v.v});
    }
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (gen::uniform_int(e, 0, 2) == 0) {
        keep.push_back(i);
      }
    }
    for (const auto & v : voxelize(cloud.select(keep), g)) {
      EXPECT_TRUE(full.count({v.u, v.v}));
    }
  }
}

TEST(Ndt, Examples)
{
  const std::vector<Point3> one{{1, 2, 3}};
  auto f = ndt_encode(one);
  EXPECT_EQ(f.mean, (std::array<double, 3>{1, 2, 3}));
  EXPECT_EQ(f.cov, (std::array<double, 6>{}));
  EXPECT_EQ(f.extremes, (std::array<double, 6>{1, 2, 3, 1, 2, 3}));

  const std::vector<Point3> two{{0, 0, 0}, {2, 0, 0}};
  f = ndt_encode(two);
  EXPECT_EQ(f.mean, (std::array<double, 3>{1, 0, 0}));
  EXPECT_EQ(f.cov, (std::array<double, 6>{1, 0, 0, 0, 0, 0}));
}

TEST(Ndt, FlattenLayout)
{
  const std::vector<Point3> pts{{0, 0, 0}, {2, 4, 6}};
  const auto flat = ndt_encode(pts).flatten();
  EXPECT_EQ(flat[0], 1);
  EXPECT_EQ(flat[1], 2);
  EXPECT_EQ(flat[2], 3);
  EXPECT_EQ(flat[3], 1);  // xx
  EXPECT_EQ(flat[4], 2);  // xy
  EXPECT_EQ(flat[8], 9);  // zz
  EXPECT_EQ(flat[9], 0);
  EXPECT_EQ(flat[14], 6);
}

TEST(Ndt, MatchesTwoPassAndIsPsd)
{
  gen::Engine e(23);
  for (int t = 0; t < 300; ++t) {
    const auto pts = gen::random_voxel_points(e, gen::uniform_int(e, 1, 50));
    const auto f = ndt_encode(pts);
    const auto o = oracle::two_pass_ndt(pts);
    for (int k = 0; k < 3; ++k) {
      EXPECT_LE(rel_err(f.mean[k], o.mean[k]), 1e-9);
    }
    const double var_scale = std::max({o.cov[0], o.cov[3], o.cov[5]});
    for (int k = 0; k < 6; ++k) {
      expect_close(f.cov[k], o.cov[k], var_scale);
      EXPECT_EQ(f.extremes[k], o.extremes[k]);
    }
    for (int k = 0; k < 3; ++k) {
      EXPECT_LE(f.extremes[k], f.mean[k]);
      EXPECT_LE(f.mean[k], f.extremes[k + 3]);
    }
    Eigen::Matrix3d s;
    s << f.cov[0], f.cov[1], f.cov[2], f.cov[1], f.cov[3], f.cov[4], f.cov[2], f.cov[4], f.cov[5];
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(s).eigenvalues().minCoeff(), -1e-9);
  }
}

TEST(Ndt, PermutationInvariant)
{
  gen::Engine e(24);
  for (int t = 0; t < 100; ++t) {
    // Two points always tie, so start at three.
    auto pts = gen::random_voxel_points(e, gen::uniform_int(e, 3, 40));
    const auto a = ndt_encode(pts);
    const auto m = pts[main_point_index(pts)];
    std::shuffle(pts.begin(), pts.end(), e);
    const auto b = ndt_encode(pts);
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(a.mean[k], b.mean[k], 1e-12);
    }
    for (int k = 0; k < 6; ++k) {
      EXPECT_NEAR(a.cov[k], b.cov[k], 1e-12);
      EXPECT_EQ(a.extremes[k], b.extremes[k]);
    }
    const auto m2 = pts[main_point_index(pts)];
    EXPECT_EQ(m.x, m2.x);
    EXPECT_EQ(m.y, m2.y);
    EXPECT_EQ(m.z, m2.z);
  }
}

TEST(MainPoint, Examples)
{
  const std::vector<Point3> one{{4, 5, 6}};
  EXPECT_EQ(main_point(one).x, 4);
  const std::vector<Point3> three{{0, 0, 0}, {10, 0, 0}, {1, 0, 0}};
  EXPECT_EQ(main_point_index(three), 2u);
  EXPECT_EQ(main_point(three).x, 1);
  const std::vector<Point3> tie{{-1, 0, 0}, {1, 0, 0}};
  EXPECT_EQ(main_point_index(tie), 0u);
  const std::vector<Point3> tie2{{3, 1, 1}, {1, 1, 1}, {5, 1, 1}};
  // Mean (3, 1, 1) coincides with the first point.
  EXPECT_EQ(main_point_index(tie2), 0u);
}

TEST(MainPoint, MatchesExhaustiveScanIncludingTies)
{
  gen::Engine e(25);
  for (int t = 0; t < 300; ++t) {
    const auto pts = gen::random_voxel_points(e, gen::uniform_int(e, 1, 30));
    EXPECT_EQ(main_point_index(pts), oracle::exhaustive_main_point(pts));
  }
  for (int t = 0; t < 300; ++t) {
    const auto pts = gen::tied_voxel_points(e);
    EXPECT_EQ(main_point_index(pts), oracle::exhaustive_main_point(pts));
  }
}

TEST(MainPoint, LiesInItsVoxel)
{
  gen::Engine e(26);
  const auto g = GridSpec::default_input();
  for (int t = 0; t < 10; ++t) {
    const auto cloud = gen::random_cloud(e, g, 2000);
    for (const auto & v : voxelize(cloud, g)) {
      std::vector<Point3> pts;
      for (auto i : v.point_indices) {
        pts.push_back(cloud.points[i]);
      }
      const auto c = bev_index(main_point(pts), g);
      ASSERT_TRUE(c);
      EXPECT_EQ(c->u, v.u);
      EXPECT_EQ(c->v, v.v);
    }
  }
}

TEST(EncodeSample, BehindCameraIsEmpty)
{
  const auto g = GridSpec::default_input();
  gen::Engine e(27);
  PointCloud cloud;
  // Identity camera looking along +z; every point has negative depth.
  const auto pin = make_pinhole(700, 600, 180, 1242, 375);
  for (int i = 0; i < 50; ++i) {
    cloud.points.push_back({gen::uniform(e, 1, 40), gen::uniform(e, -20, 20), -gen::uniform(e, 0.5, 5)});
  }
  EXPECT_EQ(encode_sample(cloud, g, pin).size(), 0u);
}

TEST(EncodeSample, SingleVoxelComposition)
{
  const auto g = GridSpec::default_input();
  gen::Engine e(28);
  const auto c = gen::vehicle_calibration(e);
  PointCloud cloud;
  cloud.points = {{20.01, 0.01, -1.0}, {20.02, 0.02, -0.5}, {20.03, 0.03, 0.2}};
  const auto s = encode_sample(cloud, g, c);
  ASSERT_EQ(s.size(), 1u);
  const auto mp = main_point(cloud.points);
  const auto px = project_point(mp, c);
  ASSERT_TRUE(px);
  EXPECT_EQ(s.image_coords[0].px, px->px);
  EXPECT_EQ(s.image_coords[0].py, px->py);
  EXPECT_EQ(s.main_points[0].z, mp.z);
  const auto flat = ndt_encode(cloud.points).flatten();
  for (int k = 0; k < kFeatureDim; ++k) {
    EXPECT_EQ(s.features[0][k], static_cast<float>(flat[k]));
  }
}

TEST(EncodeSample, MatchesBruteForceOnVehicleScene)
{
  gen::Engine e(29);
  const auto g = GridSpec::default_input();
  for (int t = 0; t < 5; ++t) {
    const auto c = gen::vehicle_calibration(e);
    const auto cloud = gen::ring_cloud(e, 32, 400);
    const auto s = encode_sample(cloud, g, c);
    const auto cells = oracle::brute_force_voxels(cloud.points, g);
    std::size_t expected = 0;
    for (const auto & [cell, members] : cells) {
      std::vector<Point3> pts;
      for (auto i : members) {
        pts.push_back(cloud.points[i]);
      }
      if (oracle::project(pts[oracle::exhaustive_main_point(pts)], c)) {
        ++expected;
      }
    }
    EXPECT_EQ(s.size(), expected);
    EXPECT_EQ(s.features.size(), s.size());
    EXPECT_EQ(s.image_coords.size(), s.size());
    EXPECT_EQ(s.main_points.size(), s.size());
    std::set<CellIndex> unique(s.bev_indices.begin(), s.bev_indices.end());
    EXPECT_EQ(unique.size(), s.size());

    const auto kept = encode_sample(cloud, g, c, EncodeOptions{true});
    EXPECT_EQ(kept.size(), cells.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
      for (float v : kept.features[i]) {
        EXPECT_TRUE(std::isfinite(v));
      }
    }
  }
}
