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

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>

#include "bevrpn/errors.hpp"
#include "bevrpn/kitti.hpp"
#include "generators.hpp"

using namespace bevrpn;

namespace
{

std::vector<std::uint8_t> pack(std::initializer_list<float> values)
{
  std::vector<std::uint8_t> out(values.size() * 4);
  std::size_t i = 0;
  for (float v : values) {
    std::uint32_t b;
    std::memcpy(&b, &v, 4);
    for (int k = 0; k < 4; ++k) {
      out[i++] = static_cast<std::uint8_t>(b >> (8 * k));
    }
  }
  return out;
}

const char * kCalibText =
  "P0: 7.215377e+02 0.000000e+00 6.095593e+02 0.000000e+00 0.000000e+00 7.215377e+02 1.728540e+02 0.000000e+00 "
  "0.000000e+00 0.000000e+00 1.000000e+00 0.000000e+00\n"
  "P2: 7.215377e+02 0.000000e+00 6.095593e+02 4.485728e+01 0.000000e+00 7.215377e+02 1.728540e+02 2.163791e-01 "
  "0.000000e+00 0.000000e+00 1.000000e+00 2.745884e-03\n"
  "R0_rect: 9.999239e-01 9.837760e-03 -7.445048e-03 -9.869795e-03 9.999421e-01 -4.278459e-03 7.402527e-03 "
  "4.351614e-03 9.999631e-01\n"
  "Tr_velo_to_cam: 7.533745e-03 -9.999714e-01 -6.166020e-04 -4.069766e-03 1.480249e-02 7.280733e-04 "
  "-9.998902e-01 -7.631618e-02 9.998621e-01 7.523790e-03 1.480755e-02 -2.717806e-01\n"
  "Tr_imu_to_velo: 9.999976e-01 7.553071e-04 -2.035826e-03 -8.086759e-01 -7.854027e-04 9.998898e-01 "
  "-1.482298e-02 3.195559e-01 2.024406e-03 1.482454e-02 9.998881e-01 -7.997231e-01\n";

Calibration identity_calib()
{
  // Camera frame equals the LiDAR frame.
  return make_pinhole(700, 600, 180, 1242, 375);
}

}  // namespace

TEST(Velodyne, DecodesKnownRecords)
{
  const auto bytes = pack({1.5f, -2.0f, 0.25f, 0.5f, 10.0f, 20.0f, -1.0f, 1.0f});
  ASSERT_EQ(bytes.size(), 32u);
  const auto c = decode_velodyne(bytes);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.points[0].x, 1.5);
  EXPECT_EQ(c.points[0].y, -2.0);
  EXPECT_EQ(c.points[0].z, 0.25);
  EXPECT_EQ((*c.reflectance)[0], 0.5f);
  EXPECT_EQ(c.points[1].x, 10.0);
  EXPECT_EQ((*c.reflectance)[1], 1.0f);
  EXPECT_EQ(encode_velodyne(c), bytes);
}

TEST(Velodyne, EmptyAndMisaligned)
{
  EXPECT_TRUE(decode_velodyne({}).empty());
  std::vector<std::uint8_t> b17(17, 0);
  try {
    decode_velodyne(b17);
    FAIL();
  } catch (const FormatError & e) {
    EXPECT_EQ(e.field(), "byte length");
  }
}

TEST(Velodyne, NonFiniteNamesRecord)
{
  const auto bytes = pack({1, 2, 3, 0, 1, std::nanf(""), 3, 0});
  try {
    decode_velodyne(bytes);
    FAIL();
  } catch (const FormatError & e) {
    EXPECT_EQ(e.field(), "point 1");
  }
}

TEST(Velodyne, FileRoundTripAndTotality)
{
  gen::Engine e(1);
  const auto dir = std::filesystem::temp_directory_path() / "bevrpn_velo_test";
  std::filesystem::create_directories(dir);
  for (int t = 0; t < 10; ++t) {
    PointCloud c;
    c.reflectance.emplace();
    const int n = gen::uniform_int(e, 0, 300);
    for (int i = 0; i < n; ++i) {
      c.points.push_back({static_cast<float>(gen::uniform(e, -80, 80)), static_cast<float>(gen::uniform(e, -80, 80)),
                          static_cast<float>(gen::uniform(e, -3, 3))});
      c.reflectance->push_back(static_cast<float>(gen::uniform(e, 0, 1)));
    }
    write_velodyne(c, dir / "a.bin");
    EXPECT_EQ(std::filesystem::file_size(dir / "a.bin"), 16u * n);
    const auto back = read_velodyne(dir / "a.bin");
    ASSERT_EQ(back.size(), c.size());
    for (int i = 0; i < n; ++i) {
      EXPECT_EQ(back.points[i].x, c.points[i].x);
      EXPECT_EQ((*back.reflectance)[i], (*c.reflectance)[i]);
    }
  }
  EXPECT_THROW(read_velodyne(dir / "missing.bin"), IoError);
  std::filesystem::remove_all(dir);
}

TEST(Calibration, ParsesKittiFile)
{
  const auto c = parse_calibration(kCalibText, 1242, 375);
  EXPECT_NEAR(c.projection(0, 0), 721.5377, 1e-12);
  EXPECT_NEAR(c.projection(0, 3), 44.85728, 1e-12);
  EXPECT_NEAR(c.velo_to_cam(2, 3), -0.2717806, 1e-12);
  EXPECT_NO_THROW(c.validate());
  const Eigen::Matrix3d r = c.velo_to_cam.topLeftCorner<3, 3>();
  EXPECT_LT((r.transpose() * r - Eigen::Matrix3d::Identity()).norm(), 1e-12);
  // Re-orthonormalization moves entries by no more than the printed precision.
  EXPECT_NEAR(c.velo_to_cam(0, 0), 7.533745e-03, 1e-5);
  EXPECT_EQ(c.image_width, 1242);
}

TEST(Calibration, FormatRoundTrip)
{
  const auto c = parse_calibration(kCalibText, 1242, 375);
  const auto d = parse_calibration(format_calibration(c), 1242, 375);
  EXPECT_LT((c.projection - d.projection).norm(), 1e-12);
  EXPECT_LT((c.velo_to_cam - d.velo_to_cam).norm(), 1e-12);
  EXPECT_LT((c.rectification - d.rectification).norm(), 1e-12);
}

TEST(Calibration, Errors)
{
  try {
    parse_calibration("P2: 1 2 3\n", 10, 10);
    FAIL();
  } catch (const FormatError & e) {
    EXPECT_EQ(e.field(), "P2");
  }
  EXPECT_THROW(parse_calibration("R0_rect: 1 0 0 0 1 0 0 0 1\n", 10, 10), FormatError);
  const std::string bad_rot = std::string("P2: 700 0 600 0 0 700 180 0 0 0 1 0\nR0_rect: 1 0 0 0 1 0 0 0 1\n") +
                              "Tr_velo_to_cam: 2 0 0 0 0 1 0 0 0 0 1 0\n";
  EXPECT_THROW(parse_calibration(bad_rot, 10, 10), ConfigError);
  const std::string singular = std::string("P2: 0 0 0 0 0 0 0 0 0 0 0 0\nR0_rect: 1 0 0 0 1 0 0 0 1\n") +
                               "Tr_velo_to_cam: 1 0 0 0 0 1 0 0 0 0 1 0\n";
  EXPECT_THROW(parse_calibration(singular, 10, 10), ConfigError);
}

TEST(Labels, ClassMapping)
{
  EXPECT_EQ(map_kitti_class("Car"), ClassId::Car);
  EXPECT_EQ(map_kitti_class("Van"), ClassId::Car);
  EXPECT_EQ(map_kitti_class("Pedestrian"), ClassId::Pedestrian);
  EXPECT_EQ(map_kitti_class("Cyclist"), ClassId::Cyclist);
  EXPECT_FALSE(map_kitti_class("DontCare"));
  EXPECT_FALSE(map_kitti_class("Truck"));
  EXPECT_FALSE(map_kitti_class("Person_sitting"));
}

TEST(Labels, VanBecomesCarAndDontCareIsDropped)
{
  const auto c = identity_calib();
  const auto objs = parse_labels(
    "Van 0.00 0 -1.57 100 100 200 200 2.0 1.9 4.5 1.0 1.5 20.0 0.1\n"
    "DontCare -1 -1 -10 500 150 600 200 -1 -1 -1 -1000 -1000 -1000 -10\n",
    c);
  ASSERT_EQ(objs.size(), 1u);
  EXPECT_EQ(objs[0].class_id, ClassId::Car);
}

TEST(Labels, BottomCenterLiftWithIdentityExtrinsics)
{
  const auto c = identity_calib();
  const auto objs = parse_labels("Car 0 0 0 0 0 10 10 2.0 1.6 3.9 0 0 10 0\n", c);
  ASSERT_EQ(objs.size(), 1u);
  EXPECT_NEAR(objs[0].x, 0.0, 1e-12);
  EXPECT_NEAR(objs[0].y, 0.0, 1e-12);
  // Location z = 10 lifted by h / 2.
  EXPECT_NEAR(objs[0].z, 11.0, 1e-12);
  EXPECT_NEAR(objs[0].h, 2.0, 1e-12);
  EXPECT_NEAR(objs[0].w, 1.6, 1e-12);
  EXPECT_NEAR(objs[0].l, 3.9, 1e-12);
}

TEST(Labels, ScoreColumnAccepted)
{
  const auto c = identity_calib();
  const auto objs = parse_labels("Pedestrian 0 0 0 0 0 10 10 1.7 0.6 0.8 1 2 10 0.5 0.93\n", c);
  ASSERT_EQ(objs.size(), 1u);
  EXPECT_EQ(objs[0].class_id, ClassId::Pedestrian);
}

TEST(Labels, MalformedLineCarriesLineNumber)
{
  const auto c = identity_calib();
  try {
    parse_labels("Car 0 0 0 0 0 10 10 2.0 1.6 3.9 0 0 10 0\n\nCar 0 0 0 0\n", c);
    FAIL();
  } catch (const FormatError & e) {
    EXPECT_EQ(e.field(), "line 3");
  }
  try {
    parse_labels("Car 0 0 x 0 0 10 10 2.0 1.6 3.9 0 0 10 0\n", c);
    FAIL();
  } catch (const FormatError & e) {
    EXPECT_EQ(e.field(), "line 1");
  }
}

TEST(Labels, LidarCameraRoundTripProperty)
{
  gen::Engine e(17);
  for (int t = 0; t < 50; ++t) {
    const auto c = gen::vehicle_calibration(e);
    for (int i = 0; i < 20; ++i) {
      GroundTruthObject o;
      o.class_id = static_cast<ClassId>(gen::uniform_int(e, 0, 2));
      o.x = gen::uniform(e, 2, 60);
      o.y = gen::uniform(e, -30, 30);
      o.z = gen::uniform(e, -2, 1);
      o.h = gen::uniform(e, 0.5, 3);
      o.w = gen::uniform(e, 0.5, 3);
      o.l = gen::uniform(e, 0.5, 6);
      o.theta = gen::uniform(e, -std::numbers::pi + 1e-6, std::numbers::pi);
      const auto cam = lidar_object_to_camera(o, c);
      const auto back = camera_label_to_lidar(cam, o.class_id, c);
      EXPECT_NEAR(back.x, o.x, 1e-9);
      EXPECT_NEAR(back.y, o.y, 1e-9);
      EXPECT_NEAR(back.z, o.z, 1e-9);
      EXPECT_NEAR(std::remainder(back.theta - o.theta, 2 * std::numbers::pi), 0.0, 1e-9);
      EXPECT_GT(back.theta, -std::numbers::pi);
      EXPECT_LE(back.theta, std::numbers::pi);
    }
  }
}

TEST(Labels, FormatParseRoundTrip)
{
  gen::Engine e(4);
  const auto c = gen::vehicle_calibration(e);
  std::vector<CameraLabel> labels;
  std::vector<GroundTruthObject> objs;
  for (int i = 0; i < 10; ++i) {
    GroundTruthObject o;
    o.class_id = static_cast<ClassId>(i % 3);
    o.x = gen::uniform(e, 5, 40);
    o.y = gen::uniform(e, -10, 10);
    o.z = -1.0;
    o.h = 1.5;
    o.w = 1.6;
    o.l = 3.9;
    o.theta = gen::uniform(e, -3, 3);
    auto l = lidar_object_to_camera(o, c);
    l.type = std::string(class_name(o.class_id));
    labels.push_back(l);
    objs.push_back(o);
  }
  const auto parsed = parse_labels(format_labels(labels), c);
  ASSERT_EQ(parsed.size(), objs.size());
  for (std::size_t i = 0; i < objs.size(); ++i) {
    EXPECT_EQ(parsed[i].class_id, objs[i].class_id);
    // Six printed decimals.
    EXPECT_NEAR(parsed[i].x, objs[i].x, 1e-5);
    EXPECT_NEAR(parsed[i].y, objs[i].y, 1e-5);
  }
}

TEST(WrapAngle, Range)
{
  EXPECT_DOUBLE_EQ(wrap_angle(std::numbers::pi), std::numbers::pi);
  EXPECT_DOUBLE_EQ(wrap_angle(-std::numbers::pi), std::numbers::pi);
  EXPECT_NEAR(wrap_angle(3 * std::numbers::pi / 2), -std::numbers::pi / 2, 1e-12);
  EXPECT_NEAR(wrap_angle(0.4), 0.4, 0);
}

TEST(Layers, RecoversGeneratingRings)
{
  gen::Engine e(2);
  std::vector<int> truth;
  const auto cloud = estimate_layers(gen::ring_cloud(e, 64, 200, &truth), 64);
  ASSERT_TRUE(cloud.layer_id);
  EXPECT_EQ(cloud.num_layers, 64);
  EXPECT_EQ(*cloud.layer_id, truth);
}

TEST(Layers, SingleLayerAndExtremes)
{
  gen::Engine e(2);
  const auto one = estimate_layers(gen::ring_cloud(e, 8, 10), 1);
  for (int id : *one.layer_id) {
    EXPECT_EQ(id, 0);
  }
  PointCloud two;
  two.points = {{10, 0, -2}, {10, 0, 1}};
  const auto ext = estimate_layers(two, 32);
  EXPECT_EQ((*ext.layer_id)[0], 0);
  EXPECT_EQ((*ext.layer_id)[1], 31);
}

TEST(Layers, Errors)
{
  PointCloud origin;
  origin.points = {{0, 0, 0}, {0, 0, 0}};
  EXPECT_THROW(estimate_layers(origin, 64), DegenerateGeometryError);
  EXPECT_THROW(estimate_layers(PointCloud{}, 64), ContractViolation);
  PointCloud one;
  one.points = {{1, 0, 0}};
  EXPECT_THROW(estimate_layers(one, 0), ContractViolation);
}

TEST(Layers, PermutationEquivariant)
{
  gen::Engine e(6);
  for (int t = 0; t < 20; ++t) {
    auto cloud = gen::ring_cloud(e, 16, 30);
    // Off-ring noise so bins are not trivially exact.
    for (auto & p : cloud.points) {
      p.z += gen::uniform(e, -0.05, 0.05);
    }
    const auto base = estimate_layers(cloud, 16);
    std::vector<std::size_t> perm(cloud.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), e);
    const auto permuted = estimate_layers(cloud.select(perm), 16);
    for (std::size_t i = 0; i < perm.size(); ++i) {
      EXPECT_EQ((*permuted.layer_id)[i], (*base.layer_id)[perm[i]]);
    }
  }
}

TEST(PointCloud, CheckRejectsInconsistentChannels)
{
  PointCloud c;
  c.points = {{1, 2, 3}};
  c.reflectance = std::vector<float>{0.1f, 0.2f};
  EXPECT_THROW(c.check(), ContractViolation);
  PointCloud d;
  d.points = {{1, 2, 3}};
  d.layer_id = std::vector<int>{5};
  d.num_layers = 4;
  EXPECT_THROW(d.check(), ContractViolation);
}

TEST(NuScenes, ClassTable)
{
  const std::vector<std::string> rider{"with rider"};
  const std::vector<std::string> none;
  EXPECT_EQ(map_nuscenes_class("bicycle", rider), ClassId::Cyclist);
  EXPECT_FALSE(map_nuscenes_class("bicycle", none));
  EXPECT_FALSE(map_nuscenes_class("truck", none));
  EXPECT_EQ(map_nuscenes_class("car", none), ClassId::Car);
  EXPECT_EQ(map_nuscenes_class("pedestrian", none), ClassId::Pedestrian);
  EXPECT_EQ(map_nuscenes_class("vehicle.bicycle", std::vector<std::string>{"cycle.with_rider"}), ClassId::Cyclist);
}
