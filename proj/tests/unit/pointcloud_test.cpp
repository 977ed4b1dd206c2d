#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "hipnav/fitting.hpp"
#include "hipnav/kdtree.hpp"
#include "hipnav/pointcloud.hpp"
#include "hipnav/registration.hpp"
#include "support.hpp"

using namespace hipnav;
using hipnav::testing::code_of;
using hipnav::testing::random_point;
using hipnav::testing::random_points;
using hipnav::testing::random_transform;

namespace {

std::vector<std::size_t> brute_force(const std::vector<Point3>& pts, const Point3& c, double r) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if ((pts[i] - c).squaredNorm() <= r * r) out.push_back(i);
  }
  return out;
}

std::vector<Point3> sphere_surface(std::mt19937_64& rng, const Point3& center, double radius, std::size_t n) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Point3> out;
  while (out.size() < n) {
    Point3 d(g(rng), g(rng), g(rng));
    if (d.norm() < 1e-9) continue;
    out.push_back(center + radius * d.normalized());
  }
  return out;
}

std::set<std::set<std::size_t>> as_sets(const std::vector<std::vector<std::size_t>>& clusters,
                                        const std::vector<std::size_t>& to_original = {}) {
  std::set<std::set<std::size_t>> out;
  for (const auto& c : clusters) {
    std::set<std::size_t> s;
    for (auto i : c) s.insert(to_original.empty() ? i : to_original[i]);
    out.insert(s);
  }
  return out;
}

}  // namespace

TEST(KdTree, SinglePointIsOneLeaf) {
  const KdTree tree(PointCloud{{{1, 2, 3}}});
  EXPECT_EQ(tree.leaves().size(), 1u);
  EXPECT_EQ(tree.radius_neighbors({1, 2, 3}, 0.1), std::vector<std::size_t>{0});
}

TEST(KdTree, EmptyCloudRejected) {
  EXPECT_EQ(code_of([] { KdTree{PointCloud{}}; }), ErrorCode::EmptyCloud);
}

TEST(KdTree, LeavesPartitionTheCloud) {
  std::mt19937_64 rng(30);
  const KdTree tree(PointCloud{random_points(rng, 1000)});
  std::vector<std::size_t> seen;
  for (const auto& leaf : tree.leaves()) {
    EXPECT_LE(leaf.size(), KdTree::kLeafCapacity);
    seen.insert(seen.end(), leaf.begin(), leaf.end());
  }
  std::sort(seen.begin(), seen.end());
  std::vector<std::size_t> all(1000);
  std::iota(all.begin(), all.end(), 0);
  EXPECT_EQ(seen, all);
}

TEST(KdTree, TenThousandPointsMatchBruteForce) {
  std::mt19937_64 rng(31);
  const auto pts = random_points(rng, 10000);
  const KdTree tree(PointCloud{pts});
  std::uniform_real_distribution<double> r(0.5, 40.0);
  for (int q = 0; q < 200; ++q) {
    const Point3 c = random_point(rng, 120.0);
    const double radius = r(rng);
    EXPECT_EQ(tree.radius_neighbors(c, radius), brute_force(pts, c, radius));
  }
}

TEST(KdTree, HundredRandomCloudsMatchBruteForce) {
  std::mt19937_64 rng(32);
  std::uniform_int_distribution<std::size_t> size(1, 10000);
  std::uniform_real_distribution<double> r(0.1, 60.0);
  for (int cloud = 0; cloud < 100; ++cloud) {
    const auto pts = random_points(rng, cloud < 10 ? cloud + 1 : size(rng));
    const KdTree tree(PointCloud{pts});
    for (int q = 0; q < 10; ++q) {
      const Point3 c = q % 2 ? pts[static_cast<std::size_t>(q) % pts.size()] : random_point(rng);
      const double radius = r(rng);
      ASSERT_EQ(tree.radius_neighbors(c, radius), brute_force(pts, c, radius)) << "cloud " << cloud;
    }
  }
}

TEST(KdTree, DuplicatesAllReturned) {
  std::vector<Point3> pts(50, Point3(1, 1, 1));
  pts.push_back({10, 10, 10});
  const KdTree tree(PointCloud{pts});
  EXPECT_EQ(tree.size(), 51u);
  EXPECT_EQ(tree.radius_neighbors({1, 1, 1}, 0.5).size(), 50u);
}

TEST(RadiusNeighbors, TinyRadiusOnAPoint) {
  std::mt19937_64 rng(33);
  const auto pts = random_points(rng, 500);
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) min_gap = std::min(min_gap, (pts[i] - pts[j]).norm());
  const KdTree tree(PointCloud{pts});
  EXPECT_EQ(radius_neighbors(tree, pts[42], min_gap / 2), std::vector<std::size_t>{42});
}

TEST(RadiusNeighbors, InfiniteRadiusReturnsAll) {
  std::mt19937_64 rng(34);
  const KdTree tree(PointCloud{random_points(rng, 300)});
  EXPECT_EQ(tree.radius_neighbors({0, 0, 0}, std::numeric_limits<double>::infinity()).size(), 300u);
}

TEST(RadiusNeighbors, NonPositiveRadiusRejected) {
  const KdTree tree(PointCloud{{{0, 0, 0}}});
  EXPECT_EQ(code_of([&] { tree.radius_neighbors({0, 0, 0}, 0.0); }), ErrorCode::InvalidArgument);
}

TEST(EuclideanCluster, TwoBallsApart) {
  std::mt19937_64 rng(35);
  auto pts = sphere_surface(rng, {0, 0, 0}, 5.0, 200);
  const auto other = sphere_surface(rng, {100, 0, 0}, 5.0, 200);
  pts.insert(pts.end(), other.begin(), other.end());
  const auto clusters = euclidean_cluster(KdTree(PointCloud{pts}), 5.0);
  ASSERT_EQ(clusters.size(), 2u);
  EXPECT_EQ(clusters[0].size(), 200u);
  EXPECT_EQ(clusters[1].size(), 200u);
  EXPECT_EQ(clusters[0].front(), 0u);
  EXPECT_EQ(clusters[1].front(), 200u);
}

TEST(EuclideanCluster, HugeLinkRadiusGivesOneCluster) {
  std::mt19937_64 rng(36);
  EXPECT_EQ(euclidean_cluster(KdTree(PointCloud{random_points(rng, 200)}), 1000.0).size(), 1u);
}

TEST(EuclideanCluster, IsolatedPointsAreSingletons) {
  std::vector<Point3> pts;
  for (int i = 0; i < 20; ++i) pts.push_back({10.0 * i, 0, 0});
  const auto clusters = euclidean_cluster(KdTree(PointCloud{pts}), 5.0);
  ASSERT_EQ(clusters.size(), 20u);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(clusters[i], std::vector<std::size_t>{i});
}

TEST(EuclideanCluster, IndependentOfPointOrder) {
  std::mt19937_64 rng(37);
  std::vector<Point3> pts;
  for (const Point3& c : {Point3(0, 0, 0), Point3(60, 0, 0), Point3(0, 70, 0), Point3(20, 30, 50)}) {
    const auto s = sphere_surface(rng, c, 5.0, 150);
    pts.insert(pts.end(), s.begin(), s.end());
  }
  const auto reference = as_sets(euclidean_cluster(KdTree(PointCloud{pts}), 4.0));
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<std::size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Point3> shuffled;
    for (auto i : perm) shuffled.push_back(pts[i]);
    EXPECT_EQ(as_sets(euclidean_cluster(KdTree(PointCloud{shuffled}), 4.0), perm), reference);
  }
}

TEST(FitSphere, ExactPoints) {
  std::mt19937_64 rng(38);
  const auto pts = sphere_surface(rng, {10, -5, 3}, 7.5, 100);
  const auto fit = fit_sphere(pts);
  EXPECT_LT((fit.sphere.center - Point3(10, -5, 3)).norm(), 1e-9);
  EXPECT_NEAR(fit.sphere.radius, 7.5, 1e-9);
  EXPECT_LT(fit.rms, 1e-9);
}

TEST(FitSphere, RegularTetrahedron) {
  const double s = 1.0 / std::sqrt(3.0);
  const std::vector<Point3> pts{{s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
  const auto fit = fit_sphere(pts);
  EXPECT_LT(fit.sphere.center.norm(), 1e-12);
  EXPECT_NEAR(fit.sphere.radius, 1.0, 1e-12);
}

TEST(FitSphere, CoplanarIsDegenerate) {
  std::vector<Point3> pts;
  for (int i = 0; i < 30; ++i) pts.push_back({std::cos(i * 0.2) * 5, std::sin(i * 0.2) * 5, 0.0});
  EXPECT_EQ(code_of([&] { fit_sphere(pts); }), ErrorCode::DegenerateFit);
  EXPECT_EQ(code_of([] { fit_sphere(std::vector<Point3>{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}); }), ErrorCode::DegenerateFit);
}

TEST(FitSphere, NoisySurfaceCenterWithinHalfTenth) {
  std::mt19937_64 rng(39);
  std::normal_distribution<double> noise(0.0, 0.1);
  int good = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Point3 center = random_point(rng, 200.0);
    auto pts = sphere_surface(rng, center, 5.0, 500);
    for (auto& p : pts) p += Point3(noise(rng), noise(rng), noise(rng));
    if ((fit_sphere(pts).sphere.center - center).norm() < 0.05) ++good;
  }
  EXPECT_GE(good, 95);
}

TEST(FitPlane, ZEqualsZero) {
  const auto pl = fit_plane_3pts({0, 0, 0}, {1, 0, 0}, {0, 1, 0});
  EXPECT_NEAR(pl.a, 0.0, 1e-15);
  EXPECT_NEAR(pl.b, 0.0, 1e-15);
  EXPECT_NEAR(pl.c, 1.0, 1e-15);
  EXPECT_NEAR(pl.d, 0.0, 1e-15);
}

TEST(FitPlane, DiagonalPlane) {
  const Point3 p1(1, 0, 0), p2(0, 1, 0), p3(0, 0, 1);
  const auto pl = fit_plane_3pts(p1, p2, p3);
  const double s = 1.0 / std::sqrt(3.0);
  EXPECT_LT((pl.normal() - Point3(s, s, s)).norm(), 1e-12);
  EXPECT_NEAR(pl.d, -s, 1e-12);
  for (const auto& p : {p1, p2, p3}) EXPECT_NEAR(pl.normal().dot(p) + pl.d, 0.0, 1e-12);
}

TEST(FitPlane, CollinearRejected) {
  EXPECT_EQ(code_of([] { fit_plane_3pts({0, 0, 0}, {1, 1, 1}, {2, 2, 2}); }), ErrorCode::CollinearPoints);
}

TEST(PointPlaneDistance, Simple) {
  const auto pl = fit_plane_3pts({0, 0, 0}, {1, 0, 0}, {0, 1, 0});
  EXPECT_DOUBLE_EQ(point_plane_distance(pl, {0, 0, 5}), 5.0);
  EXPECT_DOUBLE_EQ(point_plane_distance(pl, {0, 0, -5}), 5.0);
  EXPECT_DOUBLE_EQ(point_plane_distance(pl, {3, -7, 0}), 0.0);
}

TEST(PointPlaneDistance, MatchesExplicitProjection) {
  std::mt19937_64 rng(40);
  for (int i = 0; i < 500; ++i) {
    const Point3 a = random_point(rng), b = random_point(rng), c = random_point(rng);
    const auto pl = fit_plane_3pts(a, b, c);
    const Point3 p = random_point(rng);
    const Eigen::Vector3d n = (b - a).cross(c - a).normalized();
    const Point3 closest = p - n.dot(p - a) * n;
    EXPECT_NEAR(point_plane_distance(pl, p), (p - closest).norm(), 1e-9);
    EXPECT_NEAR(point_plane_distance(pl, closest), 0.0, 1e-9);
  }
}

TEST(MatchCorrespondence, RecoversPlantedShuffle) {
  std::mt19937_64 rng(41);
  const std::vector<Point3> a{{0, 0, 0}, {60, 0, 0}, {0, 90, 0}, {20, 35, 50}, {-30, 10, 25}};
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = random_transform(rng, FrameTag::Pic, FrameTag::Cam);
    std::vector<std::size_t> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Point3> b(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) b[perm[i]] = apply(t, a[i]);
    const auto m = match_correspondence(a, b);
    EXPECT_EQ(m.permutation, perm);
    EXPECT_LT(m.cost, 1e-12);

    // End to end: matched pairs register back to the planted transform.
    Correspondences c;
    c.p_frame = FrameTag::Pic;
    c.p = a;
    for (auto j : m.permutation) c.q.push_back(b[j]);
    const auto reg = register_filtered(c);
    EXPECT_LT(rotation_distance(reg.transform.rotation(), t.rotation()), 1e-9);
    EXPECT_LT((reg.transform.translation() - t.translation()).norm(), 1e-9);
  }
}

TEST(MatchCorrespondence, EquilateralIsAmbiguous) {
  const std::vector<Point3> tri{{0, 0, 0}, {10, 0, 0}, {5, 10 * std::sqrt(3.0) / 2, 0}};
  EXPECT_EQ(code_of([&] { match_correspondence(tri, tri); }), ErrorCode::AmbiguousMatch);
}

TEST(MatchCorrespondence, IdenticalSetsGiveIdentity) {
  const std::vector<Point3> a{{0, 0, 0}, {60, 0, 0}, {0, 90, 0}, {20, 35, 50}};
  EXPECT_EQ(match_correspondence(a, a).permutation, (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(MatchCorrespondence, SizeChecks) {
  const std::vector<Point3> a{{0, 0, 0}, {60, 0, 0}, {0, 90, 0}, {20, 35, 50}};
  const std::vector<Point3> b{{0, 0, 0}, {60, 0, 0}, {0, 90, 0}};
  EXPECT_EQ(code_of([&] { match_correspondence(a, b); }), ErrorCode::SizeMismatch);
}

TEST(XyzIo, RoundTrip) {
  std::mt19937_64 rng(42);
  const PointCloud cloud{random_points(rng, 50)};
  const auto path = std::filesystem::temp_directory_path() / "hipnav_xyz_roundtrip.xyz";
  write_xyz(path, cloud);
  const auto back = read_xyz(path);
  ASSERT_EQ(back.size(), cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) EXPECT_LT((back.points[i] - cloud.points[i]).norm(), 1e-6);
  std::filesystem::remove(path);
  EXPECT_EQ(code_of([&] { read_xyz(path); }), ErrorCode::Io);
}
