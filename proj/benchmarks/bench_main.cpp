#include <benchmark/benchmark.h>

#include <random>

#include "hipnav/fitting.hpp"
#include "hipnav/kdtree.hpp"
#include "hipnav/registration.hpp"

using namespace hipnav;

namespace {

std::vector<Point3> cloud(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  std::vector<Point3> out(n);
  for (auto& p : out) p = {u(rng), u(rng), u(rng)};
  return out;
}

void BM_KdTreeBuild(benchmark::State& state) {
  const auto pts = cloud(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(KdTree(PointCloud{pts}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KdTreeBuild)->RangeMultiplier(10)->Range(1000, 100000);

void BM_RadiusNeighbors(benchmark::State& state) {
  const auto pts = cloud(static_cast<std::size_t>(state.range(0)), 2);
  const KdTree tree(PointCloud{pts});
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tree.radius_neighbors(pts[i], 5.0));
    i = (i + 7919) % pts.size();
  }
}
BENCHMARK(BM_RadiusNeighbors)->RangeMultiplier(10)->Range(1000, 100000);

void BM_EuclideanCluster(benchmark::State& state) {
  const KdTree tree(PointCloud{cloud(static_cast<std::size_t>(state.range(0)), 3)});
  for (auto _ : state) benchmark::DoNotOptimize(euclidean_cluster(tree, 4.0));
}
BENCHMARK(BM_EuclideanCluster)->Arg(1000)->Arg(10000);

void BM_FitSphere(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Point3> pts(static_cast<std::size_t>(state.range(0)));
  for (auto& p : pts) p = Point3(g(rng), g(rng), g(rng)).normalized() * 5.0;
  for (auto _ : state) benchmark::DoNotOptimize(fit_sphere(pts));
}
BENCHMARK(BM_FitSphere)->Arg(100)->Arg(1000);

Correspondences mapped(std::size_t n) {
  Correspondences c;
  c.p = cloud(n, 5);
  const Matrix3 r = Eigen::AngleAxisd(0.4, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
  for (const auto& x : c.p) c.q.push_back(r * x + Point3(10, -20, 300));
  return c;
}

void BM_Kabsch(benchmark::State& state) {
  const auto c = mapped(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kabsch(c));
}
BENCHMARK(BM_Kabsch)->Arg(20)->Arg(1000);

void BM_RegisterFiltered(benchmark::State& state) {
  auto c = mapped(40);
  c.q[3] += Point3(10, 0, 0);
  c.q[17] += Point3(0, 12, 0);
  for (auto _ : state) benchmark::DoNotOptimize(register_filtered(c, {.beta = 4.0}));
}
BENCHMARK(BM_RegisterFiltered);

}  // namespace

BENCHMARK_MAIN();
