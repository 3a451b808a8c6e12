#include <doctest.h>

#include <random>
#include <sstream>

#include "pathguide/voxel_map.hpp"

using namespace pathguide;

namespace {

GridSpec make_spec(int n, double vs = 0.1, Vec3 origin = Vec3::Zero()) {
  GridSpec spec;
  spec.origin = origin;
  spec.voxel_size = vs;
  spec.dims = Vec3i(n, n, n);
  return spec;
}

std::vector<uint8_t> random_occupancy(const GridSpec& spec, double fill,
                                      uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<uint8_t> occ(spec.cell_count());
  for (auto& v : occ) v = u(rng) < fill ? 1 : 0;
  return occ;
}

// O(n^2) all-pairs oracle: distance from each voxel center to the nearest
// center of opposite occupancy.
std::vector<double> brute_force_esdf(const std::vector<uint8_t>& occ,
                                     const GridSpec& spec) {
  std::vector<Vec3i> occupied, free;
  for (int z = 0; z < spec.dims.z(); ++z)
    for (int y = 0; y < spec.dims.y(); ++y)
      for (int x = 0; x < spec.dims.x(); ++x)
        (occ[spec.linear({x, y, z})] ? occupied : free).push_back({x, y, z});

  auto nearest = [&](const Vec3i& from, const std::vector<Vec3i>& set) {
    double best = 1e18;
    for (const auto& v : set)
      best = std::min(best, (v - from).cast<double>().norm());
    return best * spec.voxel_size;
  };

  std::vector<double> out(spec.cell_count());
  for (int z = 0; z < spec.dims.z(); ++z)
    for (int y = 0; y < spec.dims.y(); ++y)
      for (int x = 0; x < spec.dims.x(); ++x) {
        const Vec3i idx(x, y, z);
        if (occ[spec.linear(idx)])
          out[spec.linear(idx)] = free.empty() ? -1e4 : -nearest(idx, free);
        else
          out[spec.linear(idx)] = occupied.empty() ? 1e4 : nearest(idx, occupied);
      }
  return out;
}

// independent scalar trilinear interpolation over the stored esdf
double trilinear_oracle(const VoxelField& f, const Vec3& p) {
  const auto& spec = f.spec();
  const Vec3 local = (p - spec.origin) / spec.voxel_size - Vec3(0.5, 0.5, 0.5);
  int bx = std::clamp(static_cast<int>(std::floor(local.x())), 0, spec.dims.x() - 2);
  int by = std::clamp(static_cast<int>(std::floor(local.y())), 0, spec.dims.y() - 2);
  int bz = std::clamp(static_cast<int>(std::floor(local.z())), 0, spec.dims.z() - 2);
  const double ux = local.x() - bx, uy = local.y() - by, uz = local.z() - bz;
  auto v = [&](int dx, int dy, int dz) {
    return f.esdf_at({bx + dx, by + dy, bz + dz});
  };
  const double c00 = v(0, 0, 0) * (1 - ux) + v(1, 0, 0) * ux;
  const double c10 = v(0, 1, 0) * (1 - ux) + v(1, 1, 0) * ux;
  const double c01 = v(0, 0, 1) * (1 - ux) + v(1, 0, 1) * ux;
  const double c11 = v(0, 1, 1) * (1 - ux) + v(1, 1, 1) * ux;
  return (c00 * (1 - uy) + c10 * uy) * (1 - uz) + (c01 * (1 - uy) + c11 * uy) * uz;
}

}  // namespace

TEST_CASE("all-free grid clamps to a large free distance") {
  const auto spec = make_spec(8);
  VoxelField f(std::vector<uint8_t>(spec.cell_count(), 0), spec);
  for (int z = 0; z < 8; ++z)
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x)
        CHECK(f.esdf_at({x, y, z}) >= f.policy().out_of_bounds_distance);
}

TEST_CASE("single occupied voxel gives face-adjacent distance of one voxel") {
  const auto spec = make_spec(20);
  std::vector<uint8_t> occ(spec.cell_count(), 0);
  occ[spec.linear({5, 5, 5})] = 1;
  VoxelField f(occ, spec);
  CHECK(f.esdf_at({6, 5, 5}) == doctest::Approx(0.1));
  CHECK(f.esdf_at({5, 5, 5}) <= 0.0);
}

TEST_CASE("esdf matches the brute-force oracle on a random grid") {
  const auto spec = make_spec(20);
  const auto occ = random_occupancy(spec, 0.10, 42);
  VoxelField f(occ, spec);
  const auto oracle = brute_force_esdf(occ, spec);
  for (int z = 0; z < 20; ++z)
    for (int y = 0; y < 20; ++y)
      for (int x = 0; x < 20; ++x) {
        const Vec3i idx(x, y, z);
        CHECK(std::abs(f.esdf_at(idx) - oracle[spec.linear(idx)]) <=
              spec.voxel_size + 1e-12);
      }
}

TEST_CASE("sign agrees with occupancy everywhere") {
  const auto spec = make_spec(16);
  const auto occ = random_occupancy(spec, 0.25, 7);
  VoxelField f(occ, spec);
  for (int z = 0; z < 16; ++z)
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) {
        const Vec3i idx(x, y, z);
        if (occ[spec.linear(idx)])
          CHECK(f.esdf_at(idx) <= 0.0);
        else
          CHECK(f.esdf_at(idx) >= 0.0);
      }
}

TEST_CASE("dimension mismatch is rejected") {
  const auto spec = make_spec(4);
  CHECK_THROWS_AS(VoxelField(std::vector<uint8_t>(10, 0), spec),
                  std::invalid_argument);
}

TEST_CASE("distance_at at voxel centers and midpoints") {
  const auto spec = make_spec(20);
  std::vector<uint8_t> occ(spec.cell_count(), 0);
  occ[spec.linear({5, 5, 5})] = 1;
  VoxelField f(occ, spec);

  const Vec3 center = spec.center_of({10, 10, 10});
  CHECK(f.distance_at(center) == doctest::Approx(f.esdf_at({10, 10, 10})));

  // linear blend between two face-adjacent centers
  const Vec3 a = spec.center_of({7, 5, 5});
  const Vec3 b = spec.center_of({8, 5, 5});
  const double expect = 0.5 * (f.esdf_at({7, 5, 5}) + f.esdf_at({8, 5, 5}));
  CHECK(f.distance_at(0.5 * (a + b)) == doctest::Approx(expect));
}

TEST_CASE("distance_at matches the scalar trilinear oracle at random points") {
  const auto spec = make_spec(16);
  VoxelField f(random_occupancy(spec, 0.15, 3), spec);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.06, 16 * 0.1 - 0.06);
  for (int i = 0; i < 100; ++i) {
    const Vec3 p(u(rng), u(rng), u(rng));
    CHECK(f.distance_at(p) == doctest::Approx(trilinear_oracle(f, p)).epsilon(1e-12));
  }
}

TEST_CASE("out-of-bounds queries use the policy distance and zero gradient") {
  const auto spec = make_spec(8);
  VoxelField f(random_occupancy(spec, 0.2, 5), spec, QueryPolicy{42.0, 0.0});
  CHECK(f.distance_at(Vec3(-1, 0.4, 0.4)) == 42.0);
  CHECK(f.gradient_at(Vec3(-1, 0.4, 0.4)).norm() == 0.0);
}

TEST_CASE("gradient matches central finite differences of distance_at") {
  const auto spec = make_spec(16);
  VoxelField f(random_occupancy(spec, 0.12, 9), spec);
  std::mt19937_64 rng(21);
  const double vs = spec.voxel_size;
  std::uniform_int_distribution<int> cell(2, 13);
  std::uniform_real_distribution<double> frac(0.2, 0.8);
  const double h = 1e-4 * vs;
  int tested = 0;
  for (int i = 0; i < 100; ++i) {
    // stay inside one interpolation cell so the field is smooth there
    const Vec3 base = spec.origin +
                      vs * Vec3(cell(rng) + 0.5 + frac(rng), cell(rng) + 0.5 + frac(rng),
                                cell(rng) + 0.5 + frac(rng));
    const Vec3 g = f.gradient_at(base);
    for (int ax = 0; ax < 3; ++ax) {
      Vec3 dp = Vec3::Zero();
      dp[ax] = h;
      const double fd = (f.distance_at(base + dp) - f.distance_at(base - dp)) / (2 * h);
      if (std::abs(fd) > 1e-6) {
        CHECK(g[ax] == doctest::Approx(fd).epsilon(1e-4));
        ++tested;
      }
    }
  }
  CHECK(tested > 100);
}

TEST_CASE("gradient vanishes between two symmetric obstacles") {
  const auto spec = make_spec(21);
  std::vector<uint8_t> occ(spec.cell_count(), 0);
  occ[spec.linear({5, 10, 10})] = 1;
  occ[spec.linear({14, 10, 10})] = 1;
  VoxelField f(occ, spec);
  // midpoint falls mid-cell between voxels 9 and 10, inside one smooth cell
  const Vec3 mid = 0.5 * (spec.center_of({9, 10, 10}) + spec.center_of({10, 10, 10}));
  CHECK(std::abs(f.gradient_at(mid).x()) < 1e-9);
}

TEST_CASE("line visibility") {
  const auto spec = make_spec(20);
  std::vector<uint8_t> occ(spec.cell_count(), 0);
  occ[spec.linear({5, 5, 5})] = 1;
  VoxelField f(occ, spec);

  const Vec3 free_pt = spec.center_of({15, 15, 15});
  CHECK(f.line_visible(free_pt, free_pt, 0.0).visible);

  const Vec3 a = spec.center_of({1, 5, 5});
  const Vec3 b = spec.center_of({12, 5, 5});
  const auto blocked = f.line_visible(a, b, 0.0);
  CHECK_FALSE(blocked.visible);
  CHECK(blocked.blocking == Vec3i(5, 5, 5));

  // exhaustive fine-step oracle agrees
  bool oracle_visible = true;
  for (int i = 0; i <= 1000; ++i) {
    const Vec3 p = a + (b - a) * (i / 1000.0);
    if (f.distance_at(p) <= 0.0) oracle_visible = false;
  }
  CHECK_FALSE(oracle_visible);

  // grazing pass below margin
  const Vec3 c = spec.center_of({1, 7, 5});
  const Vec3 d = spec.center_of({12, 7, 5});
  CHECK(f.line_visible(c, d, 0.0).visible);
  CHECK_FALSE(f.line_visible(c, d, 0.5).visible);
}

TEST_CASE("line visibility is symmetric") {
  const auto spec = make_spec(16);
  VoxelField f(random_occupancy(spec, 0.1, 13), spec);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.1, 1.5);
  for (int i = 0; i < 50; ++i) {
    const Vec3 a(u(rng), u(rng), u(rng));
    const Vec3 b(u(rng), u(rng), u(rng));
    CHECK(f.line_visible(a, b, 0.05).visible == f.line_visible(b, a, 0.05).visible);
  }
}

TEST_CASE("1-Lipschitz up to grid slack") {
  const auto spec = make_spec(16);
  VoxelField f(random_occupancy(spec, 0.15, 17), spec);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 1.5);
  for (int i = 0; i < 200; ++i) {
    const Vec3 p(u(rng), u(rng), u(rng));
    const Vec3 q(u(rng), u(rng), u(rng));
    CHECK(std::abs(f.distance_at(p) - f.distance_at(q)) <=
          (p - q).norm() + 2 * spec.voxel_size);
  }
}

TEST_CASE("map file round-trips bit-exactly") {
  const auto spec = make_spec(6, 0.25, Vec3(-1.0, 2.0, 0.5));
  VoxelField f(random_occupancy(spec, 0.3, 77), spec);
  std::stringstream ss;
  f.save(ss);
  const std::string first = ss.str();
  VoxelField g = VoxelField::load(ss);
  std::stringstream ss2;
  g.save(ss2);
  CHECK(first == ss2.str());
  CHECK(g.occupancy() == f.occupancy());
}
