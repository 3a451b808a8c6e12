#include "pathguide/voxel_map.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pathguide {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFreeClamp = 1e4;  // meters, used when one set is empty

// 1-D squared distance transform, lower envelope of parabolas
// (Felzenszwalb & Huttenlocher). f holds squared distances in voxel units.
void dt1d(std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
          std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (f[v[k]] == kInf) {
      v[k] = q;
      continue;
    }
    double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
    while (k > 0 && s <= z[k]) {
      --k;
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (f[v[0]] == kInf) {  // no seed in this scanline
    std::fill(d.begin(), d.begin() + n, kInf);
    return;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

// Exact Euclidean distance (voxel units) to the nearest seed voxel center.
std::vector<double> edt3d(const std::vector<uint8_t>& seed, const GridSpec& spec) {
  const int nx = spec.dims.x(), ny = spec.dims.y(), nz = spec.dims.z();
  std::vector<double> g(spec.cell_count());
  for (size_t i = 0; i < g.size(); ++i) g[i] = seed[i] ? 0.0 : kInf;

  const int nmax = std::max({nx, ny, nz});
  std::vector<double> f(nmax), d(nmax), z(nmax + 1);
  std::vector<int> v(nmax);

  auto idx = [&](int x, int y, int z_) {
    return static_cast<size_t>(x) +
           static_cast<size_t>(nx) * (static_cast<size_t>(y) +
                                      static_cast<size_t>(ny) * static_cast<size_t>(z_));
  };

  // pass along x
  f.resize(nx); d.resize(nx);
  for (int zc = 0; zc < nz; ++zc)
    for (int y = 0; y < ny; ++y) {
      for (int x = 0; x < nx; ++x) f[x] = g[idx(x, y, zc)];
      dt1d(f, d, v, z);
      for (int x = 0; x < nx; ++x) g[idx(x, y, zc)] = d[x];
    }
  // pass along y
  f.resize(ny); d.resize(ny);
  for (int zc = 0; zc < nz; ++zc)
    for (int x = 0; x < nx; ++x) {
      for (int y = 0; y < ny; ++y) f[y] = g[idx(x, y, zc)];
      dt1d(f, d, v, z);
      for (int y = 0; y < ny; ++y) g[idx(x, y, zc)] = d[y];
    }
  // pass along z
  f.resize(nz); d.resize(nz);
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      for (int zc = 0; zc < nz; ++zc) f[zc] = g[idx(x, y, zc)];
      dt1d(f, d, v, z);
      for (int zc = 0; zc < nz; ++zc) g[idx(x, y, zc)] = d[zc];
    }

  for (auto& val : g) val = (val == kInf) ? kInf : std::sqrt(val);
  return g;
}

}  // namespace

VoxelField::VoxelField(std::vector<uint8_t> occupancy, const GridSpec& spec,
                       QueryPolicy policy)
    : spec_(spec), policy_(policy), occupancy_(std::move(occupancy)) {
  if (spec_.voxel_size <= 0.0) throw std::invalid_argument("voxel_size must be > 0");
  if ((spec_.dims.array() < 1).any()) throw std::invalid_argument("dims must be >= 1");
  if (occupancy_.size() != spec_.cell_count())
    throw std::invalid_argument("occupancy size does not match grid dims");

  std::vector<uint8_t> free(occupancy_.size());
  for (size_t i = 0; i < free.size(); ++i) free[i] = occupancy_[i] ? 0 : 1;

  const auto dist_occ = edt3d(occupancy_, spec_);
  const auto dist_free = edt3d(free, spec_);

  esdf_.resize(occupancy_.size());
  for (size_t i = 0; i < esdf_.size(); ++i) {
    // one of the two terms is always 0 at a voxel center
    double docc = (dist_occ[i] == kInf) ? kFreeClamp : dist_occ[i] * spec_.voxel_size;
    double dfree = (dist_free[i] == kInf) ? kFreeClamp : dist_free[i] * spec_.voxel_size;
    esdf_[i] = docc - dfree;
  }
}

double VoxelField::distance_at(const Vec3& p) const {
  if (!spec_.bounds().contains(p)) return policy_.out_of_bounds_distance;
  // cell between voxel centers, clamped so the 8 corners exist
  Vec3 local = (p - spec_.origin) / spec_.voxel_size - Vec3(0.5, 0.5, 0.5);
  Vec3i base = local.array().floor().cast<int>();
  for (int a = 0; a < 3; ++a)
    base[a] = std::clamp(base[a], 0, std::max(spec_.dims[a] - 2, 0));
  Vec3 u = local - base.cast<double>();
  for (int a = 0; a < 3; ++a) {
    if (spec_.dims[a] == 1) u[a] = 0.0;
    u[a] = std::clamp(u[a], 0.0, 1.0);
  }
  double val = 0.0;
  for (int dz = 0; dz < 2; ++dz)
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) {
        Vec3i c = base + Vec3i(dx, dy, dz);
        c = c.cwiseMin(spec_.dims - Vec3i::Ones());
        const double w = (dx ? u.x() : 1.0 - u.x()) * (dy ? u.y() : 1.0 - u.y()) *
                         (dz ? u.z() : 1.0 - u.z());
        val += w * esdf_[spec_.linear(c)];
      }
  return val;
}

Vec3 VoxelField::gradient_at(const Vec3& p) const {
  if (!spec_.bounds().contains(p)) return Vec3::Zero();
  Vec3 local = (p - spec_.origin) / spec_.voxel_size - Vec3(0.5, 0.5, 0.5);
  Vec3i base = local.array().floor().cast<int>();
  for (int a = 0; a < 3; ++a)
    base[a] = std::clamp(base[a], 0, std::max(spec_.dims[a] - 2, 0));
  Vec3 u = local - base.cast<double>();
  for (int a = 0; a < 3; ++a) {
    if (spec_.dims[a] == 1) u[a] = 0.0;
    u[a] = std::clamp(u[a], 0.0, 1.0);
  }
  Vec3 grad = Vec3::Zero();
  for (int dz = 0; dz < 2; ++dz)
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) {
        Vec3i c = base + Vec3i(dx, dy, dz);
        c = c.cwiseMin(spec_.dims - Vec3i::Ones());
        const double v = esdf_[spec_.linear(c)];
        const double wx = dx ? u.x() : 1.0 - u.x();
        const double wy = dy ? u.y() : 1.0 - u.y();
        const double wz = dz ? u.z() : 1.0 - u.z();
        grad.x() += (dx ? 1.0 : -1.0) * wy * wz * v;
        grad.y() += (dy ? 1.0 : -1.0) * wx * wz * v;
        grad.z() += (dz ? 1.0 : -1.0) * wx * wy * v;
      }
  return grad / spec_.voxel_size;
}

LineVisibility VoxelField::line_visible(const Vec3& a, const Vec3& b,
                                        double margin) const {
  const double len = (b - a).norm();
  const double step = spec_.voxel_size / 2.0;
  const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
  for (int i = 0; i <= n; ++i) {
    const Vec3 p = a + (b - a) * (static_cast<double>(i) / n);
    if (distance_at(p) <= margin) {
      Vec3i idx = spec_.index_of(p);
      for (int ax = 0; ax < 3; ++ax) idx[ax] = std::clamp(idx[ax], 0, spec_.dims[ax] - 1);
      return {false, idx};
    }
  }
  return {true, Vec3i::Zero()};
}

void VoxelField::save(std::ostream& os) const {
  os << spec_.origin.x() << ' ' << spec_.origin.y() << ' ' << spec_.origin.z() << ' '
     << spec_.voxel_size << ' ' << spec_.dims.x() << ' ' << spec_.dims.y() << ' '
     << spec_.dims.z() << '\n';
  for (size_t i = 0; i < occupancy_.size(); ++i) {
    os << static_cast<int>(occupancy_[i]);
    os << (((i + 1) % static_cast<size_t>(spec_.dims.x()) == 0) ? '\n' : ' ');
  }
}

VoxelField VoxelField::load(std::istream& is, QueryPolicy policy) {
  GridSpec spec;
  if (!(is >> spec.origin.x() >> spec.origin.y() >> spec.origin.z() >>
        spec.voxel_size >> spec.dims.x() >> spec.dims.y() >> spec.dims.z()))
    throw std::invalid_argument("malformed map header");
  std::vector<uint8_t> occ(spec.cell_count());
  for (auto& v : occ) {
    int x;
    if (!(is >> x) || (x != 0 && x != 1))
      throw std::invalid_argument("malformed occupancy data");
    v = static_cast<uint8_t>(x);
  }
  return VoxelField(std::move(occ), spec, policy);
}

void VoxelField::save_file(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  save(os);
}

VoxelField VoxelField::load_file(const std::string& path, QueryPolicy policy) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return load(is, policy);
}

}  // namespace pathguide
