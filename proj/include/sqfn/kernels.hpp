#pragma once

// Admissible test kernels: supported in the closed unit ball, mean zero, with
// alpha-Hoelder seminorm at most one. The supremum over the whole class is
// replaced everywhere by a maximum over a finite dictionary of such kernels.

#include "sqfn/grid.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace sqfn {

/// Tabulation of kernels on [-kRefHalfWidth, kRefHalfWidth]^n. The collar
/// outside the unit ball lets support violations be represented.
inline constexpr double kRefHalfWidth = 1.25;

inline int default_reference_points(int dim) { return dim == 1 ? 641 : 81; }

struct AdmissibilityReport {
  bool support_ok = false;
  bool mean_ok = false;
  bool holder_ok = false;
  bool degenerate = false;
  double support_leak = 0.0;  ///< max |phi| on reference nodes with |u| > 1
  double mean_residual = 0.0;
  double max_abs = 0.0;
  double holder_seminorm = 0.0;

  bool passes() const { return support_ok && mean_ok && holder_ok; }
};

template <std::floating_point Scalar>
class TestKernel {
 public:
  using Values = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  /// Tabulates fn as given (no support clipping, no normalization).
  template <class Fn>
  static TestKernel tabulate(int dim, double alpha, Fn&& fn, int ref_points = 0,
                             std::string label = "custom") {
    TestKernel k(dim, alpha, ref_points > 0 ? ref_points : default_reference_points(dim),
                 std::move(label));
    for (Eigen::Index i = 0; i < k.values_.size(); ++i)
      k.values_[i] = Scalar(fn(k.reference_node(std::size_t(i))));
    k.refresh_diagnostics();
    return k;
  }

  int dim() const { return dim_; }
  double alpha() const { return alpha_; }
  int reference_points() const { return ref_points_; }
  double reference_spacing() const { return ref_h_; }
  const Values& values() const { return values_; }
  const std::string& label() const { return label_; }
  double holder_seminorm_estimate() const { return seminorm_; }
  double mean_residual() const { return mean_residual_; }
  double max_abs() const { return values_.size() ? double(values_.abs().maxCoeff()) : 0.0; }

  std::size_t reference_size() const { return std::size_t(values_.size()); }

  Point reference_node(std::size_t i) const {
    const int m = ref_points_;
    const int i0 = dim_ == 1 ? int(i) : int(i % std::size_t(m));
    const int i1 = dim_ == 1 ? 0 : int(i / std::size_t(m));
    const double x = -kRefHalfWidth + i0 * ref_h_;
    return dim_ == 1 ? point(x) : point(x, -kRefHalfWidth + i1 * ref_h_);
  }

  /// Multilinear interpolation of the tabulation; zero off the reference box.
  Scalar eval(const Point& u) const {
    const double s0 = (u[0] + kRefHalfWidth) / ref_h_;
    const int j0 = int(std::floor(s0));
    const double a0 = s0 - j0;
    if (dim_ == 1) {
      if (a0 == 0.0) return at(j0, 0);
      return Scalar((1.0 - a0) * at(j0, 0) + a0 * at(j0 + 1, 0));
    }
    const double s1 = (u[1] + kRefHalfWidth) / ref_h_;
    const int j1 = int(std::floor(s1));
    const double a1 = s1 - j1;
    return Scalar((1.0 - a0) * (1.0 - a1) * at(j0, j1) + a0 * (1.0 - a1) * at(j0 + 1, j1) +
                  (1.0 - a0) * a1 * at(j0, j1 + 1) + a0 * a1 * at(j0 + 1, j1 + 1));
  }

  /// Brute-force alpha-Hoelder seminorm over all pairs of reference nodes.
  double measure_seminorm() const {
    const int m = ref_points_;
    const int span1 = dim_ == 1 ? 0 : m - 1;
    double best = 0.0;
    // Offsets (d0, d1) in a half-plane so each unordered pair is visited once.
    for (int d1 = 0; d1 <= span1; ++d1) {
      for (int d0 = (d1 == 0 ? 1 : -(m - 1)); d0 <= m - 1; ++d0) {
        const double dist2 = ref_h_ * ref_h_ * double(d0 * d0 + d1 * d1);
        const double inv = 1.0 / std::pow(dist2, 0.5 * alpha_);
        const int lo0 = std::max(0, -d0), hi0 = std::min(m, m - d0);
        const int hi1 = dim_ == 1 ? 1 : m - d1;
        double local = 0.0;
        for (int i1 = 0; i1 < hi1; ++i1) {
          for (int i0 = lo0; i0 < hi0; ++i0) {
            const double diff = std::abs(double(at(i0, i1)) - double(at(i0 + d0, i1 + d1)));
            if (diff > local) local = diff;
          }
        }
        best = std::max(best, local * inv);
      }
    }
    return best;
  }

  double measure_mean_residual() const {
    const double cell = dim_ == 1 ? ref_h_ : ref_h_ * ref_h_;
    double s = 0.0;
    for (Eigen::Index i = 0; i < values_.size(); ++i) s += double(values_[i]);
    return std::abs(s * cell);
  }

  AdmissibilityReport verify() const {
    AdmissibilityReport rep;
    rep.max_abs = max_abs();
    for (std::size_t i = 0; i < reference_size(); ++i) {
      if (!within_radius(reference_node(i).squaredNorm(), 1.0, true))
        rep.support_leak = std::max(rep.support_leak, std::abs(double(values_[Eigen::Index(i)])));
    }
    rep.support_ok = rep.support_leak == 0.0;
    rep.mean_residual = measure_mean_residual();
    rep.mean_ok = rep.mean_residual <= 1e-12 * rep.max_abs;
    rep.holder_seminorm = measure_seminorm();
    rep.holder_ok = rep.holder_seminorm <= 1.0 + 1e-9;
    rep.degenerate = rep.holder_seminorm == 0.0;
    return rep;
  }

  /// Mean correction against the unit bump, clipping to the unit ball, then
  /// division by the measured seminorm. Returns false if the seminorm vanishes.
  bool normalize() {
    Values bump(values_.size());
    double sum_phi = 0.0, sum_bump = 0.0;
    for (std::size_t i = 0; i < reference_size(); ++i) {
      const Point u = reference_node(i);
      if (!within_radius(u.squaredNorm(), 1.0, true)) values_[Eigen::Index(i)] = Scalar(0);
      bump[Eigen::Index(i)] = Scalar(unit_bump(u));
      sum_phi += double(values_[Eigen::Index(i)]);
      sum_bump += double(bump[Eigen::Index(i)]);
    }
    values_ -= Scalar(sum_phi / sum_bump) * bump;
    const double s = measure_seminorm();
    if (!(s > 0.0) || !std::isfinite(s)) return false;
    values_ /= Scalar(s);
    refresh_diagnostics();
    return true;
  }

  /// exp(1 - 1/(1 - |u|^2)) inside the unit ball, zero outside; peak value 1.
  static double unit_bump(const Point& u) {
    const double r2 = u.squaredNorm();
    if (r2 >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - r2));
  }

 private:
  TestKernel(int dim, double alpha, int ref_points, std::string label)
      : dim_(dim), alpha_(alpha), ref_points_(ref_points), label_(std::move(label)) {
    if (dim != 1 && dim != 2) throw Error("TestKernel: dimension must be 1 or 2");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("TestKernel: alpha must lie in (0, 1]");
    if (ref_points < 9 || ref_points % 2 == 0)
      throw Error("TestKernel: reference points must be odd and >= 9");
    ref_h_ = 2.0 * kRefHalfWidth / (ref_points - 1);
    const Eigen::Index n = dim == 1 ? ref_points : Eigen::Index(ref_points) * ref_points;
    values_ = Values::Zero(n);
  }

  Scalar at(int i0, int i1) const {
    if (i0 < 0 || i0 >= ref_points_ || i1 < 0 || i1 >= (dim_ == 1 ? 1 : ref_points_))
      return Scalar(0);
    return values_[Eigen::Index(i0) + Eigen::Index(ref_points_) * i1];
  }

  void refresh_diagnostics() {
    seminorm_ = measure_seminorm();
    mean_residual_ = measure_mean_residual();
  }

  int dim_;
  double alpha_;
  int ref_points_;
  double ref_h_ = 0.0;
  Values values_;
  std::string label_;
  double seminorm_ = 0.0;
  double mean_residual_ = 0.0;
};

template <std::floating_point Scalar>
AdmissibilityReport verify_admissible(const TestKernel<Scalar>& k) {
  return k.verify();
}

template <std::floating_point Scalar>
struct KernelDictionary {
  int dim = 1;
  double alpha = 1.0;
  std::uint64_t seed = 0;
  std::vector<TestKernel<Scalar>> kernels;

  std::size_t size() const { return kernels.size(); }
  std::string id() const {
    std::ostringstream os;
    os << "dict-n" << dim << "-a" << alpha << "-D" << kernels.size() << "-r"
       << (kernels.empty() ? 0 : kernels.front().reference_points()) << "-s" << seed;
    return os.str();
  }
};

namespace detail {

/// Uniform draw from mt19937_64 without <random> distributions, whose output
/// differs between standard libraries.
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * double(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

inline constexpr std::uint64_t kDictionarySeed = 0x5157464E4C4142ull;

/// Builds `size` admissible kernels cycling through odd bump differences,
/// translated bump differences and radially oscillating bumps.
template <std::floating_point Scalar = double>
KernelDictionary<Scalar> make_dictionary(int dim, double alpha, int size, int ref_points = 0,
                                         std::uint64_t seed = kDictionarySeed) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("make_dictionary: alpha must lie in (0, 1]");
  if (size < 4) throw Error("make_dictionary: need at least 4 kernels");
  KernelDictionary<Scalar> dict;
  dict.dim = dim;
  dict.alpha = alpha;
  dict.seed = seed;
  std::mt19937_64 rng(seed);
  using K = TestKernel<Scalar>;
  const int max_candidates = 4 * size + 16;
  for (int c = 0; c < max_candidates && int(dict.kernels.size()) < size; ++c) {
    const double angle = dim == 2 ? detail::uniform(rng, 0.0, M_PI) : 0.0;
    const Point e = point(std::cos(angle), dim == 2 ? std::sin(angle) : 0.0);
    std::ostringstream label;
    K candidate = [&] {
      switch (c % 3) {
        case 0: {
          const double rho = detail::uniform(rng, 0.3, 0.5);
          const double a = detail::uniform(rng, 0.5 * rho, 1.0 - rho);
          label << "odd_diff(rho=" << rho << ",a=" << a << ")";
          return K::tabulate(
              dim, alpha,
              [&](const Point& u) {
                return K::unit_bump((u - a * e) / rho) - K::unit_bump((u + a * e) / rho);
              },
              ref_points, label.str());
        }
        case 1: {
          const double rho = detail::uniform(rng, 0.2, 0.45);
          const double a1 = detail::uniform(rng, 0.0, 1.0 - rho);
          const double a2 = detail::uniform(rng, -(1.0 - rho), 1.0 - rho);
          label << "shift_diff(rho=" << rho << ",c1=" << a1 << ",c2=" << a2 << ")";
          return K::tabulate(
              dim, alpha,
              [&](const Point& u) {
                return K::unit_bump((u - a1 * e) / rho) - K::unit_bump((u - a2 * e) / rho);
              },
              ref_points, label.str());
        }
        default: {
          const double omega = detail::uniform(rng, 1.5 * M_PI, 4.0 * M_PI);
          const double phase = detail::uniform(rng, 0.0, M_PI);
          label << "radial_osc(w=" << omega << ",ph=" << phase << ")";
          return K::tabulate(
              dim, alpha,
              [&](const Point& u) {
                return std::cos(omega * u.norm() + phase) * K::unit_bump(u);
              },
              ref_points, label.str());
        }
      }
    }();
    if (!candidate.normalize()) continue;
    if (!candidate.verify().passes()) continue;
    dict.kernels.push_back(std::move(candidate));
  }
  if (int(dict.kernels.size()) < size)
    throw Error("make_dictionary: too few admissible candidates survived");
  return dict;
}

/// Discrete f * phi_t(y) with the mean-zero property enforced on the grid:
///   sum_z h^n t^{-n} phi((y - z)/t) (f(z) - f(y)),  |y - z| <= t.
/// Lattice nodes outside the box carry the exterior value of f.
template <std::floating_point Scalar>
Scalar dilated_convolve(const GridFunction<Scalar>& f, const TestKernel<Scalar>& k, double t,
                        const Point& y) {
  const Grid& g = f.grid();
  const double h = g.spacing();
  if (!(t >= 0.5 * h)) throw Error("dilated_convolve: scale below resolution");
  if (!g.contains(y)) throw Error("dilated_convolve: evaluation point outside the box");
  if (k.dim() != g.dim()) throw Error("dilated_convolve: kernel and grid dimensions differ");
  const double scale = g.cell_volume() / (g.dim() == 1 ? t : t * t);
  const Scalar fy = f.evaluate(y);
  const int reach = int(std::ceil(t / h)) + 1;
  const int c0 = g.nearest_lattice(y[0]);
  const int c1 = g.dim() == 1 ? 0 : g.nearest_lattice(y[1]);
  const int span1 = g.dim() == 1 ? 0 : reach;
  double acc = 0.0;
  for (int i1 = c1 - span1; i1 <= c1 + span1; ++i1) {
    for (int i0 = c0 - reach; i0 <= c0 + reach; ++i0) {
      const Point d = y - g.lattice_point(i0, i1);
      if (!within_radius(d.squaredNorm(), t, true)) continue;
      const double phi = double(k.eval(d / t));
      if (phi == 0.0) continue;
      acc += phi * double(f.at_lattice(i0, i1) - fy);
    }
  }
  return Scalar(acc * scale);
}

}  // namespace sqfn
