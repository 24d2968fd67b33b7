#pragma once

// Radial discretization of R^3: a uniform grid on [0, R], sampled fields,
// quadrature, the radial Laplacian, and the dilation u_tau(r) = tau^2 u(tau r).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "spgs/errors.hpp"

namespace spgs {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kFourPi = 4.0 * std::numbers::pi;

/// Uniform grid r_i = i R / N, i = 0..N.
class RadialGrid {
 public:
  RadialGrid(double radius, std::size_t intervals) : radius_(radius), intervals_(intervals) {
    if (!(radius > 0.0) || !std::isfinite(radius))
      throw InvalidGrid("grid radius must be positive and finite");
    if (intervals < 16) throw InvalidGrid("grid needs at least 16 intervals");
    spacing_ = radius / static_cast<double>(intervals);
  }

  double radius() const noexcept { return radius_; }
  std::size_t intervals() const noexcept { return intervals_; }
  std::size_t size() const noexcept { return intervals_ + 1; }
  double spacing() const noexcept { return spacing_; }

  /// Node i; r(0) = 0 and r(N) = R exactly.
  double r(std::size_t i) const noexcept {
    if (i == intervals_) return radius_;
    return radius_ * static_cast<double>(i) / static_cast<double>(intervals_);
  }

  std::vector<double> nodes() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = r(i);
    return out;
  }

  friend bool operator==(const RadialGrid& a, const RadialGrid& b) noexcept {
    return a.radius_ == b.radius_ && a.intervals_ == b.intervals_;
  }

 private:
  double radius_;
  std::size_t intervals_;
  double spacing_;
};

inline RadialGrid make_grid(double radius, std::size_t intervals) {
  return RadialGrid(radius, intervals);
}

/// Real samples of a radial function on the nodes of a grid.
class RadialField {
 public:
  explicit RadialField(RadialGrid grid) : grid_(grid), values_(grid.size(), 0.0) {}

  RadialField(RadialGrid grid, std::vector<double> values)
      : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw GridMismatch("value count does not match grid");
  }

  template <typename Fn>
  static RadialField sample(const RadialGrid& grid, Fn&& fn) {
    RadialField out(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) out.values_[i] = fn(grid.r(i));
    return out;
  }

  const RadialGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  const std::vector<double>& data() const noexcept { return values_; }

  bool finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }
  /// Dirichlet truncation value(R) = 0.
  bool dirichlet() const noexcept { return values_.back() == 0.0; }
  bool is_zero() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
  }

  RadialField& operator*=(double s) noexcept {
    for (double& v : values_) v *= s;
    return *this;
  }
  friend RadialField operator*(double s, RadialField f) { return f *= s; }

  RadialField& axpy(double a, const RadialField& x);

 private:
  RadialGrid grid_;
  std::vector<double> values_;
};

inline void require_same_grid(const RadialGrid& a, const RadialGrid& b) {
  if (!(a == b)) throw GridMismatch("fields live on different grids");
}

inline RadialField& RadialField::axpy(double a, const RadialField& x) {
  require_same_grid(grid_, x.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += a * x.values_[i];
  return *this;
}

namespace detail {

// Composite Simpson weights (including the factor h) for int_a^b over
// `n` intervals; odd counts close with a 3/8 panel, n = 1 is a trapezoid.
inline void add_simpson_weights(std::span<double> w, std::size_t first, std::size_t n, double h) {
  if (n == 0) return;
  if (n == 1) {
    w[first] += h / 2;
    w[first + 1] += h / 2;
    return;
  }
  std::size_t even = (n % 2 == 0) ? n : n - 3;
  for (std::size_t k = 0; k < even; k += 2) {
    w[first + k] += h / 3;
    w[first + k + 1] += 4 * h / 3;
    w[first + k + 2] += h / 3;
  }
  if (even != n) {
    std::size_t s = first + even;
    w[s] += 3 * h / 8;
    w[s + 1] += 9 * h / 8;
    w[s + 2] += 9 * h / 8;
    w[s + 3] += 3 * h / 8;
  }
}

}  // namespace detail

/// Weights of int_0^R g(r) dr (composite Simpson).
inline std::vector<double> simpson_weights(const RadialGrid& grid) {
  std::vector<double> w(grid.size(), 0.0);
  detail::add_simpson_weights(w, 0, grid.intervals(), grid.spacing());
  return w;
}

/// 4 pi int_0^R r^2 f(r) dr.
inline double volume_integrate(const RadialField& f) {
  const auto& g = f.grid();
  const auto w = simpson_weights(g);
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double r = g.r(i);
    sum += w[i] * r * r * f[i];
  }
  return kFourPi * sum;
}

inline double volume_integrate(const RadialField& f, const RadialField& g) {
  require_same_grid(f.grid(), g.grid());
  RadialField prod(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) prod[i] = f[i] * g[i];
  return volume_integrate(prod);
}

/// Volume weights m_i = 4 pi h r_i^2 of the nodal rule used by every
/// variational functional. The discrete Laplacian is self-adjoint for this
/// measure, which keeps the discrete Euler-Lagrange equation consistent.
inline std::vector<double> nodal_weights(const RadialGrid& grid) {
  std::vector<double> m(grid.size());
  const double h = grid.spacing();
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double r = grid.r(i);
    m[i] = kFourPi * h * r * r;
  }
  m.back() *= 0.5;
  return m;
}

inline double nodal_integrate(const RadialField& f) {
  const auto m = nodal_weights(f.grid());
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += m[i] * f[i];
  return sum;
}

// ---------------------------------------------------------------------------
// Dirichlet energy int |grad u|^2.
//
// With w = r u, int_0^R r^2 u'^2 dr = int_0^R w'^2 dr - R u(R)^2. w' is taken
// at the cell midpoints with the fourth-order staggered stencil
// (1, -27, 27, -1)/24h; w is odd about r = 0, and the last cell uses a
// one-sided stencil. The midpoint rule then integrates w'^2.

namespace detail {

struct Stencil4 {
  std::size_t col[4];
  double coef[4];
};

// Row i gives h * w'(r_{i+1/2}).
inline Stencil4 staggered_row(std::size_t i, std::size_t n) {
  constexpr double c = 1.0 / 24.0;
  if (i == 0) {
    // w_{-1} = -w_1
    return {{0, 1, 2, 2}, {-27 * c, 26 * c, -1 * c, 0.0}};
  }
  if (i + 1 == n) {
    return {{n - 3, n - 2, n - 1, n}, {1 * c, -3 * c, -21 * c, 23 * c}};
  }
  return {{i - 1, i, i + 1, i + 2}, {1 * c, -27 * c, 27 * c, -1 * c}};
}

}  // namespace detail

/// Midpoint slopes h*w'(r_{i+1/2}), i = 0..N-1, of w = r u.
inline std::vector<double> staggered_slopes(const RadialField& u) {
  const auto& g = u.grid();
  const std::size_t n = g.intervals();
  std::vector<double> w(g.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = g.r(i) * u[i];
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = detail::staggered_row(i, n);
    double acc = 0.0;
    for (int k = 0; k < 4; ++k) acc += row.coef[k] * w[row.col[k]];
    s[i] = acc;
  }
  return s;
}

/// int |grad u|^2 over the ball B_R.
inline double dirichlet_energy(const RadialField& u) {
  const auto& g = u.grid();
  const auto s = staggered_slopes(u);
  double sum = 0.0;
  for (double v : s) sum += v * v;
  const double uR = u[g.size() - 1];
  return kFourPi * (sum / g.spacing() - g.radius() * uR * uR);
}

/// Exact derivative of dirichlet_energy with respect to each sample.
inline std::vector<double> dirichlet_energy_derivative(const RadialField& u) {
  const auto& g = u.grid();
  const std::size_t n = g.intervals();
  const auto s = staggered_slopes(u);
  std::vector<double> dw(g.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = detail::staggered_row(i, n);
    for (int k = 0; k < 4; ++k) dw[row.col[k]] += 2.0 * row.coef[k] * s[i];
  }
  std::vector<double> du(g.size());
  for (std::size_t i = 0; i < du.size(); ++i) du[i] = kFourPi * dw[i] * g.r(i) / g.spacing();
  du.back() -= kFourPi * 2.0 * g.radius() * u[n];
  return du;
}

// ---------------------------------------------------------------------------

/// Norm selector: L^s (1 <= s <= 6), H^1, or D^{1,2}.
struct Norm {
  enum class Kind { Lebesgue, H1, Dirichlet };
  Kind kind;
  double exponent = 2.0;

  static Norm L(double s) { return {Kind::Lebesgue, s}; }
  static Norm H1() { return {Kind::H1, 2.0}; }
  static Norm D() { return {Kind::Dirichlet, 2.0}; }
};

/// int |u|^s.
inline double lebesgue_integral(const RadialField& u, double s) {
  if (!(s >= 1.0 && s <= 6.0)) throw UnsupportedExponent("L^s exponent must lie in [1, 6]");
  RadialField a(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) a[i] = std::pow(std::abs(u[i]), s);
  return volume_integrate(a);
}

inline double norm(const RadialField& u, Norm kind) {
  switch (kind.kind) {
    case Norm::Kind::Lebesgue:
      return std::pow(lebesgue_integral(u, kind.exponent), 1.0 / kind.exponent);
    case Norm::Kind::Dirichlet:
      return std::sqrt(std::max(0.0, dirichlet_energy(u)));
    case Norm::Kind::H1:
      return std::sqrt(std::max(0.0, dirichlet_energy(u)) + lebesgue_integral(u, 2.0));
  }
  return 0.0;
}

/// Second-order radial Laplacian u'' + 2u'/r through w = r u.
inline RadialField laplacian(const RadialField& u) {
  const auto& g = u.grid();
  const std::size_t n = g.intervals();
  const double h = g.spacing();
  const double h2 = h * h;
  std::vector<double> w(g.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = g.r(i) * u[i];
  RadialField out(g);
  out[0] = 6.0 * (u[1] - u[0]) / h2;
  for (std::size_t i = 1; i < n; ++i) out[i] = (w[i + 1] - 2.0 * w[i] + w[i - 1]) / (h2 * g.r(i));
  out[n] = (2.0 * w[n] - 5.0 * w[n - 1] + 4.0 * w[n - 2] - w[n - 3]) / (h2 * g.r(n));
  return out;
}

/// Fourth-order du/dr at the nodes (even reflection at r = 0).
inline std::vector<double> radial_derivative(const RadialField& u) {
  const auto& g = u.grid();
  const std::size_t n = g.intervals();
  const double h12 = 12.0 * g.spacing();
  auto at = [&](long k) { return u[static_cast<std::size_t>(k < 0 ? -k : k)]; };
  std::vector<double> d(g.size());
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const long k = static_cast<long>(i);
    d[i] = (at(k - 2) - 8.0 * at(k - 1) + 8.0 * at(k + 1) - at(k + 2)) / h12;
  }
  d[n - 1] = (3.0 * u[n] + 10.0 * u[n - 1] - 18.0 * u[n - 2] + 6.0 * u[n - 3] - u[n - 4]) / h12;
  d[n] = (25.0 * u[n] - 48.0 * u[n - 1] + 36.0 * u[n - 2] - 16.0 * u[n - 3] + 3.0 * u[n - 4]) / h12;
  return d;
}

/// Monotonicity-preserving cubic Hermite interpolant of a radial field.
/// Node slopes are fourth-order differences passed through a Hyman-type
/// filter, so the interpolant never overshoots the data.
class MonotoneCubic {
 public:
  explicit MonotoneCubic(const RadialField& u) : grid_(u.grid()), y_(u.data()) {
    const std::size_t n = grid_.intervals();
    const double h = grid_.spacing();
    slope_ = radial_derivative(u);
    std::vector<double> secant(n);
    for (std::size_t i = 0; i < n; ++i) secant[i] = (y_[i + 1] - y_[i]) / h;
    for (std::size_t i = 0; i <= n; ++i) {
      const double left = (i == 0) ? -secant[0] : secant[i - 1];
      const double right = (i == n) ? secant[n - 1] : secant[i];
      double& d = slope_[i];
      if (i == n) {
        if (d * right <= 0.0) d = 0.0;
        d = std::copysign(std::min(std::abs(d), 3.0 * std::abs(right)), right);
        continue;
      }
      if (left * right <= 0.0) {
        d = 0.0;
      } else if (d * right <= 0.0) {
        d = 0.0;
      } else {
        d = std::copysign(std::min(std::abs(d), 3.0 * std::min(std::abs(left), std::abs(right))), right);
      }
    }
  }

  /// Value at radius x in [0, R]; zero outside.
  double operator()(double x) const noexcept {
    const double R = grid_.radius();
    if (x < 0.0 || x > R) return 0.0;
    const double h = grid_.spacing();
    const std::size_t n = grid_.intervals();
    std::size_t i = static_cast<std::size_t>(x / h);
    if (i >= n) i = n - 1;
    const double t = (x - grid_.r(i)) / h;
    if (t == 0.0) return y_[i];
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * y_[i] + h10 * h * slope_[i] + h01 * y_[i + 1] + h11 * h * slope_[i + 1];
  }

 private:
  RadialGrid grid_;
  std::vector<double> y_;
  std::vector<double> slope_;
};

/// u_tau(r) = tau^2 u(tau r) on the same grid; zero where tau r > R.
/// A Dirichlet field stays Dirichlet.
inline RadialField dilate(const RadialField& u, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidScale("dilation scale must be positive");
  if (tau == 1.0) return u;
  const MonotoneCubic interp(u);
  const auto& g = u.grid();
  RadialField out(g);
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = tau * tau * interp(tau * g.r(i));
  if (u.dirichlet()) out[g.intervals()] = 0.0;
  return out;
}

/// Monotone cubic transfer to another grid over the same [0, R].
inline RadialField resample(const RadialField& u, const RadialGrid& target) {
  const auto& src = u.grid();
  if (std::abs(src.radius() - target.radius()) > 1e-12 * src.radius())
    throw DomainMismatch("resample requires equal truncation radii");
  const MonotoneCubic interp(u);
  const std::size_t ns = src.intervals();
  const std::size_t nt = target.intervals();
  RadialField out(target);
  for (std::size_t j = 0; j < target.size(); ++j) {
    // Coincident nodes are copied, so refine-then-coarsen is exact.
    if ((j * ns) % nt == 0) {
      out[j] = u[j * ns / nt];
    } else {
      out[j] = interp(target.r(j));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV field dumps: header `r,value`, 17 significant digits.

inline void write_csv(std::ostream& os, const RadialField& u) {
  os << "r,value\n";
  os << std::setprecision(17);
  const auto& g = u.grid();
  for (std::size_t i = 0; i < u.size(); ++i) os << g.r(i) << ',' << u[i] << '\n';
}

inline void write_csv(const std::string& path, const RadialField& u) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  write_csv(os, u);
}

/// Reads a dump produced by write_csv; the grid is rebuilt from the rows.
inline RadialField read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "r,value") throw Error("field CSV must start with `r,value`");
  std::vector<double> rs, vs;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error("malformed field CSV row: " + line);
    rs.push_back(std::stod(line.substr(0, comma)));
    vs.push_back(std::stod(line.substr(comma + 1)));
  }
  if (rs.size() < 17) throw InvalidGrid("field CSV has too few rows");
  RadialGrid grid(rs.back(), rs.size() - 1);
  return RadialField(grid, std::move(vs));
}

}  // namespace spgs
