#include "advreg/estimators.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <unordered_map>

#include "advreg/errors.hpp"

namespace advreg {

namespace {

Vec clamp_unit(const Vec& x) {
  Vec y(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) y[k] = std::clamp(x[k], 0.0, 1.0);
  return y;
}

// Multi-indices with |l| <= degree in graded order, all-zeros first.
std::vector<std::vector<int>> multi_indices(int dim, int degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> tmp(dim, 0);
  for (int total = 0; total <= degree; ++total) {
    auto fill = [&](auto&& self, int axis, int left) -> void {
      if (axis == dim) {
        if (left == 0) out.push_back(tmp);
        return;
      }
      for (int e = 0; e <= left; ++e) {
        tmp[axis] = e;
        self(self, axis + 1, left - e);
      }
      tmp[axis] = 0;
    };
    fill(fill, 0, total);
  }
  return out;
}

struct PointKeyHash {
  std::size_t operator()(const Vec& v) const {
    std::size_t h = 1469598103934665603ull;
    for (double x : v) {
      const double c = canon_zero(x);
      std::uint64_t bits;
      static_assert(sizeof(bits) == sizeof(c));
      std::memcpy(&bits, &c, sizeof(bits));
      h ^= bits;
      h *= 1099511628211ull;
    }
    return h;
  }
};

}  // namespace

struct FittedPredictor::Impl {
  virtual ~Impl() = default;
  virtual double eval(const Vec& x) const = 0;
};

namespace {

struct ConstantImpl final : FittedPredictor::Impl {
  double value;
  explicit ConstantImpl(double v) : value(v) {}
  double eval(const Vec&) const override { return value; }
};

struct ExactImpl final : FittedPredictor::Impl {
  RegressionFunction f;
  explicit ExactImpl(RegressionFunction fn) : f(std::move(fn)) {}
  double eval(const Vec& x) const override { return f(clamp_unit(x)); }
};

struct TableImpl final : FittedPredictor::Impl {
  std::shared_ptr<const GridDomain> grid;
  std::vector<double> values;
  std::unordered_map<Vec, std::uint32_t, PointKeyHash> index;

  TableImpl(std::shared_ptr<const GridDomain> g, std::vector<double> v)
      : grid(std::move(g)), values(std::move(v)) {
    index.reserve(grid->size() * 2);
    for (std::size_t i = 0; i < grid->size(); ++i) {
      Vec key = grid->point(i);
      for (double& c : key) c = canon_zero(c);
      index.emplace(std::move(key), static_cast<std::uint32_t>(i));
    }
  }

  double eval(const Vec& x) const override {
    Vec key = x;
    for (double& c : key) c = canon_zero(c);
    if (auto it = index.find(key); it != index.end()) return values[it->second];
    return values[grid->nearest(x)];
  }
};

struct LocalPolyImpl final : FittedPredictor::Impl {
  std::vector<Vec> xs;
  std::vector<double> ys;
  int degree;
  double h;
  std::uint64_t seed;
  std::vector<std::vector<int>> basis;

  LocalPolyImpl(const Dataset& d, int deg, double bw)
      : xs(d.xs), ys(d.ys), degree(deg), h(bw), seed(d.seed),
        basis(multi_indices(d.dim(), deg)) {}

  double eval(const Vec& query) const override {
    const Vec xq = clamp_unit(query);
    const int d = static_cast<int>(xq.size());
    const std::size_t ncoef = basis.size();
    std::vector<std::size_t> window;
    double hcur = h;
    for (int attempt = 0;; ++attempt) {
      window.clear();
      for (std::size_t i = 0; i < xs.size(); ++i) {
        bool in = true;
        for (int k = 0; k < d; ++k)
          if (std::fabs(xs[i][k] - xq[k]) > hcur) {
            in = false;
            break;
          }
        if (in) window.push_back(i);
      }
      if (window.size() >= ncoef) {
        Eigen::MatrixXd A(window.size(), ncoef);
        Eigen::VectorXd y(window.size());
        for (std::size_t r = 0; r < window.size(); ++r) {
          const Vec& xi = xs[window[r]];
          for (std::size_t c = 0; c < ncoef; ++c) {
            double v = 1.0;
            for (int k = 0; k < d; ++k)
              for (int e = 0; e < basis[c][k]; ++e) v *= xi[k] - xq[k];
            A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
          }
          y(static_cast<Eigen::Index>(r)) = ys[window[r]];
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
        if (qr.rank() == static_cast<Eigen::Index>(ncoef)) {
          const Eigen::VectorXd coef = qr.solve(y);
          return coef(0);
        }
      }
      if (attempt == 5) break;
      hcur *= 1.5;
    }
    if (!window.empty()) {  // degenerate system: local mean
      double s = 0.0;
      for (std::size_t i : window) s += ys[i];
      return s / static_cast<double>(window.size());
    }
    throw InsufficientData("local polynomial: empty window after widening", seed);
  }
};

struct AnisoKernelImpl final : FittedPredictor::Impl {
  std::vector<Vec> xs;
  std::vector<double> ys;
  Vec h;
  std::uint64_t seed;

  AnisoKernelImpl(const Dataset& d, Vec bw) : xs(d.xs), ys(d.ys), h(std::move(bw)), seed(d.seed) {}

  double eval(const Vec& query) const override {
    const Vec xq = clamp_unit(query);
    const int d = static_cast<int>(xq.size());
    Vec hcur = h;
    for (int attempt = 0;; ++attempt) {
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        bool in = true;
        for (int k = 0; k < d; ++k)
          if (std::fabs(xs[i][k] - xq[k]) > hcur[k]) {
            in = false;
            break;
          }
        if (in) {
          sum += ys[i];
          ++count;
        }
      }
      if (count > 0) return sum / static_cast<double>(count);
      if (attempt == 5) break;
      for (double& v : hcur) v *= 1.5;
    }
    throw InsufficientData("product kernel: empty window after widening", seed);
  }
};

}  // namespace

double FittedPredictor::operator()(const Vec& x) const {
  if (!impl_) throw std::logic_error("predictor: empty");
  return impl_->eval(x);
}

double predict(const FittedPredictor& p, const Vec& x) { return p(x); }

FittedPredictor FittedPredictor::constant(double value, int dim) {
  FittedPredictor p;
  p.impl_ = std::make_shared<ConstantImpl>(value);
  p.method_ = MethodInfo{MethodKind::Constant, 0, Vec(), "constant", false, ""};
  (void)dim;
  return p;
}

FittedPredictor FittedPredictor::exact(RegressionFunction f) {
  FittedPredictor p;
  p.method_ = MethodInfo{MethodKind::Exact, 0, Vec(), "exact:" + f.label, false, ""};
  p.impl_ = std::make_shared<ExactImpl>(std::move(f));
  return p;
}

FittedPredictor FittedPredictor::tabulated(std::shared_ptr<const GridDomain> grid,
                                           std::vector<double> values, MethodInfo info,
                                           std::size_t training_n) {
  if (!grid || grid->size() != values.size())
    throw std::invalid_argument("tabulated: grid/value size mismatch");
  FittedPredictor p;
  p.impl_ = std::make_shared<TableImpl>(std::move(grid), std::move(values));
  p.method_ = std::move(info);
  p.training_n_ = training_n;
  return p;
}

double bandwidth_iso(std::size_t n, double beta, int dim, double c_h) {
  if (n < 2) throw std::invalid_argument("bandwidth: need n >= 2");
  if (!(beta > 0.0) || dim < 1 || !(c_h > 0.0))
    throw std::invalid_argument("bandwidth: bad parameters");
  const double ratio = std::log(static_cast<double>(n)) / static_cast<double>(n);
  return c_h * std::pow(ratio, 1.0 / (2.0 * beta + dim));
}

Vec bandwidth_aniso(std::size_t n, const SmoothnessSpec& spec, double c_h) {
  if (n < 2) throw std::invalid_argument("bandwidth: need n >= 2");
  if (!(c_h > 0.0)) throw std::invalid_argument("bandwidth: c_h must be positive");
  const double bbar = spec.beta_bar();
  const int d = spec.dim();
  const double ratio = std::log(static_cast<double>(n)) / static_cast<double>(n);
  Vec h(d);
  for (int k = 0; k < d; ++k) {
    const double bk = spec.holder_class() == HolderClass::Isotropic ? spec.beta()
                                                                    : spec.beta_vec()[k];
    h[k] = c_h * std::pow(ratio, bbar / (bk * (2.0 * bbar + d)));
  }
  return h;
}

FittedPredictor fit_local_poly(const Dataset& data, const SmoothnessSpec& spec, double h) {
  if (data.size() == 0) throw InsufficientData("local polynomial: empty dataset", data.seed);
  if (!(h > 0.0)) throw std::invalid_argument("fit_local_poly: bandwidth must be positive");
  const int degree = spec.taylor_degree();
  FittedPredictor p;
  p.impl_ = std::make_shared<LocalPolyImpl>(data, degree, h);
  p.method_ = MethodInfo{MethodKind::LocalPoly, degree, Vec{h}, "local_poly", false, ""};
  p.training_n_ = data.size();
  return p;
}

FittedPredictor fit_aniso_kernel(const Dataset& data, const SmoothnessSpec& spec, Vec h) {
  if (data.size() == 0) throw InsufficientData("product kernel: empty dataset", data.seed);
  if (h.size() != static_cast<std::size_t>(data.dim()))
    throw DimensionMismatch("fit_aniso_kernel: bandwidth dimension mismatch");
  for (double v : h)
    if (!(v > 0.0)) throw std::invalid_argument("fit_aniso_kernel: bandwidths must be positive");
  (void)spec;
  FittedPredictor p;
  p.method_ = MethodInfo{MethodKind::AnisoKernel, 0, h, "aniso_kernel", false, ""};
  p.impl_ = std::make_shared<AnisoKernelImpl>(data, std::move(h));
  p.training_n_ = data.size();
  return p;
}

}  // namespace advreg
