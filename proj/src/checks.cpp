#include "ksrl/checks.hpp"

#include "ksrl/coreset.hpp"
#include "ksrl/model.hpp"
#include "ksrl/planner.hpp"
#include "ksrl/reference.hpp"
#include "ksrl/synthetic.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace ksrl {

namespace {

double rel_err(double a, double b, double floor = 1.0) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

Vec central_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-5) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

Vec random_vec(int d, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = n(rng);
  return v;
}

BaseKernelConfig kernel_for(KernelKind kind, const CheckOptions& opts, double lengthscale = 1.0) {
  BaseKernelConfig cfg;
  cfg.kind = kind;
  cfg.lengthscale = lengthscale;
  cfg.fault_flip_sign = opts.inject_fault;
  return cfg;
}

CheckResult check_symmetry(const CheckOptions& opts) {
  Rng rng(opts.seed);
  const int pairs = opts.quick ? 20 : 100;
  double worst = 0.0;
  for (KernelKind kind : {KernelKind::IMQ, KernelKind::RBF}) {
    const auto cfg = kernel_for(kind, opts, 1.3);
    for (int p = 0; p < pairs; ++p) {
      const Vec x = random_vec(5, rng), y = random_vec(5, rng);
      const Vec sx = random_vec(5, rng), sy = random_vec(5, rng);
      worst = std::max(worst, rel_err(base_kernel(x, y, cfg), base_kernel(y, x, cfg), 1e-300));
      worst = std::max(worst, rel_err(stein_kernel(x, y, sx, sy, cfg), stein_kernel(y, x, sy, sx, cfg), 1e-300));
    }
  }
  std::ostringstream os;
  os << "max relative asymmetry " << worst << " (tol 1e-12)";
  return {"kernel_symmetry", worst <= 1e-12, os.str()};
}

CheckResult check_psd(const CheckOptions& opts) {
  Rng rng(opts.seed + 1);
  const int sets = opts.quick ? 5 : 20;
  const auto target = GaussianMixture::standard_normal(2);
  double worst = std::numeric_limits<double>::infinity();
  for (int s = 0; s < sets; ++s) {
    const RowMat pts = target.sample(50, rng);
    const RowMat sc = target.scores(pts);
    const Mat K = reference::stein_gram_matrix(pts, sc, kernel_for(KernelKind::IMQ, opts));
    const Eigen::SelfAdjointEigenSolver<Mat> es(K, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    worst = std::min(worst, lo / std::max(hi, 1e-300));
  }
  std::ostringstream os;
  os << "min eigenvalue / max eigenvalue " << worst << " (tol -1e-8)";
  return {"stein_psd", worst >= -1e-8, os.str()};
}

CheckResult check_kernel_gradients(const CheckOptions& opts) {
  Rng rng(opts.seed + 2);
  const int points = opts.quick ? 20 : 100;
  double worst_grad = 0.0, worst_trace = 0.0;
  for (KernelKind kind : {KernelKind::IMQ, KernelKind::RBF}) {
    const auto cfg = kernel_for(kind, opts, 1.5);
    for (int p = 0; p < points; ++p) {
      const Vec x = random_vec(4, rng), y = random_vec(4, rng);
      const auto d = base_kernel_derivatives(x, y, cfg);
      const Vec gx = central_gradient([&](const Vec& v) { return base_kernel(v, y, cfg); }, x);
      const Vec gy = central_gradient([&](const Vec& v) { return base_kernel(x, v, cfg); }, y);
      worst_grad = std::max(worst_grad, (gx - d.grad_x).norm() / std::max(1.0, d.grad_x.norm()));
      worst_grad = std::max(worst_grad, (gy - d.grad_y).norm() / std::max(1.0, d.grad_y.norm()));
      // Nested difference: d/dy_l of the analytic d/dx_l.
      double trace = 0.0;
      const double h = 1e-5;
      for (Eigen::Index l = 0; l < y.size(); ++l) {
        Vec yp = y, ym = y;
        yp[l] += h;
        ym[l] -= h;
        trace += (base_kernel_derivatives(x, yp, cfg).grad_x[l] - base_kernel_derivatives(x, ym, cfg).grad_x[l]) / (2 * h);
      }
      worst_trace = std::max(worst_trace, rel_err(trace, d.mixed_trace));
    }
  }
  std::ostringstream os;
  os << "gradient rel err " << worst_grad << " (tol 1e-5), mixed trace rel err " << worst_trace << " (tol 1e-4)";
  return {"kernel_gradients", worst_grad <= 1e-5 && worst_trace <= 1e-4, os.str()};
}

CheckResult check_score_gradients(const CheckOptions& opts) {
  Rng rng(opts.seed + 3);
  const int points = opts.quick ? 20 : 100;
  const int ds = 3, da = 1;
  const auto fm = FeatureMap::random_fourier(ds + da, 16, 1.0, opts.seed);
  Mat B = Mat::Zero(fm.dim(), ds);
  for (Eigen::Index i = 0; i < B.size(); ++i) B(i) = 0.1 * random_vec(1, rng)[0];
  RowMat fit_points(60, 2 * ds + da);
  for (Eigen::Index i = 0; i < fit_points.rows(); ++i) fit_points.row(i) = random_vec(2 * ds + da, rng).transpose();
  const auto model = SteinTarget::model(fit_points, ds, da, fm, B, 0.05);
  const auto gauss = SteinTarget::gaussian_fit(fit_points);
  double worst = 0.0;
  for (const SteinTarget* t : {&model, &gauss}) {
    for (int p = 0; p < points; ++p) {
      const Vec h = random_vec(2 * ds + da, rng);
      const Vec g = t->score(h);
      const Vec fd = central_gradient([&](const Vec& v) { return t->log_density(v); }, h);
      worst = std::max(worst, (fd - g).norm() / std::max(1.0, g.norm()));
    }
  }
  std::ostringstream os;
  os << "score vs finite-difference rel err " << worst << " (tol 1e-5)";
  return {"score_gradients", worst <= 1e-5, os.str()};
}

CheckResult check_incremental(const CheckOptions& opts) {
  Rng rng(opts.seed + 4);
  const auto target = GaussianMixture::random(3, 3, 2.0, rng);
  const int n = opts.quick ? 20 : 30;
  const RowMat pts = target.sample(static_cast<std::size_t>(n), rng);
  Coreset c(pts, target.scores(pts), kernel_for(KernelKind::IMQ, opts));
  double worst = 0.0;
  while (c.size() > 1) {
    std::uniform_int_distribution<std::size_t> pick(0, c.size() - 1);
    c.remove(pick(rng));
    const SteinGram fresh = reference::gram_build_serial(c.points(), c.scores(), c.kernel());
    worst = std::max(worst, rel_err(fresh.total, c.gram().total, 1e-300));
    for (std::size_t i = 0; i < c.size(); ++i) {
      worst = std::max(worst, rel_err(fresh.row_sums[i], c.gram().row_sums[i], std::abs(fresh.total)));
    }
  }
  std::ostringstream os;
  os << "incremental vs rebuild rel err " << worst << " (tol 1e-8)";
  return {"incremental_ksd", worst <= 1e-8, os.str()};
}

CheckResult check_thinning(const CheckOptions& opts) {
  Rng rng(opts.seed + 5);
  const int cases = opts.quick ? 10 : 40;
  int failures = 0;
  for (int t = 0; t < cases; ++t) {
    const auto target = GaussianMixture::random(2, 3, 3.0, rng);
    std::uniform_int_distribution<int> size(20, opts.quick ? 60 : 120);
    const RowMat pts = target.sample(static_cast<std::size_t>(size(rng)), rng);
    for (double eps : {0.0, 1e-3, 1e-1}) {
      Coreset c(pts, target.scores(pts), kernel_for(KernelKind::IMQ, opts));
      const double before = ksd2_from_gram(reference::gram_build_serial(pts, c.scores(), c.kernel()));
      const ThinReport rep = ksd_thin(c, eps, 1);
      const double after = ksd2_from_gram(reference::gram_build_serial(c.points(), c.scores(), c.kernel()));
      // A call that removes nothing returns its input, so at eps = 0 the audit is equality.
      const bool ok = rep.removed == 0 ? (c.size() == rep.size_before && after == before) : after < before + eps;
      if (!ok) ++failures;
    }
  }
  std::ostringstream os;
  os << failures << " contract violations in " << 3 * cases << " thinning calls";
  return {"thinning_contract", failures == 0, os.str()};
}

CheckResult check_conjugacy(const CheckOptions& opts) {
  Rng rng(opts.seed + 6);
  const int m = 6, p = 2, n = 40;
  Mat Z(n, m), Y(n, p);
  for (Eigen::Index i = 0; i < Z.size(); ++i) Z(i) = random_vec(1, rng)[0];
  for (Eigen::Index i = 0; i < Y.size(); ++i) Y(i) = random_vec(1, rng)[0];
  GaussianLinearPosterior whole(m, p, 1.0, 0.1), split(m, p, 1.0, 0.1), single(m, p, 1.0, 0.1);
  whole.update(Z, Y);
  split.update(Z.topRows(17), Y.topRows(17));
  split.update(Z.bottomRows(n - 17), Y.bottomRows(n - 17));
  for (int i = 0; i < n; ++i) single.update(Z.row(i), Y.row(i));
  const auto rel = [](const Mat& a, const Mat& b) { return (a - b).norm() / std::max(1e-300, b.norm()); };
  const double worst = std::max({rel(split.precision(), whole.precision()), rel(split.mean(), whole.mean()),
                                 rel(single.precision(), whole.precision()), rel(single.mean(), whole.mean())});
  std::ostringstream os;
  os << "batch-split rel err " << worst << " (tol 1e-10)";
  return {"blr_conjugacy", worst <= 1e-10, os.str()};
}

class QuadraticReward final : public RolloutModel {
 public:
  int state_dim() const override { return 1; }
  int action_dim() const override { return 1; }
  double step(std::span<const double> s, std::span<const double> a, std::span<double> s_next) const override {
    s_next[0] = s[0];
    return -(a[0] - 0.3) * (a[0] - 0.3);
  }
};

CheckResult check_cem(const CheckOptions& opts) {
  CEMConfig cfg;
  cfg.horizon = 1;
  cfg.popsize = 100;
  cfg.n_elites = 10;
  cfg.max_iter = 5;
  cfg.init_std = 0.5;
  cfg.action_lo = Vec::Constant(1, -1.0);
  cfg.action_hi = Vec::Constant(1, 1.0);
  CemPlanner planner(cfg);
  Rng rng(opts.seed + 7);
  const double a = planner.plan(Vec::Zero(1), QuadraticReward{}, rng).action[0];
  std::ostringstream os;
  os << "CEM action " << a << ", analytic argmax 0.3 (tol 0.05)";
  return {"cem_quadratic", std::abs(a - 0.3) <= 0.05, os.str()};
}

}  // namespace

std::vector<CheckResult> run_invariant_checks(const CheckOptions& opts) {
  std::vector<CheckResult> out;
  out.push_back(check_symmetry(opts));
  out.push_back(check_psd(opts));
  out.push_back(check_kernel_gradients(opts));
  out.push_back(check_score_gradients(opts));
  out.push_back(check_incremental(opts));
  out.push_back(check_thinning(opts));
  out.push_back(check_conjugacy(opts));
  out.push_back(check_cem(opts));
  return out;
}

}  // namespace ksrl
