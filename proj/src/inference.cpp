#include "triad/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/SVD>

#include "triad/correlations.hpp"
#include "triad/dynamics.hpp"
#include "triad/errors.hpp"

namespace triad {

// ---------------------------------------------------------------------------
// Histogram decomposition
// ---------------------------------------------------------------------------

PhotonHistogram PhotonHistogram::from_counts(std::span<const int> photons, Eigen::Index bins) {
  if (bins < 1) throw std::invalid_argument("histogram: need at least one bin");
  PhotonHistogram h{Eigen::VectorXd::Zero(bins)};
  for (int c : photons) {
    if (c < 0) throw std::invalid_argument("histogram: negative photon count");
    h.counts[std::min<Eigen::Index>(c, bins - 1)] += 1.0;
  }
  return h;
}

namespace {

constexpr double kTemplateMatchTol = 1e-12;
constexpr double kConditionLimit = 1e12;

/// Expectation-maximisation for the mixture weights; stays on the simplex.
Eigen::VectorXd mixture_em(const Eigen::MatrixXd& f, const Eigen::VectorXd& h) {
  const Eigen::Index g = f.cols();
  const double n = h.sum();
  Eigen::VectorXd w = Eigen::VectorXd::Constant(g, 1.0 / double(g));
  for (int iter = 0; iter < 200000; ++iter) {
    const Eigen::VectorXd p = f * w;
    Eigen::VectorXd ratio = h.cwiseQuotient(p.cwiseMax(std::numeric_limits<double>::min()));
    Eigen::VectorXd next = w.cwiseProduct(f.transpose() * ratio) / n;
    next /= next.sum();
    const double change = (next - w).cwiseAbs().maxCoeff();
    w = next;
    if (change < 1e-14) break;
  }
  return w;
}

/// Least squares on the simplex by enumerating supports.
Eigen::VectorXd mixture_least_squares(const Eigen::MatrixXd& f, const Eigen::VectorXd& y) {
  const Eigen::Index g = f.cols();
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_w = Eigen::VectorXd::Constant(g, 1.0 / double(g));
  for (unsigned mask = 1; mask < (1u << g); ++mask) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index k = 0; k < g; ++k)
      if (mask & (1u << k)) support.push_back(k);
    const auto s = Eigen::Index(support.size());
    Eigen::MatrixXd fs(f.rows(), s);
    for (Eigen::Index i = 0; i < s; ++i) fs.col(i) = f.col(support[std::size_t(i)]);
    // KKT system of min |fs w - y|^2 subject to sum(w) = 1.
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(s + 1, s + 1);
    kkt.topLeftCorner(s, s) = 2.0 * fs.transpose() * fs;
    kkt.topRightCorner(s, 1).setOnes();
    kkt.bottomLeftCorner(1, s).setOnes();
    Eigen::VectorXd rhs(s + 1);
    rhs.head(s) = 2.0 * fs.transpose() * y;
    rhs[s] = 1.0;
    const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    const Eigen::VectorXd ws = sol.head(s);
    if ((ws.array() < -1e-14).any()) continue;
    const double cost = (fs * ws - y).squaredNorm();
    if (cost < best) {
      best = cost;
      best_w.setZero();
      for (Eigen::Index i = 0; i < s; ++i)
        best_w[support[std::size_t(i)]] = std::max(0.0, ws[i]);
      best_w /= best_w.sum();
    }
  }
  return best_w;
}

}  // namespace

OccupancyEstimate decompose_histogram(const PhotonHistogram& hist,
                                      const ReadoutTemplates& templates,
                                      MixtureObjective objective) {
  templates.validate(1e-6);
  if (hist.counts.size() == 0 || !(hist.total() > 0))
    throw std::domain_error("decompose_histogram: empty histogram");
  if ((hist.counts.array() < 0).any())
    throw std::domain_error("decompose_histogram: negative histogram count");
  if (hist.counts.size() > templates.bins())
    throw std::domain_error("decompose_histogram: histogram has more bins than the templates");

  Eigen::VectorXd h = Eigen::VectorXd::Zero(templates.bins());
  h.head(hist.counts.size()) = hist.counts;
  const double n = h.sum();

  OccupancyEstimate est;
  est.shots = n;

  // Merge identical templates; each group is represented by its first member.
  std::vector<std::vector<int>> groups;
  for (int k = 0; k < 4; ++k) {
    bool placed = false;
    for (auto& grp : groups)
      if ((templates.pmf.col(k) - templates.pmf.col(grp.front())).cwiseAbs().maxCoeff() <=
          kTemplateMatchTol) {
        grp.push_back(k);
        placed = true;
        break;
      }
    if (!placed) groups.push_back({k});
  }
  const auto g = Eigen::Index(groups.size());
  Eigen::MatrixXd f(templates.bins(), g);
  for (Eigen::Index i = 0; i < g; ++i) f.col(i) = templates.pmf.col(groups[std::size_t(i)].front());
  for (const auto& grp : groups)
    if (grp.size() > 1) {
      est.ill_conditioned = true;
      est.merged_groups.push_back(grp);
    }

  // Only occupied bins contribute to the likelihood.
  std::vector<Eigen::Index> rows;
  for (Eigen::Index c = 0; c < h.size(); ++c)
    if (h[c] > 0) rows.push_back(c);
  Eigen::MatrixXd fo(Eigen::Index(rows.size()), g);
  Eigen::VectorXd ho(Eigen::Index(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    fo.row(Eigen::Index(i)) = f.row(rows[i]);
    ho[Eigen::Index(i)] = h[rows[i]];
  }

  Eigen::VectorXd w = objective == MixtureObjective::MaximumLikelihood
                          ? (g == 1 ? Eigen::VectorXd::Ones(1) : mixture_em(fo, ho))
                          : mixture_least_squares(f, h / n);

  // Observed multinomial information with the largest component eliminated.
  Eigen::MatrixXd cov_g = Eigen::MatrixXd::Zero(g, g);
  if (g > 1) {
    Eigen::Index ref;
    w.maxCoeff(&ref);
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < g; ++i)
      if (i != ref) free.push_back(i);
    const auto q = Eigen::Index(free.size());
    const Eigen::VectorXd p = (fo * w).cwiseMax(std::numeric_limits<double>::min());
    Eigen::MatrixXd d(fo.rows(), q);
    for (Eigen::Index i = 0; i < q; ++i) d.col(i) = fo.col(free[std::size_t(i)]) - fo.col(ref);
    const Eigen::MatrixXd scaled = d.array().colwise() * (ho.array().sqrt() / p.array());
    const Eigen::MatrixXd info = scaled.transpose() * scaled;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0) || hi / lo > kConditionLimit) est.ill_conditioned = true;
    Eigen::MatrixXd cov_free = Eigen::MatrixXd::Zero(q, q);
    for (Eigen::Index i = 0; i < q; ++i) {
      const double ev = eig.eigenvalues()[i];
      if (ev > hi * 1e-14)
        cov_free += eig.eigenvectors().col(i) * eig.eigenvectors().col(i).transpose() / ev;
    }
    // w_ref = 1 - sum(free): map the free covariance onto all g components.
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(g, q);
    for (Eigen::Index i = 0; i < q; ++i) {
      t(free[std::size_t(i)], i) = 1.0;
      t(ref, i) = -1.0;
    }
    cov_g = t * cov_free * t.transpose();
  }

  Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
  for (Eigen::Index a = 0; a < g; ++a) {
    const int ka = groups[std::size_t(a)].front();
    est.weights[ka] = w[a];
    for (Eigen::Index b = 0; b < g; ++b) cov(ka, groups[std::size_t(b)].front()) = cov_g(a, b);
  }
  est.covariance = cov;
  est.standard_errors = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  return est;
}

// ---------------------------------------------------------------------------
// Rate fitting
// ---------------------------------------------------------------------------

double RateFit::rate(RateParam p) const {
  switch (p) {
    case RateParam::Gamma1: return rates.gamma1;
    case RateParam::Gamma2: return rates.gamma2;
    case RateParam::Gamma2Tilde: return rates.gamma2_tilde;
    case RateParam::Gamma3: return rates.gamma3;
  }
  return 0.0;
}

namespace {

constexpr double kZ95 = 1.959963984540054;

/// Euclidean projection onto the probability simplex.
Eigen::Vector4d project_simplex(const Eigen::Vector4d& v) {
  Eigen::Vector4d u = v;
  std::sort(u.data(), u.data() + 4, std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (int i = 0; i < 4; ++i) {
    cum += u[i];
    const double t = (cum - 1.0) / (i + 1);
    if (u[i] - t > 0) theta = t;
  }
  return (v.array() - theta).cwiseMax(0.0);
}

/// One observation in whitened form: e = W (model - observed) over the atom
/// counts listed in `components`.
struct WhitenedPoint {
  double time;
  Eigen::Vector4d observed;  // atom-count order
  Eigen::MatrixXd whitening;
  std::vector<int> components;
};

class RateProblem {
 public:
  RateProblem(std::span<const TimedOccupancy> series, const FitOptions& options, bool triad_free)
      : options_(options), triad_free_(triad_free) {
    for (const auto& s : series) {
      WhitenedPoint p{s.time, s.estimate.weights, {}, {}};
      if (s.estimate.covariance) {
        weighted_ = true;
        p.components = {1, 2, 3};
        const double floor = 1.0 / std::max(s.estimate.shots, 1.0);
        Eigen::Matrix3d sigma = s.estimate.covariance->bottomRightCorner<3, 3>();
        sigma += floor * floor * Eigen::Matrix3d::Identity();
        const Eigen::Matrix3d l = sigma.llt().matrixL();
        p.whitening = l.triangularView<Eigen::Lower>().solve(Eigen::Matrix3d::Identity());
      } else {
        p.components = {0, 1, 2, 3};
        p.whitening = Eigen::Matrix4d::Identity();
      }
      points_.push_back(std::move(p));
    }
    // Parameter layout: free rates, then free initials.
    if (triad_free_) rate_slots_.push_back(RateParam::Gamma3);
    if (triad_free_ && !options_.tie_gamma2) rate_slots_.push_back(RateParam::Gamma2Tilde);
    rate_slots_.push_back(RateParam::Gamma2);
    if (!options_.fix_gamma1) rate_slots_.push_back(RateParam::Gamma1);
    if (!options_.fixed_initials) initial_slots_ = triad_free_ ? 3 : 2;
  }

  Eigen::Index size() const { return Eigen::Index(rate_slots_.size()) + initial_slots_; }
  Eigen::Index rate_count() const { return Eigen::Index(rate_slots_.size()); }
  const std::vector<RateParam>& rate_slots() const { return rate_slots_; }
  bool weighted() const { return weighted_; }

  Eigen::Index residual_count() const {
    Eigen::Index n = 0;
    for (const auto& p : points_) n += Eigen::Index(p.components.size());
    return n;
  }

  RateCoefficients rates(const Eigen::VectorXd& theta) const {
    RateCoefficients r;
    for (std::size_t i = 0; i < rate_slots_.size(); ++i) {
      const double v = theta[Eigen::Index(i)];
      switch (rate_slots_[i]) {
        case RateParam::Gamma1: r.gamma1 = v; break;
        case RateParam::Gamma2: r.gamma2 = v; break;
        case RateParam::Gamma2Tilde: r.gamma2_tilde = v; break;
        case RateParam::Gamma3: r.gamma3 = v; break;
      }
    }
    if (options_.tie_gamma2) r.gamma2_tilde = r.gamma2;
    return r;
  }

  /// (r3, r2, r1, r0).
  PopulationVector initials(const Eigen::VectorXd& theta) const {
    if (options_.fixed_initials) return *options_.fixed_initials;
    const Eigen::Index o = rate_count();
    if (triad_free_) {
      const double r3 = theta[o], r2 = theta[o + 1], r1 = theta[o + 2];
      return {r3, r2, r1, 1.0 - r3 - r2 - r1};
    }
    const double r2 = theta[o], r1 = theta[o + 1];
    return {0.0, r2, r1, 1.0 - r2 - r1};
  }

  Eigen::VectorXd project(Eigen::VectorXd theta) const {
    for (Eigen::Index i = 0; i < rate_count(); ++i)
      theta[i] = std::clamp(theta[i], 0.0, options_.max_rate);
    if (initial_slots_ > 0) {
      const Eigen::Index o = rate_count();
      Eigen::Vector4d v = Eigen::Vector4d::Zero();
      const Eigen::Index off = triad_free_ ? 0 : 1;
      for (Eigen::Index i = 0; i < initial_slots_; ++i) v[off + i] = theta[o + i];
      v[3] = 1.0 - v.head<3>().sum();
      v = project_simplex(v);
      for (Eigen::Index i = 0; i < initial_slots_; ++i) theta[o + i] = v[off + i];
    }
    return theta;
  }

  double lower(Eigen::Index) const { return 0.0; }
  double upper(Eigen::Index i) const { return i < rate_count() ? options_.max_rate : 1.0; }

  Eigen::VectorXd residuals(const Eigen::VectorXd& theta) const {
    const RateCoefficients r = rates(theta);
    const PopulationVector init = initials(theta);
    Eigen::VectorXd e(residual_count());
    Eigen::Index row = 0;
    for (const auto& p : points_) {
      const Eigen::Vector4d model = evolve_analytic(init, r, p.time).populations.by_atom_count();
      const Eigen::Vector4d diff = model - p.observed;
      Eigen::VectorXd d(Eigen::Index(p.components.size()));
      for (std::size_t i = 0; i < p.components.size(); ++i) d[Eigen::Index(i)] = diff[p.components[i]];
      e.segment(row, d.size()) = p.whitening * d;
      row += d.size();
    }
    return e;
  }

  /// Central differences, one-sided next to a bound.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& theta) const {
    Eigen::MatrixXd j(residual_count(), size());
    for (Eigen::Index k = 0; k < size(); ++k) {
      const double h = 1e-6 * std::max(std::abs(theta[k]), 1e-3);
      Eigen::VectorXd up = theta, down = theta;
      const bool can_up = theta[k] + h <= upper(k) || k >= rate_count();
      const bool can_down = theta[k] - h >= lower(k);
      if (can_up && can_down) {
        up[k] += h;
        down[k] -= h;
        j.col(k) = (residuals(up) - residuals(down)) / (2.0 * h);
      } else if (can_up) {
        up[k] += h;
        j.col(k) = (residuals(up) - residuals(theta)) / h;
      } else {
        down[k] -= h;
        j.col(k) = (residuals(theta) - residuals(down)) / h;
      }
    }
    return j;
  }

 private:
  FitOptions options_;
  bool triad_free_;
  bool weighted_ = false;
  std::vector<WhitenedPoint> points_;
  std::vector<RateParam> rate_slots_;
  Eigen::Index initial_slots_ = 0;
};

struct LocalResult {
  Eigen::VectorXd theta;
  double cost;
  bool converged;
};

/// Projected Levenberg-Marquardt with an active set on the bounds.
LocalResult levenberg_marquardt(const RateProblem& prob, Eigen::VectorXd theta) {
  theta = prob.project(theta);
  Eigen::VectorXd e = prob.residuals(theta);
  double cost = 0.5 * e.squaredNorm();
  double mu = 1e-3;
  const Eigen::Index p = prob.size();

  for (int iter = 0; iter < 500; ++iter) {
    if (cost == 0.0) return {theta, cost, true};
    const Eigen::MatrixXd j = prob.jacobian(theta);
    const Eigen::VectorXd grad = j.transpose() * e;
    const Eigen::MatrixXd hess = j.transpose() * j;

    std::vector<Eigen::Index> active;
    double pg = 0.0;
    for (Eigen::Index k = 0; k < p; ++k) {
      const bool at_low = theta[k] <= prob.lower(k) && grad[k] > 0;
      const bool at_high = theta[k] >= prob.upper(k) && grad[k] < 0;
      if (!at_low && !at_high) {
        active.push_back(k);
        pg = std::max(pg, std::abs(grad[k]));
      }
    }
    if (active.empty() || pg <= 1e-15 * std::max(1.0, cost)) return {theta, cost, true};

    const auto a = Eigen::Index(active.size());
    Eigen::MatrixXd ha(a, a);
    Eigen::VectorXd ga(a);
    for (Eigen::Index r = 0; r < a; ++r) {
      ga[r] = grad[active[std::size_t(r)]];
      for (Eigen::Index c = 0; c < a; ++c)
        ha(r, c) = hess(active[std::size_t(r)], active[std::size_t(c)]);
    }

    bool accepted = false;
    while (mu < 1e20) {
      Eigen::MatrixXd damped = ha;
      for (Eigen::Index r = 0; r < a; ++r) damped(r, r) += mu * std::max(ha(r, r), 1e-12);
      const Eigen::VectorXd step = damped.ldlt().solve(-ga);
      Eigen::VectorXd trial = theta;
      for (Eigen::Index r = 0; r < a; ++r) trial[active[std::size_t(r)]] += step[r];
      trial = prob.project(trial);
      const Eigen::VectorXd e_trial = prob.residuals(trial);
      const double cost_trial = 0.5 * e_trial.squaredNorm();
      if (cost_trial < cost) {
        const double drop = cost - cost_trial;
        const double move = (trial - theta).norm();
        theta = trial;
        e = e_trial;
        cost = cost_trial;
        mu = std::max(mu / 3.0, 1e-15);
        accepted = true;
        if (drop <= 1e-15 * cost || move <= 1e-13 * (theta.norm() + 1e-13))
          return {theta, cost, true};
        break;
      }
      mu *= 4.0;
    }
    // No damping level reduces the cost: a (bound-constrained) stationary point.
    if (!accepted) return {theta, cost, true};
  }
  return {theta, cost, false};
}

bool triad_population_visible(std::span<const TimedOccupancy> series, const FitOptions& options) {
  if (options.fixed_initials) return options.fixed_initials->r3() > 0.0;
  for (const auto& s : series) {
    const double w3 = s.estimate.weights[3];
    if (s.estimate.covariance) {
      const double se = std::max(s.estimate.standard_errors[3], 1.0 / std::max(s.estimate.shots, 1.0));
      if (w3 > 3.0 * se) return true;
    } else if (w3 > 1e-9) {
      return true;
    }
  }
  return false;
}

}  // namespace

RateFit fit_rates(std::span<const TimedOccupancy> series, const FitOptions& options) {
  std::vector<double> times;
  for (const auto& s : series) {
    if (!(s.time >= 0) || !std::isfinite(s.time))
      throw std::domain_error("fit_rates: wait times must be finite and non-negative");
    times.push_back(s.time);
  }
  std::sort(times.begin(), times.end());
  if (std::unique(times.begin(), times.end()) - times.begin() < 2)
    throw std::domain_error("fit_rates: need at least two distinct wait times");
  if (options.fixed_initials) options.fixed_initials->validate();
  if (!(options.max_rate > 100.0)) throw std::domain_error("fit_rates: max_rate must exceed 100");

  const bool triad = triad_population_visible(series, options);
  const RateProblem prob(series, options, triad);
  if (prob.residual_count() <= prob.size())
    throw std::domain_error("fit_rates: fewer data points than free parameters");

  // Start initials from the earliest observation.
  const auto first = std::min_element(series.begin(), series.end(),
                                      [](const auto& a, const auto& b) { return a.time < b.time; });
  const Eigen::Vector4d start_pop = project_simplex(first->estimate.weights.reverse());

  const std::array<double, 3> grid = {1e-2, 1.0, 1e2};
  const Eigen::Index nr = prob.rate_count();
  int total_starts = 1;
  for (Eigen::Index i = 0; i < nr; ++i) total_starts *= int(grid.size());

  std::optional<LocalResult> best;
  double best_unconverged = std::numeric_limits<double>::infinity();
  int converged = 0;
  for (int s = 0; s < total_starts; ++s) {
    Eigen::VectorXd theta(prob.size());
    int code = s;
    for (Eigen::Index i = 0; i < nr; ++i) {
      theta[i] = grid[std::size_t(code % 3)];
      code /= 3;
    }
    if (prob.size() > nr) {
      if (triad)
        theta.tail(3) = start_pop.head<3>();
      else
        theta.tail(2) = start_pop.segment<2>(1);
    }
    LocalResult res = levenberg_marquardt(prob, theta);
    if (!res.converged) {
      best_unconverged = std::min(best_unconverged, std::sqrt(2.0 * res.cost));
      continue;
    }
    ++converged;
    if (!best || res.cost < best->cost) best = res;
  }
  if (!best) throw FitFailure("fit_rates: no multi-start converged", best_unconverged);

  RateFit fit;
  fit.options = options;
  fit.rates = prob.rates(best->theta);
  fit.fitted_initials = prob.initials(best->theta).clamped();
  fit.residual_norm = std::sqrt(2.0 * best->cost);
  fit.residual_count = std::size_t(prob.residual_count());
  fit.free_parameters = std::size_t(prob.size());
  fit.starts_tried = total_starts;
  fit.starts_converged = converged;

  fit.fixed[int(RateParam::Gamma1)] = options.fix_gamma1;
  fit.fixed[int(RateParam::Gamma2Tilde)] = options.tie_gamma2;
  if (!triad) {
    fit.identifiable[int(RateParam::Gamma3)] = false;
    if (!options.tie_gamma2) fit.identifiable[int(RateParam::Gamma2Tilde)] = false;
  }

  // Linearised covariance; near-null directions mark unidentifiable parameters.
  const Eigen::MatrixXd j = prob.jacobian(best->theta);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(j, Eigen::ComputeThinV);
  const Eigen::VectorXd sv = svd.singularValues();
  const double sv_max = sv.size() ? sv.maxCoeff() : 0.0;
  const Eigen::Index p = prob.size();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
  std::vector<bool> null_loaded(std::size_t(p), false);
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    const Eigen::VectorXd v = svd.matrixV().col(i);
    if (sv[i] > 1e-8 * sv_max) {
      cov += v * v.transpose() / (sv[i] * sv[i]);
    } else {
      for (Eigen::Index k = 0; k < p; ++k)
        if (std::abs(v[k]) > 0.1) null_loaded[std::size_t(k)] = true;
    }
  }
  if (!prob.weighted()) {
    const double dof = double(prob.residual_count() - p);
    cov *= 2.0 * best->cost / dof;
  }

  auto error_of = [&](Eigen::Index k) {
    return null_loaded[std::size_t(k)] ? std::numeric_limits<double>::infinity()
                                       : std::sqrt(std::max(cov(k, k), 0.0));
  };
  for (Eigen::Index k = 0; k < nr; ++k) {
    const RateParam which = prob.rate_slots()[std::size_t(k)];
    fit.rate_errors[int(which)] = error_of(k);
    if (null_loaded[std::size_t(k)]) fit.identifiable[int(which)] = false;
  }
  if (options.tie_gamma2) {
    fit.rate_errors[int(RateParam::Gamma2Tilde)] = fit.rate_errors[int(RateParam::Gamma2)];
    fit.identifiable[int(RateParam::Gamma2Tilde)] = fit.identifiable[int(RateParam::Gamma2)];
  }
  for (int k = 0; k < 4; ++k) {
    const double v = fit.rate(RateParam(k));
    const double half = kZ95 * fit.rate_errors[std::size_t(k)];
    fit.rate_intervals[std::size_t(k)] = {std::max(0.0, v - half), v + half};
  }

  if (prob.size() > nr) {
    const Eigen::Index o = nr;
    const Eigen::Index q = p - nr;
    const Eigen::MatrixXd ci = cov.block(o, o, q, q);
    const Eigen::Index off = triad ? 0 : 1;
    for (Eigen::Index i = 0; i < q; ++i)
      fit.initial_errors[std::size_t(off + i)] = std::sqrt(std::max(ci(i, i), 0.0));
    fit.initial_errors[3] = std::sqrt(std::max(ci.sum(), 0.0));
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Intensity scaling
// ---------------------------------------------------------------------------

const ScalingCandidate& ScalingFit::selected() const {
  for (const auto& c : candidates)
    if (c.m == selected_m) return c;
  throw std::logic_error("scaling fit: selected candidate missing");
}

std::string exponent_label(int m) {
  gamma2_exponent(m);
  return std::to_string(4 * m + 3) + "/2";
}

ScalingFit fit_scaling(std::span<const ScalingPoint> points, std::span<const int> m_candidates) {
  if (points.size() < 2) throw std::domain_error("fit_scaling: need at least two points");
  if (m_candidates.empty()) throw std::domain_error("fit_scaling: no candidate exponents");
  std::vector<double> omegas;
  for (const auto& pt : points) {
    if (!(pt.omega_perp > 0) || !std::isfinite(pt.gamma2) || !(pt.sigma > 0))
      throw std::domain_error("fit_scaling: need omega > 0, finite gamma2 and sigma > 0");
    omegas.push_back(pt.omega_perp);
  }
  std::sort(omegas.begin(), omegas.end());
  if (std::adjacent_find(omegas.begin(), omegas.end()) != omegas.end())
    throw std::domain_error("fit_scaling: duplicate omega_perp values");

  const double ref = omegas.back();
  ScalingFit out{m_candidates.front(), 0.0, {}};
  double best = std::numeric_limits<double>::infinity();
  for (int m : m_candidates) {
    const double e = gamma2_exponent(m);
    double sxy = 0.0, sxx = 0.0;
    for (const auto& pt : points) {
      const double w = 1.0 / (pt.sigma * pt.sigma);
      const double x = std::pow(pt.omega_perp / ref, e);
      sxy += w * x * pt.gamma2;
      sxx += w * x * x;
    }
    const double a = sxy / sxx;
    double rss = 0.0;
    for (const auto& pt : points) {
      const double r = (pt.gamma2 - a * std::pow(pt.omega_perp / ref, e)) / pt.sigma;
      rss += r * r;
    }
    // Known variances, one parameter per model.
    out.candidates.push_back({m, e, a / std::pow(ref, e), rss, rss + 2.0});
    if (rss < best) {
      best = rss;
      out.selected_m = m;
      out.amplitude = a / std::pow(ref, e);
    }
  }
  return out;
}

}  // namespace triad
