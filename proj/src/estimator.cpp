#include "entlink/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "entlink/error.hpp"

namespace entlink {

namespace {

// Calls fn(first, last) for each run of events sharing a trial index.
template <typename Fn>
void for_each_trial(const std::vector<DetectionEvent>& events, Fn&& fn) {
  std::size_t begin = 0;
  while (begin < events.size()) {
    std::size_t end = begin + 1;
    while (end < events.size() && events[end].trial_index == events[begin].trial_index) ++end;
    fn(events.begin() + static_cast<std::ptrdiff_t>(begin), events.begin() + static_cast<std::ptrdiff_t>(end));
    begin = end;
  }
}

const std::vector<DetectionEvent>& grouped_events(const EventLog& log, std::vector<DetectionEvent>& scratch) {
  const auto by_trial = [](const DetectionEvent& a, const DetectionEvent& b) {
    return a.trial_index < b.trial_index;
  };
  if (std::is_sorted(log.events.begin(), log.events.end(), by_trial)) return log.events;
  scratch = log.events;
  std::stable_sort(scratch.begin(), scratch.end(), by_trial);
  return scratch;
}

}  // namespace

G2Estimate estimate_g2(const EventLog& log, double window) {
  if (!(window > 0.0)) throw ParameterError("coincidence window must be > 0");
  if (log.n_main_trials == 0) throw EstimateError("g2 undefined: log has no trials");
  if (log.semiconditional && log.n_noise_trials == 0) {
    throw EstimateError("g2 undefined: semiconditional log has no noise-only trials");
  }
  const std::int64_t w = to_ns(window);
  const std::int64_t idler_width = log.semiconditional ? std::min(w, log.herald_gate_ns) : w;
  const std::int64_t g0 = log.idler_gate_start_ns;
  const std::int64_t d = log.signal_offset_ns;

  G2Estimate est;
  est.window = window;
  std::vector<DetectionEvent> scratch;
  std::vector<std::int64_t> idlers;
  for_each_trial(grouped_events(log, scratch), [&](auto first, auto last) {
    const bool main = first->trial_index < log.n_main_trials;
    const bool singles = log.semiconditional ? !main : main;
    idlers.clear();
    for (auto it = first; it != last; ++it) {
      const std::int64_t t = it->timestamp_ns;
      if (it->channel == Channel::Idler) {
        if (main && t >= g0 && t < g0 + idler_width) idlers.push_back(t);
      } else if (singles && t >= g0 + d && t < g0 + d + w) {
        ++est.n_s;
      }
    }
    if (!main || idlers.empty()) return;
    est.n_i += idlers.size();
    for (auto it = first; it != last; ++it) {
      if (it->channel != Channel::Signal) continue;
      for (const std::int64_t ti : idlers) {
        if (2 * std::abs(it->timestamp_ns - ti - d) <= w) ++est.n_si;
      }
    }
  });

  est.trials = log.n_main_trials;
  est.singles_trials = log.semiconditional ? log.n_noise_trials : log.n_main_trials;
  if (est.n_i == 0) throw EstimateError("g2 undefined: no idler singles in the gate");
  if (est.n_s == 0) throw EstimateError("g2 undefined: no signal singles in the gate");
  est.p_i = static_cast<double>(est.n_i) / static_cast<double>(est.trials);
  est.p_s = static_cast<double>(est.n_s) / static_cast<double>(est.singles_trials);
  est.p_si = static_cast<double>(est.n_si) / static_cast<double>(est.trials);
  est.g2 = est.p_si / (est.p_s * est.p_i);
  const double n_si = static_cast<double>(std::max<std::uint64_t>(est.n_si, 1));
  const double rel2 = 1.0 / n_si + 1.0 / static_cast<double>(est.n_s) + 1.0 / static_cast<double>(est.n_i);
  const double scale = est.n_si > 0 ? est.g2 : 1.0 / (static_cast<double>(est.trials) * est.p_s * est.p_i);
  est.sigma = scale * std::sqrt(rel2);
  return est;
}

Measurement estimate_storage_efficiency(const G2Estimate& g2, double chain, double capture) {
  if (!(chain > 0.0) || !(capture > 0.0)) throw ParameterError("chain and capture must be > 0");
  if (!(g2.p_i > 0.0)) throw EstimateError("efficiency undefined: no heralds");
  const double norm = g2.p_i * chain * capture;
  const double excess = g2.p_si - g2.p_s * g2.p_i;
  Measurement m;
  m.value = excess / norm;
  const double n = static_cast<double>(g2.trials);
  const double var_si = static_cast<double>(g2.n_si) / (n * n);
  const double var_acc = g2.p_s * g2.p_i * g2.p_s * g2.p_i *
                         (1.0 / static_cast<double>(std::max<std::uint64_t>(g2.n_s, 1)) +
                          1.0 / static_cast<double>(std::max<std::uint64_t>(g2.n_i, 1)));
  const double rel_norm = 1.0 / static_cast<double>(std::max<std::uint64_t>(g2.n_i, 1));
  m.sigma = std::sqrt((var_si + var_acc) / (norm * norm) + m.value * m.value * rel_norm);
  return m;
}

double visibility_from_g2(double g2) {
  if (!(g2 >= 1.0)) throw ParameterError("visibility_from_g2 requires g2 >= 1");
  return (g2 - 1.0) / (g2 + 1.0);
}

double fidelity_from_visibility(double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw ParameterError("visibility must be in [0,1]");
  return (3.0 * v + 1.0) / 4.0;
}

double one_over_e_time(double gamma) {
  if (!(gamma > 0.0)) throw ParameterError("gamma must be > 0");
  return std::sqrt(2.0 * std::numbers::ln2) / (std::numbers::pi * gamma);
}

WitnessReport entanglement_witness(double v, double sigma_v) {
  if (!(sigma_v > 0.0)) throw ParameterError("sigma_v must be > 0");
  WitnessReport r;
  r.chsh_violating = v > kChshThreshold;
  r.chsh_sigmas = (v - kChshThreshold) / sigma_v;
  r.separable_excluded_sigmas = (v - kSeparableThreshold) / sigma_v;
  return r;
}

CoincidenceHistogram build_histogram(const EventLog& log, double bin_width, double half_range, double window) {
  if (!(bin_width > 0.0)) throw ParameterError("bin_width must be > 0");
  if (!(half_range > 0.0)) throw ParameterError("half_range must be > 0");
  const auto half_bins = static_cast<std::size_t>(std::ceil(half_range / bin_width - 0.5));
  const std::size_t n_bins = 2 * half_bins + 1;
  CoincidenceHistogram h;
  h.counts.assign(n_bins, 0);
  h.bin_edges.resize(n_bins + 1);
  const double lo = -(static_cast<double>(half_bins) + 0.5) * bin_width;
  for (std::size_t k = 0; k <= n_bins; ++k) h.bin_edges[k] = lo + static_cast<double>(k) * bin_width;
  h.window_offset = 0.0;
  h.window_width = window;

  const std::int64_t g0 = log.idler_gate_start_ns;
  const std::int64_t gate = log.herald_gate_ns;
  std::vector<DetectionEvent> scratch;
  std::vector<std::int64_t> idlers;
  for_each_trial(grouped_events(log, scratch), [&](auto first, auto last) {
    if (first->trial_index >= log.n_main_trials) return;
    idlers.clear();
    for (auto it = first; it != last; ++it) {
      if (it->channel == Channel::Idler && it->timestamp_ns >= g0 && it->timestamp_ns < g0 + gate) {
        idlers.push_back(it->timestamp_ns);
      }
    }
    for (auto it = first; it != last; ++it) {
      if (it->channel != Channel::Signal) continue;
      for (const std::int64_t ti : idlers) {
        const double dt = static_cast<double>(it->timestamp_ns - ti - log.signal_offset_ns) * 1e-9;
        const double pos = (dt - lo) / bin_width;
        if (pos < 0.0 || pos >= static_cast<double>(n_bins)) continue;
        ++h.counts[static_cast<std::size_t>(pos)];
      }
    }
  });
  return h;
}

FringeFit fit_fringe(std::span<const double> phases, std::span<const double> counts,
                     std::span<const double> sigmas) {
  const std::size_t n = phases.size();
  if (n < 4 || counts.size() != n || sigmas.size() != n) {
    throw ParameterError("fringe fit needs at least 4 points with matching counts and sigmas");
  }
  const auto [lo, hi] = std::minmax_element(phases.begin(), phases.end());
  if (!(*hi - *lo > std::numbers::pi)) throw ParameterError("fringe phases must span more than pi");

  // C = a + b cos(phi) + c sin(phi) is linear; A = a, V = |(b, c)| / a.
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(sigmas[i] > 0.0)) throw ParameterError("fringe sigmas must be > 0");
    const double w = 1.0 / sigmas[i];
    x(static_cast<Eigen::Index>(i), 0) = w;
    x(static_cast<Eigen::Index>(i), 1) = w * std::cos(phases[i]);
    x(static_cast<Eigen::Index>(i), 2) = w * std::sin(phases[i]);
    y(static_cast<Eigen::Index>(i)) = w * counts[i];
  }
  FringeFit fit;
  const Eigen::Matrix3d normal = x.transpose() * x;
  Eigen::LDLT<Eigen::Matrix3d> ldlt(normal);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || std::abs(normal.determinant()) < 1e-300) {
    fit.diagnostics.converged = false;
    return fit;
  }
  const Eigen::Vector3d theta = ldlt.solve(x.transpose() * y);
  const Eigen::Matrix3d cov = ldlt.solve(Eigen::Matrix3d::Identity());
  const double a = theta(0), b = theta(1), c = theta(2);
  const double r = std::hypot(b, c);

  fit.amplitude = a;
  fit.amplitude_sigma = std::sqrt(cov(0, 0));
  fit.visibility = r / a;
  Eigen::Vector3d grad_v;
  if (r > 0.0) {
    grad_v << -r / (a * a), b / (a * r), c / (a * r);
    fit.phase = std::atan2(-c, b);
    Eigen::Vector3d grad_p(0.0, c / (r * r), -b / (r * r));
    fit.phase_sigma = std::sqrt(grad_p.dot(cov * grad_p));
  } else {
    grad_v << 0.0, 1.0 / a, 0.0;
    fit.phase_sigma = std::numbers::pi;
  }
  fit.visibility_sigma = std::sqrt(grad_v.dot(cov * grad_v));
  const Eigen::VectorXd resid = y - x * theta;
  fit.diagnostics.chi2 = resid.squaredNorm();
  fit.diagnostics.reduced_chi2 = n > 3 ? fit.diagnostics.chi2 / static_cast<double>(n - 3) : 0.0;
  fit.diagnostics.iterations = 1;
  fit.diagnostics.converged = std::isfinite(fit.visibility) && a > 0.0;
  return fit;
}

FringeFit fit_fringe(const FringeDataset& data) {
  if (data.counts.size() != data.phases.size()) throw ParameterError("fringe dataset size mismatch");
  std::vector<double> counts(data.counts.begin(), data.counts.end());
  std::vector<double> sigmas(counts.size());
  std::transform(counts.begin(), counts.end(), sigmas.begin(),
                 [](double c) { return std::sqrt(std::max(c, 1.0)); });
  return fit_fringe(data.phases, counts, sigmas);
}

namespace {

constexpr double kDephasing = std::numbers::pi * std::numbers::pi / (2.0 * std::numbers::ln2);
constexpr int kMaxIterations = 200;
constexpr double kGradientTolerance = 1e-10;

}  // namespace

DecayFit fit_gaussian_decay(std::span<const DecayPoint> input, DecayModel model) {
  if (input.size() < 3) throw ParameterError("decay fit needs at least 3 points");
  std::vector<DecayPoint> pts(input.begin(), input.end());
  std::sort(pts.begin(), pts.end(), [](const DecayPoint& a, const DecayPoint& b) {
    if (a.t_s != b.t_s) return a.t_s < b.t_s;
    if (a.value != b.value) return a.value < b.value;
    return a.sigma < b.sigma;
  });
  if (pts.front().t_s == pts.back().t_s) throw ParameterError("decay fit needs distinct t_s values");
  for (const auto& p : pts) {
    if (!(p.sigma > 0.0)) throw ParameterError("decay fit sigmas must be > 0");
  }
  const double offset = model == DecayModel::G2MinusOne ? 1.0 : 0.0;
  const double t_ref = pts.back().t_s;
  const auto n = static_cast<Eigen::Index>(pts.size());

  // Work in t / t_ref so the broadening parameter is O(1).
  double a0 = 0.0;
  for (const auto& p : pts) a0 = std::max(a0, p.value - offset);
  double g0 = 1.0;
  {
    const double y1 = pts.front().value - offset, y2 = pts.back().value - offset;
    const double x1 = pts.front().t_s / t_ref, x2 = 1.0;
    if (y1 > 0.0 && y2 > 0.0 && y1 > y2) g0 = std::sqrt(std::log(y1 / y2) / (kDephasing * (x2 * x2 - x1 * x1)));
  }
  Eigen::Vector2d theta(a0 > 0.0 ? a0 : 1.0, g0);

  auto evaluate = [&](const Eigen::Vector2d& th, Eigen::VectorXd& r, Eigen::MatrixXd& j) {
    r.resize(n);
    j.resize(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& p = pts[static_cast<std::size_t>(i)];
      const double x = p.t_s / t_ref;
      const double e = std::exp(-kDephasing * x * x * th(1) * th(1));
      r(i) = (p.value - offset - th(0) * e) / p.sigma;
      j(i, 0) = e / p.sigma;
      j(i, 1) = -th(0) * e * 2.0 * kDephasing * x * x * th(1) / p.sigma;
    }
  };

  Eigen::VectorXd r;
  Eigen::MatrixXd j;
  evaluate(theta, r, j);
  double chi2 = r.squaredNorm();
  double lambda = 1e-3;
  DecayFit fit;
  int it = 0;
  bool converged = false;
  for (; it < kMaxIterations; ++it) {
    const Eigen::Matrix2d jtj = j.transpose() * j;
    const Eigen::Vector2d grad = j.transpose() * r;
    if (grad.norm() < kGradientTolerance * std::max(1.0, chi2)) {
      converged = true;
      break;
    }
    Eigen::Matrix2d damped = jtj;
    damped.diagonal() *= (1.0 + lambda);
    const Eigen::Vector2d step = damped.ldlt().solve(grad);
    const Eigen::Vector2d trial = theta + step;
    Eigen::VectorXd r_new;
    Eigen::MatrixXd j_new;
    evaluate(trial, r_new, j_new);
    const double chi2_new = r_new.squaredNorm();
    if (std::isfinite(chi2_new) && chi2_new <= chi2) {
      const bool tiny = step.norm() <= 1e-15 * (theta.norm() + 1e-15) || chi2 - chi2_new <= 1e-30;
      theta = trial;
      r = std::move(r_new);
      j = std::move(j_new);
      chi2 = chi2_new;
      lambda = std::max(lambda * 0.1, 1e-12);
      if (tiny) {
        converged = true;
        ++it;
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
  }

  const Eigen::Matrix2d jtj = j.transpose() * j;
  const Eigen::Matrix2d cov = jtj.inverse();
  const double gamma_scale = 1.0 / t_ref;
  fit.amplitude = theta(0);
  fit.gamma = std::abs(theta(1)) * gamma_scale;
  fit.amplitude_sigma = std::sqrt(std::max(cov(0, 0), 0.0));
  fit.gamma_sigma = std::sqrt(std::max(cov(1, 1), 0.0)) * gamma_scale;
  fit.diagnostics.chi2 = chi2;
  fit.diagnostics.reduced_chi2 = n > 2 ? chi2 / static_cast<double>(n - 2) : 0.0;
  fit.diagnostics.iterations = it;
  fit.diagnostics.converged = converged && std::isfinite(fit.gamma) && std::isfinite(fit.gamma_sigma);
  return fit;
}

}  // namespace entlink
