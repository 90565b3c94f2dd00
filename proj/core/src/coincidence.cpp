#include "stcf/coincidence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stcf/geometry.hpp"

namespace stcf {

std::vector<Match> match_coincidences(std::span<const PhotonEvent> signal,
                                      std::span<const PhotonEvent> herald) {
  if (herald.empty())
    throw std::invalid_argument("match_coincidences: empty herald stream");
  std::vector<Match> out;
  out.reserve(signal.size());
  // j is the first herald at or after the signal; prev_first is the first
  // index of the equal-time run ending at j - 1. Advancing on distance would
  // stall forever on heralds sharing a timestamp, so advance on time and
  // break ties (equal distance or equal timestamp) toward the earlier index.
  size_t j = 0, prev_first = 0;
  for (const PhotonEvent& s : signal) {
    bool advanced = false;
    while (j < herald.size() && herald[j].toa_ps < s.toa_ps) {
      ++j;
      advanced = true;
    }
    if (advanced) {
      prev_first = j - 1;
      while (prev_first > 0 &&
             herald[prev_first - 1].toa_ps == herald[j - 1].toa_ps)
        --prev_first;
    }
    size_t pick;
    if (j == 0) {
      pick = 0;
    } else if (j == herald.size()) {
      pick = prev_first;
    } else {
      int64_t before = s.toa_ps - herald[j - 1].toa_ps;
      int64_t after = herald[j].toa_ps - s.toa_ps;
      pick = after < before ? j : prev_first;
    }
    out.push_back(Match{s.toa_ps - herald[pick].toa_ps, s.toa_ps, s.col,
                        herald[pick].col});
  }
  return out;
}

JointSpectrum::JointSpectrum()
    : counts(kGridSize * kGridSize, 0),
      sig_rate(kGridSize, 0.0),
      her_rate(kGridSize, 0.0) {}

uint64_t& JointSpectrum::at(int sig_col, int her_col) {
  return counts[static_cast<size_t>(sig_col) * kGridSize + her_col];
}

uint64_t JointSpectrum::at(int sig_col, int her_col) const {
  return counts[static_cast<size_t>(sig_col) * kGridSize + her_col];
}

JointSpectrum build_joint_spectrum(std::span<const Match> gated,
                                   std::span<const PhotonEvent> signal,
                                   std::span<const PhotonEvent> herald,
                                   double duration_s) {
  if (!(duration_s > 0))
    throw std::invalid_argument("build_joint_spectrum: duration must be > 0");
  JointSpectrum js;
  js.duration_s = duration_s;
  for (const Match& m : gated) js.at(m.sig_col, m.her_col) += 1;
  for (const PhotonEvent& e : signal) js.sig_rate[e.col] += 1.0;
  for (const PhotonEvent& e : herald) js.her_rate[e.col] += 1.0;
  for (int i = 0; i < kGridSize; ++i) {
    js.sig_rate[i] /= duration_s;
    js.her_rate[i] /= duration_s;
  }
  return js;
}

double estimate_background(const JointSpectrum& js, double tau_s,
                           const CellMask* mask) {
  if (!(tau_s > 0))
    throw std::invalid_argument("estimate_background: tau must be > 0");
  if (mask == nullptr || !*mask) {
    double s = 0, h = 0;
    for (int i = 0; i < kGridSize; ++i) {
      s += js.sig_rate[i];
      h += js.her_rate[i];
    }
    return tau_s * s * h;
  }
  double acc = 0;
  for (int i = 0; i < kGridSize; ++i) {
    if (js.sig_rate[i] == 0) continue;
    for (int j = 0; j < kGridSize; ++j)
      if ((*mask)(i, j)) acc += js.sig_rate[i] * js.her_rate[j];
  }
  return tau_s * acc;
}

int Histogram::bin_index(double dt_ns) const {
  if (dt_ns < lo_ns || dt_ns >= hi_ns) return -1;
  int i = static_cast<int>((dt_ns - lo_ns) / bin_ns);
  return std::min(i, static_cast<int>(counts.size()) - 1);
}

double Histogram::bin_center(int i) const {
  return lo_ns + (i + 0.5) * bin_ns;
}

Histogram histogram_dt(std::span<const Match> matches,
                       const SpectrometerConfig& cfg, double lo_ns,
                       double hi_ns) {
  if (!(hi_ns > lo_ns))
    throw std::invalid_argument("histogram_dt: need hi > lo");
  Histogram h;
  h.lo_ns = lo_ns;
  h.hi_ns = hi_ns;
  h.bin_ns = cfg.histogram_bin_ns;
  int nbins = static_cast<int>(std::llround((hi_ns - lo_ns) / h.bin_ns));
  if (nbins < 1) throw std::invalid_argument("histogram_dt: no bins");
  h.counts.assign(nbins, 0);
  for (const Match& m : matches) {
    double dt = m.dt_ps * 1e-3;
    if (dt < lo_ns) {
      h.underflow++;
    } else if (dt >= hi_ns) {
      h.overflow++;
    } else {
      h.counts[h.bin_index(dt)]++;
    }
  }
  // locate the peak on a 3-bin moving sum (zero-padded); ties -> smallest bin
  int best = 0;
  uint64_t best_sum = 0;
  bool first = true;
  for (int i = 0; i < nbins; ++i) {
    uint64_t s = h.counts[i];
    if (i > 0) s += h.counts[i - 1];
    if (i + 1 < nbins) s += h.counts[i + 1];
    if (first || s > best_sum) {
      best = i;
      best_sum = s;
      first = false;
    }
  }
  h.peak_ns = h.bin_center(best);
  return h;
}

CoincidenceResult analyze(std::span<const PhotonEvent> signal,
                          std::span<const PhotonEvent> herald,
                          const SpectrometerConfig& cfg, AnalysisMode mode,
                          double duration_s) {
  cfg.validate();
  if (!(duration_s > 0))
    throw std::invalid_argument("analyze: duration must be > 0");
  if (mode.spectral && !(mode.w_px > 0))
    throw std::invalid_argument("analyze: spectral mode needs w > 0");

  std::vector<Match> matches = match_coincidences(signal, herald);

  std::vector<Match> selected;
  if (mode.spectral) {
    double expected[kGridSize];
    for (int j = 0; j < kGridSize; ++j)
      expected[j] = expected_signal_column(j, cfg);
    selected.reserve(matches.size());
    for (const Match& m : matches)
      if (std::abs(m.sig_col - expected[m.her_col]) <= mode.w_px * 0.5)
        selected.push_back(m);
  } else {
    selected.assign(matches.begin(), matches.end());
  }

  CoincidenceResult res;
  res.mode = mode;
  res.duration_s = duration_s;
  res.histogram = histogram_dt(selected, cfg);
  res.peak_ns = res.histogram.peak_ns;

  double gate_lo = res.peak_ns - cfg.tau_ns / 2;
  double gate_hi = res.peak_ns + cfg.tau_ns / 2;
  std::vector<Match> gated;
  gated.reserve(selected.size());
  for (const Match& m : selected) {
    double dt = m.dt_ps * 1e-3;
    if (dt >= gate_lo && dt < gate_hi) gated.push_back(m);
  }
  res.c_tot = static_cast<double>(gated.size());

  res.joint = build_joint_spectrum(gated, signal, herald, duration_s);

  double tau_s = cfg.tau_ns * 1e-9;
  if (mode.spectral) {
    double expected[kGridSize];
    for (int j = 0; j < kGridSize; ++j)
      expected[j] = expected_signal_column(j, cfg);
    double w = mode.w_px;
    CellMask mask = [&expected, w](int i, int j) {
      return std::abs(i - expected[j]) <= w * 0.5;
    };
    res.c_b = estimate_background(res.joint, tau_s, &mask) * duration_s;
  } else {
    res.c_b = estimate_background(res.joint, tau_s) * duration_s;
  }

  if (res.c_b > 0) {
    double d = res.c_tot - res.c_b;
    res.sbr = d / res.c_b;
    res.sbr_sigma = std::sqrt(res.c_tot / (res.c_b * res.c_b) +
                              res.c_tot * res.c_tot / std::pow(res.c_b, 3));
    double v = res.c_tot + res.c_b;
    if (v > 0) {
      res.snr = d / std::sqrt(v);
      double dx = 1.0 / std::sqrt(v) - d / (2.0 * std::pow(v, 1.5));
      double db = -1.0 / std::sqrt(v) - d / (2.0 * std::pow(v, 1.5));
      res.snr_sigma = std::sqrt(dx * dx * res.c_tot + db * db * res.c_b);
    }
  }
  return res;
}

namespace {

struct GaussModel {
  // y = A exp(-2 x^2 / a^2) + c
  double a, A, c;
};

double chisq(const GaussModel& m, std::span<const double> y, double x0) {
  double s = 0;
  for (size_t i = 0; i < y.size(); ++i) {
    double x = static_cast<double>(i) - x0;
    double r = y[i] - (m.A * std::exp(-2 * x * x / (m.a * m.a)) + m.c);
    s += r * r;
  }
  return s;
}

// Best A, c for fixed width by linear least squares; used by the fallback.
void solve_linear(double a, std::span<const double> y, double x0, double& A,
                  double& c) {
  double sg = 0, sgg = 0, sy = 0, sgy = 0;
  size_t n = y.size();
  for (size_t i = 0; i < n; ++i) {
    double x = static_cast<double>(i) - x0;
    double g = std::exp(-2 * x * x / (a * a));
    sg += g;
    sgg += g * g;
    sy += y[i];
    sgy += g * y[i];
  }
  double det = sgg * n - sg * sg;
  if (std::abs(det) < 1e-30) {
    A = 0;
    c = sy / n;
    return;
  }
  A = (sgy * n - sg * sy) / det;
  c = (sgg * sy - sg * sgy) / det;
}

}  // namespace

BandFit fit_gaussian_profile(std::span<const double> profile) {
  size_t n = profile.size();
  if (n < 5) throw FitError("profile too short to fit");
  double x0 = (static_cast<double>(n) - 1) / 2;

  // moment initialization over the baseline-subtracted profile
  double ymin = profile[0], ymax = profile[0];
  for (double v : profile) {
    ymin = std::min(ymin, v);
    ymax = std::max(ymax, v);
  }
  if (!(ymax > ymin)) throw FitError("flat profile");
  double m0 = 0, m2 = 0;
  for (size_t i = 0; i < n; ++i) {
    double w = profile[i] - ymin;
    double x = static_cast<double>(i) - x0;
    m0 += w;
    m2 += w * x * x;
  }
  if (!(m0 > 0)) throw FitError("flat profile");
  // var of exp(-2x^2/a^2) is a^2/4
  GaussModel m{2.0 * std::sqrt(std::max(m2 / m0, 0.25)), ymax - ymin, ymin};

  // Gauss-Newton on (a, A, c) with analytic Jacobian
  bool converged = false;
  int iter = 0;
  for (; iter < 100; ++iter) {
    double jtj[3][3] = {};
    double jtr[3] = {};
    for (size_t i = 0; i < n; ++i) {
      double x = static_cast<double>(i) - x0;
      double g = std::exp(-2 * x * x / (m.a * m.a));
      double f = m.A * g + m.c;
      double r = profile[i] - f;
      double J[3] = {m.A * g * 4 * x * x / (m.a * m.a * m.a), g, 1.0};
      for (int p = 0; p < 3; ++p) {
        jtr[p] += J[p] * r;
        for (int q = 0; q < 3; ++q) jtj[p][q] += J[p] * J[q];
      }
    }
    // solve 3x3 via Gaussian elimination with partial pivoting
    double M[3][4];
    for (int p = 0; p < 3; ++p) {
      for (int q = 0; q < 3; ++q) M[p][q] = jtj[p][q];
      M[p][3] = jtr[p];
    }
    bool singular = false;
    for (int p = 0; p < 3; ++p) {
      int piv = p;
      for (int q = p + 1; q < 3; ++q)
        if (std::abs(M[q][p]) > std::abs(M[piv][p])) piv = q;
      if (std::abs(M[piv][p]) < 1e-30) {
        singular = true;
        break;
      }
      std::swap(M[p], M[piv]);
      for (int q = p + 1; q < 3; ++q) {
        double f = M[q][p] / M[p][p];
        for (int k = p; k < 4; ++k) M[q][k] -= f * M[p][k];
      }
    }
    if (singular) break;
    double step[3];
    for (int p = 2; p >= 0; --p) {
      double s = M[p][3];
      for (int q = p + 1; q < 3; ++q) s -= M[p][q] * step[q];
      step[p] = s / M[p][p];
    }
    // damp steps that would flip the width sign
    double scale = 1.0;
    while (m.a + scale * step[0] <= 0.05 && scale > 1e-6) scale *= 0.5;
    m.a += scale * step[0];
    m.A += scale * step[1];
    m.c += scale * step[2];
    if (std::abs(step[0]) < 1e-8 * std::max(1.0, std::abs(m.a)) &&
        std::abs(step[1]) < 1e-8 * std::max(1.0, std::abs(m.A))) {
      converged = true;
      ++iter;
      break;
    }
  }

  if (!converged || !(m.a > 0) || !std::isfinite(m.a)) {
    // golden-section on width with profiled amplitude/offset
    double lo = 0.3, hi = x0 > 1 ? 2 * x0 : 2.0;
    const double phi = 0.6180339887498949;
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    auto cost = [&](double a) {
      double A, c;
      solve_linear(a, profile, x0, A, c);
      return chisq(GaussModel{a, A, c}, profile, x0);
    };
    double f1 = cost(x1), f2 = cost(x2);
    for (int k = 0; k < 200 && hi - lo > 1e-10; ++k) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - phi * (hi - lo);
        f1 = cost(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + phi * (hi - lo);
        f2 = cost(x2);
      }
      ++iter;
    }
    m.a = (lo + hi) / 2;
    solve_linear(m.a, profile, x0, m.A, m.c);
    if (!(m.A > 0)) throw FitError("no peak above baseline");
  }

  BandFit fit;
  fit.alpha_px = std::abs(m.a);
  fit.amplitude = m.A;
  fit.offset = m.c;
  fit.iterations = iter;

  // 1-sigma width error from the residual variance and the curvature of
  // chi^2 along the width direction (other parameters re-profiled)
  double dof = static_cast<double>(n) - 3;
  if (dof > 0) {
    double s2 = chisq(m, profile, x0) / dof;
    double da = 1e-3 * fit.alpha_px;
    auto prof_cost = [&](double a) {
      double A, c;
      solve_linear(a, profile, x0, A, c);
      return chisq(GaussModel{a, A, c}, profile, x0);
    };
    double c0 = prof_cost(fit.alpha_px);
    double cp = prof_cost(fit.alpha_px + da);
    double cm = prof_cost(fit.alpha_px - da);
    double curv = (cp - 2 * c0 + cm) / (da * da);
    if (curv > 0) fit.alpha_sigma = std::sqrt(2.0 * s2 / curv);
  }
  return fit;
}

BandFit fit_band_profile(const JointSpectrum& js,
                         const SpectrometerConfig& cfg) {
  // profile of signal-column offsets from each herald's conjugate, sampled
  // on a half-pixel lattice over [-32, 32]
  constexpr int kHalf = 64;  // quarter-pixel-resolution half width
  std::vector<double> profile(2 * kHalf + 1, 0.0);
  for (int j = 0; j < kGridSize; ++j) {
    double e;
    try {
      e = expected_signal_column(j, cfg);
    } catch (const std::domain_error&) {
      continue;
    }
    for (int i = 0; i < kGridSize; ++i) {
      uint64_t c = js.at(i, j);
      if (c == 0) continue;
      int k = static_cast<int>(std::lround((i - e) * 2)) + kHalf;
      if (k >= 0 && k < static_cast<int>(profile.size()))
        profile[k] += static_cast<double>(c);
    }
  }
  BandFit fit = fit_gaussian_profile(profile);
  fit.alpha_px /= 2;  // lattice is half-pixel
  fit.alpha_sigma /= 2;
  return fit;
}

}  // namespace stcf
