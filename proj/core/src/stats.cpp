#include "eegraph/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eegraph/connectivity.hpp"

namespace eegraph {

namespace {

/// Average ranks with ties over the pooled sample.
std::vector<double> ranks_with_ties(const std::vector<double>& pooled,
                                    double* tie_term) {
  const size_t n = pooled.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&pooled](size_t a, size_t b) { return pooled[a] < pooled[b]; });
  std::vector<double> ranks(n, 0.0);
  *tie_term = 0.0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg_rank;
    const double t = static_cast<double>(j - i + 1);
    *tie_term += t * t * t - t;
    i = j + 1;
  }
  return ranks;
}

double normal_sf_two_sided(double z_abs) {
  return std::min(1.0, std::erfc(z_abs / std::sqrt(2.0)));
}

/// Regularized incomplete beta, continued-fraction form.
double betacf(double a, double b, double x) {
  const int kMaxIter = 200;
  const double kEps = 3e-14, kFpMin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_beta = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                         a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_beta);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                        b * std::log(1.0 - x) + a * std::log(x)) *
                   betacf(b, a, 1.0 - x) / b;
}

double student_t_sf_two_sided(double t, double df) {
  // P(|T| >= t) = I_{df/(df+t^2)}(df/2, 1/2)
  const double x = df / (df + t * t);
  return std::min(1.0, incomplete_beta(df / 2.0, 0.5, x));
}

}  // namespace

MannWhitneyResult mann_whitney_u(const std::vector<double>& a,
                                 const std::vector<double>& b) {
  MannWhitneyResult r;
  if (a.empty() || b.empty())
    throw Error(Errc::invalid_spec, "mann_whitney_u: empty sample");
  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  double tie_term = 0.0;
  const std::vector<double> ranks = ranks_with_ties(pooled, &tie_term);
  double r1 = 0.0;
  for (size_t i = 0; i < a.size(); ++i) r1 += ranks[i];
  const double u1 = r1 - n1 * (n1 + 1.0) / 2.0;
  r.u = u1;

  const double n = n1 + n2;
  const double mu = n1 * n2 / 2.0;
  const double var =
      n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (var <= 0.0) {
    r.degenerate = true;
    r.z = 0.0;
    r.p = 1.0;
    return r;
  }
  const double sd = std::sqrt(var);
  r.z = (u1 - mu) / sd;
  const double u_big = std::max(u1, n1 * n2 - u1);
  const double z_cc = (u_big - mu - 0.5) / sd;
  r.p = normal_sf_two_sided(std::max(0.0, z_cc));
  return r;
}

WelchTResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  WelchTResult r;
  if (a.size() < 2 || b.size() < 2)
    throw Error(Errc::invalid_spec, "welch_t_test: need at least 2 per group");
  auto mean_var = [](const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::pair<double, double>{m, ss / static_cast<double>(x.size() - 1)};
  };
  const auto [m1, v1] = mean_var(a);
  const auto [m2, v2] = mean_var(b);
  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());
  const double se2 = v1 / n1 + v2 / n2;
  if (se2 <= 0.0) {
    r.degenerate = true;
    r.p = 1.0;
    return r;
  }
  r.t = (m1 - m2) / std::sqrt(se2);
  r.df = se2 * se2 /
         (v1 * v1 / (n1 * n1 * (n1 - 1.0)) + v2 * v2 / (n2 * n2 * (n2 - 1.0)));
  r.p = student_t_sf_two_sided(std::abs(r.t), r.df);
  return r;
}

const char* group_test_name(GroupTest t) {
  return t == GroupTest::mann_whitney ? "mann_whitney" : "welch_t";
}

GroupTest group_test_from_name(const std::string& name) {
  if (name == "mann_whitney") return GroupTest::mann_whitney;
  if (name == "welch_t") return GroupTest::welch_t;
  throw Error(Errc::bad_value_type, "unknown group test: " + name);
}

GroupStatsReport group_stats(const Dataset& ds, const PreprocessConfig& pre,
                             const WelchSpec& welch, GroupTest test,
                             WarningLog* log) {
  GroupStatsReport rep;
  rep.test_name = group_test_name(test);

  std::vector<const SubjectLabel*> addicted, control;
  for (const SubjectLabel& s : ds.labels)
    (s.label == Label::Addicted ? addicted : control).push_back(&s);
  if (addicted.empty() || control.empty())
    throw Error(Errc::class_missing, "group_stats: both classes required");

  const auto& bands = standard_bands();
  for (Task task : all_tasks()) {
    // subject -> mean wPLI matrix and per-band mean power for this task
    struct PerSubject {
      Matrix wpli_mean;
      std::vector<double> band_means;
    };
    std::map<std::string, PerSubject> per_subject;
    for (const SubjectLabel& subj : ds.labels) {
      const Recording& rec = ds.get(subj.subject_id, task);
      PreprocessResult pr = preprocess_recording(rec, pre, log);
      const int n_ch = pr.windows.plan.count > 0 ? pr.windows.windows[0].cols : 0;

      PerSubject ps;
      ps.wpli_mean = Matrix::zeros(n_ch, n_ch);
      ps.band_means.assign(bands.size(), 0.0);
      for (const Matrix& win : pr.windows.windows) {
        const ConnectivityMatrix cm = connectivity(win, ConnMetric::WPLI, log);
        for (size_t k = 0; k < cm.m.v.size(); ++k) ps.wpli_mean.v[k] += cm.m.v[k];
        for (int ch = 0; ch < win.cols; ++ch) {
          const Psd psd = welch_psd(win.column(ch), rec.sample_rate_hz, welch);
          const auto bp = band_powers(psd, bands);
          for (size_t bi = 0; bi < bands.size(); ++bi) ps.band_means[bi] += bp[bi];
        }
      }
      const double n_win = static_cast<double>(pr.windows.windows.size());
      for (double& v : ps.wpli_mean.v) v /= n_win;
      for (double& v : ps.band_means)
        v /= n_win * static_cast<double>(rec.data.cols);
      per_subject[subj.subject_id] = std::move(ps);
    }

    ConditionConnectivity cc;
    cc.task = task;
    const int n_ch = per_subject.begin()->second.wpli_mean.rows;
    cc.mean_addicted = Matrix::zeros(n_ch, n_ch);
    cc.mean_not_addicted = Matrix::zeros(n_ch, n_ch);
    for (const SubjectLabel* s : addicted)
      for (size_t k = 0; k < cc.mean_addicted.v.size(); ++k)
        cc.mean_addicted.v[k] += per_subject[s->subject_id].wpli_mean.v[k];
    for (const SubjectLabel* s : control)
      for (size_t k = 0; k < cc.mean_not_addicted.v.size(); ++k)
        cc.mean_not_addicted.v[k] += per_subject[s->subject_id].wpli_mean.v[k];
    for (double& v : cc.mean_addicted.v) v /= static_cast<double>(addicted.size());
    for (double& v : cc.mean_not_addicted.v) v /= static_cast<double>(control.size());
    cc.difference = cc.mean_addicted;
    for (size_t k = 0; k < cc.difference.v.size(); ++k)
      cc.difference.v[k] -= cc.mean_not_addicted.v[k];
    rep.connectivity.push_back(std::move(cc));

    for (size_t bi = 0; bi < bands.size(); ++bi) {
      std::vector<double> ga, gc;
      for (const SubjectLabel* s : addicted) ga.push_back(per_subject[s->subject_id].band_means[bi]);
      for (const SubjectLabel* s : control) gc.push_back(per_subject[s->subject_id].band_means[bi]);
      BandPowerTest bt;
      bt.task = task;
      bt.band = bands[bi].name;
      for (double v : ga) bt.mean_addicted += v;
      bt.mean_addicted /= static_cast<double>(ga.size());
      for (double v : gc) bt.mean_not_addicted += v;
      bt.mean_not_addicted /= static_cast<double>(gc.size());
      if (test == GroupTest::mann_whitney) {
        const MannWhitneyResult mw = mann_whitney_u(ga, gc);
        bt.statistic = mw.u;
        bt.p_value = mw.p;
      } else {
        const WelchTResult wt = welch_t_test(ga, gc);
        bt.statistic = wt.t;
        bt.p_value = wt.p;
      }
      rep.band_tests.push_back(std::move(bt));
    }
  }
  return rep;
}

}  // namespace eegraph
