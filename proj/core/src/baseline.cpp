#include "eegraph/baseline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "eegraph/preprocess.hpp"
#include "eegraph/tape.hpp"

namespace eegraph {

const char* baseline_kind_name(BaselineKind k) {
  return k == BaselineKind::logreg ? "logreg" : "mlp";
}

BaselineKind baseline_kind_from_name(const std::string& name) {
  if (name == "logreg") return BaselineKind::logreg;
  if (name == "mlp") return BaselineKind::mlp;
  throw Error(Errc::bad_value_type, "unknown baseline kind: " + name);
}

BaselineData prepare_baseline_data(const Dataset& ds, const std::vector<Task>& tasks,
                                   const PreprocessConfig& pre, const WelchSpec& welch,
                                   WarningLog* log) {
  BaselineData data;
  data.subjects = ds.labels;
  for (const SubjectLabel& subj : ds.labels) {
    for (Task task : tasks) {
      const Recording& rec = ds.get(subj.subject_id, task);
      PreprocessResult pr = preprocess_recording(rec, pre, log);
      const auto feats = extract_node_features(pr.windows, rec.sample_rate_hz, welch);

      const Matrix& sig = pr.filtered.data;
      std::vector<double> corr;
      corr.reserve(static_cast<size_t>(sig.cols * (sig.cols - 1) / 2));
      for (int i = 0; i < sig.cols; ++i)
        for (int j = i + 1; j < sig.cols; ++j)
          corr.push_back(pearson_r(sig.column(i), sig.column(j)));

      const int node_dim = feats.empty() ? 0 : feats[0].rows * feats[0].cols;
      BaselineSample s;
      s.subject_id = subj.subject_id;
      s.task = task;
      s.label = subj.label;
      s.features = Matrix::zeros(static_cast<int>(feats.size()),
                                 node_dim + static_cast<int>(corr.size()));
      for (size_t w = 0; w < feats.size(); ++w) {
        double* row = s.features.row_ptr(static_cast<int>(w));
        std::copy(feats[w].v.begin(), feats[w].v.end(), row);
        std::copy(corr.begin(), corr.end(), row + node_dim);
      }
      data.samples.push_back(std::move(s));
    }
  }
  return data;
}

namespace {

struct Split {
  Matrix x;                 // n x dim
  std::vector<double> y;    // n
  // Row ranges per test sample for per-subject aggregation.
  std::vector<std::pair<int, int>> sample_rows;
  std::vector<const BaselineSample*> sources;
};

Split stack(const std::vector<const BaselineSample*>& samples) {
  Split s;
  int rows = 0, cols = 0;
  for (const BaselineSample* b : samples) {
    rows += b->features.rows;
    cols = b->features.cols;
  }
  s.x = Matrix::zeros(rows, cols);
  int at = 0;
  for (const BaselineSample* b : samples) {
    s.sample_rows.push_back({at, at + b->features.rows});
    s.sources.push_back(b);
    const double target = b->label == Label::Addicted ? 1.0 : 0.0;
    for (int r = 0; r < b->features.rows; ++r) {
      std::copy(b->features.row_ptr(r), b->features.row_ptr(r) + cols, s.x.row_ptr(at));
      s.y.push_back(target);
      ++at;
    }
  }
  return s;
}

double mean_bce(const std::vector<double>& logits, const std::vector<double>& y) {
  double loss = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    const double x = logits[i];
    loss += std::max(x, 0.0) - x * y[i] + std::log1p(std::exp(-std::abs(x)));
  }
  return loss / static_cast<double>(logits.size());
}

std::vector<double> linear_logits(const Matrix& x, const std::vector<double>& w, double b) {
  std::vector<double> out(static_cast<size_t>(x.rows), b);
  for (int r = 0; r < x.rows; ++r) {
    const double* row = x.row_ptr(r);
    double s = 0.0;
    for (int c = 0; c < x.cols; ++c) s += row[c] * w[static_cast<size_t>(c)];
    out[static_cast<size_t>(r)] += s;
  }
  return out;
}

/// Full-batch gradient descent on L2-penalized logistic regression.
void fit_logreg(const Split& train, const Split& val, const BaselineConfig& cfg,
                std::vector<double>& w, double& b, int& epochs_run, int& best_epoch,
                double& best_val) {
  w.assign(static_cast<size_t>(train.x.cols), 0.0);
  b = 0.0;
  std::vector<double> best_w = w;
  double best_b = b;
  best_val = std::numeric_limits<double>::infinity();
  best_epoch = -1;
  const int patience_limit = std::max(1, cfg.patience);
  int non_improving = 0;
  const double inv_n = 1.0 / static_cast<double>(train.x.rows);
  for (int epoch = 0; epoch < cfg.logreg_epochs; ++epoch) {
    const auto logits = linear_logits(train.x, w, b);
    std::vector<double> gw(w.size(), 0.0);
    double gb = 0.0;
    for (int r = 0; r < train.x.rows; ++r) {
      const double err = sigmoid(logits[static_cast<size_t>(r)]) - train.y[static_cast<size_t>(r)];
      const double* row = train.x.row_ptr(r);
      for (size_t c = 0; c < w.size(); ++c) gw[c] += err * row[c];
      gb += err;
    }
    for (size_t c = 0; c < w.size(); ++c)
      w[c] -= cfg.logreg_lr * (gw[c] * inv_n + 2.0 * cfg.l2 * w[c]);
    b -= cfg.logreg_lr * gb * inv_n;
    epochs_run = epoch + 1;

    const double vl = mean_bce(linear_logits(val.x, w, b), val.y);
    if (vl < best_val) {
      best_val = vl;
      best_w = w;
      best_b = b;
      best_epoch = epoch;
      non_improving = 0;
    } else if (++non_improving >= patience_limit) {
      break;
    }
  }
  if (best_epoch >= 0) {
    w = best_w;
    b = best_b;
  }
}

/// 256-128-64 fully connected net with ReLU, trained with AdamW.
struct MlpNet {
  ParamStore params;

  explicit MlpNet(int in_dim, std::uint64_t seed) {
    const int dims[] = {in_dim, 256, 128, 64, 1};
    for (int l = 0; l < 4; ++l) {
      const double lim = std::sqrt(6.0 / static_cast<double>(dims[l] + dims[l + 1]));
      params.add("W" + std::to_string(l + 1), dims[l], dims[l + 1], lim);
      params.add("b" + std::to_string(l + 1), 1, dims[l + 1], 0.0);
    }
    Rng rng(seed);
    for (size_t i = 0; i < params.tensor_count(); ++i) {
      const double lim = params.init_limit(i);
      if (lim <= 0.0) continue;
      for (double& x : params.value(i).v) x = (2.0 * rng.uniform() - 1.0) * lim;
    }
  }

  Var forward(Tape& t, const std::vector<Var>& p, Var x) const {
    Var h = x;
    for (int l = 0; l < 4; ++l) {
      h = t.add_rowvec(t.matmul(h, p[static_cast<size_t>(2 * l)]),
                       p[static_cast<size_t>(2 * l + 1)]);
      if (l < 3) h = t.relu(h);
    }
    return h;
  }

  std::vector<double> predict(const Matrix& x) const {
    Tape t;
    std::vector<Var> p;
    for (size_t i = 0; i < params.tensor_count(); ++i)
      p.push_back(t.leaf(params.value(i), false));
    const Matrix& out = t.value(forward(t, p, t.leaf(x, false)));
    return out.v;
  }
};

void fit_mlp(const Split& train, const Split& val, const BaselineConfig& cfg,
             MlpNet& net, std::uint64_t seed, int& epochs_run, int& best_epoch,
             double& best_val) {
  OptimConfig oc;
  oc.lr = cfg.mlp_lr;
  AdamW opt(oc, net.params);
  Rng shuffle_rng(Rng::derive(seed, 2));
  ParamStore best_params = net.params;
  best_val = std::numeric_limits<double>::infinity();
  best_epoch = -1;
  const int patience_limit = std::max(1, cfg.patience);
  int non_improving = 0;
  std::vector<size_t> order(static_cast<size_t>(train.x.rows));
  std::iota(order.begin(), order.end(), size_t{0});

  for (int epoch = 0; epoch < cfg.mlp_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (size_t at = 0; at < order.size(); at += static_cast<size_t>(cfg.batch_size)) {
      const size_t end = std::min(order.size(), at + static_cast<size_t>(cfg.batch_size));
      Matrix xb(static_cast<int>(end - at), train.x.cols);
      std::vector<double> yb;
      for (size_t k = at; k < end; ++k) {
        const int r = static_cast<int>(order[k]);
        std::copy(train.x.row_ptr(r), train.x.row_ptr(r) + train.x.cols,
                  xb.row_ptr(static_cast<int>(k - at)));
        yb.push_back(train.y[order[k]]);
      }
      Tape t;
      std::vector<Var> p;
      for (size_t i = 0; i < net.params.tensor_count(); ++i)
        p.push_back(t.leaf(net.params.value(i), true));
      Var loss = t.bce_with_logits_mean(net.forward(t, p, t.leaf(std::move(xb), false)), yb);
      t.backward(loss);
      std::vector<Matrix> grads;
      for (Var pv : p) grads.push_back(t.grad(pv));
      opt.step(net.params, grads, oc.lr);
    }
    epochs_run = epoch + 1;

    const double vl = mean_bce(net.predict(val.x), val.y);
    if (vl < best_val) {
      best_val = vl;
      best_params = net.params;
      best_epoch = epoch;
      non_improving = 0;
    } else if (++non_improving >= patience_limit) {
      break;
    }
  }
  if (best_epoch >= 0) net.params = best_params;
}

}  // namespace

FoldResult baseline_fold(const BaselineData& data, const FoldSpec& fold,
                         BaselineKind kind, const BaselineConfig& cfg,
                         std::uint64_t seed, int fold_index) {
  const auto t0 = std::chrono::steady_clock::now();
  FoldResult r;
  r.fold = fold;
  for (const SubjectLabel& s : data.subjects)
    if (s.subject_id == fold.test_subject) r.truth = s.label;

  try {
    const std::vector<std::string> grad_subjects = fold.gradient_subjects();
    auto in_list = [](const std::vector<std::string>& v, const std::string& s) {
      return std::find(v.begin(), v.end(), s) != v.end();
    };
    std::vector<const BaselineSample*> grad_s, val_s, test_s;
    for (const BaselineSample& s : data.samples) {
      if (s.subject_id == fold.test_subject) test_s.push_back(&s);
      else if (in_list(fold.val_subjects, s.subject_id)) val_s.push_back(&s);
      else if (in_list(grad_subjects, s.subject_id)) grad_s.push_back(&s);
    }
    if (grad_s.empty() || val_s.empty() || test_s.empty())
      throw Error(Errc::invalid_spec, "baseline_fold: a split has no samples");

    Split train = stack(grad_s), val = stack(val_s), test = stack(test_s);
    if (cfg.scale_features) {
      const ScalerStats scaler = fit_feature_scaler({train.x}, nullptr);
      train.x = apply_scaler(train.x, scaler);
      val.x = apply_scaler(val.x, scaler);
      test.x = apply_scaler(test.x, scaler);
      r.provenance.scaler_subjects = grad_subjects;
    }
    r.provenance.gradient_subjects = grad_subjects;
    r.provenance.val_subjects = fold.val_subjects;

    const std::uint64_t fold_seed = Rng::derive(seed, 0x1000 + static_cast<std::uint64_t>(fold_index));
    std::vector<double> test_logits;
    if (kind == BaselineKind::logreg) {
      std::vector<double> w;
      double b = 0.0;
      fit_logreg(train, val, cfg, w, b, r.epochs_run, r.best_epoch, r.best_val_loss);
      test_logits = linear_logits(test.x, w, b);
    } else {
      MlpNet net(train.x.cols, Rng::derive(fold_seed, 1));
      fit_mlp(train, val, cfg, net, fold_seed, r.epochs_run, r.best_epoch, r.best_val_loss);
      test_logits = net.predict(test.x);
    }

    std::vector<double> all_logits;
    for (size_t s = 0; s < test.sample_rows.size(); ++s) {
      const auto [lo, hi] = test.sample_rows[s];
      std::vector<double> sample_logits(test_logits.begin() + lo, test_logits.begin() + hi);
      const auto [prob, unused] = aggregate_subject(sample_logits);
      (void)unused;
      double mean_logit = 0.0;
      for (double l : sample_logits) mean_logit += l;
      mean_logit /= static_cast<double>(sample_logits.size());
      r.test_samples.push_back({test.sources[s]->subject_id, test.sources[s]->task,
                                mean_logit, prob});
      all_logits.insert(all_logits.end(), sample_logits.begin(), sample_logits.end());
    }
    const auto [prob, label] = aggregate_subject(all_logits);
    r.probability = prob;
    r.predicted = label;
  } catch (const Error& e) {
    r.error = std::string(errc_name(e.code())) + ": " + e.what();
  }

  r.train_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

RunReport run_baseline(const BaselineData& data, BaselineKind kind,
                       const BaselineConfig& cfg,
                       const std::vector<std::uint64_t>& seeds, WarningLog* log) {
  RunReport rep;
  rep.variant = std::string("baseline_") + baseline_kind_name(kind);
  rep.threads = configured_threads();

  struct Job {
    size_t seed_idx;
    int fold_idx;
  };
  std::vector<Job> jobs;
  rep.seeds.resize(seeds.size());
  for (size_t si = 0; si < seeds.size(); ++si) {
    rep.seeds[si].seed = seeds[si];
    const auto folds = loso_folds(data.subjects, seeds[si]);
    rep.seeds[si].folds.resize(folds.size());
    for (size_t fi = 0; fi < folds.size(); ++fi) {
      rep.seeds[si].folds[fi].fold = folds[fi];
      jobs.push_back({si, static_cast<int>(fi)});
    }
  }

  const int n_threads = std::min<int>(rep.threads, static_cast<int>(jobs.size()));
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t j = next.fetch_add(1);
      if (j >= jobs.size()) return;
      const Job job = jobs[j];
      SeedResult& sr = rep.seeds[job.seed_idx];
      sr.folds[static_cast<size_t>(job.fold_idx)] =
          baseline_fold(data, sr.folds[static_cast<size_t>(job.fold_idx)].fold, kind, cfg,
                        seeds[job.seed_idx], job.fold_idx);
    }
  };
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  std::vector<MetricSet> subj, samp;
  for (SeedResult& sr : rep.seeds) {
    score_seed(sr);
    subj.push_back(sr.subject_metrics);
    samp.push_back(sr.sample_metrics);
    for (const FoldResult& f : sr.folds)
      if (!f.error.empty())
        warn(log, "baseline fold " + f.fold.test_subject + " seed " +
                      std::to_string(sr.seed) + " aborted: " + f.error);
  }
  rep.subject_aggregate = aggregate_metrics(subj);
  rep.sample_aggregate = aggregate_metrics(samp);
  return rep;
}

}  // namespace eegraph
