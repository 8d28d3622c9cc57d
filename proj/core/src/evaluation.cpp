#include "eegraph/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <numeric>
#include <thread>

#include "eegraph/preprocess.hpp"

namespace eegraph {

int configured_threads() {
  const char* env = std::getenv("EEGRAPH_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n >= 1 ? n : 1;
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::full: return "full";
    case Variant::spatial_only: return "spatial_only";
    case Variant::fully_connected: return "fully_connected";
  }
  return "full";
}

Variant variant_from_name(const std::string& name) {
  if (name == "full") return Variant::full;
  if (name == "spatial_only") return Variant::spatial_only;
  if (name == "fully_connected") return Variant::fully_connected;
  throw Error(Errc::bad_value_type, "unknown ablation variant: " + name);
}

std::vector<std::string> FoldSpec::gradient_subjects() const {
  std::vector<std::string> out;
  for (const std::string& s : train_subjects)
    if (std::find(val_subjects.begin(), val_subjects.end(), s) == val_subjects.end())
      out.push_back(s);
  return out;
}

std::vector<FoldSpec> loso_folds(const std::vector<SubjectLabel>& subjects,
                                 std::uint64_t seed) {
  if (subjects.size() < 4)
    throw Error(Errc::invalid_spec, "loso_folds: need at least 4 subjects");
  int n_pos = 0, n_neg = 0;
  for (const SubjectLabel& s : subjects)
    (s.label == Label::Addicted ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0)
    throw Error(Errc::class_missing, "loso_folds: a class has no subjects");

  std::vector<FoldSpec> folds;
  for (size_t i = 0; i < subjects.size(); ++i) {
    FoldSpec fold;
    fold.test_subject = subjects[i].subject_id;
    std::vector<std::string> pos, neg;
    for (size_t j = 0; j < subjects.size(); ++j) {
      if (j == i) continue;
      fold.train_subjects.push_back(subjects[j].subject_id);
      (subjects[j].label == Label::Addicted ? pos : neg).push_back(subjects[j].subject_id);
    }
    if (pos.empty() || neg.empty())
      throw Error(Errc::class_missing,
                  "loso_folds: no validation candidate of one class when holding out " +
                      fold.test_subject);
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(i)));
    fold.val_subjects.push_back(pos[rng.below(pos.size())]);
    fold.val_subjects.push_back(neg[rng.below(neg.size())]);
    folds.push_back(std::move(fold));
  }
  return folds;
}

namespace {

double bce_loss(double logit, double target) {
  return std::max(logit, 0.0) - logit * target + std::log1p(std::exp(-std::abs(logit)));
}

struct PreparedSample {
  const SubjectSample* src = nullptr;
  DynamicGraphSequence seq;  // scaled features, variant-adjusted topology
  std::vector<EdgeList> edges;
  double target = 0.0;
};

PreparedSample prepare_sample(const SubjectSample& s, const ScalerStats& scaler,
                              bool fully_connected) {
  PreparedSample p;
  p.src = &s;
  p.seq = scale_sequence(s.sequence, scaler, fully_connected);
  p.edges = Model::edge_lists_for(p.seq);
  p.target = s.label == Label::Addicted ? 1.0 : 0.0;
  return p;
}

double eval_logit_prepared(const Model& model, const PreparedSample& s) {
  Tape t;
  ModelInputs in;
  in.edges = &s.edges;
  for (const GraphSnapshot& snap : s.seq.snapshots)
    in.features.push_back(t.leaf(snap.node_features, false));
  auto p = model.lift_params(t, false);
  return t.scalar(model.forward(t, p, in, false, nullptr, nullptr));
}

}  // namespace

DynamicGraphSequence scale_sequence(const DynamicGraphSequence& seq,
                                    const ScalerStats& scaler, bool fully_connected) {
  DynamicGraphSequence out = seq;
  for (GraphSnapshot& snap : out.snapshots) {
    snap.node_features = apply_scaler(snap.node_features, scaler);
    if (fully_connected)
      snap.topology = fully_connected_topology(snap.topology.n_nodes);
  }
  return out;
}

FoldResult train_fold(const ExperimentData& data, const FoldSpec& fold,
                      const TrainSettings& settings, std::uint64_t seed,
                      int fold_index) {
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

    std::vector<const SubjectSample*> grad_samples, val_samples, test_samples;
    for (const SubjectSample& s : data.samples) {
      if (s.subject_id == fold.test_subject) test_samples.push_back(&s);
      else if (in_list(fold.val_subjects, s.subject_id)) val_samples.push_back(&s);
      else if (in_list(grad_subjects, s.subject_id)) grad_samples.push_back(&s);
    }
    if (grad_samples.empty() || val_samples.empty() || test_samples.empty())
      throw Error(Errc::invalid_spec, "train_fold: a split has no samples");

    ScalerStats scaler;
    if (settings.scale_features) {
      std::vector<Matrix> scaler_feats;
      for (const SubjectSample* s : grad_samples)
        for (const GraphSnapshot& snap : s->sequence.snapshots)
          scaler_feats.push_back(snap.node_features);
      scaler = fit_feature_scaler(scaler_feats, nullptr);
      r.provenance.scaler_subjects = grad_subjects;
    } else {
      const int nf = grad_samples.front()->sequence.snapshots.front().node_features.cols;
      scaler.mu.assign(static_cast<size_t>(nf), 0.0);
      scaler.sigma.assign(static_cast<size_t>(nf), 1.0);
    }

    r.provenance.gradient_subjects = grad_subjects;
    r.provenance.val_subjects = fold.val_subjects;

    const bool fc = settings.variant == Variant::fully_connected;
    std::vector<PreparedSample> train_set, val_set, test_set;
    for (const SubjectSample* s : grad_samples) train_set.push_back(prepare_sample(*s, scaler, fc));
    for (const SubjectSample* s : val_samples) val_set.push_back(prepare_sample(*s, scaler, fc));
    for (const SubjectSample* s : test_samples) test_set.push_back(prepare_sample(*s, scaler, fc));

    ModelConfig mc = settings.model;
    mc.spatial_only = settings.variant == Variant::spatial_only;
    const std::uint64_t fold_seed = Rng::derive(seed, 0x1000 + static_cast<std::uint64_t>(fold_index));
    Model model = Model::init(mc, Rng::derive(fold_seed, 1));
    Rng shuffle_rng(Rng::derive(fold_seed, 2));
    Rng dropout_rng(Rng::derive(fold_seed, 3));
    AdamW opt(settings.optim, model.params());

    const int patience_limit = std::max(1, settings.optim.patience);
    const int batch_size = std::max(1, settings.optim.batch_size);
    double best_val = std::numeric_limits<double>::infinity();
    ParamStore best_params = model.params();
    int non_improving = 0;

    std::vector<size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), size_t{0});

    for (int epoch = 0; epoch < settings.optim.epochs; ++epoch) {
      const double lr_t = cosine_lr(epoch, settings.optim.epochs, settings.optim.lr);
      shuffle_rng.shuffle(order);
      for (size_t at = 0; at < order.size(); at += static_cast<size_t>(batch_size)) {
        const size_t end = std::min(order.size(), at + static_cast<size_t>(batch_size));
        Tape tape;
        auto pvars = model.lift_params(tape, true);
        std::vector<Var> losses;
        for (size_t k = at; k < end; ++k) {
          const PreparedSample& s = train_set[order[k]];
          ModelInputs in;
          in.edges = &s.edges;
          for (const GraphSnapshot& snap : s.seq.snapshots)
            in.features.push_back(tape.leaf(snap.node_features, false));
          Var logit = model.forward(tape, pvars, in, true, &dropout_rng);
          losses.push_back(tape.bce_with_logits(logit, s.target));
        }
        Var loss = tape.affine(tape.add_scalars(losses),
                               1.0 / static_cast<double>(losses.size()), 0.0);
        tape.backward(loss);
        std::vector<Matrix> grads;
        grads.reserve(pvars.size());
        for (Var p : pvars) grads.push_back(tape.grad(p));
        opt.step(model.params(), grads, lr_t);
      }
      r.epochs_run = epoch + 1;

      double val_loss = 0.0;
      for (const PreparedSample& s : val_set)
        val_loss += bce_loss(eval_logit_prepared(model, s), s.target);
      val_loss /= static_cast<double>(val_set.size());

      if (val_loss < best_val) {
        best_val = val_loss;
        best_params = model.params();
        r.best_epoch = epoch;
        non_improving = 0;
      } else if (++non_improving >= patience_limit) {
        break;
      }
    }
    r.best_val_loss = best_val;
    if (r.best_epoch >= 0) model.params() = best_params;

    std::vector<double> logits;
    for (const PreparedSample& s : test_set) {
      const double logit = eval_logit_prepared(model, s);
      logits.push_back(logit);
      r.test_samples.push_back({s.src->subject_id, s.src->task, logit, sigmoid(logit)});
    }
    const auto [prob, label] = aggregate_subject(logits);
    r.probability = prob;
    r.predicted = label;

    const bool want_ckpt =
        settings.save_checkpoints == TrainSettings::SaveCheckpoints::all ||
        (settings.save_checkpoints == TrainSettings::SaveCheckpoints::first && fold_index == 0);
    if (want_ckpt && !settings.checkpoint_dir.empty()) {
      std::filesystem::create_directories(settings.checkpoint_dir);
      const std::string path = settings.checkpoint_dir + "/fold_" + fold.test_subject +
                               "_seed" + std::to_string(seed) + ".json";
      CheckpointExtras extras;
      extras.variant = variant_name(settings.variant);
      extras.scaler = scaler;
      save_checkpoint(path, model, settings.optim, &extras);
      r.checkpoint_path = path;
    }
  } catch (const Error& e) {
    r.error = std::string(errc_name(e.code())) + ": " + e.what();
  }

  r.train_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

void score_seed(SeedResult& sr) {
  std::vector<std::pair<Label, Label>> subj_pairs, sample_pairs;
  std::vector<ScoredLabel> subj_scores, sample_scores;
  for (const FoldResult& f : sr.folds) {
    if (!f.error.empty()) continue;
    subj_pairs.push_back({f.predicted, f.truth});
    subj_scores.push_back({f.probability, f.truth});
    for (const SamplePrediction& s : f.test_samples) {
      const Label pred = s.probability > 0.5 ? Label::Addicted : Label::NotAddicted;
      sample_pairs.push_back({pred, f.truth});
      sample_scores.push_back({s.probability, f.truth});
    }
  }
  sr.subject_counts = count_confusion(subj_pairs);
  sr.subject_metrics = compute_metrics(sr.subject_counts, subj_scores);
  sr.sample_counts = count_confusion(sample_pairs);
  sr.sample_metrics = compute_metrics(sr.sample_counts, sample_scores);
}

MetricAggregate aggregate_metrics(const std::vector<MetricSet>& per_seed) {
  MetricAggregate agg;
  auto collect = [&per_seed](double MetricSet::* field) {
    std::vector<double> xs;
    for (const MetricSet& m : per_seed) xs.push_back(m.*field);
    return mean_sd(xs);
  };
  const std::pair<double MetricSet::*, int> fields[] = {
      {&MetricSet::accuracy, 0}, {&MetricSet::precision, 0}, {&MetricSet::recall, 0},
      {&MetricSet::f1, 0},       {&MetricSet::roc_auc, 0},
  };
  for (const auto& [field, unused] : fields) {
    (void)unused;
    const MeanSd ms = collect(field);
    agg.mean.*field = ms.mean;
    agg.sd.*field = ms.sd;
  }
  return agg;
}

RunReport run_experiment(const ExperimentData& data, const TrainSettings& settings,
                         const std::vector<std::uint64_t>& seeds, WarningLog* log) {
  RunReport rep;
  rep.variant = variant_name(settings.variant);
  rep.threads = configured_threads();
  {
    ModelConfig mc = settings.model;
    mc.spatial_only = settings.variant == Variant::spatial_only;
    rep.parameter_count = Model(mc).parameter_count();
  }

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
          train_fold(data, sr.folds[static_cast<size_t>(job.fold_idx)].fold, settings,
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
        warn(log, "fold " + f.fold.test_subject + " seed " + std::to_string(sr.seed) +
                      " aborted: " + f.error);
  }
  rep.subject_aggregate = aggregate_metrics(subj);
  rep.sample_aggregate = aggregate_metrics(samp);
  return rep;
}

ExperimentData prepare_experiment_data(const Dataset& ds, const std::vector<Task>& tasks,
                                       const PreprocessConfig& pre, const WelchSpec& welch,
                                       ConnMetric metric, double threshold_percentile,
                                       WarningLog* log) {
  ExperimentData data;
  data.subjects = ds.labels;
  for (const SubjectLabel& subj : ds.labels) {
    for (Task task : tasks) {
      const Recording& rec = ds.get(subj.subject_id, task);
      PreprocessResult pr = preprocess_recording(rec, pre, log);
      const auto feats = extract_node_features(pr.windows, rec.sample_rate_hz, welch);
      SubjectSample sample;
      sample.subject_id = subj.subject_id;
      sample.task = task;
      sample.label = subj.label;
      sample.sequence =
          build_graph_sequence(pr.windows, feats, metric, threshold_percentile, log);
      data.samples.push_back(std::move(sample));
    }
  }
  return data;
}

}  // namespace eegraph
