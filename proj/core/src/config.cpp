#include "eegraph/config.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "eegraph/error.hpp"

namespace eegraph {

namespace {

using nlohmann::json;

struct KeyEntry {
  std::string key;
  std::function<void(RunConfig&, const json&)> set;
  std::function<json(const RunConfig&)> get;
};

[[noreturn]] void type_error(const std::string& key, const char* expected) {
  throw Error(Errc::bad_value_type, key + ": expected " + expected);
}

double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) type_error(key, "a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) type_error(key, "an integer");
  return v.get<int>();
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) type_error(key, "a string");
  return v.get<std::string>();
}

std::uint64_t as_seed(const json& v, const std::string& key) {
  if (!v.is_number_unsigned() && !v.is_number_integer()) type_error(key, "an integer");
  if (v.is_number_integer() && v.get<long long>() < 0) type_error(key, "a non-negative integer");
  return v.get<std::uint64_t>();
}

const std::vector<KeyEntry>& schema() {
  static const std::vector<KeyEntry> entries = [] {
    std::vector<KeyEntry> e;
    auto add = [&e](std::string key, std::function<void(RunConfig&, const json&)> set,
                    std::function<json(const RunConfig&)> get) {
      e.push_back({std::move(key), std::move(set), std::move(get)});
    };

    add("dataset.root",
        [](RunConfig& c, const json& v) { c.dataset_root = as_string(v, "dataset.root"); },
        [](const RunConfig& c) { return json(c.dataset_root); });
    add("dataset.tasks",
        [](RunConfig& c, const json& v) {
          if (!v.is_array() || v.empty()) type_error("dataset.tasks", "a non-empty array of task names");
          std::vector<Task> tasks;
          for (const json& t : v) {
            if (!t.is_string()) type_error("dataset.tasks", "a non-empty array of task names");
            auto parsed = task_from_name(t.get<std::string>());
            if (!parsed) type_error("dataset.tasks", "known task names");
            tasks.push_back(*parsed);
          }
          c.tasks = std::move(tasks);
        },
        [](const RunConfig& c) {
          json a = json::array();
          for (Task t : c.tasks) a.push_back(task_name(t));
          return a;
        });
    add("output.dir",
        [](RunConfig& c, const json& v) { c.output_dir = as_string(v, "output.dir"); },
        [](const RunConfig& c) { return json(c.output_dir); });
    add("seeds",
        [](RunConfig& c, const json& v) {
          if (!v.is_array() || v.empty()) type_error("seeds", "a non-empty array of integers");
          std::vector<std::uint64_t> seeds;
          for (const json& s : v) seeds.push_back(as_seed(s, "seeds"));
          c.seeds = std::move(seeds);
        },
        [](const RunConfig& c) { return json(c.seeds); });

    add("preprocess.bandpass.low_hz",
        [](RunConfig& c, const json& v) { c.preprocess.bandpass_low_hz = as_number(v, "preprocess.bandpass.low_hz"); },
        [](const RunConfig& c) { return json(c.preprocess.bandpass_low_hz); });
    add("preprocess.bandpass.high_hz",
        [](RunConfig& c, const json& v) { c.preprocess.bandpass_high_hz = as_number(v, "preprocess.bandpass.high_hz"); },
        [](const RunConfig& c) { return json(c.preprocess.bandpass_high_hz); });
    add("preprocess.bandpass.order",
        [](RunConfig& c, const json& v) { c.preprocess.bandpass_order = as_int(v, "preprocess.bandpass.order"); },
        [](const RunConfig& c) { return json(c.preprocess.bandpass_order); });
    add("preprocess.notch.center_hz",
        [](RunConfig& c, const json& v) { c.preprocess.notch_center_hz = as_number(v, "preprocess.notch.center_hz"); },
        [](const RunConfig& c) { return json(c.preprocess.notch_center_hz); });
    add("preprocess.notch.q",
        [](RunConfig& c, const json& v) { c.preprocess.notch_q = as_number(v, "preprocess.notch.q"); },
        [](const RunConfig& c) { return json(c.preprocess.notch_q); });
    add("preprocess.window.count",
        [](RunConfig& c, const json& v) { c.preprocess.window_count = as_int(v, "preprocess.window.count"); },
        [](const RunConfig& c) { return json(c.preprocess.window_count); });
    add("preprocess.window.length_s",
        [](RunConfig& c, const json& v) { c.preprocess.window_length_s = as_number(v, "preprocess.window.length_s"); },
        [](const RunConfig& c) { return json(c.preprocess.window_length_s); });

    add("features.welch.segment_s",
        [](RunConfig& c, const json& v) { c.welch_segment_s = as_number(v, "features.welch.segment_s"); },
        [](const RunConfig& c) { return json(c.welch_segment_s); });
    add("features.welch.overlap",
        [](RunConfig& c, const json& v) { c.welch_overlap = as_number(v, "features.welch.overlap"); },
        [](const RunConfig& c) { return json(c.welch_overlap); });
    add("features.scale",
        [](RunConfig& c, const json& v) {
          if (!v.is_boolean()) type_error("features.scale", "a boolean");
          c.scale_features = v.get<bool>();
        },
        [](const RunConfig& c) { return json(c.scale_features); });

    add("connectivity.metric",
        [](RunConfig& c, const json& v) {
          const std::string m = as_string(v, "connectivity.metric");
          if (m == "pli") c.graph_metric = ConnMetric::PLI;
          else if (m == "wpli") c.graph_metric = ConnMetric::WPLI;
          else type_error("connectivity.metric", "\"pli\" or \"wpli\"");
        },
        [](const RunConfig& c) { return json(c.graph_metric == ConnMetric::PLI ? "pli" : "wpli"); });
    add("connectivity.threshold_percentile",
        [](RunConfig& c, const json& v) { c.threshold_percentile = as_number(v, "connectivity.threshold_percentile"); },
        [](const RunConfig& c) { return json(c.threshold_percentile); });

    add("model.gat_heads",
        [](RunConfig& c, const json& v) { c.model.gat_heads = as_int(v, "model.gat_heads"); },
        [](const RunConfig& c) { return json(c.model.gat_heads); });
    add("model.gat_hidden",
        [](RunConfig& c, const json& v) { c.model.gat_hidden = as_int(v, "model.gat_hidden"); },
        [](const RunConfig& c) { return json(c.model.gat_hidden); });
    add("model.gru_layers",
        [](RunConfig& c, const json& v) { c.model.gru_layers = as_int(v, "model.gru_layers"); },
        [](const RunConfig& c) { return json(c.model.gru_layers); });
    add("model.gru_hidden",
        [](RunConfig& c, const json& v) { c.model.gru_hidden = as_int(v, "model.gru_hidden"); },
        [](const RunConfig& c) { return json(c.model.gru_hidden); });
    add("model.mlp_hidden",
        [](RunConfig& c, const json& v) { c.model.mlp_hidden = as_int(v, "model.mlp_hidden"); },
        [](const RunConfig& c) { return json(c.model.mlp_hidden); });
    add("model.dropout_backbone",
        [](RunConfig& c, const json& v) { c.model.dropout_backbone = as_number(v, "model.dropout_backbone"); },
        [](const RunConfig& c) { return json(c.model.dropout_backbone); });
    add("model.dropout_head",
        [](RunConfig& c, const json& v) { c.model.dropout_head = as_number(v, "model.dropout_head"); },
        [](const RunConfig& c) { return json(c.model.dropout_head); });
    add("model.leaky_slope",
        [](RunConfig& c, const json& v) { c.model.leaky_slope = as_number(v, "model.leaky_slope"); },
        [](const RunConfig& c) { return json(c.model.leaky_slope); });

    add("optim.lr",
        [](RunConfig& c, const json& v) { c.optim.lr = as_number(v, "optim.lr"); },
        [](const RunConfig& c) { return json(c.optim.lr); });
    add("optim.weight_decay",
        [](RunConfig& c, const json& v) { c.optim.weight_decay = as_number(v, "optim.weight_decay"); },
        [](const RunConfig& c) { return json(c.optim.weight_decay); });
    add("optim.betas",
        [](RunConfig& c, const json& v) {
          if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            type_error("optim.betas", "an array of two numbers");
          c.optim.beta1 = v[0].get<double>();
          c.optim.beta2 = v[1].get<double>();
        },
        [](const RunConfig& c) { return json({c.optim.beta1, c.optim.beta2}); });
    add("optim.eps",
        [](RunConfig& c, const json& v) { c.optim.eps = as_number(v, "optim.eps"); },
        [](const RunConfig& c) { return json(c.optim.eps); });
    add("optim.epochs",
        [](RunConfig& c, const json& v) { c.optim.epochs = as_int(v, "optim.epochs"); },
        [](const RunConfig& c) { return json(c.optim.epochs); });
    add("optim.patience",
        [](RunConfig& c, const json& v) { c.optim.patience = as_int(v, "optim.patience"); },
        [](const RunConfig& c) { return json(c.optim.patience); });
    add("optim.batch_size",
        [](RunConfig& c, const json& v) { c.optim.batch_size = as_int(v, "optim.batch_size"); },
        [](const RunConfig& c) { return json(c.optim.batch_size); });

    add("ablation.variant",
        [](RunConfig& c, const json& v) {
          c.ablation_variant = as_string(v, "ablation.variant");
          variant_from_name(c.ablation_variant);  // validates
        },
        [](const RunConfig& c) { return json(c.ablation_variant); });
    add("artifacts.save_checkpoints",
        [](RunConfig& c, const json& v) {
          const std::string s = as_string(v, "artifacts.save_checkpoints");
          if (s != "none" && s != "first" && s != "all")
            type_error("artifacts.save_checkpoints", "\"none\", \"first\" or \"all\"");
          c.save_checkpoints = s;
        },
        [](const RunConfig& c) { return json(c.save_checkpoints); });

    add("baseline.logreg_lr",
        [](RunConfig& c, const json& v) { c.baseline.logreg_lr = as_number(v, "baseline.logreg_lr"); },
        [](const RunConfig& c) { return json(c.baseline.logreg_lr); });
    add("baseline.logreg_epochs",
        [](RunConfig& c, const json& v) { c.baseline.logreg_epochs = as_int(v, "baseline.logreg_epochs"); },
        [](const RunConfig& c) { return json(c.baseline.logreg_epochs); });
    add("baseline.l2",
        [](RunConfig& c, const json& v) { c.baseline.l2 = as_number(v, "baseline.l2"); },
        [](const RunConfig& c) { return json(c.baseline.l2); });
    add("baseline.mlp_lr",
        [](RunConfig& c, const json& v) { c.baseline.mlp_lr = as_number(v, "baseline.mlp_lr"); },
        [](const RunConfig& c) { return json(c.baseline.mlp_lr); });
    add("baseline.mlp_epochs",
        [](RunConfig& c, const json& v) { c.baseline.mlp_epochs = as_int(v, "baseline.mlp_epochs"); },
        [](const RunConfig& c) { return json(c.baseline.mlp_epochs); });
    add("baseline.batch_size",
        [](RunConfig& c, const json& v) { c.baseline.batch_size = as_int(v, "baseline.batch_size"); },
        [](const RunConfig& c) { return json(c.baseline.batch_size); });
    add("baseline.patience",
        [](RunConfig& c, const json& v) { c.baseline.patience = as_int(v, "baseline.patience"); },
        [](const RunConfig& c) { return json(c.baseline.patience); });

    add("stats.test",
        [](RunConfig& c, const json& v) {
          c.stats_test = as_string(v, "stats.test");
          group_test_from_name(c.stats_test);  // validates
        },
        [](const RunConfig& c) { return json(c.stats_test); });

    add("explain.steps",
        [](RunConfig& c, const json& v) { c.explain_steps = as_int(v, "explain.steps"); },
        [](const RunConfig& c) { return json(c.explain_steps); });
    add("explain.top_k",
        [](RunConfig& c, const json& v) { c.explain_top_k = as_int(v, "explain.top_k"); },
        [](const RunConfig& c) { return json(c.explain_top_k); });
    add("explain.checkpoint",
        [](RunConfig& c, const json& v) { c.explain_checkpoint = as_string(v, "explain.checkpoint"); },
        [](const RunConfig& c) { return json(c.explain_checkpoint); });

    add("synth.profile",
        [](RunConfig& c, const json& v) {
          const std::string s = as_string(v, "synth.profile");
          if (s != "planted" && s != "null") type_error("synth.profile", "\"planted\" or \"null\"");
          c.synth.profile = s;
        },
        [](const RunConfig& c) { return json(c.synth.profile); });
    add("synth.subjects",
        [](RunConfig& c, const json& v) { c.synth.n_subjects = as_int(v, "synth.subjects"); },
        [](const RunConfig& c) { return json(c.synth.n_subjects); });
    add("synth.base_duration_s",
        [](RunConfig& c, const json& v) { c.synth.base_duration_s = as_number(v, "synth.base_duration_s"); },
        [](const RunConfig& c) { return json(c.synth.base_duration_s); });
    add("synth.sample_rate_hz",
        [](RunConfig& c, const json& v) { c.synth.sample_rate_hz = as_number(v, "synth.sample_rate_hz"); },
        [](const RunConfig& c) { return json(c.synth.sample_rate_hz); });
    add("synth.noise_sd",
        [](RunConfig& c, const json& v) { c.synth.noise_sd = as_number(v, "synth.noise_sd"); },
        [](const RunConfig& c) { return json(c.synth.noise_sd); });
    add("synth.seed",
        [](RunConfig& c, const json& v) { c.synth.seed = as_seed(v, "synth.seed"); },
        [](const RunConfig& c) { return json(c.synth.seed); });

    return e;
  }();
  return entries;
}

const KeyEntry* find_entry(const std::string& key) {
  for (const KeyEntry& e : schema())
    if (e.key == key) return &e;
  return nullptr;
}

void apply_json_object(RunConfig& cfg, const json& obj) {
  if (!obj.is_object())
    throw Error(Errc::bad_value_type, "config root must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    const KeyEntry* e = find_entry(key);
    if (!e) throw Error(Errc::unknown_key, "unknown config key: " + key);
    e->set(cfg, value);
  }
}

}  // namespace

RunConfig parse_config(const std::string& path) {
  if (!std::filesystem::exists(path))
    throw Error(Errc::file_not_found, "config file not found: " + path);
  std::ifstream in(path);
  json obj;
  try {
    in >> obj;
  } catch (const json::exception& e) {
    throw Error(Errc::bad_value_type, std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  apply_json_object(cfg, obj);
  return cfg;
}

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
  const KeyEntry* e = find_entry(key);
  if (!e) throw Error(Errc::unknown_key, "unknown config key: " + key);
  json v = json::parse(value, nullptr, false);
  if (v.is_discarded()) v = json(value);  // plain string literal
  e->set(cfg, v);
}

std::string serialize_config(const RunConfig& cfg) {
  json obj;
  for (const KeyEntry& e : schema()) obj[e.key] = e.get(cfg);
  return obj.dump(2) + "\n";
}

std::uint64_t config_hash(const RunConfig& cfg) {
  const std::string s = serialize_config(cfg);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const KeyEntry& e : schema()) keys.push_back(e.key);
  return keys;
}

TrainSettings make_train_settings(const RunConfig& cfg, const std::string& run_dir) {
  TrainSettings ts;
  ts.model = cfg.model;
  ts.optim = cfg.optim;
  ts.variant = variant_from_name(cfg.ablation_variant);
  ts.scale_features = cfg.scale_features;
  if (cfg.save_checkpoints == "none")
    ts.save_checkpoints = TrainSettings::SaveCheckpoints::none;
  else if (cfg.save_checkpoints == "all")
    ts.save_checkpoints = TrainSettings::SaveCheckpoints::all;
  else
    ts.save_checkpoints = TrainSettings::SaveCheckpoints::first;
  ts.checkpoint_dir = run_dir + "/checkpoints";
  return ts;
}

}  // namespace eegraph
