#include "eegraph/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "eegraph/csv.hpp"
#include "eegraph/rng.hpp"

namespace eegraph {

const std::array<Task, kNumTasks>& all_tasks() {
  static const std::array<Task, kNumTasks> tasks = {
      Task::EC, Task::EO, Task::H, Task::C, Task::S,
      Task::F,  Task::M,  Task::ET, Task::R};
  return tasks;
}

const char* task_name(Task t) {
  switch (t) {
    case Task::EC: return "EC";
    case Task::EO: return "EO";
    case Task::H: return "H";
    case Task::C: return "C";
    case Task::S: return "S";
    case Task::F: return "F";
    case Task::M: return "M";
    case Task::ET: return "ET";
    case Task::R: return "R";
  }
  return "?";
}

std::optional<Task> task_from_name(const std::string& name) {
  for (Task t : all_tasks())
    if (name == task_name(t)) return t;
  return std::nullopt;
}

double task_duration_s(Task t) { return t == Task::ET ? 120.0 : 60.0; }

const std::array<const char*, kNumChannels>& channel_names() {
  static const std::array<const char*, kNumChannels> names = {
      "Fp1", "Fp2", "F7", "F3", "Fz", "F4", "F8", "T7", "C3", "Cz",
      "C4",  "T8",  "P7", "P3", "Pz", "P4", "P8", "O1", "O2"};
  return names;
}

int channel_index(const std::string& name) {
  const auto& names = channel_names();
  for (int i = 0; i < kNumChannels; ++i)
    if (name == names[i]) return i;
  return -1;
}

const char* label_name(Label l) {
  return l == Label::Addicted ? "Addicted" : "Not Addicted";
}

const Recording& Dataset::get(const std::string& subject, Task t) const {
  auto s = recordings.find(subject);
  if (s == recordings.end())
    throw Error(Errc::missing_file, "no recordings for subject " + subject);
  auto r = s->second.find(t);
  if (r == s->second.end())
    throw Error(Errc::missing_file, subject + "/" + task_name(t));
  return r->second;
}

Label Dataset::label_of(const std::string& subject) const {
  for (const auto& l : labels)
    if (l.subject_id == subject) return l.label;
  throw Error(Errc::label_mismatch, "no label for subject " + subject);
}

std::vector<std::string> Dataset::subject_ids() const {
  std::vector<std::string> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(l.subject_id);
  return out;
}

int Dataset::n_recordings() const {
  int n = 0;
  for (const auto& [subj, by_task] : recordings) n += static_cast<int>(by_task.size());
  return n;
}

namespace {

int subject_index(const std::string& id) {
  if (id.size() < 2 || id[0] != 'S') return -1;
  int idx = 0;
  for (size_t i = 1; i < id.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(id[i]))) return -1;
    idx = idx * 10 + (id[i] - '0');
  }
  return idx;
}

DatasetLayout read_layout(const std::filesystem::path& root) {
  DatasetLayout layout;
  auto manifest = root / "dataset.json";
  if (std::filesystem::exists(manifest)) {
    std::ifstream in(manifest);
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.contains("sample_rate_hz")) layout.sample_rate_hz = j["sample_rate_hz"].get<double>();
    if (j.contains("base_duration_s")) layout.base_duration_s = j["base_duration_s"].get<double>();
  }
  return layout;
}

std::vector<SubjectLabel> read_labels(const std::filesystem::path& root,
                                      const std::vector<std::string>& subjects) {
  auto path = root / "labels.csv";
  std::ifstream in(path);
  if (!in) throw Error(Errc::missing_file, path.string());

  std::vector<SubjectLabel> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto cells = csv::split(line);
    for (auto& c : cells) {
      while (!c.empty() && (c.back() == '\r' || c.back() == ' ')) c.pop_back();
      while (!c.empty() && c.front() == ' ') c.erase(c.begin());
    }
    if (first && cells.size() >= 2 && cells[0] == "subject_id") {
      first = false;
      continue;  // header
    }
    first = false;
    if (cells.size() < 2)
      throw Error(Errc::label_mismatch, "labels.csv: malformed line '" + line + "'");
    SubjectLabel sl;
    sl.subject_id = cells[0];
    if (cells[1] == "Addicted")
      sl.label = Label::Addicted;
    else if (cells[1] == "Not Addicted" || cells[1] == "NotAddicted")
      sl.label = Label::NotAddicted;
    else
      throw Error(Errc::label_mismatch,
                  "labels.csv: unknown label '" + cells[1] + "' for " + sl.subject_id);
    if (cells.size() >= 3 && !cells[2].empty()) sl.gender = cells[2];
    out.push_back(std::move(sl));
  }

  // Every listed subject must exist in the tree and vice versa.
  for (const auto& sl : out)
    if (std::find(subjects.begin(), subjects.end(), sl.subject_id) == subjects.end())
      throw Error(Errc::label_mismatch, "labels.csv lists unknown subject " + sl.subject_id);
  for (const auto& s : subjects) {
    int n = static_cast<int>(std::count_if(out.begin(), out.end(),
                                           [&](const SubjectLabel& l) { return l.subject_id == s; }));
    if (n != 1)
      throw Error(Errc::label_mismatch,
                  "labels.csv covers subject " + s + " " + std::to_string(n) + " times");
  }

  std::sort(out.begin(), out.end(), [](const SubjectLabel& a, const SubjectLabel& b) {
    return subject_index(a.subject_id) < subject_index(b.subject_id);
  });
  return out;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& root, WarningLog* log) {
  if (!std::filesystem::is_directory(root))
    throw Error(Errc::file_not_found, root.string());

  DatasetLayout layout = read_layout(root);

  std::vector<std::string> subjects;
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    std::string name = entry.path().filename().string();
    if (subject_index(name) > 0) subjects.push_back(name);
  }
  if (subjects.empty())
    throw Error(Errc::missing_file, "no S<k> subject directories under " + root.string());
  std::sort(subjects.begin(), subjects.end(), [](const std::string& a, const std::string& b) {
    return subject_index(a) < subject_index(b);
  });

  Dataset ds;
  ds.labels = read_labels(root, subjects);

  for (const auto& subject : subjects) {
    for (Task t : all_tasks()) {
      auto path = root / subject / (std::string(task_name(t)) + ".csv");
      if (!std::filesystem::exists(path))
        throw Error(Errc::missing_file, subject + "/" + task_name(t));

      csv::NumericCsv parsed = csv::read_numeric(path);
      if (parsed.data.cols != kNumChannels)
        throw Error(Errc::shape_mismatch,
                    path.string() + ": expected " + std::to_string(kNumChannels) +
                        " columns, got " + std::to_string(parsed.data.cols));
      int expected_rows = layout.expected_rows(t);
      if (parsed.data.rows != expected_rows)
        throw Error(Errc::shape_mismatch,
                    path.string() + ": expected " + std::to_string(expected_rows) +
                        " rows, got " + std::to_string(parsed.data.rows));
      for (double x : parsed.data.v)
        if (!std::isfinite(x))
          throw Error(Errc::non_numeric_cell, path.string() + ": non-finite value");

      // Channel order is positional; header names are advisory only.
      if (parsed.header) {
        const auto& names = channel_names();
        for (int c = 0; c < kNumChannels; ++c) {
          if ((*parsed.header)[static_cast<size_t>(c)] != names[static_cast<size_t>(c)]) {
            warn(log, path.string() + ": header disagrees with the fixed 10-20 order at column " +
                          std::to_string(c + 1) + " ('" +
                          (*parsed.header)[static_cast<size_t>(c)] + "' vs '" +
                          names[static_cast<size_t>(c)] + "'); using positional order");
            break;
          }
        }
      }

      Recording rec;
      rec.subject_id = subject;
      rec.task = t;
      rec.sample_rate_hz = layout.sample_rate_hz;
      rec.data = std::move(parsed.data);
      rec.channels.assign(channel_names().begin(), channel_names().end());
      ds.recordings[subject][t] = std::move(rec);
    }
  }
  return ds;
}

void write_recording_csv(const Recording& rec, const std::filesystem::path& path) {
  std::vector<std::string> header(rec.channels.begin(), rec.channels.end());
  csv::write_matrix(path, rec.data, &header);
}

void save_dataset(const Dataset& ds, const std::filesystem::path& root) {
  std::filesystem::create_directories(root);

  double rate = kDefaultSampleRate;
  double base_duration = 60.0;
  if (!ds.recordings.empty()) {
    const auto& any = ds.recordings.begin()->second;
    if (!any.empty()) {
      const Recording& r = any.begin()->second;
      rate = r.sample_rate_hz;
      base_duration = r.task == Task::ET ? r.duration_s() / 2.0 : r.duration_s();
    }
  }
  {
    nlohmann::json j;
    j["sample_rate_hz"] = rate;
    j["base_duration_s"] = base_duration;
    std::ofstream out(root / "dataset.json");
    out << j.dump(2) << '\n';
  }
  {
    std::ofstream out(root / "labels.csv");
    out << "subject_id,label,gender\n";
    for (const auto& l : ds.labels)
      out << l.subject_id << ',' << label_name(l.label) << ','
          << (l.gender ? *l.gender : "") << '\n';
  }
  for (const auto& [subject, by_task] : ds.recordings) {
    std::filesystem::create_directories(root / subject);
    for (const auto& [t, rec] : by_task)
      write_recording_csv(rec, root / subject / (std::string(task_name(t)) + ".csv"));
  }
}

std::vector<SubjectRow> subject_table(const Dataset& ds) {
  std::vector<SubjectRow> out;
  out.reserve(ds.labels.size());
  for (const auto& l : ds.labels) out.push_back({l.subject_id, l.gender, l.label});
  return out;
}

SynthComponent SynthComponent::uniform(double freq_hz, double amp, double phase) {
  SynthComponent c;
  c.freq_hz = freq_hz;
  c.amp.fill(amp);
  c.phase.fill(phase);
  return c;
}

SynthComponent SynthComponent::on_channels(
    double freq_hz, const std::vector<std::pair<int, double>>& channel_amps, double phase) {
  SynthComponent c;
  c.freq_hz = freq_hz;
  c.phase.fill(phase);
  for (auto [ch, amp] : channel_amps) c.amp[static_cast<size_t>(ch)] = amp;
  return c;
}

Recording synth_recording(const std::string& subject_id, Task task, const SynthSpec& spec) {
  for (const auto& comp : spec.components)
    if (!(comp.freq_hz > 0.0 && comp.freq_hz < spec.sample_rate_hz / 2.0))
      throw Error(Errc::frequency_out_of_range,
                  std::to_string(comp.freq_hz) + " Hz at sample rate " +
                      std::to_string(spec.sample_rate_hz) + " Hz");

  int n = static_cast<int>(spec.duration_s * spec.sample_rate_hz + 0.5);
  Recording rec;
  rec.subject_id = subject_id;
  rec.task = task;
  rec.sample_rate_hz = spec.sample_rate_hz;
  rec.channels.assign(channel_names().begin(), channel_names().end());
  rec.data = Matrix(n, kNumChannels);

  for (int c = 0; c < kNumChannels; ++c) {
    for (const auto& comp : spec.components) {
      double a = comp.amp[static_cast<size_t>(c)];
      if (a == 0.0) continue;
      double w = 2.0 * M_PI * comp.freq_hz / spec.sample_rate_hz;
      double ph = comp.phase[static_cast<size_t>(c)];
      for (int i = 0; i < n; ++i) rec.data(i, c) += a * std::sin(w * i + ph);
    }
  }
  if (spec.noise_sd > 0.0) {
    Rng rng(spec.seed);
    for (int c = 0; c < kNumChannels; ++c)
      for (int i = 0; i < n; ++i) rec.data(i, c) += spec.noise_sd * rng.normal();
  }
  return rec;
}

}  // namespace eegraph
