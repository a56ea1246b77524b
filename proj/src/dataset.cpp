#include "crowdtime/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "crowdtime/hyperparameters.hpp"

namespace crowdtime {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' ||
                        s.front() == '\n'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string_view rest = line;
  while (true) {
    const auto comma = rest.find(',');
    fields.emplace_back(trim(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return fields;
}

bool parse_int(std::string_view s, int& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  std::string copy(s);
  char* end = nullptr;
  out = std::strtod(copy.c_str(), &end);
  return end == copy.c_str() + copy.size();
}

Error row_error(const std::filesystem::path& path, int line, const std::string& what) {
  return Error(ErrorKind::MalformedRow,
               path.string() + ":" + std::to_string(line) + ": " + what);
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::pair<int, std::vector<std::string>>> rows;  // (line number, fields)

  int column(std::string_view name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  }
};

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  CsvTable table;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (!have_header) {
      // tolerate a UTF-8 byte order mark
      if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
      table.header = split_row(line);
      have_header = true;
      continue;
    }
    auto fields = split_row(line);
    if (fields.size() != table.header.size())
      throw row_error(path, line_no,
                      "expected " + std::to_string(table.header.size()) + " fields, got " +
                          std::to_string(fields.size()));
    table.rows.emplace_back(line_no, std::move(fields));
  }
  if (!have_header) throw row_error(path, 1, "missing header row");
  return table;
}

std::chrono::sys_time<std::chrono::microseconds> parse_timestamp(std::string_view ts) {
  using namespace std::chrono;
  ts = trim(ts);
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  double sec = 0.0;
  auto field = [&](std::size_t pos, std::size_t len, int& out) {
    if (pos + len > ts.size() || !parse_int(ts.substr(pos, len), out))
      throw Error(ErrorKind::MalformedRow, "bad timestamp '" + std::string(ts) + "'");
  };
  field(0, 4, y);
  field(5, 2, mo);
  field(8, 2, d);
  if (ts.size() < 19 || ts[4] != '-' || ts[7] != '-' || (ts[10] != 'T' && ts[10] != ' ') ||
      ts[13] != ':' || ts[16] != ':')
    throw Error(ErrorKind::MalformedRow, "bad timestamp '" + std::string(ts) + "'");
  field(11, 2, h);
  field(14, 2, mi);
  std::size_t pos = 17;
  std::size_t sec_end = pos;
  while (sec_end < ts.size() && (std::isdigit(static_cast<unsigned char>(ts[sec_end])) ||
                                 ts[sec_end] == '.'))
    ++sec_end;
  if (!parse_double(ts.substr(pos, sec_end - pos), sec))
    throw Error(ErrorKind::MalformedRow, "bad timestamp '" + std::string(ts) + "'");
  long offset_minutes = 0;
  std::string_view zone = ts.substr(sec_end);
  if (!zone.empty() && zone != "Z") {
    int oh = 0, om = 0;
    if (zone.size() != 6 || (zone[0] != '+' && zone[0] != '-') || zone[3] != ':' ||
        !parse_int(zone.substr(1, 2), oh) || !parse_int(zone.substr(4, 2), om))
      throw Error(ErrorKind::MalformedRow, "bad timestamp offset '" + std::string(ts) + "'");
    offset_minutes = (zone[0] == '-' ? -1 : 1) * (oh * 60L + om);
  }
  const year_month_day date{year{y}, month{static_cast<unsigned>(mo)},
                            day{static_cast<unsigned>(d)}};
  if (!date.ok()) throw Error(ErrorKind::MalformedRow, "bad date '" + std::string(ts) + "'");
  return time_point_cast<microseconds>(sys_days{date} + hours{h} + minutes{mi} -
                                       minutes{offset_minutes}) +
         microseconds{std::llround(sec * 1e6)};
}

}  // namespace

LabelSpace::LabelSpace(int class_count) {
  if (class_count < 2)
    throw Error(ErrorKind::InvalidArgument, "label space needs at least 2 classes");
  for (int c = 0; c < class_count; ++c) names_.push_back(std::to_string(c));
}

LabelSpace::LabelSpace(int class_count, std::vector<std::string> class_names)
    : names_(std::move(class_names)) {
  if (class_count < 2)
    throw Error(ErrorKind::InvalidArgument, "label space needs at least 2 classes");
  if (static_cast<int>(names_.size()) != class_count)
    throw Error(ErrorKind::InvalidArgument, "class_names must have one entry per class");
  if (std::set<std::string>(names_.begin(), names_.end()).size() != names_.size())
    throw Error(ErrorKind::InvalidArgument, "class names must be distinct");
}

int LabelSpace::parse(std::string_view token) const {
  token = trim(token);
  for (int c = 0; c < size(); ++c)
    if (names_[c] == token) return c;
  int value = 0;
  if (!parse_int(token, value))
    throw Error(ErrorKind::LabelOutOfRange, "unknown label '" + std::string(token) + "'");
  if (value < 0 || value >= size())
    throw Error(ErrorKind::LabelOutOfRange,
                "label " + std::to_string(value) + " outside [0, " + std::to_string(size()) + ")");
  return value;
}

std::string_view to_string(TimeTransform transform) {
  return transform == TimeTransform::log ? "log" : "none";
}

TimeTransform parse_time_transform(std::string_view text) {
  if (text == "log") return TimeTransform::log;
  if (text == "none") return TimeTransform::none;
  throw Error(ErrorKind::InvalidArgument, "time transform must be 'log' or 'none'");
}

Dataset Dataset::from_records(LabelSpace label_space, std::span<const JudgmentRecord> records,
                              const std::map<std::string, int>* gold) {
  return index_records(std::move(label_space), records, gold, true);
}

Dataset Dataset::index_records(LabelSpace label_space, std::span<const JudgmentRecord> records,
                               const std::map<std::string, int>* gold, bool check_times) {
  if (records.empty()) throw Error(ErrorKind::EmptyInput, "dataset has no judgments");
  Dataset d;
  d.label_space_ = std::move(label_space);
  const int C = d.num_classes();
  std::set<std::pair<int, int>> seen;
  d.judgments_.reserve(records.size());
  for (const auto& r : records) {
    if (r.label < 0 || r.label >= C)
      throw Error(ErrorKind::LabelOutOfRange, "label " + std::to_string(r.label) + " for task " +
                                                  r.task_id + " outside [0, " +
                                                  std::to_string(C) + ")");
    if (!std::isfinite(r.time_seconds) || (check_times && !(r.time_seconds > 0.0)))
      throw Error(ErrorKind::NonPositiveTime,
                  "task " + r.task_id + ", worker " + r.worker_id + ": time must be positive");
    auto [tit, tnew] = d.task_lookup_.try_emplace(r.task_id, d.num_tasks());
    if (tnew) {
      d.task_ids_.push_back(r.task_id);
      d.by_task_.emplace_back();
    }
    auto [wit, wnew] = d.worker_lookup_.try_emplace(r.worker_id, d.num_workers());
    if (wnew) {
      d.worker_ids_.push_back(r.worker_id);
      d.by_worker_.emplace_back();
    }
    if (!seen.emplace(tit->second, wit->second).second)
      throw Error(ErrorKind::DuplicateJudgment, "task " + r.task_id + ", worker " + r.worker_id);
    const int j = d.num_judgments();
    d.judgments_.push_back({tit->second, wit->second, r.label, r.time_seconds});
    d.by_task_[tit->second].push_back(j);
    d.by_worker_[wit->second].push_back(j);
  }
  if (gold != nullptr && !gold->empty()) {
    d.gold_.assign(d.num_tasks(), kNoGold);
    for (const auto& [task, label] : *gold) {
      if (label < 0 || label >= C)
        throw Error(ErrorKind::LabelOutOfRange, "gold label for task " + task + " outside range");
      if (auto it = d.task_lookup_.find(task); it != d.task_lookup_.end())
        d.gold_[it->second] = label;
    }
    if (std::all_of(d.gold_.begin(), d.gold_.end(), [](int g) { return g == kNoGold; }))
      d.gold_.clear();
  }
  return d;
}

std::optional<int> Dataset::task_index(const std::string& id) const {
  if (auto it = task_lookup_.find(id); it != task_lookup_.end()) return it->second;
  return std::nullopt;
}

std::optional<int> Dataset::worker_index(const std::string& id) const {
  if (auto it = worker_lookup_.find(id); it != worker_lookup_.end()) return it->second;
  return std::nullopt;
}

void Dataset::require_gold() const {
  if (!has_gold()) throw Error(ErrorKind::MissingGold, "this operation needs gold labels");
}

std::vector<JudgmentRecord> Dataset::to_records() const {
  std::vector<JudgmentRecord> out;
  out.reserve(judgments_.size());
  for (const auto& j : judgments_)
    out.push_back({task_ids_[j.task], worker_ids_[j.worker], j.label, to_seconds(j.time, transform_)});
  return out;
}

std::map<std::string, int> Dataset::gold_map() const {
  std::map<std::string, int> out;
  for (int i = 0; i < static_cast<int>(gold_.size()); ++i)
    if (gold_[i] != kNoGold) out.emplace(task_ids_[i], gold_[i]);
  return out;
}

Dataset Dataset::subset(std::span<const int> judgment_indices) const {
  std::vector<JudgmentRecord> records;
  records.reserve(judgment_indices.size());
  for (int j : judgment_indices) {
    const auto& jd = judgments_.at(j);
    records.push_back({task_ids_[jd.task], worker_ids_[jd.worker], jd.label, jd.time});
  }
  const auto gold = gold_map();
  Dataset out = index_records(label_space_, records, &gold, transform_ == TimeTransform::none);
  out.transform_ = transform_;
  return out;
}

Dataset load_judgments_csv(const std::filesystem::path& path, const LabelSpace& label_space,
                           const std::optional<std::filesystem::path>& gold_path) {
  const CsvTable table = read_csv(path);
  const int task_col = table.column("task_id");
  const int worker_col = table.column("worker_id");
  const int label_col = table.column("label");
  const int time_col = table.column("time_seconds");
  const int accept_col = table.column("accept_ts");
  const int submit_col = table.column("submit_ts");
  if (task_col < 0 || worker_col < 0 || label_col < 0)
    throw row_error(path, 1, "header must contain task_id,worker_id,label");
  if (time_col < 0 && (accept_col < 0 || submit_col < 0))
    throw row_error(path, 1, "header needs time_seconds or accept_ts,submit_ts");

  std::vector<JudgmentRecord> records;
  records.reserve(table.rows.size());
  for (const auto& [line, f] : table.rows) {
    JudgmentRecord r;
    r.task_id = f[task_col];
    r.worker_id = f[worker_col];
    if (r.task_id.empty() || r.worker_id.empty()) throw row_error(path, line, "empty id");
    try {
      r.label = label_space.parse(f[label_col]);
    } catch (const Error& e) {
      throw Error(e.kind(), path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
    if (time_col >= 0 && !f[time_col].empty()) {
      if (!parse_double(f[time_col], r.time_seconds))
        throw row_error(path, line, "bad time_seconds '" + f[time_col] + "'");
    } else if (accept_col >= 0 && submit_col >= 0) {
      r.time_seconds = seconds_between(f[accept_col], f[submit_col]);
    } else {
      throw row_error(path, line, "missing time");
    }
    if (!(r.time_seconds > 0.0))
      throw Error(ErrorKind::NonPositiveTime,
                  path.string() + ":" + std::to_string(line) + ": time must be positive");
    records.push_back(std::move(r));
  }

  std::map<std::string, int> gold;
  if (gold_path) {
    const CsvTable gt = read_csv(*gold_path);
    const int gt_task = gt.column("task_id");
    const int gt_label = gt.column("gold_label");
    if (gt_task < 0 || gt_label < 0)
      throw row_error(*gold_path, 1, "header must contain task_id,gold_label");
    for (const auto& [line, f] : gt.rows) {
      int label = 0;
      try {
        label = label_space.parse(f[gt_label]);
      } catch (const Error& e) {
        throw Error(e.kind(), gold_path->string() + ":" + std::to_string(line) + ": " + e.what());
      }
      if (!gold.emplace(f[gt_task], label).second)
        throw row_error(*gold_path, line, "duplicate gold label for task " + f[gt_task]);
    }
  }
  return Dataset::from_records(label_space, records, gold_path ? &gold : nullptr);
}

void write_judgments_csv(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.precision(17);
  out << "task_id,worker_id,label,time_seconds\n";
  for (const auto& r : d.to_records())
    out << r.task_id << ',' << r.worker_id << ',' << d.label_space().name(r.label) << ','
        << r.time_seconds << '\n';
}

void write_gold_csv(const Dataset& d, const std::filesystem::path& path) {
  d.require_gold();
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << "task_id,gold_label\n";
  for (int i = 0; i < d.num_tasks(); ++i)
    if (d.gold()[i] != kNoGold)
      out << d.task_id(i) << ',' << d.label_space().name(d.gold()[i]) << '\n';
}

double seconds_between(std::string_view accept_ts, std::string_view submit_ts) {
  const auto delta = parse_timestamp(submit_ts) - parse_timestamp(accept_ts);
  return std::chrono::duration<double>(delta).count();
}

Dataset transform_times(const Dataset& d, TimeTransform mode) {
  if (mode == TimeTransform::none) return d;
  if (d.transform_ == TimeTransform::log)
    throw Error(ErrorKind::InvalidArgument, "times are already log-transformed");
  Dataset out = d;
  for (auto& j : out.judgments_) j.time = std::log(j.time);
  out.transform_ = TimeTransform::log;
  return out;
}

double to_seconds(double value, TimeTransform transform) {
  return transform == TimeTransform::log ? std::exp(value) : value;
}

DatasetStats dataset_stats(const Dataset& d) {
  DatasetStats s;
  s.num_judgments = d.num_judgments();
  s.num_tasks = d.num_tasks();
  s.num_workers = d.num_workers();
  s.num_classes = d.num_classes();
  s.judgments_per_task = static_cast<double>(s.num_judgments) / s.num_tasks;
  s.judgments_per_worker = static_cast<double>(s.num_judgments) / s.num_workers;
  if (d.has_gold()) {
    int scored = 0, correct = 0;
    for (const auto& j : d.judgments()) {
      const int g = d.gold()[j.task];
      if (g == kNoGold) continue;
      ++scored;
      correct += (j.label == g);
    }
    if (scored > 0) s.judgment_accuracy = static_cast<double>(correct) / scored;
  }
  return s;
}

Hyperparameters Hyperparameters::defaults(int num_classes, int num_tasks, TimeTransform transform) {
  Hyperparameters h;
  h.p0 = Eigen::VectorXd::Ones(num_classes);
  h.s0 = Eigen::VectorXd::Ones(num_classes);
  h.pi0_diag = 0.7;
  h.pi0_offdiag = 0.3;
  h.alpha0 = 0.7 * num_tasks;
  h.beta0 = 0.3 * num_tasks;
  h.time_transform = transform;
  if (transform == TimeTransform::log) {
    h.sigma0_mean = std::log(10.0);
    h.lambda0_mean = std::log(50.0);
  } else {
    h.sigma0_mean = 10.0;
    h.lambda0_mean = 50.0;
  }
  h.gamma0_precision = 0.1;
  h.delta0_precision = 0.1;
  return h;
}

Eigen::MatrixXd Hyperparameters::confusion_prior(int num_classes) const {
  const double off = pi0_offdiag / (num_classes - 1);
  Eigen::MatrixXd prior = Eigen::MatrixXd::Constant(num_classes, num_classes, off);
  prior.diagonal().setConstant(pi0_diag);
  return prior;
}

void Hyperparameters::validate(int num_classes) const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); };
  if (p0.size() != num_classes || s0.size() != num_classes)
    fail("p0 and s0 must have one entry per class");
  if ((p0.array() <= 0.0).any() || (s0.array() <= 0.0).any())
    fail("p0 and s0 pseudo-counts must be positive");
  if (!(pi0_diag > 0.0) || !(pi0_offdiag > 0.0)) fail("confusion prior masses must be positive");
  if (!(alpha0 > 0.0) || !(beta0 > 0.0)) fail("alpha0 and beta0 must be positive");
  if (!(gamma0_precision > 0.0) || !(delta0_precision > 0.0)) fail("precisions must be positive");
  if (!(sigma0_mean < lambda0_mean)) fail("sigma0_mean must be below lambda0_mean");
}

}  // namespace crowdtime
