#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pseudodice/error.hpp"
#include "pseudodice/harness.hpp"

namespace pseudodice {

using nlohmann::json;

// nlohmann ADL hooks for the report types.

void to_json(json& j, const WindowRange& r) { j = json{{"start", r.start}, {"count", r.count}}; }
void from_json(const json& j, WindowRange& r) {
  j.at("start").get_to(r.start);
  j.at("count").get_to(r.count);
}

void to_json(json& j, const DatasetAccuracy& d) {
  j = json{{"name", d.name}, {"range", d.range}, {"accuracy", d.accuracy}, {"ideal_rate", d.ideal_rate}};
}
void from_json(const json& j, DatasetAccuracy& d) {
  j.at("name").get_to(d.name);
  j.at("range").get_to(d.range);
  j.at("accuracy").get_to(d.accuracy);
  j.at("ideal_rate").get_to(d.ideal_rate);
}

void to_json(json& j, const SigmaVerdict& v) {
  j = json{{"dataset", v.dataset}, {"rate", v.rate},           {"n", v.n},
           {"k", v.k},             {"threshold", v.threshold}, {"exceeds", v.exceeds}};
}
void from_json(const json& j, SigmaVerdict& v) {
  j.at("dataset").get_to(v.dataset);
  j.at("rate").get_to(v.rate);
  j.at("n").get_to(v.n);
  j.at("k").get_to(v.k);
  j.at("threshold").get_to(v.threshold);
  j.at("exceeds").get_to(v.exceeds);
}

void to_json(json& j, const TrainLog& log) {
  json epochs = json::array();
  for (const auto& e : log.epochs) epochs.push_back(json{{"loss", e.loss}, {"gradient_norm", e.gradient_norm}});
  j = json{{"epochs", epochs}, {"stop_reason", stop_reason_name(log.stop_reason)}};
}
void from_json(const json& j, TrainLog& log) {
  log.epochs.clear();
  for (const auto& e : j.at("epochs")) log.epochs.push_back({e.at("loss").get<double>(), e.at("gradient_norm").get<double>()});
  log.stop_reason = j.at("stop_reason").get<std::string>() == "min_gradient" ? StopReason::MinGradient
                                                                             : StopReason::MaxEpochs;
}

void to_json(json& j, const ReportA& a) {
  j = json{{"source", a.source_label},
           {"datasets", a.datasets},
           {"subgroup_size", a.subgroup_size},
           {"subgroup_rates", a.subgroup_rates},
           {"subgroup_lcl", a.subgroup_lcl ? json(*a.subgroup_lcl) : json(nullptr)},
           {"lcl_above_chance", a.lcl_above_chance},
           {"verdicts", a.verdicts},
           {"accuracy_within_ideal", a.accuracy_within_ideal},
           {"train_log", a.train_log}};
}
void from_json(const json& j, ReportA& a) {
  j.at("source").get_to(a.source_label);
  j.at("datasets").get_to(a.datasets);
  j.at("subgroup_size").get_to(a.subgroup_size);
  j.at("subgroup_rates").get_to(a.subgroup_rates);
  const auto& lcl = j.at("subgroup_lcl");
  a.subgroup_lcl = lcl.is_null() ? std::nullopt : std::optional<double>(lcl.get<double>());
  j.at("lcl_above_chance").get_to(a.lcl_above_chance);
  j.at("verdicts").get_to(a.verdicts);
  j.at("accuracy_within_ideal").get_to(a.accuracy_within_ideal);
  j.at("train_log").get_to(a.train_log);
}

void to_json(json& j, const TrialResult& t) {
  j = json{{"trial", t.trial},
           {"init_seed", t.init_seed},
           {"train_accuracy", t.train_accuracy},
           {"test_correct", t.test_correct},
           {"epochs", t.epochs}};
}
void from_json(const json& j, TrialResult& t) {
  j.at("trial").get_to(t.trial);
  j.at("init_seed").get_to(t.init_seed);
  j.at("train_accuracy").get_to(t.train_accuracy);
  j.at("test_correct").get_to(t.test_correct);
  j.at("epochs").get_to(t.epochs);
}

void to_json(json& j, const SeedResult& s) {
  j = json{{"seed", s.seed},
           {"source", s.source_label},
           {"test_prefix", s.test_prefix},
           {"test_label", s.test_label},
           {"prefix_count0", s.prefix_count0},
           {"prefix_count1", s.prefix_count1},
           {"majority", s.majority},
           {"label_matches_majority", s.label_matches_majority},
           {"successes", s.successes},
           {"attempts", s.attempts},
           {"train_ideal_rate", s.train_ideal_rate},
           {"fraction_above_yardstick", s.fraction_above_yardstick},
           {"accuracy_within_ideal", s.accuracy_within_ideal},
           {"explained", s.explained},
           {"trials", s.trials}};
}
void from_json(const json& j, SeedResult& s) {
  j.at("seed").get_to(s.seed);
  j.at("source").get_to(s.source_label);
  j.at("test_prefix").get_to(s.test_prefix);
  j.at("test_label").get_to(s.test_label);
  j.at("prefix_count0").get_to(s.prefix_count0);
  j.at("prefix_count1").get_to(s.prefix_count1);
  j.at("majority").get_to(s.majority);
  j.at("label_matches_majority").get_to(s.label_matches_majority);
  j.at("successes").get_to(s.successes);
  j.at("attempts").get_to(s.attempts);
  j.at("train_ideal_rate").get_to(s.train_ideal_rate);
  j.at("fraction_above_yardstick").get_to(s.fraction_above_yardstick);
  j.at("accuracy_within_ideal").get_to(s.accuracy_within_ideal);
  j.at("explained").get_to(s.explained);
  j.at("trials").get_to(s.trials);
}

void to_json(json& j, const ReportB& b) {
  j = json{{"yardstick", b.yardstick}, {"seeds", b.seeds}, {"explained_seeds", b.explained_seeds}};
}
void from_json(const json& j, ReportB& b) {
  j.at("yardstick").get_to(b.yardstick);
  j.at("seeds").get_to(b.seeds);
  j.at("explained_seeds").get_to(b.explained_seeds);
}

void to_json(json& j, const NormalityRow& r) {
  j = json{{"sequence", r.sequence},
           {"n", r.n},
           {"L", r.length},
           {"W", r.windows},
           {"k", r.k},
           {"statistic", r.statistic},
           {"bound", r.bound},
           {"violated", r.violated},
           {"ones_frequency", r.ones_frequency},
           {"frequency_band", r.frequency_band},
           {"max_frequency_deviation", r.max_frequency_deviation},
           {"frequencies_within_band", r.frequencies_within_band},
           {"alt_statistic", r.alt_statistic ? json(*r.alt_statistic) : json(nullptr)},
           {"alt_violated", r.alt_violated ? json(*r.alt_violated) : json(nullptr)},
           {"counts", r.counts}};
}
void from_json(const json& j, NormalityRow& r) {
  j.at("sequence").get_to(r.sequence);
  j.at("n").get_to(r.n);
  j.at("L").get_to(r.length);
  j.at("W").get_to(r.windows);
  j.at("k").get_to(r.k);
  j.at("statistic").get_to(r.statistic);
  j.at("bound").get_to(r.bound);
  j.at("violated").get_to(r.violated);
  j.at("ones_frequency").get_to(r.ones_frequency);
  j.at("frequency_band").get_to(r.frequency_band);
  j.at("max_frequency_deviation").get_to(r.max_frequency_deviation);
  j.at("frequencies_within_band").get_to(r.frequencies_within_band);
  const auto& as = j.at("alt_statistic");
  r.alt_statistic = as.is_null() ? std::nullopt : std::optional<double>(as.get<double>());
  const auto& av = j.at("alt_violated");
  r.alt_violated = av.is_null() ? std::nullopt : std::optional<bool>(av.get<bool>());
  j.at("counts").get_to(r.counts);
}

void to_json(json& j, const ReportC& c) { j = json{{"rows", c.rows}}; }
void from_json(const json& j, ReportC& c) { j.at("rows").get_to(c.rows); }

namespace {

void require_finite(const json& j, const std::string& where) {
  switch (j.type()) {
    case json::value_t::number_float:
      if (!std::isfinite(j.get<double>())) throw ValidationError("non-finite value at " + where);
      break;
    case json::value_t::object:
      for (const auto& [key, value] : j.items()) require_finite(value, where + "/" + key);
      break;
    case json::value_t::array:
      for (std::size_t i = 0; i < j.size(); ++i) require_finite(j[i], where + "/" + std::to_string(i));
      break;
    default:
      break;
  }
}

json report_to_json(const ExperimentReport& report) {
  json j;
  j["experiment"] = experiment_name(report.experiment);
  j["config"] = report.config;
  if (report.a) j["a"] = *report.a;
  if (report.b) j["b"] = *report.b;
  if (report.c) j["c"] = *report.c;
  return j;
}

std::string csv_real(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing", path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed", path.string());
}

std::string file_safe(std::string label) {
  for (char& c : label) {
    if (c == ':' || c == '=' || c == '/' || c == ',') c = '_';
  }
  return label;
}

}  // namespace

std::string report_json(const ExperimentReport& report) {
  const json j = report_to_json(report);
  require_finite(j, "");
  return j.dump(2) + "\n";
}

ExperimentReport parse_report_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("report JSON: ") + e.what(), e.byte);
  }
  ExperimentReport report;
  try {
    report.experiment = parse_experiment(j.at("experiment").get<std::string>());
    j.at("config").get_to(report.config);
    if (j.contains("a")) report.a = j.at("a").get<ReportA>();
    if (j.contains("b")) report.b = j.at("b").get<ReportB>();
    if (j.contains("c")) report.c = j.at("c").get<ReportC>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("report JSON: ") + e.what(), 0);
  }
  return report;
}

std::map<std::string, std::string> report_tables(const ExperimentReport& report) {
  std::map<std::string, std::string> tables;
  if (report.a) {
    const auto& a = *report.a;
    std::string acc = "dataset,start,count,accuracy,ideal_rate\n";
    for (const auto& d : a.datasets) {
      acc += d.name + "," + std::to_string(d.range.start) + "," + std::to_string(d.range.count) + "," +
             csv_real(d.accuracy) + "," + csv_real(d.ideal_rate) + "\n";
    }
    tables["accuracies.csv"] = acc;
    std::string verdicts = "dataset,rate,n,k,threshold,exceeds\n";
    for (const auto& v : a.verdicts) {
      verdicts += v.dataset + "," + csv_real(v.rate) + "," + std::to_string(v.n) + "," + csv_real(v.k) + "," +
                  csv_real(v.threshold) + "," + (v.exceeds ? "true" : "false") + "\n";
    }
    tables["verdicts.csv"] = verdicts;
    if (!a.subgroup_rates.empty()) {
      std::string groups = "subgroup,size,rate\n";
      for (std::size_t i = 0; i < a.subgroup_rates.size(); ++i) {
        groups += std::to_string(i + 1) + "," + std::to_string(a.subgroup_size) + "," +
                  csv_real(a.subgroup_rates[i]) + "\n";
      }
      tables["subgroups.csv"] = groups;
    }
    std::string log = "epoch,loss,gradient_norm\n";
    for (std::size_t i = 0; i < a.train_log.epochs.size(); ++i) {
      log += std::to_string(i + 1) + "," + csv_real(a.train_log.epochs[i].loss) + "," +
             csv_real(a.train_log.epochs[i].gradient_norm) + "\n";
    }
    tables["train_log.csv"] = log;
  }
  if (report.b) {
    std::string seeds =
        "seed,test_prefix,test_label,prefix_count0,prefix_count1,majority,label_matches_majority,successes,"
        "attempts,fraction_above_yardstick,train_ideal_rate,explained\n";
    std::string trials = "seed,trial,init_seed,train_accuracy,test_correct,epochs\n";
    for (const auto& s : report.b->seeds) {
      seeds += std::to_string(s.seed) + "," + s.test_prefix + "," + std::to_string(s.test_label) + "," +
               std::to_string(s.prefix_count0) + "," + std::to_string(s.prefix_count1) + "," +
               std::to_string(s.majority) + "," + (s.label_matches_majority ? "true" : "false") + "," +
               std::to_string(s.successes) + "," + std::to_string(s.attempts) + "," +
               csv_real(s.fraction_above_yardstick) + "," + csv_real(s.train_ideal_rate) + "," +
               (s.explained ? "true" : "false") + "\n";
      for (const auto& t : s.trials) {
        trials += std::to_string(s.seed) + "," + std::to_string(t.trial) + "," + std::to_string(t.init_seed) + "," +
                  csv_real(t.train_accuracy) + "," + std::to_string(t.test_correct) + "," +
                  std::to_string(t.epochs) + "\n";
      }
    }
    tables["seeds.csv"] = seeds;
    tables["trials.csv"] = trials;
  }
  if (report.c) {
    std::string summary =
        "sequence,n,L,W,statistic,bound,k,violated,ones_frequency,alt_statistic,alt_violated,"
        "max_frequency_deviation,frequency_band\n";
    for (const auto& r : report.c->rows) {
      summary += r.sequence + "," + std::to_string(r.n) + "," + std::to_string(r.length) + "," +
                 std::to_string(r.windows) + "," + csv_real(r.statistic) + "," + csv_real(r.bound) + "," +
                 csv_real(r.k) + "," + (r.violated ? "true" : "false") + "," + csv_real(r.ones_frequency) + "," +
                 (r.alt_statistic ? csv_real(*r.alt_statistic) : "") + "," +
                 (r.alt_violated ? (*r.alt_violated ? "true" : "false") : "") + "," +
                 csv_real(r.max_frequency_deviation) + "," + csv_real(r.frequency_band) + "\n";
      std::string freq = "pattern,count,frequency\n";
      for (std::size_t v = 0; v < r.counts.size(); ++v) {
        freq += pattern_string(v, r.length) + "," + std::to_string(r.counts[v]) + "," +
                csv_real(static_cast<double>(r.counts[v]) / static_cast<double>(r.windows)) + "\n";
      }
      tables["frequencies_" + file_safe(r.sequence) + "_n" + std::to_string(r.n) + ".csv"] = freq;
    }
    tables["normality.csv"] = summary;
  }
  return tables;
}

std::vector<std::filesystem::path> emit_report(const ExperimentReport& report, const std::filesystem::path& dir,
                                               std::vector<ReportFormat> formats) {
  // Validate everything before touching the filesystem.
  const std::string body = report_json(report);
  const auto tables = report_tables(report);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory (" + ec.message() + ")", dir.string());

  std::vector<std::filesystem::path> written;
  for (ReportFormat f : formats) {
    if (f == ReportFormat::Json) {
      write_file(dir / "report.json", body);
      written.push_back(dir / "report.json");
      const json meta{{"started_at", report.metadata.started_at},
                      {"wall_seconds", report.metadata.wall_seconds},
                      {"threads", report.metadata.threads}};
      write_file(dir / "metadata.json", meta.dump(2) + "\n");
      written.push_back(dir / "metadata.json");
    } else {
      for (const auto& [name, text] : tables) {
        write_file(dir / name, text);
        written.push_back(dir / name);
      }
    }
  }
  return written;
}

std::string normality_json(const std::vector<NormalityReport>& reports, const std::string& sequence) {
  json rows = json::array();
  for (const auto& r : reports) {
    rows.push_back(json{{"n", r.n},
                        {"L", r.length},
                        {"W", r.windows},
                        {"statistic", r.statistic},
                        {"bound", r.bound},
                        {"k", r.k},
                        {"violated", r.violated},
                        {"frequencies", r.frequencies}});
  }
  const json j{{"sequence", sequence}, {"reports", rows}};
  require_finite(j, "");
  return j.dump(2) + "\n";
}

}  // namespace pseudodice
