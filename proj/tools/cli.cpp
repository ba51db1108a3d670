#include "cli.hpp"

#include <CLI11.hpp>
#include <toml.hpp>

#include <csignal>
#include <iomanip>
#include <cstdlib>
#include <iostream>
#include <set>

#include "vulncur/audit.hpp"
#include "vulncur/audit_server.hpp"
#include "vulncur/dedup.hpp"
#include "vulncur/error.hpp"
#include "vulncur/evaluation.hpp"
#include "vulncur/ingest.hpp"
#include "vulncur/jsonl.hpp"
#include "vulncur/serialize.hpp"

namespace vulncur::cli {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& key, const std::string& detail) {
  throw Error(Errc::SchemaViolation, key, std::nullopt, detail);
}

/// Typed lookups into one TOML table, rejecting keys nobody asked for.
class Table {
 public:
  Table(const toml::table* table, std::string name, std::set<std::string> known)
      : table_(table), name_(std::move(name)) {
    if (!table_) return;
    for (const auto& [key, _] : *table_) {
      if (!known.contains(std::string(key.str()))) {
        config_error(name_ + "." + std::string(key.str()), "unknown config key");
      }
    }
  }

  template <typename T>
  void get(const char* key, T& out) const {
    if (!table_) return;
    const auto* node = table_->get(key);
    if (!node) return;
    if constexpr (std::is_same_v<T, double>) {
      if (auto v = node->value<double>()) {
        out = *v;
        return;
      }
    } else if constexpr (std::is_same_v<T, bool>) {
      if (auto v = node->value_exact<bool>()) {
        out = *v;
        return;
      }
    } else if constexpr (std::is_integral_v<T>) {
      if (auto v = node->value_exact<std::int64_t>(); v && *v >= 0) {
        out = static_cast<T>(*v);
        return;
      }
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (auto v = node->value_exact<std::string>()) {
        out = *v;
        return;
      }
    }
    config_error(name_ + "." + key, "wrong type");
  }

  void path(const char* key, fs::path& out, const fs::path& base) const {
    std::string s;
    get(key, s);
    if (!s.empty()) out = fs::path(s).is_absolute() ? fs::path(s) : base / s;
  }

  std::vector<std::string> strings(const char* key) const {
    std::vector<std::string> out;
    if (!table_ || !table_->contains(key)) return out;
    const auto* arr = table_->get_as<toml::array>(key);
    if (!arr) config_error(name_ + "." + key, "expected array of strings");
    for (const auto& e : *arr) {
      auto v = e.value_exact<std::string>();
      if (!v) config_error(name_ + "." + key, "expected array of strings");
      out.push_back(*v);
    }
    return out;
  }

  bool has(const char* key) const { return table_ && table_->contains(key); }

 private:
  const toml::table* table_;
  std::string name_;
};

const toml::table* subtable(const toml::table& root, const char* name) {
  const auto* node = root.get(name);
  if (!node) return nullptr;
  const auto* t = node->as_table();
  if (!t) config_error(name, "expected a table");
  return t;
}

std::string default_config_path() {
  const char* env = std::getenv("VULNCUR_CONFIG");
  return env ? std::string(env) : std::string();
}

splitting::Fractions parse_fractions(const std::vector<double>& v) {
  if (v.size() != 3) {
    throw Error(Errc::InvalidFractions, {}, std::nullopt, "expected three fractions");
  }
  return {v[0], v[1], v[2]};
}

/// Flag values that override the config file when given.
struct Overrides {
  std::string config;
  std::optional<unsigned> jobs;
  std::optional<std::string> workdir;
  std::optional<std::string> input;
  std::optional<std::string> nvd;
  std::vector<std::string> exclude_sources;
  std::optional<std::vector<double>> fractions;
  std::optional<double> similarity;
  std::optional<double> r;
  std::optional<double> threshold;
  std::optional<std::size_t> min_name_length;
  bool no_one_func = false;
  bool no_nvd_check = false;
  bool no_file_match = false;
  std::optional<std::size_t> sample_size;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> panel;
  std::optional<std::string> state;
  std::optional<std::string> host;
  std::optional<int> port;
};

ToolConfig resolve(const Overrides& o) {
  ToolConfig cfg;
  const auto path = o.config.empty() ? default_config_path() : o.config;
  if (!path.empty()) cfg = load_config(path);

  auto& p = cfg.pipeline;
  if (o.jobs) p.jobs = std::max(1u, *o.jobs);
  if (o.workdir) p.workdir = *o.workdir;
  if (o.input) p.input = *o.input;
  if (o.nvd) p.nvd = *o.nvd;
  if (!o.exclude_sources.empty()) p.exclude_sources = o.exclude_sources;
  if (o.fractions) p.fractions = parse_fractions(*o.fractions);
  if (o.similarity) p.similarity_threshold = *o.similarity;
  if (o.r) p.eval.fpr_tolerance = *o.r;
  if (o.threshold) p.eval.binary_threshold = *o.threshold;
  if (o.min_name_length) p.labeling.nvd.min_function_name_length = *o.min_name_length;
  if (o.no_one_func) p.labeling.one_func = false;
  if (o.no_nvd_check) p.labeling.nvd_check = false;
  if (o.no_file_match) p.labeling.nvd.match_file_names = false;

  auto& a = cfg.audit;
  if (o.sample_size) a.sample_size = *o.sample_size;
  if (o.seed) a.seed = *o.seed;
  if (o.panel) a.panel_size = *o.panel;
  if (o.state) a.state = *o.state;
  if (o.host) a.host = *o.host;
  if (o.port) a.port = *o.port;
  return cfg;
}

void require_path(const fs::path& p, const char* what) {
  if (p.empty()) {
    throw Error(Errc::InvalidArgument, what, std::nullopt, "no path given (flag or config)");
  }
}

audit::AuditServer* g_server = nullptr;

extern "C" void stop_server(int) {
  if (g_server) g_server->stop();
}

}  // namespace

ToolConfig parse_config(const std::string& text, const fs::path& base_dir, ToolConfig cfg) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw Error(Errc::SchemaViolation, "config", e.source().begin.line,
                std::string(e.description()));
  }
  for (const auto& [key, _] : root) {
    static const std::set<std::string> kTables = {"paths", "run", "ingest", "labeling", "split",
                                                  "pairing", "evaluation", "audit"};
    if (!kTables.contains(std::string(key.str()))) {
      config_error(std::string(key.str()), "unknown config table");
    }
  }

  auto& p = cfg.pipeline;
  const Table paths(subtable(root, "paths"), "paths", {"input", "nvd", "workdir"});
  paths.path("input", p.input, base_dir);
  paths.path("nvd", p.nvd, base_dir);
  paths.path("workdir", p.workdir, base_dir);

  const Table run(subtable(root, "run"), "run", {"jobs"});
  run.get("jobs", p.jobs);
  p.jobs = std::max(1u, p.jobs);

  const Table ingest(subtable(root, "ingest"), "ingest", {"exclude_sources"});
  if (ingest.has("exclude_sources")) p.exclude_sources = ingest.strings("exclude_sources");

  const Table labeling(subtable(root, "labeling"), "labeling",
                       {"one_func", "nvd_check", "match_function_names", "match_file_names",
                        "min_function_name_length"});
  labeling.get("one_func", p.labeling.one_func);
  labeling.get("nvd_check", p.labeling.nvd_check);
  labeling.get("match_function_names", p.labeling.nvd.match_function_names);
  labeling.get("match_file_names", p.labeling.nvd.match_file_names);
  labeling.get("min_function_name_length", p.labeling.nvd.min_function_name_length);

  if (const auto* split = subtable(root, "split")) {
    const Table t(split, "split", {"fractions"});
    if (t.has("fractions")) {
      const auto* arr = split->get_as<toml::array>("fractions");
      if (!arr) config_error("split.fractions", "expected array of three numbers");
      std::vector<double> v;
      for (const auto& e : *arr) {
        auto d = e.value<double>();
        if (!d) config_error("split.fractions", "expected array of three numbers");
        v.push_back(*d);
      }
      p.fractions = parse_fractions(v);
    }
  }

  const Table pairing(subtable(root, "pairing"), "pairing", {"similarity_threshold"});
  pairing.get("similarity_threshold", p.similarity_threshold);

  const Table evaluation(subtable(root, "evaluation"), "evaluation",
                         {"fpr_tolerance", "binary_threshold"});
  evaluation.get("fpr_tolerance", p.eval.fpr_tolerance);
  evaluation.get("binary_threshold", p.eval.binary_threshold);

  auto& a = cfg.audit;
  const Table audit(subtable(root, "audit"), "audit",
                    {"sample_size", "seed", "panel_size", "state", "host", "port"});
  audit.get("sample_size", a.sample_size);
  audit.get("seed", a.seed);
  audit.get("panel_size", a.panel_size);
  audit.path("state", a.state, base_dir);
  audit.get("host", a.host);
  audit.get("port", a.port);
  return cfg;
}

ToolConfig load_config(const fs::path& path) {
  const auto text = jsonl::read_file(path);
  try {
    return parse_config(text, path.parent_path());
  } catch (const Error& e) {
    throw e.with_file(path.string());
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Curate vulnerability-detection datasets and score detectors", "vulncur"};
  app.fallthrough();
  app.require_subcommand(1);

  Overrides o;
  app.add_option("--config", o.config, "TOML config file (default: $VULNCUR_CONFIG)");
  app.add_option("-j,--jobs", o.jobs, "Worker threads; output does not depend on it");
  app.add_option("-w,--workdir", o.workdir, "Directory holding the stage manifests");

  auto add_labeling_flags = [&](CLI::App* sub) {
    sub->add_option("--nvd", o.nvd, "NVD feed (JSON array or JSONL)");
    sub->add_flag("--no-one-func", o.no_one_func, "Disable the one-function labeler");
    sub->add_flag("--no-nvd-check", o.no_nvd_check, "Disable the NVD-description labeler");
    sub->add_flag("--no-file-match", o.no_file_match, "Do not match NVD text on file names");
    sub->add_option("--min-name-length", o.min_name_length,
                    "Shortest function name matched in NVD text");
  };
  auto add_fraction_flag = [&](CLI::App* sub) {
    sub->add_option("--fractions", o.fractions, "train,dev,test fractions")->delimiter(',');
  };

  auto* ingest_cmd = app.add_subcommand("ingest", "Validate function-change records");
  ingest_cmd->add_option("-i,--input", o.input, "Function-change JSONL");
  ingest_cmd->add_option("--exclude-source", o.exclude_sources, "Drop records of this source_dataset");

  auto* dedup_cmd = app.add_subcommand("dedup", "Drop unchanged and duplicate functions");

  auto* label_cmd = app.add_subcommand("label", "Label vulnerable and benign functions");
  add_labeling_flags(label_cmd);

  auto* split_cmd = app.add_subcommand("split", "Commit-atomic temporal train/dev/test split");
  add_fraction_flag(split_cmd);

  auto* pair_cmd = app.add_subcommand("pair", "Pair vulnerable functions with their patches");
  pair_cmd->add_option("--similarity", o.similarity, "Minimum similarity of a pair");

  std::string preds_path;
  std::string split_name = "test";
  std::string format = "json";
  std::string eval_output;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a prediction file");
  eval_cmd->add_option("--preds", preds_path, "Prediction JSONL {record_id, score}")->required();
  eval_cmd->add_option("--split", split_name, "Split to score")
      ->check(CLI::IsMember({"train", "dev", "test"}));
  eval_cmd->add_option("--r", o.r, "FPR tolerance for VD-S");
  eval_cmd->add_option("--threshold", o.threshold, "Binary decision threshold");
  eval_cmd->add_option("--format", format, "json or table")->check(CLI::IsMember({"json", "table"}));
  eval_cmd->add_option("-o,--output", eval_output, "Also write the JSON report here");

  std::string train_path;
  std::string test_path;
  auto* leak_cmd = app.add_subcommand("leakage", "Percent of test vulnerable functions copied from train");
  leak_cmd->add_option("--train", train_path, "Labeled train JSONL")->required();
  leak_cmd->add_option("--test", test_path, "Labeled test JSONL")->required();

  auto* audit_cmd = app.add_subcommand("audit", "Manual label verification");
  audit_cmd->require_subcommand(1);
  std::string labeler_name;
  auto* sample_cmd = audit_cmd->add_subcommand("sample", "Draw vulnerable functions for review");
  sample_cmd->add_option("-n,--n", o.sample_size, "Number of samples");
  sample_cmd->add_option("--seed", o.seed, "Sampling seed");
  sample_cmd->add_option("--labeler", labeler_name, "Only functions from this labeler")
      ->check(CLI::IsMember({"OneFunc", "NVDCheck"}));
  sample_cmd->add_option("--nvd", o.nvd, "NVD feed for descriptions");
  sample_cmd->add_option("--state", o.state, "Audit event log to create");

  std::string static_dir;
  auto* serve_cmd = audit_cmd->add_subcommand("serve", "Serve the annotation API");
  serve_cmd->add_option("--state", o.state, "Audit event log");
  serve_cmd->add_option("--host", o.host, "Bind address");
  serve_cmd->add_option("--port", o.port, "Port");
  serve_cmd->add_option("--panel", o.panel, "Annotators per sample");
  serve_cmd->add_option("--static", static_dir, "Frontend assets served at /");

  std::string report_format = "table";
  auto* report_cmd = audit_cmd->add_subcommand("report", "Label accuracy of a finished audit");
  report_cmd->add_option("--state", o.state, "Audit event log");
  report_cmd->add_option("--panel", o.panel, "Annotators per sample");
  report_cmd->add_option("--format", report_format, "json or table")
      ->check(CLI::IsMember({"json", "table"}));

  auto* pipeline_cmd = app.add_subcommand("pipeline", "End-to-end curation");
  pipeline_cmd->require_subcommand(1);
  auto* run_cmd = pipeline_cmd->add_subcommand("run", "ingest -> dedup -> label -> split -> pair");
  run_cmd->add_option("-i,--input", o.input, "Function-change JSONL");
  run_cmd->add_option("-o,--out", o.workdir, "Output directory (same as --workdir)");
  run_cmd->add_option("--exclude-source", o.exclude_sources, "Drop records of this source_dataset");
  add_labeling_flags(run_cmd);
  add_fraction_flag(run_cmd);
  run_cmd->add_option("--similarity", o.similarity, "Minimum similarity of a pair");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kValidationError;
  }

  try {
    const auto cfg = resolve(o);
    const auto& pc = cfg.pipeline;
    auto print = [&](const nlohmann::ordered_json& j) { out << j.dump(2) << '\n'; };

    if (*ingest_cmd) {
      require_path(pc.input, "input");
      print(pipeline::run_ingest(pc));
    } else if (*dedup_cmd) {
      print(pipeline::run_dedup(pc));
    } else if (*label_cmd) {
      print(pipeline::run_label(pc));
    } else if (*split_cmd) {
      print(pipeline::run_split(pc));
    } else if (*pair_cmd) {
      print(pipeline::run_pair(pc));
    } else if (*run_cmd) {
      require_path(pc.input, "input");
      print(pipeline::run_all(pc));
    } else if (*eval_cmd) {
      const auto result = pipeline::run_evaluate(pc, preds_path, *parse_split(split_name));
      const auto doc = pipeline::to_json(result);
      if (!eval_output.empty()) jsonl::write_json(eval_output, doc);
      if (format == "table") {
        out << "split             " << std::setw(12) << split_name << '\n'
            << evaluation::format_table(result.metrics, &result.pairs);
      } else {
        print(doc);
      }
    } else if (*leak_cmd) {
      const auto train = pipeline::read_labeled(train_path);
      const auto test = pipeline::read_labeled(test_path);
      out << audit::format_percent(dedup::leakage_report(train, test)) << '\n';
    } else if (*sample_cmd) {
      const auto labeled = pipeline::read_labeled(pc.workdir / pipeline::files::kLabeled);
      const auto records = pipeline::read_records(pc.workdir / pipeline::files::kRecords, pc.jobs);
      ingest::NvdFeed feed;
      if (!pc.nvd.empty()) feed = ingest::read_nvd_feed(pc.nvd);
      std::optional<Labeler> labeler;
      if (!labeler_name.empty()) labeler = parse_labeler(labeler_name);
      auto samples = audit::draw_sample(labeled, records, feed, cfg.audit.sample_size,
                                        cfg.audit.seed, labeler);
      const auto count = samples.size();
      audit::AuditStore::create(cfg.audit.state, std::move(samples), {cfg.audit.panel_size});
      print({{"samples", count}, {"seed", cfg.audit.seed}, {"state", cfg.audit.state.string()}});
    } else if (*serve_cmd) {
      auto store = audit::AuditStore::open(cfg.audit.state, {cfg.audit.panel_size});
      std::optional<fs::path> assets;
      if (!static_dir.empty()) assets = static_dir;
      audit::AuditServer server(*store, assets);
      const int port = server.bind(cfg.audit.host, cfg.audit.port);
      out << "audit service listening on http://" << cfg.audit.host << ":" << port << std::endl;
      g_server = &server;
      std::signal(SIGINT, stop_server);
      std::signal(SIGTERM, stop_server);
      server.listen();
      g_server = nullptr;
    } else if (*report_cmd) {
      auto store = audit::AuditStore::open(cfg.audit.state, {cfg.audit.panel_size});
      const auto report = store->report();
      if (report_format == "json") {
        print(audit::to_json(report));
      } else {
        out << audit::format_report(report);
      }
    }
    return kOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.is_io() ? kIoError : kValidationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("vulncur");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace vulncur::cli
