// Command-line front end: validate/build model specs, run split schemes,
// convert data and render result tables.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dynnet/builder/builder.hpp"
#include "dynnet/builder/weights.hpp"
#include "dynnet/core/error.hpp"
#include "dynnet/dataio/container.hpp"
#include "dynnet/dataio/csv_import.hpp"
#include "dynnet/dataio/synth.hpp"
#include "dynnet/evaluation/experiment.hpp"

namespace fs = std::filesystem;
using namespace dynnet;

namespace {

constexpr const char* kDataDirEnv = "DYNNET_DATA_DIR";
constexpr const char* kDefaultDataFile = "d2a.eegt";

struct RunConfig {
  std::string data;
  std::string method;
  std::string spec = "builtin";
  std::string scheme = "single";
  std::size_t reps = 10;
  std::uint64_t seed = 0;
  std::size_t epochs = 500;
  std::size_t batch_size = 32;
  double lr = 1e-3;
  std::size_t threads = 1;
  std::string out = "results";
  bool overwrite = false;
  bool save_models = true;
  double window_start = 2.0;
  double window_end = 6.0;
  std::string resample = "auto";
  double bandpass_lo = 0.0;
  double bandpass_hi = 0.0;
  int bandpass_order = 3;
  double ema_decay = 0.0;
  std::string loso_test = "all";
  std::size_t fbcsp_m = 2;
  std::size_t fbcsp_k = 4;
  int fbcsp_order = 3;
};

builder::ModelSpec load_spec(const std::string& path) {
  if (path == "builtin") return builder::eegnet_spec();
  if (!fs::exists(path)) throw ConfigError("spec file not found: " + path);
  return builder::load_model_spec(path);
}

void print_violations(const std::vector<builder::Violation>& v) {
  for (const auto& x : v) std::cerr << "error: " << builder::to_string(x) << '\n';
}

int cmd_validate(const std::string& spec_path) {
  const auto spec = load_spec(spec_path);
  const auto violations = builder::validate_spec(spec);
  if (!violations.empty()) {
    print_violations(violations);
    return 2;
  }
  const auto built = builder::build_model<float>(spec, 0);
  std::cout << "ok, flatten=" << built.report.flatten_dim << ", params=" << built.report.parameter_count << '\n';
  return 0;
}

int cmd_build(const std::string& spec_path, std::uint64_t seed, const std::string& out) {
  const auto spec = load_spec(spec_path);
  const auto violations = builder::validate_spec(spec);
  if (!violations.empty()) {
    print_violations(violations);
    return 2;
  }
  const auto built = builder::build_model<float>(spec, seed);
  for (std::size_t i = 0; i < built.report.layers.size(); ++i) {
    const auto& l = built.report.layers[i];
    std::cout << i << '\t' << l.description << '\t' << nn::to_string(l.input) << " -> "
              << nn::to_string(l.output) << '\n';
  }
  std::cout << "flatten=" << built.report.flatten_dim << " params=" << built.report.parameter_count << '\n';
  if (!out.empty()) {
    builder::save_weights(spec, built.model, out);
    std::cout << "wrote initial weights to " << out << '\n';
  }
  return 0;
}

std::string resolve_data(const std::string& given) {
  const char* dir = std::getenv(kDataDirEnv);
  fs::path p = given;
  if (p.empty()) {
    if (!dir) throw ConfigError(std::string("no --data given and ") + kDataDirEnv + " is not set");
    p = fs::path(dir) / kDefaultDataFile;
  } else if (p.is_relative() && !fs::exists(p) && dir) {
    p = fs::path(dir) / p;
  }
  if (!fs::is_regular_file(p)) throw ConfigError("data file not found: " + p.string());
  return fs::absolute(p).string();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string manifest(const RunConfig& c) {
  std::ostringstream m;
  m << "# Resolved configuration; rerun with: dynnet run --config <this file>\n"
    << "# The trial window is a convention ([2, 6) s after onset by default), not a dataset fact.\n"
    << "data=" << c.data << "\nmethod=" << c.method << "\nspec=" << c.spec << "\nscheme=" << c.scheme
    << "\nreps=" << c.reps << "\nseed=" << c.seed << "\nepochs=" << c.epochs
    << "\nbatch-size=" << c.batch_size << "\nlr=" << fmt(c.lr) << "\nthreads=" << c.threads
    << "\nout=" << c.out << "\nsave-models=" << (c.save_models ? "true" : "false")
    << "\nwindow-start=" << fmt(c.window_start) << "\nwindow-end=" << fmt(c.window_end)
    << "\nresample=" << c.resample << "\nbandpass-lo=" << fmt(c.bandpass_lo)
    << "\nbandpass-hi=" << fmt(c.bandpass_hi) << "\nbandpass-order=" << c.bandpass_order
    << "\nema-decay=" << fmt(c.ema_decay) << "\nloso-test=" << c.loso_test << "\nfbcsp-m=" << c.fbcsp_m
    << "\nfbcsp-k=" << c.fbcsp_k << "\nfbcsp-order=" << c.fbcsp_order << '\n';
  return m.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw DataError(DataErrorCode::io, "cannot write " + path.string());
}

eval::Preprocess make_preprocess(RunConfig& c) {
  eval::Preprocess p;
  p.window = std::pair{c.window_start, c.window_end};
  if (c.resample == "auto") c.resample = c.method == "eegnet" ? "128" : "0";
  double hz = 0.0;
  try {
    std::size_t used = 0;
    hz = std::stod(c.resample, &used);
    if (used != c.resample.size()) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw ConfigError("--resample must be 'auto' or a rate in Hz, got '" + c.resample + "'");
  }
  if (hz < 0) throw ConfigError("--resample must be non-negative");
  if (hz > 0) p.resample_hz = hz;
  if (c.bandpass_lo > 0 || c.bandpass_hi > 0) p.bandpass = std::pair{c.bandpass_lo, c.bandpass_hi};
  p.bandpass_order = c.bandpass_order;
  if (c.ema_decay > 0) p.ema_decay = c.ema_decay;
  return p;
}

int cmd_run(RunConfig c) {
  // Everything that can fail on bad input is resolved before any output.
  if (c.reps == 0) throw ConfigError("--reps must be positive");
  if (c.threads == 0) throw ConfigError("--threads must be positive");
  if (c.loso_test != "all" && c.loso_test != "test") throw ConfigError("--loso-test must be 'all' or 'test'");
  const eval::Scheme scheme = eval::parse_scheme(c.scheme);
  c.data = resolve_data(c.data);
  const fs::path out = fs::absolute(c.out);
  c.out = out.string();
  if (fs::exists(out) && !c.overwrite) {
    throw ConfigError("output directory " + out.string() + " exists (use --overwrite)");
  }

  eval::Method method;
  const eval::Preprocess prep = make_preprocess(c);
  if (c.method == "eegnet") {
    eval::EegnetMethod m;
    if (c.spec != "builtin") c.spec = fs::absolute(c.spec).string();
    m.spec = load_spec(c.spec);
    const auto violations = builder::validate_spec(m.spec);
    if (!violations.empty()) {
      print_violations(violations);
      return 2;
    }
    m.train.epochs = c.epochs;
    m.train.batch_size = c.batch_size;
    m.train.adam.learning_rate = c.lr;
    m.preprocess = prep;
    method = m;
  } else if (c.method == "fbcsp") {
    eval::FbcspMethod m;
    m.config.m = c.fbcsp_m;
    m.config.k = c.fbcsp_k;
    m.config.order = c.fbcsp_order;
    m.preprocess = prep;
    method = m;
  } else {
    throw ConfigError("--method must be 'eegnet' or 'fbcsp', got '" + c.method + "'");
  }

  const data::TrialSet set = data::read_container(c.data);
  eval::SplitOptions so;
  so.test_session_only = c.loso_test == "test";
  so.seed = c.seed;
  const eval::SplitPlan plan = eval::make_splits(scheme, set, so);

  const fs::path partial = out.string() + ".partial";
  fs::remove_all(partial);
  fs::create_directories(partial);
  try {
    std::ostringstream log;
    eval::ExperimentOptions opt;
    opt.repetitions = c.reps;
    opt.seed = c.seed;
    opt.threads = c.threads;
    opt.log = [&](const std::string& line) {
      log << line << '\n';
      std::cerr << line << '\n';
    };
    if (c.save_models) {
      fs::create_directories(partial / "models");
      opt.save_model = [&](std::size_t fold, std::size_t rep, const std::string& ext, const std::string& bytes) {
        write_file(partial / "models" / ("fold" + std::to_string(fold) + "_rep" + std::to_string(rep) + "." + ext),
                   bytes);
      };
    }
    eval::ResultsTable table;
    table.columns.push_back(eval::run_experiment(method, set, plan, opt));
    std::ostringstream note;
    note << "Trial window [" << c.window_start << ", " << c.window_end
         << ") s after onset (a convention, not taken from the recordings).";
    table.notes.push_back(note.str());

    write_file(partial / "results.csv", eval::emit_table(table, eval::TableFormat::csv));
    write_file(partial / "results.md", eval::emit_table(table, eval::TableFormat::markdown));
    eval::save(table, partial / "results.rslt");
    write_file(partial / "log.txt", log.str());
    write_file(partial / "manifest.cfg", manifest(c));
    fs::remove_all(out);
    fs::rename(partial, out);
    std::cout << eval::emit_table(table, eval::TableFormat::markdown);
  } catch (...) {
    fs::remove_all(partial);
    throw;
  }
  return 0;
}

int cmd_convert(const std::string& manifest_path, double fs_hz, const std::string& out) {
  const auto set = data::import_csv_manifest(manifest_path, fs_hz);
  data::write_container(set, out);
  std::cout << "wrote " << set.n_trials() << " trials (" << set.n_channels() << " channels x "
            << set.n_samples() << " samples at " << set.fs << " Hz) to " << out << '\n';
  return 0;
}

int cmd_synth(data::SynthConfig c, std::size_t classes, const std::string& out) {
  const std::vector<std::pair<double, double>> bands{{9, 11}, {17, 19}, {25, 27}, {33, 35}};
  if (classes < 2 || classes > 4) throw ConfigError("--classes must be 2, 3 or 4");
  c.class_bands.assign(bands.begin(), bands.begin() + static_cast<std::ptrdiff_t>(classes));
  c.class_channels.clear();
  for (std::size_t k = 0; k < classes; ++k) c.class_channels.push_back(k);
  const auto set = data::synth_mi(c);
  data::write_container(set, out);
  std::cout << "wrote " << set.n_trials() << " synthetic trials to " << out << '\n';
  return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& format,
               const std::vector<std::string>& pairs, const std::string& out) {
  eval::ResultsTable table;
  for (const auto& path : inputs) {
    const auto part = eval::load_results(path);
    table.columns.insert(table.columns.end(), part.columns.begin(), part.columns.end());
    table.notes.insert(table.notes.end(), part.notes.begin(), part.notes.end());
  }
  std::sort(table.notes.begin(), table.notes.end());
  table.notes.erase(std::unique(table.notes.begin(), table.notes.end()), table.notes.end());
  const auto find = [&](const std::string& name) {
    for (std::size_t i = 0; i < table.columns.size(); ++i)
      if (table.columns[i].name == name) return i;
    throw ConfigError("no column named '" + name + "' in the given results");
  };
  for (const auto& p : pairs) {
    const auto colon = p.find(':');
    if (colon == std::string::npos) throw ConfigError("--pair expects A:B, got '" + p + "'");
    eval::mark_significance(table, find(p.substr(0, colon)), find(p.substr(colon + 1)));
  }
  const auto text = eval::emit_table(table, format == "csv" ? eval::TableFormat::csv : eval::TableFormat::markdown);
  if (out.empty()) {
    std::cout << text;
  } else {
    write_file(out, text);
  }
  return 0;
}

// "run --config FILE ..." becomes "run --key value ... (remaining args)"
// so that later command-line flags override the file.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  const auto run = std::find(args.begin(), args.end(), "run");
  std::string file;
  for (auto it = run; it != args.end(); ++it) {
    if (*it == "--config" && it + 1 != args.end()) {
      file = *(it + 1);
      args.erase(it, it + 2);
      break;
    }
    if (it->rfind("--config=", 0) == 0) {
      file = it->substr(9);
      args.erase(it);
      break;
    }
  }
  if (file.empty()) {
    std::reverse(args.begin(), args.end());  // CLI11 takes arguments last-first
    return args;
  }
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file);
  std::vector<std::string> injected;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(file + ":" + std::to_string(no) + ": expected key=value");
    const auto trim = [](std::string v) {
      const auto b = v.find_first_not_of(" \t\r"), e = v.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key == "overwrite") {
      if (value == "true") injected.push_back("--overwrite");
      continue;
    }
    injected.push_back("--" + key);
    injected.push_back(value);
  }
  const auto at = std::find(args.begin(), args.end(), "run") + 1;
  args.insert(at, injected.begin(), injected.end());
  std::reverse(args.begin(), args.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynnet: configurable EEG motor-imagery networks and an FBCSP baseline"};
  app.require_subcommand(1);

  std::string spec_path = "builtin";
  auto* validate = app.add_subcommand("validate", "Check a model spec and report its flatten width and size");
  validate->add_option("--spec", spec_path, "Spec file ('builtin' for the reference network)")->required();

  std::uint64_t build_seed = 0;
  std::string build_out;
  auto* build = app.add_subcommand("build", "Build a model from a spec and print its layers");
  build->add_option("--spec", spec_path, "Spec file")->required();
  build->add_option("--seed", build_seed, "Initialization seed")->capture_default_str();
  build->add_option("--out", build_out, "Write the initial weights here");

  RunConfig rc;
  auto* run = app.add_subcommand("run", "Train and evaluate a method under a split scheme");
  std::string config_file;
  run->add_option("--config", config_file, "key=value file; flags given on the command line win");
  run->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  run->add_option("--data", rc.data, std::string("EEGT container (default $") + kDataDirEnv + "/" + kDefaultDataFile + ")");
  run->add_option("--method", rc.method, "eegnet or fbcsp")->required()->check(CLI::IsMember({"eegnet", "fbcsp"}));
  run->add_option("--spec", rc.spec, "Model spec for eegnet")->capture_default_str();
  run->add_option("--scheme", rc.scheme, "single, mixed, loso or lawhern")->capture_default_str();
  run->add_option("--reps", rc.reps, "Repetitions")->capture_default_str();
  run->add_option("--seed", rc.seed, "Base seed")->capture_default_str();
  run->add_option("--epochs", rc.epochs, "Training epochs")->capture_default_str();
  run->add_option("--batch-size", rc.batch_size, "Mini-batch size")->capture_default_str();
  run->add_option("--lr", rc.lr, "Adam learning rate")->capture_default_str();
  run->add_option("--threads", rc.threads, "Parallel fold/repetition workers")->capture_default_str();
  run->add_option("--out", rc.out, "Output directory")->capture_default_str();
  run->add_flag("--overwrite", rc.overwrite, "Replace an existing output directory");
  run->add_option("--save-models", rc.save_models, "Write fitted models")->capture_default_str();
  run->add_option("--window-start", rc.window_start, "Window start (s)")->capture_default_str();
  run->add_option("--window-end", rc.window_end, "Window end (s)")->capture_default_str();
  run->add_option("--resample", rc.resample, "Target rate in Hz, 0 for none, auto: 128 for eegnet")->capture_default_str();
  run->add_option("--bandpass-lo", rc.bandpass_lo, "Band-pass low edge (Hz), 0 disables")->capture_default_str();
  run->add_option("--bandpass-hi", rc.bandpass_hi, "Band-pass high edge (Hz)")->capture_default_str();
  run->add_option("--bandpass-order", rc.bandpass_order, "Butterworth order")->capture_default_str();
  run->add_option("--ema-decay", rc.ema_decay, "EMA standardization decay, 0 disables")->capture_default_str();
  run->add_option("--loso-test", rc.loso_test, "Held-out trials for loso/lawhern: all or test")->capture_default_str();
  run->add_option("--fbcsp-m", rc.fbcsp_m, "CSP filter pairs per band")->capture_default_str();
  run->add_option("--fbcsp-k", rc.fbcsp_k, "Features selected by mutual information")->capture_default_str();
  run->add_option("--fbcsp-order", rc.fbcsp_order, "Filter-bank Butterworth order")->capture_default_str();

  std::string csv_manifest, convert_out;
  double convert_fs = 250.0;
  auto* convert = app.add_subcommand("convert", "Pack a CSV manifest of trials into an EEGT container");
  convert->add_option("--manifest", csv_manifest, "CSV with columns file,label,subject,session")->required();
  convert->add_option("--fs", convert_fs, "Sampling rate (Hz)")->capture_default_str();
  convert->add_option("--out", convert_out, "Container to write")->required();

  data::SynthConfig sc;
  std::size_t synth_classes = 4;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Write a synthetic band-power data set");
  synth->add_option("--out", synth_out, "Container to write")->required();
  synth->add_option("--classes", synth_classes, "2 to 4")->capture_default_str();
  synth->add_option("--subjects", sc.subjects, "Subjects")->capture_default_str();
  synth->add_option("--trials-per-class", sc.trials_per_class, "Per subject and session")->capture_default_str();
  synth->add_option("--channels", sc.channels, "Channels")->capture_default_str();
  synth->add_option("--samples", sc.samples, "Samples per trial")->capture_default_str();
  synth->add_option("--fs", sc.fs, "Sampling rate (Hz)")->capture_default_str();
  synth->add_option("--snr", sc.snr, "Class oscillation rms relative to the background")->capture_default_str();
  synth->add_option("--seed", sc.seed, "Seed")->capture_default_str();

  std::vector<std::string> report_in, pairs;
  std::string format = "markdown", report_out;
  auto* report = app.add_subcommand("report", "Render one or more results files as a table");
  report->add_option("--results", report_in, "results.rslt files")->required();
  report->add_option("--format", format, "csv or markdown")->check(CLI::IsMember({"csv", "markdown"}))->capture_default_str();
  report->add_option("--pair", pairs, "A:B marks column A by a paired t test against B");
  report->add_option("--out", report_out, "Write here instead of stdout");

  try {
    app.parse(expand_config(argc, argv));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const CLI::ParseError& e) {
    const int rc_parse = app.exit(e);
    return rc_parse == 0 ? 0 : 2;
  }

  try {
    if (*validate) return cmd_validate(spec_path);
    if (*build) return cmd_build(spec_path, build_seed, build_out);
    if (*run) return cmd_run(rc);
    if (*convert) return cmd_convert(csv_manifest, convert_fs, convert_out);
    if (*synth) return cmd_synth(sc, synth_classes, synth_out);
    if (*report) return cmd_report(report_in, format, pairs, report_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
