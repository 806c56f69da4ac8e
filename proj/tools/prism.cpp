// SPDX-License-Identifier: Apache-2.0
// prism command-line entry point.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "prism/ablation.hpp"
#include "prism/certify.hpp"
#include "prism/checkpoint.hpp"
#include "prism/complexity.hpp"
#include "prism/config.hpp"
#include "prism/errors.hpp"
#include "prism/pipeline.hpp"
#include "prism/spectral.hpp"
#include "prism/train.hpp"

namespace fs = std::filesystem;
using namespace prism;

namespace {

struct CommonOptions {
  std::string config_file;
  std::string preset = "default";
  std::vector<std::string> sets;
  std::string out = "prism_out";
};

/// Collects artifacts written under --out and finishes with manifest.txt.
class Output {
 public:
  explicit Output(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  fs::path path(const std::string& name) {
    names_.push_back(name);
    return dir_ / name;
  }

  void write(const std::string& name, const std::string& text) {
    const auto p = path(name);
    std::ofstream out(p, std::ios::binary);
    out << text;
    if (!out) throw IoError("failed writing " + p.string());
  }

  void finish() {
    std::string text;
    for (const auto& n : names_) text += n + "\n";
    std::ofstream out(dir_ / "manifest.txt", std::ios::binary);
    out << text;
    if (!out) throw IoError("failed writing manifest in " + dir_.string());
  }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

RunConfig resolve(const CommonOptions& o) {
  RunConfig c = RunConfig::preset(o.preset);
  if (!o.config_file.empty()) c.load_file(o.config_file);
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (const char* env = std::getenv("PRISM_SEED"); env && *env) c.set("seed", env);
  return c;
}

Output open_output(const CommonOptions& o, const RunConfig& c) {
  Output out(o.out);
  out.write("config.resolved", c.dump());
  return out;
}

std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

void cmd_synth(const CommonOptions& o) {
  const RunConfig c = resolve(o);
  auto out = open_output(o, c);
  const Dataset data = generate_synth(c.synth());
  const auto format = parse_dataset_format(c.get("synth_format"));
  const std::string name = format == DatasetFormat::Csv ? "data.csv" : "data.bin";
  save_dataset(data, out.path(name), format);
  out.finish();
  std::cout << "wrote " << data.size() << " samples to " << (fs::path(o.out) / name).string() << "\n";
}

template <typename T>
void train_with(const RunConfig& c, Output& out) {
  const PreparedData data = prepare_data(c);
  const TrainConfig tc = c.train();
  Model<T> model(c.model());
  const TrainReport report = train(model, data.train, data.val, data.test, tc);
  save_checkpoint(make_checkpoint(model, tc, data.standardization), out.path("checkpoint.ckpt"));
  out.write("report.json", dump(to_json(report)));
  out.write("timing.json", dump(to_json(report, true)));
  std::cout << "best epoch " << report.best_epoch << "  test accuracy " << report.test.accuracy << "  macro F1 "
            << report.test.macro_f1 << "  kappa " << report.test.kappa << "\n";
}

void cmd_train(const CommonOptions& o) {
  const RunConfig c = resolve(o);
  auto out = open_output(o, c);
  if (c.precision() == Precision::F64) {
    train_with<double>(c, out);
  } else {
    train_with<float>(c, out);
  }
  out.finish();
}

template <typename T>
Metrics eval_with(const Checkpoint& ckpt, Dataset data) {
  Model<T> model(ckpt.model);
  load_into(ckpt, model);
  check_compatible(data, ckpt.model);
  if (ckpt.standardization) ckpt.standardization->apply(data);
  return evaluate(predict(model, data), data.labels, ckpt.model.num_classes);
}

void cmd_eval(const CommonOptions& o, const std::string& checkpoint_path) {
  const RunConfig c = resolve(o);
  auto out = open_output(o, c);
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  Dataset data = source_dataset(c);
  const Metrics m =
      c.precision() == Precision::F64 ? eval_with<double>(ckpt, std::move(data)) : eval_with<float>(ckpt, std::move(data));
  const auto text = dump(to_json(m));
  out.write("metrics.json", text);
  out.finish();
  std::cout << text;
}

void cmd_complexity(const CommonOptions& o) {
  const RunConfig c = resolve(o);
  auto out = open_output(o, c);
  const auto text = dump(to_json(complexity(c.model(), c.count("complexity_batch"))));
  out.write("complexity.json", text);
  out.finish();
  std::cout << text;
}

std::vector<std::vector<double>> checkpoint_filters(const Checkpoint& ckpt) {
  Model<double> model(ckpt.model);
  load_into(ckpt, model);
  if (!model.filter_bank()) throw ConfigError("checkpoint has no filter bank (flatten frontend)");
  return learned_filters(*model.filter_bank());
}

// Long format, one row per (filter, bin); filters are channel-major.
std::string spectra_csv(const std::string& set, const std::vector<std::vector<double>>& filters,
                        std::size_t per_channel, std::size_t n) {
  std::string text;
  char buf[128];
  for (std::size_t f = 0; f < filters.size(); ++f) {
    const auto mag = half_magnitude_spectrum(filters[f], n);
    for (std::size_t b = 0; b < mag.size(); ++b) {
      std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%zu,%.6f,%.9e\n", f / per_channel, f % per_channel,
                    filters[f].size(), b, static_cast<double>(b) / static_cast<double>(n), mag[b]);
      text += set + "," + buf;
    }
  }
  return text;
}

void cmd_spectra(const CommonOptions& o, const std::string& checkpoint_path, const std::string& compare_path) {
  const RunConfig c = resolve(o);
  auto out = open_output(o, c);
  const std::size_t n = c.count("fft_points");
  const auto ckpt = load_checkpoint(checkpoint_path);
  const auto filters = checkpoint_filters(ckpt);
  auto report = diversity_report(checkpoint_path, filters, n);
  std::string csv = "filter_set,channel,filter,kernel_size,bin,frequency,magnitude\n" +
                    spectra_csv("primary", filters, ckpt.model.num_filters(), n);
  if (!compare_path.empty()) {
    const auto other_ckpt = load_checkpoint(compare_path);
    const auto other_filters = checkpoint_filters(other_ckpt);
    const auto other = diversity_report(compare_path, other_filters, n);
    compare_diversity(report, other);
    csv += spectra_csv("compare", other_filters, other_ckpt.model.num_filters(), n);
  }
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  const auto text = dump(to_json(report));
  out.write("diversity.json", text);
  out.write("spectra.csv", csv);
  out.finish();
  std::cout << "mean distance " << report.mean << "  median " << report.median;
  if (report.test) {
    std::cout << "  vs " << report.compared_mean << " / " << report.compared_median << "  p " << report.test->p_two_sided;
  }
  std::cout << "\n";
}

void cmd_ablate(const CommonOptions& o) {
  const RunConfig c = resolve(o);
  auto out = open_output(o, c);
  const PreparedData data = prepare_data(c);
  AblationSpec spec;
  spec.axis = parse_ablation_axis(c.get("ablate_axis"));
  spec.base = c.model();
  spec.train = c.train();
  spec.seeds = c.count("ablate_seeds");
  spec.jobs = c.count("jobs");
  parse_ablation_levels(spec, c.get("ablate_levels"));
  const auto rows = run_ablation(spec, data.train, data.val, data.test);
  const auto csv = ablation_csv(rows);
  out.write("ablation.csv", csv);
  out.finish();
  std::cout << csv;
  for (const auto& r : rows) {
    if (r.error) std::cerr << "level " << r.axis_level << " failed: " << *r.error << "\n";
  }
}

bool cmd_gradcheck(const CommonOptions& o) {
  const RunConfig c = resolve(o);
  auto out = open_output(o, c);
  CertifyOptions opts;
  opts.step = c.real("gradcheck_step");
  opts.tolerance = c.real("gradcheck_tolerance");
  std::vector<CertifyCase> cases;
  for (std::uint64_t s = 0; s < c.count("gradcheck_seeds"); ++s) {
    for (auto& k : default_certify_cases(c.seed() + s)) {
      k.label += ".seed" + std::to_string(c.seed() + s);
      cases.push_back(std::move(k));
    }
  }
  const auto checks = certify_gradients(cases, opts);
  out.write("gradcheck.json", dump(to_json(checks)));
  out.finish();
  double worst = 0.0;
  for (const auto& g : checks) {
    worst = std::max(worst, g.max_relative_error);
    if (!g.passed) std::cerr << "FAIL " << g.config << " " << g.group << " " << g.max_relative_error << "\n";
  }
  std::cout << checks.size() << " group checks, worst relative error " << worst << "\n";
  return all_passed(checks);
}

std::string key_listing() {
  std::string s = "\nConfig keys (key = default):\n";
  for (const auto& k : RunConfig::keys()) {
    s += "  " + k.name + " = " + (k.default_value.empty() ? "\"\"" : k.default_value) + "\n      " + k.help + "\n";
  }
  s += "\nPresets:";
  for (const auto& p : RunConfig::preset_names()) s += " " + p;
  s += "\nPRISM_SEED in the environment overrides `seed`.\n";
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PRISM: symmetric multi-resolution filter bank for time-series classification"};
  app.footer(key_listing());
  app.require_subcommand(1);

  CommonOptions opts;
  std::string checkpoint, compare;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_file, "plain-text key = value config file");
    sub->add_option("--preset", opts.preset, "named preset applied before the config file")->capture_default_str();
    sub->add_option("--set", opts.sets, "override a key, key=value (repeatable)");
    sub->add_option("--out", opts.out, "output directory")->capture_default_str();
    sub->footer(key_listing());
  };

  auto* synth = app.add_subcommand("synth", "generate the synthetic frequency-band dataset");
  auto* trn = app.add_subcommand("train", "train a model, write checkpoint and report");
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  auto* cx = app.add_subcommand("complexity", "parameter and FLOP counts");
  auto* sp = app.add_subcommand("spectra", "filter spectral diversity of a checkpoint");
  auto* ab = app.add_subcommand("ablate", "kernel-set or kernels-per-scale ablation");
  auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient certification");
  for (auto* s : {synth, trn, ev, cx, sp, ab, gc}) add_common(s);
  ev->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  sp->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  sp->add_option("--compare", compare, "second checkpoint to test against");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth) cmd_synth(opts);
    if (*trn) cmd_train(opts);
    if (*ev) cmd_eval(opts, checkpoint);
    if (*cx) cmd_complexity(opts);
    if (*sp) cmd_spectra(opts, checkpoint, compare);
    if (*ab) cmd_ablate(opts);
    if (*gc && !cmd_gradcheck(opts)) {
      std::cerr << "error: gradient certification failed\n";
      return 3;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const ShapeError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
