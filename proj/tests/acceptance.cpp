// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "oracles.hpp"
#include "prism/ablation.hpp"
#include "prism/certify.hpp"
#include "prism/checkpoint.hpp"
#include "prism/complexity.hpp"
#include "prism/config.hpp"
#include "prism/pipeline.hpp"
#include "prism/spectral.hpp"
#include "prism/stats.hpp"
#include "prism/train.hpp"

using namespace prism;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Shared experiment protocol for criteria 5-7: default preset and synth task.
RunConfig protocol() {
  RunConfig rc = RunConfig::preset("default");
  rc.set("seed", "42");
  return rc;
}

Outcome gradient_certification() {
  const auto t0 = Clock::now();
  std::vector<CertifyCase> cases;
  for (std::uint64_t s = 0; s < 3; ++s)
    for (auto& c : default_certify_cases(100 + s)) cases.push_back(c);
  const auto checks = certify_gradients(cases);
  double worst = 0;
  for (const auto& g : checks) worst = std::max(worst, g.max_relative_error);
  const double secs = seconds_since(t0);
  const bool ok = all_passed(checks) && worst < 1e-4 && cases.size() >= 5 && secs < 60;
  return {ok, std::to_string(cases.size()) + " configs, " + std::to_string(checks.size()) +
                  " groups, worst rel err " + fmt("%.2e", worst) + ", " + fmt("%.1fs", secs)};
}

Outcome symmetry_linear_phase() {
  const auto t0 = Clock::now();
  RunConfig rc = protocol();
  rc.set("max_steps", "200");
  const auto data = prepare_data(rc);
  Model<float> model(rc.model());
  const auto report = train(model, data.train, data.val, data.test, rc.train());
  const auto& bank = *model.filter_bank();
  bool palindromic = true;
  double worst = 0;
  for (std::size_t c = 0; c < bank.config().channels; ++c) {
    for (std::size_t f = 0; f < bank.num_filters(); ++f) {
      for (const auto& k : {bank.kernel(c, f), bank.normalized_kernel(c, f)}) {
        for (std::size_t j = 0; j < k.size(); ++j) palindromic = palindromic && k[j] == k[k.size() - 1 - j];
      }
      const auto nk = bank.normalized_kernel(c, f);
      const std::vector<double> kd(nk.begin(), nk.end());
      worst = std::max(worst, linear_phase_residual(kd, 256));
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = report.steps == 200 && palindromic && worst < 1e-6 && secs < 120;
  return {ok, std::to_string(report.steps) + " steps, palindromic=" + (palindromic ? "yes" : "no") +
                  ", max |Im| " + fmt("%.2e", worst) + ", " + fmt("%.1fs", secs)};
}

Outcome forward_oracles() {
  Rng rng(2024);
  std::size_t bank_ok = 0, dw_ok = 0, pw_ok = 0;
  const std::size_t cases = 100;
  for (std::size_t i = 0; i < cases; ++i) {
    auto cfg = oracle::random_config(rng, 64, false);
    Model<double> model(cfg);
    const auto x = rng_normal<double>(rng, 0, 1, {1 + rng.index(3), cfg.channels, cfg.length});
    auto& bank = *model.filter_bank();
    std::vector<std::vector<double>> kernels;
    for (std::size_t c = 0; c < cfg.channels; ++c)
      for (std::size_t f = 0; f < bank.num_filters(); ++f)
        kernels.push_back(oracle::kernel_from_weights(bank.weights(c, f).value.vec(), bank.filters()[f].kernel_size,
                                                      cfg.symmetric, cfg.eps_norm));
    const auto h = bank.forward(x);
    bank_ok += h == oracle::bank_forward(x, kernels, bank.num_filters());

    const std::size_t F = bank.num_filters(), T = cfg.length;
    Tensor<double> h0({F, T});
    for (std::size_t k = 0; k < F * T; ++k) h0[k] = h[k];
    const auto& V = model.embedding()->depthwise(0).value;
    const auto z = depthwise_patch_conv(h0, V);
    dw_ok += z == oracle::depthwise(h0, V);
    auto& emb = *model.embedding();
    const auto bias = rng_normal<double>(rng, 0, 1, {cfg.embed_dim});
    pw_ok += pointwise_fuse(z, emb.pointwise(0).value, bias) == oracle::pointwise(z, emb.pointwise(0).value, bias);
  }
  const bool ok = bank_ok == cases && dw_ok == cases && pw_ok == cases;
  return {ok, "exact matches bank " + std::to_string(bank_ok) + "/100, depthwise " + std::to_string(dw_ok) +
                  "/100, pointwise " + std::to_string(pw_ok) + "/100"};
}

Outcome complexity_oracle() {
  Rng rng(77);
  std::size_t param_ok = 0;
  for (int i = 0; i < 100; ++i) {
    const auto cfg = oracle::random_config(rng, 64, true);
    Model<float> m(cfg);
    param_ok += count_params(cfg) == count_elements(m.params());
  }
  std::size_t flop_ok = 0;
  double max_logit_diff = 0;
  for (int i = 0; i < 10; ++i) {
    auto cfg = oracle::random_config(rng, 24, i == 9);
    Model<double> m(cfg);
    const std::size_t B = 1 + rng.index(3);
    const auto x = rng_normal<double>(rng, 0, 1, {B, cfg.channels, cfg.length});
    const auto counted = oracle::counted_forward(m, x);
    const auto logits = m.forward(x);
    for (std::size_t k = 0; k < logits.size(); ++k)
      max_logit_diff = std::max(max_logit_diff, std::abs(logits[k] - counted.logits[k]));
    flop_ok += counted.flops == count_flops(cfg, B);
  }
  const auto isruc = complexity(RunConfig::preset("isruc-small").model(), 1);
  const double params = static_cast<double>(isruc.total.params);
  const double mflops = static_cast<double>(isruc.total.flops) / 1e6;
  const bool within = params >= 3817 / 2.0 && params <= 3817 * 2.0 && mflops >= 8.3 / 2 && mflops <= 8.3 * 2;
  const bool ok = param_ok == 100 && flop_ok == 10 && max_logit_diff < 1e-9 && within;
  return {ok, "params " + std::to_string(param_ok) + "/100, flops " + std::to_string(flop_ok) +
                  "/10, isruc-small " + std::to_string(isruc.total.params) + " params / " + fmt("%.3f", mflops) +
                  " MFLOPs (ref 3817 / 8.3)"};
}

Outcome synthetic_classification() {
  const auto t0 = Clock::now();
  RunConfig rc = protocol();
  const auto data = prepare_data(rc);
  Model<float> prism_model(rc.model());
  const auto rp = train(prism_model, data.train, data.val, data.test, rc.train());
  RunConfig flat = rc;
  flat.set("frontend", "flatten");
  Model<float> flat_model(flat.model());
  const auto rf = train(flat_model, data.train, data.val, data.test, flat.train());
  const double a = 100 * rp.test.accuracy, b = 100 * rf.test.accuracy;
  const double secs = seconds_since(t0);
  const bool ok = a >= 90 && a - b >= 15 && secs < 600;
  return {ok, "N=" + std::to_string(data.train.size() + data.val.size() + data.test.size()) + ", PRISM-Linear " +
                  fmt("%.2f%%", a) + ", flattened linear " + fmt("%.2f%%", b) + ", margin " +
                  fmt("%.2f pts", a - b) + ", " + fmt("%.1fs", secs)};
}

Outcome ablation_trend() {
  const auto t0 = Clock::now();
  RunConfig rc = protocol();
  const auto data = prepare_data(rc);
  AblationSpec spec;
  spec.base = rc.model();
  spec.train = rc.train();
  spec.seeds = 3;
  parse_ablation_levels(spec, "15;15,31,51");
  const auto rows = run_ablation(spec, data.train, data.val, data.test);
  const double secs = seconds_since(t0);
  const bool errors = rows[0].error || rows[1].error;
  const bool ok = !errors && rows[1].accuracy > rows[0].accuracy && secs < 1200;
  return {ok, "mean acc {15} " + fmt("%.2f%%", 100 * rows[0].accuracy) + ", {15,31,51} " +
                  fmt("%.2f%%", 100 * rows[1].accuracy) + ", " + fmt("%.1fs", secs)};
}

Outcome diversity_property() {
  const auto t0 = Clock::now();
  RunConfig rc = protocol();
  const auto data = prepare_data(rc);
  std::vector<double> pooled[2];
  for (int sym = 0; sym < 2; ++sym) {
    for (std::uint64_t s = 0; s < 3; ++s) {
      RunConfig r = rc;
      r.set("symmetric", sym == 0 ? "true" : "false");
      ModelConfig mc = r.model();
      mc.seed += s;
      TrainConfig tc = r.train();
      tc.seed += s;
      Model<float> model(mc);
      (void)train(model, data.train, data.val, data.test, tc);
      const auto d = pairwise_fft_cosine(learned_filters(*model.filter_bank()), 256);
      pooled[sym].insert(pooled[sym].end(), d.distances.begin(), d.distances.end());
    }
  }
  const double ms = mean_of(pooled[0]), ma = mean_of(pooled[1]);
  const auto test = mann_whitney_u(pooled[0], pooled[1]);
  const double secs = seconds_since(t0);
  const bool ok = ms > ma && test.p_two_sided < 0.05;
  return {ok, "mean distance symmetric " + fmt("%.4f", ms) + " vs asymmetric " + fmt("%.4f", ma) + ", MWU p " +
                  fmt("%.3e", test.p_two_sided) + " (" + std::to_string(pooled[0].size()) + " vs " +
                  std::to_string(pooled[1].size()) + " pairs), " + fmt("%.1fs", secs)};
}

Outcome statistics_oracle() {
  Rng rng(31337);
  std::size_t ok_cases = 0;
  const std::size_t cases = 200;
  for (std::size_t i = 0; i < cases; ++i) {
    std::size_t na = 1 + rng.index(10), nb = 1 + rng.index(10);
    while (na * nb > 100) nb = 1 + rng.index(10);
    const bool ties = rng.index(2) == 0;
    std::vector<double> a(na), b(nb);
    for (double& v : a) v = ties ? static_cast<double>(rng.index(5)) : rng.normal(0, 1);
    for (double& v : b) v = ties ? static_cast<double>(rng.index(5)) : rng.normal(0.3, 1);
    const auto ref = oracle::enumerate_mwu(a, b);
    const auto got = mann_whitney_u(a, b);
    bool all_same = true;
    for (double v : a) all_same = all_same && v == a[0];
    for (double v : b) all_same = all_same && v == a[0];
    const double ref_two = all_same ? 1.0 : std::min(1.0, 2 * std::min(ref.p_less, ref.p_greater));
    ok_cases += got.exact && got.u == ref.u && std::abs(got.p_less - (all_same ? 1.0 : ref.p_less)) < 1e-12 &&
                std::abs(got.p_greater - (all_same ? 1.0 : ref.p_greater)) < 1e-12 &&
                std::abs(got.p_two_sided - ref_two) < 1e-12;
  }
  const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  const auto r = mann_whitney_u(a, b);
  const bool hand = r.u == 0.0 && std::abs(r.p_less - 1.0 / 20) < 1e-15;
  return {ok_cases == cases && hand, "enumeration matches " + std::to_string(ok_cases) + "/200, [1,2,3] vs [4,5,6] U=" +
                                         fmt("%g", r.u) + " p_less=" + fmt("%.6f", r.p_less)};
}

Outcome persistence(const fs::path& work) {
  Rng rng(99);
  std::size_t ok_models = 0;
  for (int i = 0; i < 10; ++i) {
    auto cfg = oracle::random_config(rng, 64, true);
    Model<float> m(cfg);
    // Perturb away from init so every param carries arbitrary bits.
    for (auto* p : m.params())
      for (float& v : p->value.data()) v += static_cast<float>(rng.normal(0, 0.1));
    SynthSpec s;
    s.channels = cfg.channels;
    s.length = cfg.length;
    s.per_class = 5;
    s.bands.resize(cfg.num_classes);
    for (std::size_t c = 0; c < cfg.num_classes; ++c) s.bands[c] = {0.02 + 0.09 * c, 0.02 + 0.09 * c + 0.05};
    const auto data = generate_synth(s);
    const auto path = work / ("model" + std::to_string(i) + ".ckpt");
    save_checkpoint(make_checkpoint(m), path);
    const auto loaded = load_checkpoint(path);
    Model<float> back(loaded.model);
    load_into(loaded, back);
    const auto all = std::vector<std::size_t>(data.size());
    std::vector<std::size_t> idx(data.size());
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
    const auto x = data.batch<float>(idx);
    const bool same_logits = m.forward(x) == back.forward(x);
    const bool same_pred = predict(m, data) == predict(back, data);
    const bool same_params = back.snapshot() == m.snapshot() && loaded.model == cfg;
    ok_models += same_logits && same_pred && same_params;
  }
  SynthSpec s;
  s.per_class = 25;
  auto d = generate_synth(s);
  d.channel_names = {"ax", "ay", "az"};
  bool roundtrip = true;
  for (auto fmt_ : {DatasetFormat::Csv, DatasetFormat::Binary}) {
    const auto path = work / (fmt_ == DatasetFormat::Csv ? "synth.csv" : "synth.bin");
    save_dataset(d, path, fmt_);
    const auto back = load_dataset(path, fmt_, s.bands.size());
    roundtrip = roundtrip && back.samples == d.samples && back.labels == d.labels &&
                back.num_classes == d.num_classes;
  }
  return {ok_models == 10 && roundtrip, "bit-identical reload " + std::to_string(ok_models) +
                                            "/10 models, dataset CSV+binary round trip " +
                                            (roundtrip ? "exact" : "MISMATCH")};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism(const std::string& cli, const fs::path& work) {
  if (cli.empty()) return {false, "no --cli given"};
  std::string outs[2];
  for (int run = 0; run < 2; ++run) {
    const auto dir = work / ("train_run" + std::to_string(run));
    fs::remove_all(dir);
    const std::string cmd = "\"" + cli + "\" train --preset default --set epochs=8 --set seed=7 --out \"" +
                            dir.string() + "\" > \"" + (work / "train.log").string() + "\" 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, "prism train exited nonzero: " + slurp(work / "train.log")};
    outs[run] = dir.string();
  }
  const auto r0 = slurp(fs::path(outs[0]) / "report.json"), r1 = slurp(fs::path(outs[1]) / "report.json");
  const auto c0 = slurp(fs::path(outs[0]) / "checkpoint.ckpt"), c1 = slurp(fs::path(outs[1]) / "checkpoint.ckpt");
  const bool ok = !r0.empty() && !c0.empty() && r0 == r1 && c0 == c1;
  return {ok, "report.json " + std::to_string(r0.size()) + " bytes " + (r0 == r1 ? "identical" : "DIFFER") +
                  ", checkpoint " + std::to_string(c0.size()) + " bytes " + (c0 == c1 ? "identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PRISM acceptance suite"};
  std::string cli, workdir = "acceptance_work";
  std::vector<int> only;
  app.add_option("--cli", cli, "path to the prism executable");
  app.add_option("--workdir", workdir, "scratch directory");
  app.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(workdir);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient certification", gradient_certification},
      {"symmetry and linear phase", symmetry_linear_phase},
      {"forward oracle equivalence", forward_oracles},
      {"complexity oracle", complexity_oracle},
      {"synthetic classification", synthetic_classification},
      {"ablation trend", ablation_trend},
      {"diversity property", diversity_property},
      {"statistics oracle", statistics_oracle},
      {"persistence", [&] { return persistence(workdir); }},
      {"determinism", [&] { return determinism(cli, workdir); }},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  std::ofstream summary(fs::path(workdir) / "acceptance.txt");
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    const std::string line = std::string(o.pass ? "PASS" : "FAIL") + " criterion " + std::to_string(id) + " (" +
                             criteria[i].first + "): " + o.detail;
    std::cout << line << std::endl;
    summary << line << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
