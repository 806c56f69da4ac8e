// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "prism/ablation.hpp"
#include "prism/checkpoint.hpp"
#include "prism/complexity.hpp"
#include "prism/config.hpp"
#include "prism/errors.hpp"
#include "prism/fft.hpp"
#include "prism/pipeline.hpp"
#include "prism/train.hpp"

using namespace prism;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("prism_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

SynthSpec small_spec() {
  SynthSpec s;
  s.channels = 2;
  s.length = 64;
  s.per_class = 10;
  return s;
}

ModelConfig tiny_model() {
  ModelConfig c;
  c.channels = 2;
  c.length = 32;
  c.kernel_sizes = {3, 5};
  c.patch_length = 4;
  c.embed_dim = 6;
  c.num_classes = 3;
  return c;
}

}  // namespace

TEST_CASE("synthetic generation") {
  SynthSpec s = small_spec();
  s.per_class = 50;
  const auto d = generate_synth(s);
  CHECK(d.size() == 200);
  std::vector<int> counts(4, 0);
  for (int l : d.labels) ++counts[l];
  for (int c : counts) CHECK(c == 50);
  CHECK(generate_synth(s) == d);
  s.seed = 8;
  CHECK_FALSE(generate_synth(s) == d);

  s.bands = {{0.2, 0.1}};
  CHECK_THROWS_AS(generate_synth(s), ConfigError);
  s.bands = {{0.1, 0.6}};
  CHECK_THROWS_AS(generate_synth(s), ConfigError);
  s.bands = {{0.1, 0.3}, {0.2, 0.4}};
  CHECK_THROWS_AS(generate_synth(s), ConfigError);
  s.allow_overlap = true;
  CHECK_NOTHROW(generate_synth(s));
}

TEST_CASE("noise-free samples peak inside their class band") {
  SynthSpec s = small_spec();
  s.length = 256;
  s.noise_std = 0.0;
  s.amplitude_lo = 1.0;
  s.amplitude_hi = 1.0 + 1e-9;
  const auto d = generate_synth(s);
  for (std::size_t n = 0; n < d.size(); ++n) {
    for (std::size_t c = 0; c < 2; ++c) {
      const float* x = d.samples.data().data() + (n * 2 + c) * 256;
      std::vector<double> xs(x, x + 256);
      const auto spec = dft(xs, 256);
      std::size_t best = 1;
      for (std::size_t k = 1; k <= 128; ++k)
        if (std::abs(spec[k]) > std::abs(spec[best])) best = k;
      const auto& band = s.bands[d.labels[n]];
      const double f = static_cast<double>(best) / 256.0;
      CHECK(f >= band.lo - 1.0 / 256);
      CHECK(f <= band.hi + 1.0 / 256);
    }
  }
}

TEST_CASE("standardization") {
  auto d = generate_synth(small_spec());
  const auto stats = Standardization::fit(d);
  stats.apply(d);
  const auto again = Standardization::fit(d);
  for (std::size_t c = 0; c < 2; ++c) {
    CHECK(std::abs(again.mean[c]) < 1e-6);
    CHECK(std::abs(again.std[c] - 1.0) < 1e-4);
  }
  auto twice = d;
  again.apply(twice);
  for (std::size_t i = 0; i < d.samples.size(); ++i) CHECK(std::abs(twice.samples[i] - d.samples[i]) < 1e-5);

  Dataset flat{Tensor<float>({2, 1, 3}, 5.0f), {0, 1}, 2, {}};
  Standardization::fit(flat).apply(flat);
  for (float v : flat.samples.data()) CHECK(v == 0.0f);
}

TEST_CASE("splits partition and are reproducible") {
  const auto s = split_indices(103, 0.2, 0.2, 9);
  CHECK(s.test.size() == 20);
  CHECK(s.val.size() == 20);
  CHECK(s.train.size() == 63);
  std::vector<int> seen(103, 0);
  for (const auto* part : {&s.train, &s.val, &s.test})
    for (auto i : *part) ++seen[i];
  for (int v : seen) CHECK(v == 1);
  const auto again = split_indices(103, 0.2, 0.2, 9);
  CHECK(again.train == s.train);
  CHECK_FALSE(split_indices(103, 0.2, 0.2, 10).train == s.train);
  CHECK_THROWS_AS(split_indices(10, 0.5, 0.5, 1), ConfigError);
}

TEST_CASE("dataset file round trips") {
  const auto dir = temp_dir("io");
  auto d = generate_synth(small_spec());
  d.channel_names = {"x", "y"};
  for (auto fmt : {DatasetFormat::Csv, DatasetFormat::Binary}) {
    const auto path = dir / (fmt == DatasetFormat::Csv ? "d.csv" : "d.bin");
    save_dataset(d, path, fmt);
    auto back = load_dataset(path, fmt, 4);
    if (fmt == DatasetFormat::Csv) back.channel_names = d.channel_names;
    CHECK(back == d);
  }
}

TEST_CASE("CSV diagnostics name the row") {
  const auto dir = temp_dir("csv");
  const auto path = dir / "bad.csv";
  {
    std::ofstream out(path);
    out << "0,0,1,1.0,2.0,3.0\n0,1,1,1.0,2.0\n";
  }
  try {
    (void)load_dataset(path, DatasetFormat::Csv, 2);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  {
    std::ofstream out(path);
    out << "0,0,5,1.0,2.0\n";
  }
  CHECK_THROWS_AS(load_dataset(path, DatasetFormat::Csv, 2), IoError);
  CHECK_THROWS_AS(load_dataset(dir / "missing.csv", DatasetFormat::Csv, 2), IoError);
  {
    std::ofstream out(dir / "bad.bin", std::ios::binary);
    out << "{\"N\":2,\"C\":1,\"T\":4,\"num_classes\":2,\"labels\":[0,1]}\n";
    out << "abc";
  }
  CHECK_THROWS_AS(load_dataset(dir / "bad.bin", DatasetFormat::Binary), IoError);
}

TEST_CASE("config parsing") {
  RunConfig c;
  CHECK(c.get("embed_dim") == "128");
  c.parse("# comment\nembed_dim = 32  # trailing\n\nhead=mlp\n");
  CHECK(c.model().embed_dim == 32);
  CHECK(c.model().head == HeadKind::Mlp);
  CHECK_THROWS_AS(c.parse("bogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(c.parse("no equals sign\n"), ConfigError);
  c.set("epochs", "abc");
  CHECK_THROWS_AS(c.train(), ConfigError);

  const auto d = RunConfig::preset("default");
  CHECK(d.model().kernel_sizes == std::vector<std::size_t>{11, 21, 51, 71});
  CHECK(d.model().embed_dim == 128);
  CHECK(d.train().epochs == 100);
  CHECK(d.train().optimizer.lr == 1e-3);
  CHECK(d.train().optimizer.weight_decay == 1e-4);
  const auto s = RunConfig::preset("isruc-small");
  CHECK(s.model().kernel_sizes == std::vector<std::size_t>{7, 15, 25});
  CHECK(s.model().embed_dim == 26);
  CHECK_THROWS_AS(RunConfig::preset("nope"), ConfigError);

  RunConfig e;
  e.parse(d.dump());
  CHECK(e.dump() == d.dump());
  CHECK(model_config_from_json(to_json(s.model())) == s.model());
  CHECK(train_config_from_json(to_json(s.train())) == s.train());
}

TEST_CASE("complexity hand count") {
  ModelConfig c;
  c.channels = 1;
  c.length = 8;
  c.kernel_sizes = {3};
  c.filters_per_size = 1;
  c.patch_length = 4;
  c.embed_dim = 2;
  c.num_classes = 2;
  const auto r = complexity(c);
  CHECK(r.filter_bank.params == 2);
  CHECK(r.patch_embedding.params == 8);
  CHECK(r.pooling_norm.params == 4);
  CHECK(r.head.params == 6);
  CHECK(r.total.params == 20);

  auto asym = c;
  asym.symmetric = false;
  asym.kernel_sizes = {3, 5, 9};
  auto sym = asym;
  sym.symmetric = true;
  CHECK(complexity(asym).filter_bank.params * (2 + 3 + 5) == complexity(sym).filter_bank.params * (3 + 5 + 9));

  const auto base = complexity(tiny_model(), 1);
  const auto b3 = complexity(tiny_model(), 3);
  CHECK(b3.total.flops == 3 * base.total.flops);
  auto longer = tiny_model();
  longer.length = 64;
  CHECK(complexity(longer).filter_bank.flops == 2 * base.filter_bank.flops);

  const auto isruc = complexity(RunConfig::preset("isruc-small").model());
  CHECK(isruc.num_patches == 749);
  CHECK(isruc.total.params == 4163);
}

TEST_CASE("checkpoint round trip and validation") {
  Model<float> m(tiny_model());
  Standardization st{{0.5, -1.0}, {2.0, 3.0}};
  const auto ck = make_checkpoint(m, TrainConfig{}, st);
  const auto bytes = serialize(ck);
  CHECK(bytes.substr(0, 8) == "PRISMCKP");
  const auto back = deserialize(bytes);
  CHECK(back == ck);
  CHECK(serialize(back) == bytes);

  auto other_cfg = tiny_model();
  other_cfg.seed = 999;
  Model<float> other(other_cfg);
  load_into(back, other);
  CHECK(other.snapshot() == m.snapshot());

  auto wrong = tiny_model();
  wrong.embed_dim = 7;
  Model<float> mismatched(wrong);
  CHECK_THROWS_AS(load_into(back, mismatched), ShapeError);

  CHECK_THROWS_AS(deserialize("nonsense"), IoError);
  auto truncated = bytes.substr(0, bytes.size() - 3);
  CHECK_THROWS_AS(deserialize(truncated), IoError);
  auto bad_version = bytes;
  bad_version[8] = 9;
  CHECK_THROWS_AS(deserialize(bad_version), IoError);
}

TEST_CASE("training with lr 0 leaves parameters untouched and is deterministic") {
  RunConfig rc = RunConfig::preset("tiny");
  const auto data = prepare_data(rc);
  TrainConfig tc = rc.train();
  tc.optimizer.lr = 0.0;
  tc.optimizer.weight_decay = 0.0;
  Model<float> m(rc.model());
  const auto before = m.snapshot();
  const auto rep = train(m, data.train, data.val, data.test, tc);
  CHECK(m.snapshot() == before);
  for (const auto& e : rep.epochs) CHECK(e.val_loss == rep.epochs.front().val_loss);

  Model<float> a(rc.model()), b(rc.model());
  const auto ra = train(a, data.train, data.val, data.test, rc.train());
  const auto rb = train(b, data.train, data.val, data.test, rc.train());
  CHECK(to_json(ra).dump() == to_json(rb).dump());
  CHECK(a.snapshot() == b.snapshot());
}

TEST_CASE("linearly separable task is learned by a flattened linear classifier") {
  // Two classes separated by the sign of the mean.
  Rng rng(3);
  const std::size_t N = 120, T = 16;
  Dataset d{Tensor<float>({N, 1, T}), std::vector<int>(N), 2, {}};
  for (std::size_t n = 0; n < N; ++n) {
    d.labels[n] = static_cast<int>(n % 2);
    const double shift = d.labels[n] ? 1.0 : -1.0;
    for (std::size_t t = 0; t < T; ++t) d.samples[n * T + t] = static_cast<float>(shift + rng.normal(0, 0.5));
  }
  ModelConfig c;
  c.channels = 1;
  c.length = T;
  c.kernel_sizes = {3};
  c.patch_length = 4;
  c.num_classes = 2;
  c.frontend = Frontend::Flatten;
  Model<float> m(c);
  TrainConfig tc;
  tc.epochs = 50;
  tc.batch_size = 16;
  tc.optimizer.lr = 1e-2;
  (void)train(m, d, d, d, tc);
  const auto pred = predict(m, d);
  CHECK(evaluate(pred, d.labels, 2).accuracy == 1.0);
}

TEST_CASE("ablation rows keep level order and record errors") {
  RunConfig rc = RunConfig::preset("tiny");
  rc.set("epochs", "1");
  const auto data = prepare_data(rc);
  AblationSpec spec;
  spec.base = rc.model();
  spec.train = rc.train();
  parse_ablation_levels(spec, "3;3,5;3,4");  // even size is invalid
  spec.jobs = 2;
  const auto rows = run_ablation(spec, data.train, data.val, data.test);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].axis_level == "3");
  CHECK(rows[1].axis_level == "3-5");
  CHECK_FALSE(rows[0].error.has_value());
  CHECK(rows[2].error.has_value());
  const auto csv = ablation_csv(rows);
  CHECK(csv.rfind("axis_level,kernel_set,accuracy,delta_vs_base\n", 0) == 0);

  spec.jobs = 1;
  const auto serial = run_ablation(spec, data.train, data.val, data.test);
  CHECK(ablation_csv(serial) == csv);

  AblationSpec single = spec;
  parse_ablation_levels(single, "3,5");
  const auto one = ablation_csv(run_ablation(single, data.train, data.val, data.test));
  CHECK(one.substr(one.size() - 2) == ",\n");

  AblationSpec counts = spec;
  counts.axis = AblationAxis::KernelsPerScale;
  parse_ablation_levels(counts, "1,2");
  const auto cr = run_ablation(counts, data.train, data.val, data.test);
  CHECK(cr[1].filters_per_size == 2);
  CHECK(cr[1].axis_level == "2");
}
