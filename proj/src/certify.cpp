// SPDX-License-Identifier: Apache-2.0
#include "prism/certify.hpp"

#include <algorithm>
#include <map>

#include "prism/gradcheck.hpp"

namespace prism {

namespace {

std::string group_of(const std::string& name) { return name.substr(0, name.find('.')); }

void record(std::vector<GroupCheck>& out, const std::string& label, const std::map<std::string, double>& worst,
            double tolerance) {
  for (const auto& [group, err] : worst) out.push_back({label, group, err, err < tolerance});
}

}  // namespace

std::vector<CertifyCase> default_certify_cases(std::uint64_t seed) {
  ModelConfig base;
  base.channels = 2;
  base.length = 32;
  base.kernel_sizes = {3, 5};
  base.filters_per_size = 2;
  base.patch_length = 4;
  base.embed_dim = 6;
  base.num_classes = 3;
  base.hidden = 5;
  base.seed = seed;

  std::vector<CertifyCase> cases;
  cases.push_back({"prism-linear", base});
  auto mlp = base;
  mlp.head = HeadKind::Mlp;
  mlp.seed = seed + 1;
  cases.push_back({"prism-mlp", mlp});
  auto asym = base;
  asym.symmetric = false;
  asym.seed = seed + 2;
  cases.push_back({"asymmetric-linear", asym});
  auto relu = base;
  relu.relu_after_fuse = true;
  relu.seed = seed + 3;
  cases.push_back({"relu-linear", relu});
  auto single = base;
  single.channels = 3;
  single.kernel_sizes = {7};
  single.filters_per_size = 3;
  single.length = 20;
  single.patch_length = 6;
  single.embed_dim = 4;
  single.seed = seed + 4;
  cases.push_back({"single-size-linear", single});
  return cases;
}

std::vector<GroupCheck> certify_gradients(const std::vector<CertifyCase>& cases, const CertifyOptions& options) {
  std::vector<GroupCheck> out;
  for (const auto& c : cases) {
    Model<double> model(c.config);
    Rng rng(c.config.seed ^ 0xC0FFEEULL);
    const auto x = rng_normal<double>(rng, 0.0, 1.0, {options.batch, c.config.channels, c.config.length});
    std::vector<int> labels;
    for (std::size_t b = 0; b < options.batch; ++b) labels.push_back(static_cast<int>(rng.index(c.config.num_classes)));
    const double eps_ls = 0.1;

    auto params = model.params();
    auto loss_fn = [&] { return smoothed_cross_entropy(model.forward(x), labels, eps_ls).loss; };

    model.zero_grad();
    const auto logits = model.forward(x);
    auto loss = smoothed_cross_entropy(logits, labels, eps_ls);
    model.backward(loss.grad_logits);
    if (options.corrupt) options.corrupt(params);

    const auto numeric = finite_diff_grad(loss_fn, params, options.step);
    std::map<std::string, double> worst;
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& w = worst[group_of(params[i]->name)];
      w = std::max(w, max_relative_error(params[i]->grad, numeric[i]));
    }

    // Loss gradient wrt the logits themselves.
    Param<double> logit_param("logits", logits);
    ParamList<double> logit_list{&logit_param};
    const auto numeric_logits = finite_diff_grad(
        [&] { return smoothed_cross_entropy(logit_param.value, labels, eps_ls).loss; }, logit_list, options.step);
    worst["loss"] = max_relative_error(loss.grad_logits, numeric_logits[0]);

    // Unpooled token path through a fixed random projection.
    if (c.config.frontend == Frontend::Prism) {
      const auto tokens = model.features(x, false);
      const auto proj = rng_normal<double>(rng, 0.0, 1.0, tokens.shape());
      auto token_loss = [&] {
        const auto t = model.features(x, false);
        double s = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) s += proj[i] * t[i];
        return s;
      };
      ParamList<double> front;
      for (auto* p : params) {
        if (group_of(p->name) != "head") front.push_back(p);
      }
      model.zero_grad();
      model.features(x, false);
      auto grad_h = model.embedding()->backward(proj);
      model.filter_bank()->backward(grad_h);
      if (options.corrupt) options.corrupt(front);
      const auto numeric_front = finite_diff_grad(token_loss, front, options.step);
      double w = 0.0;
      for (std::size_t i = 0; i < front.size(); ++i) w = std::max(w, max_relative_error(front[i]->grad, numeric_front[i]));
      worst["frontend.unpooled"] = w;
    }
    record(out, c.label, worst, options.tolerance);
  }
  return out;
}

bool all_passed(const std::vector<GroupCheck>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

nlohmann::ordered_json to_json(const std::vector<GroupCheck>& checks) {
  auto rows = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    nlohmann::ordered_json r;
    r["config"] = c.config;
    r["group"] = c.group;
    r["max_relative_error"] = c.max_relative_error;
    r["passed"] = c.passed;
    rows.push_back(r);
  }
  nlohmann::ordered_json j;
  j["checks"] = rows;
  j["passed"] = all_passed(checks);
  return j;
}

}  // namespace prism
