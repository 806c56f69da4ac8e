// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "prism/model.hpp"

namespace prism {

/// Worst finite-difference disagreement for one parameter group.
struct GroupCheck {
  std::string config;  // label of the model configuration
  std::string group;   // filterbank, embedding, norm, head, loss, frontend.unpooled
  double max_relative_error = 0.0;
  bool passed = false;
};

struct CertifyOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  std::size_t batch = 2;
  /// Applied to the analytic gradients before comparison; used to show the
  /// harness catches a broken backward pass.
  std::function<void(ParamList<double>&)> corrupt;
};

struct CertifyCase {
  std::string label;
  ModelConfig config;
};

/// The shipped tiny configurations: PRISM-Linear, PRISM-MLP, asymmetric bank,
/// ReLU-after-fusion variant and a single-size bank.
std::vector<CertifyCase> default_certify_cases(std::uint64_t seed);

/// Compares analytic gradients against central differences in 64-bit for
/// every parameter group of each case.
std::vector<GroupCheck> certify_gradients(const std::vector<CertifyCase>& cases, const CertifyOptions& options = {});

bool all_passed(const std::vector<GroupCheck>& checks);
nlohmann::ordered_json to_json(const std::vector<GroupCheck>& checks);

}  // namespace prism
