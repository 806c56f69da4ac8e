// SPDX-License-Identifier: Apache-2.0
#include "prism/model.hpp"

namespace prism {

std::string to_string(HeadKind kind) { return kind == HeadKind::Linear ? "linear" : "mlp"; }
std::string to_string(Frontend frontend) { return frontend == Frontend::Prism ? "prism" : "flatten"; }

HeadKind parse_head_kind(const std::string& s) {
  if (s == "linear") return HeadKind::Linear;
  if (s == "mlp") return HeadKind::Mlp;
  throw ConfigError("unknown head '" + s + "' (expected linear or mlp)");
}

Frontend parse_frontend(const std::string& s) {
  if (s == "prism") return Frontend::Prism;
  if (s == "flatten") return Frontend::Flatten;
  throw ConfigError("unknown frontend '" + s + "' (expected prism or flatten)");
}

std::size_t ModelConfig::num_patches() const { return patch_count(length, patch_length); }

std::size_t ModelConfig::head_inputs() const {
  return frontend == Frontend::Prism ? channels * embed_dim : channels * length;
}

void ModelConfig::validate() const {
  if (channels == 0) throw ConfigError("channels must be >= 1");
  if (length == 0) throw ConfigError("length must be >= 1");
  if (num_classes < 2) throw ConfigError("num_classes must be >= 2");
  if (head == HeadKind::Mlp && hidden == 0) throw ConfigError("hidden must be >= 1");
  if (share_embedding_across_channels) {
    throw ConfigError("share_embedding_across_channels is reserved and not supported");
  }
  if (frontend == Frontend::Flatten) return;
  if (kernel_sizes.empty()) throw ConfigError("kernel_sizes must not be empty");
  for (std::size_t i = 0; i < kernel_sizes.size(); ++i) {
    const auto k = kernel_sizes[i];
    if (k % 2 == 0) throw ConfigError("kernel size " + std::to_string(k) + " must be odd");
    if (i > 0 && k <= kernel_sizes[i - 1]) throw ConfigError("kernel_sizes must be strictly increasing");
    if (k > 2 * length) throw ConfigError("kernel size " + std::to_string(k) + " exceeds twice the length");
  }
  if (filters_per_size == 0) throw ConfigError("filters_per_size must be >= 1");
  if (embed_dim < 2) throw ConfigError("embed_dim must be >= 2");
  if (!(eps_norm > 0.0)) throw ConfigError("eps_norm must be positive");
  if (!(ln_delta > 0.0)) throw ConfigError("ln_delta must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  num_patches();
}

template <typename T>
Model<T>::Model(const ModelConfig& config) : config_(config), dropout_rng_(config.seed ^ 0xD1B54A32D192ED03ULL) {
  config_.validate();
  Rng init(config_.seed);
  if (config_.frontend == Frontend::Prism) {
    bank_.emplace(FilterBankConfig{config_.channels, config_.kernel_sizes, config_.filters_per_size,
                                   config_.symmetric, config_.eps_norm},
                  init);
    embedding_.emplace(EmbeddingConfig{config_.channels, config_.num_filters(), config_.patch_length,
                                       config_.embed_dim, config_.ln_delta, config_.relu_after_fuse,
                                       config_.dropout},
                       init);
  }
  if (config_.head == HeadKind::Linear) {
    head_ = std::make_unique<LinearHead<T>>(config_.head_inputs(), config_.num_classes, init);
  } else {
    head_ = std::make_unique<MlpHead<T>>(config_.head_inputs(), config_.hidden, config_.num_classes, init);
  }
  check_unique_names(params());
}

template <typename T>
Tensor<T> Model<T>::features(const Tensor<T>& x, bool pooled) {
  if (config_.frontend != Frontend::Prism) throw ConfigError("features: model has no PRISM front-end");
  return embedding_->forward(bank_->forward(x), pooled);
}

template <typename T>
Tensor<T> Model<T>::forward(const Tensor<T>& x, bool training) {
  if (x.rank() != 3 || x.dim(1) != config_.channels || x.dim(2) != config_.length) {
    throw ShapeError("model forward: expected (B," + std::to_string(config_.channels) + "," +
                     std::to_string(config_.length) + "), got " + shape_str(x.shape()));
  }
  const std::size_t batch = x.dim(0);
  if (config_.frontend == Frontend::Flatten) {
    return head_->forward(x.reshaped({batch, config_.channels * config_.length}));
  }
  auto pooled = embedding_->forward(bank_->forward(x), true, training, &dropout_rng_);
  feature_shape_ = pooled.shape();
  return head_->forward(pooled.reshaped({batch, config_.head_inputs()}));
}

template <typename T>
void Model<T>::backward(const Tensor<T>& grad_logits) {
  auto grad_features = head_->backward(grad_logits);
  if (config_.frontend == Frontend::Flatten) return;
  auto grad_bank = embedding_->backward(grad_features.reshaped(feature_shape_));
  bank_->backward(grad_bank);
}

template <typename T>
ParamList<T> Model<T>::params() {
  ParamList<T> out;
  if (bank_) {
    for (auto* p : bank_->params()) out.push_back(p);
    for (auto* p : embedding_->params()) out.push_back(p);
  }
  for (auto* p : head_->params()) out.push_back(p);
  return out;
}

template <typename T>
void Model<T>::zero_grad() {
  for (auto* p : params()) p->zero_grad();
}

template <typename T>
std::vector<Tensor<T>> Model<T>::snapshot() {
  std::vector<Tensor<T>> out;
  for (auto* p : params()) out.push_back(p->value);
  return out;
}

template <typename T>
void Model<T>::restore(const std::vector<Tensor<T>>& values) {
  auto ps = params();
  if (values.size() != ps.size()) throw ShapeError("restore: parameter count mismatch");
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (values[i].shape() != ps[i]->value.shape()) {
      throw ShapeError("restore: shape mismatch for " + ps[i]->name);
    }
    ps[i]->value = values[i];
  }
}

template class Model<float>;
template class Model<double>;

}  // namespace prism
