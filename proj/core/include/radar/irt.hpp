#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "radar/embed.hpp"
#include "radar/types.hpp"

namespace radar {

/// How the discrimination is read off its linear projection w_a . e.
/// Linear leaves the sign free; Softplus forces a > 0.
enum class DiscriminationLink { Linear, Softplus };

std::string_view to_string(DiscriminationLink link) noexcept;

/// Fitted 2PL routing model: per-query discrimination/difficulty are linear
/// in the query embedding, per-configuration ability is a free scalar.
struct IrtParameters {
  std::size_t dim = 0;
  std::vector<double> w_a;
  std::vector<double> w_b;
  std::map<std::string, double> theta;
  std::uint64_t version = 0;
  DiscriminationLink link = DiscriminationLink::Linear;

  /// Throws Error(DimensionMismatch / NonFinite) on broken invariants.
  void validate() const;
  /// Throws Error(UnknownConfiguration).
  double ability(std::string_view config_id) const;
};

struct ItemParams {
  double a = 0.0;  // discrimination
  double b = 0.0;  // difficulty
};

double sigmoid(double x) noexcept;
double softplus(double x) noexcept;

/// sigma(a (theta - b)), kept strictly inside (0, 1).
double correct_probability(double theta, ItemParams item) noexcept;

ItemParams item_params(const IrtParameters& params, std::span<const double> embedding);

double predict_correct(const IrtParameters& params, std::string_view config_id,
                       std::span<const double> embedding);

inline constexpr double kLossEpsilon = 1e-7;

/// Mean binary cross entropy over observed cells, probabilities clamped to
/// [1e-7, 1 - 1e-7].
double bce_loss(const IrtParameters& params, const ResponseMatrix& matrix,
                const EmbeddingStore& embeddings);

struct LossGradient {
  double loss = 0.0;
  std::vector<double> w_a;
  std::vector<double> w_b;
  std::vector<double> theta;  // aligned with matrix.configs
};

/// Loss together with its analytic gradient. The gradient is that of the
/// unclamped loss; the two agree wherever no probability reaches the clamp.
LossGradient bce_loss_and_gradient(const IrtParameters& params, const ResponseMatrix& matrix,
                                   const EmbeddingStore& embeddings);

struct TrainingConfig {
  int epochs = 100;
  double learning_rate = 5e-4;
  int batch_size = 32;
  double grad_clip_norm = 1.0;
  std::uint64_t seed = 0;
  DiscriminationLink link = DiscriminationLink::Linear;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  void validate() const;
};

struct TrainingReport {
  std::vector<double> epoch_losses;  // running mean over each epoch's batches
  double initial_loss = 0.0;         // full training set, before the first step
  double final_loss = 0.0;           // full training set, after the last step
  std::size_t steps = 0;
  bool sign_flipped = false;
};

struct TrainingResult {
  IrtParameters params;
  TrainingReport report;
};

/// Minimizes bce_loss by shuffled mini-batch Adam with global-norm gradient
/// clipping. Bit-reproducible for a given seed and cell order.
///
/// Under the linear link (a, theta, b) and (-a, -theta, -b) fit equally
/// well; the result is oriented so the mean discrimination over the
/// training queries is nonnegative.
TrainingResult train(const ResponseMatrix& matrix, const EmbeddingStore& embeddings,
                     const TrainingConfig& config);

/// Configuration ids by descending ability; ties by id.
std::vector<std::string> ability_ordering(const IrtParameters& params);

nlohmann::json to_json(const IrtParameters& params);
IrtParameters parameters_from_json(const nlohmann::json& doc);
void save_parameters(const std::filesystem::path& path, const IrtParameters& params);
IrtParameters load_parameters(const std::filesystem::path& path);

}  // namespace radar
