#include "radar/irt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "radar/error.hpp"
#include "radar/matrix_io.hpp"

namespace radar {

using nlohmann::json;

std::string_view to_string(DiscriminationLink link) noexcept {
  return link == DiscriminationLink::Linear ? "linear" : "softplus";
}

namespace {

DiscriminationLink parse_link(std::string_view text) {
  if (text == "linear") return DiscriminationLink::Linear;
  if (text == "softplus") return DiscriminationLink::Softplus;
  throw Error(ErrorKind::Validation, fmt::format("unknown discrimination link '{}'", text));
}

double dot(std::span<const double> x, std::span<const double> y) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += x[i] * y[i];
  return sum;
}

void check_finite(std::span<const double> values, std::string_view what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::NonFinite, fmt::format("{} has a non-finite entry", what));
    }
  }
}

double clamped_bce(double p, bool y) noexcept {
  p = std::clamp(p, kLossEpsilon, 1.0 - kLossEpsilon);
  return y ? -std::log(p) : -std::log1p(-p);
}

// Training-time view of a matrix: cells resolved to indices plus one
// borrowed embedding per query.
struct Problem {
  std::size_t dim = 0;
  std::size_t n_configs = 0;
  std::vector<IndexedCell> cells;
  std::vector<std::span<const double>> embeddings;
};

Problem make_problem(const ResponseMatrix& matrix, const EmbeddingStore& store) {
  if (matrix.dim != 0 && matrix.dim != store.dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("matrix declares dimension {} but embeddings have dimension {}",
                            matrix.dim, store.dim()));
  }
  Problem problem;
  problem.dim = store.dim();
  problem.n_configs = matrix.configs.size();
  problem.cells = index_cells(matrix);
  problem.embeddings.reserve(matrix.queries.size());
  for (const auto& id : matrix.queries) {
    if (!store.contains(id)) {
      throw Error(ErrorKind::MissingEmbedding, fmt::format("query '{}' has no embedding", id));
    }
    problem.embeddings.push_back(store.view(id));
  }
  return problem;
}

// Flat parameter layout shared by the optimizer: [w_a | w_b | theta].
struct FlatView {
  std::size_t dim;
  std::span<double> all;
  std::span<double> w_a() const { return all.subspan(0, dim); }
  std::span<double> w_b() const { return all.subspan(dim, dim); }
  std::span<double> theta() const { return all.subspan(2 * dim); }
};

struct Discrimination {
  double a;
  double slope;  // da / d(w_a . e)
};

Discrimination discrimination(double z, DiscriminationLink link) noexcept {
  if (link == DiscriminationLink::Softplus) return {softplus(z), sigmoid(z)};
  return {z, 1.0};
}

// Accumulates the mean loss and gradient over cells[begin, end) in order.
double accumulate_gradient(const Problem& problem, std::span<const std::size_t> order,
                           DiscriminationLink link, const FlatView& params,
                           const FlatView& grad) {
  std::fill(grad.all.begin(), grad.all.end(), 0.0);
  if (order.empty()) return 0.0;
  const double scale = 1.0 / static_cast<double>(order.size());
  auto w_a = params.w_a();
  auto w_b = params.w_b();
  auto theta = params.theta();
  auto g_a = grad.w_a();
  auto g_b = grad.w_b();
  auto g_theta = grad.theta();

  double loss = 0.0;
  for (std::size_t idx : order) {
    const auto& cell = problem.cells[idx];
    auto e = problem.embeddings[cell.query];
    auto [a, slope] = discrimination(dot(w_a, e), link);
    const double b = dot(w_b, e);
    const double gap = theta[cell.config] - b;
    const double p = sigmoid(a * gap);
    loss += clamped_bce(p, cell.correct);

    const double residual = (p - (cell.correct ? 1.0 : 0.0)) * scale;
    g_theta[cell.config] += residual * a;
    const double coef_a = residual * gap * slope;
    const double coef_b = -residual * a;
    for (std::size_t i = 0; i < e.size(); ++i) {
      g_a[i] += coef_a * e[i];
      g_b[i] += coef_b * e[i];
    }
  }
  return loss * scale;
}

std::vector<double> flatten(const IrtParameters& params, const ResponseMatrix& matrix) {
  std::vector<double> flat;
  flat.reserve(2 * params.dim + matrix.configs.size());
  flat.insert(flat.end(), params.w_a.begin(), params.w_a.end());
  flat.insert(flat.end(), params.w_b.begin(), params.w_b.end());
  for (const auto& id : matrix.configs) flat.push_back(params.ability(id));
  return flat;
}

}  // namespace

void IrtParameters::validate() const {
  if (w_a.size() != dim || w_b.size() != dim) {
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("parameter vectors have lengths {} and {}, expected {}", w_a.size(),
                            w_b.size(), dim));
  }
  check_finite(w_a, "w_a");
  check_finite(w_b, "w_b");
  for (const auto& [id, value] : theta) {
    if (!std::isfinite(value)) {
      throw Error(ErrorKind::NonFinite, fmt::format("ability of '{}' is not finite", id));
    }
  }
}

double IrtParameters::ability(std::string_view config_id) const {
  auto it = theta.find(std::string(config_id));
  if (it == theta.end()) {
    throw Error(ErrorKind::UnknownConfiguration,
                fmt::format("configuration '{}' has no ability estimate", config_id));
  }
  return it->second;
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double ex = std::exp(x);
  return ex / (1.0 + ex);
}

double softplus(double x) noexcept {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double correct_probability(double theta, ItemParams item) noexcept {
  constexpr double lo = std::numeric_limits<double>::min();
  const double hi = std::nextafter(1.0, 0.0);
  return std::clamp(sigmoid(item.a * (theta - item.b)), lo, hi);
}

ItemParams item_params(const IrtParameters& params, std::span<const double> embedding) {
  if (embedding.size() != params.dim) {
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("embedding has length {}, model expects {}", embedding.size(),
                            params.dim));
  }
  const double z = dot(params.w_a, embedding);
  return {discrimination(z, params.link).a, dot(params.w_b, embedding)};
}

double predict_correct(const IrtParameters& params, std::string_view config_id,
                       std::span<const double> embedding) {
  const double theta = params.ability(config_id);
  return correct_probability(theta, item_params(params, embedding));
}

double bce_loss(const IrtParameters& params, const ResponseMatrix& matrix,
                const EmbeddingStore& embeddings) {
  auto problem = make_problem(matrix, embeddings);
  if (problem.cells.empty()) return 0.0;
  std::vector<ItemParams> items;
  items.reserve(problem.embeddings.size());
  for (auto e : problem.embeddings) items.push_back(item_params(params, e));
  std::vector<double> theta;
  theta.reserve(matrix.configs.size());
  for (const auto& id : matrix.configs) theta.push_back(params.ability(id));

  double loss = 0.0;
  for (const auto& cell : problem.cells) {
    const auto item = items[cell.query];
    loss += clamped_bce(sigmoid(item.a * (theta[cell.config] - item.b)), cell.correct);
  }
  return loss / static_cast<double>(problem.cells.size());
}

LossGradient bce_loss_and_gradient(const IrtParameters& params, const ResponseMatrix& matrix,
                                   const EmbeddingStore& embeddings) {
  params.validate();
  auto problem = make_problem(matrix, embeddings);
  auto flat = flatten(params, matrix);
  std::vector<double> grad(flat.size());
  std::vector<std::size_t> order(problem.cells.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  FlatView pv{params.dim, flat};
  FlatView gv{params.dim, grad};
  LossGradient out;
  out.loss = accumulate_gradient(problem, order, params.link, pv, gv);
  out.w_a.assign(gv.w_a().begin(), gv.w_a().end());
  out.w_b.assign(gv.w_b().begin(), gv.w_b().end());
  out.theta.assign(gv.theta().begin(), gv.theta().end());
  return out;
}

void TrainingConfig::validate() const {
  if (epochs <= 0 || batch_size <= 0 || !(learning_rate > 0.0) || !(grad_clip_norm > 0.0)) {
    throw Error(ErrorKind::Validation,
                "epochs, batch size, learning rate and clip norm must all be positive");
  }
}

TrainingResult train(const ResponseMatrix& matrix, const EmbeddingStore& embeddings,
                     const TrainingConfig& config) {
  config.validate();
  auto validation = validate_matrix(matrix);
  for (const auto& v : validation.violations) {
    const bool degenerate = v.kind == ViolationKind::EmptyRow || v.kind == ViolationKind::EmptyColumn;
    throw Error(degenerate ? ErrorKind::DegenerateMatrix : ErrorKind::Validation,
                fmt::format("{} ({})", v.message, v.location));
  }
  auto problem = make_problem(matrix, embeddings);
  const std::size_t dim = problem.dim;

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> init(0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
  std::vector<double> flat(2 * dim + problem.n_configs, 0.0);
  for (std::size_t i = 0; i < 2 * dim; ++i) flat[i] = init(rng);

  std::vector<double> grad(flat.size());
  std::vector<double> m(flat.size(), 0.0);
  std::vector<double> v(flat.size(), 0.0);
  FlatView pv{dim, flat};
  FlatView gv{dim, grad};

  std::vector<std::size_t> order(problem.cells.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainingReport report;
  report.initial_loss = accumulate_gradient(problem, order, config.link, pv, gv);

  const auto batch = static_cast<std::size_t>(config.batch_size);
  double beta1_power = 1.0;
  double beta2_power = 1.0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t count = std::min(batch, order.size() - start);
      std::span<const std::size_t> slice(order.data() + start, count);
      epoch_loss += accumulate_gradient(problem, slice, config.link, pv, gv) *
                    static_cast<double>(count);

      double norm = 0.0;
      for (double g : grad) norm += g * g;
      norm = std::sqrt(norm);
      if (!std::isfinite(norm)) {
        throw Error(ErrorKind::Numerical, fmt::format("non-finite gradient in epoch {}", epoch + 1));
      }
      if (norm > config.grad_clip_norm) {
        const double s = config.grad_clip_norm / (norm + 1e-6);
        for (double& g : grad) g *= s;
      }

      beta1_power *= config.adam_beta1;
      beta2_power *= config.adam_beta2;
      const double step = config.learning_rate / (1.0 - beta1_power);
      const double v_correction = 1.0 / (1.0 - beta2_power);
      for (std::size_t i = 0; i < flat.size(); ++i) {
        m[i] = config.adam_beta1 * m[i] + (1.0 - config.adam_beta1) * grad[i];
        v[i] = config.adam_beta2 * v[i] + (1.0 - config.adam_beta2) * grad[i] * grad[i];
        flat[i] -= step * m[i] / (std::sqrt(v[i] * v_correction) + config.adam_epsilon);
      }
      ++report.steps;
    }
    report.epoch_losses.push_back(epoch_loss / static_cast<double>(order.size()));
  }

  if (config.link == DiscriminationLink::Linear) {
    double mean_a = 0.0;
    for (auto e : problem.embeddings) mean_a += dot(pv.w_a(), e);
    if (mean_a < 0.0) {
      for (double& x : flat) x = -x;
      report.sign_flipped = true;
    }
  }

  std::sort(order.begin(), order.end());
  report.final_loss = accumulate_gradient(problem, order, config.link, pv, gv);

  TrainingResult result;
  result.report = std::move(report);
  auto& params = result.params;
  params.dim = dim;
  params.link = config.link;
  params.version = 1;
  params.w_a.assign(pv.w_a().begin(), pv.w_a().end());
  params.w_b.assign(pv.w_b().begin(), pv.w_b().end());
  for (std::size_t i = 0; i < problem.n_configs; ++i) {
    params.theta.emplace(matrix.configs[i], pv.theta()[i]);
  }
  params.validate();
  return result;
}

std::vector<std::string> ability_ordering(const IrtParameters& params) {
  std::vector<std::pair<std::string, double>> entries(params.theta.begin(), params.theta.end());
  std::stable_sort(entries.begin(), entries.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  std::vector<std::string> ids;
  ids.reserve(entries.size());
  for (auto& [id, value] : entries) ids.push_back(std::move(id));
  return ids;
}

json to_json(const IrtParameters& params) {
  json doc = {{"version", params.version},
              {"dim", params.dim},
              {"w_a", params.w_a},
              {"w_b", params.w_b},
              {"theta", params.theta}};
  if (params.link != DiscriminationLink::Linear) doc["discrimination"] = to_string(params.link);
  return doc;
}

IrtParameters parameters_from_json(const json& doc) {
  IrtParameters params;
  try {
    params.version = doc.at("version").get<std::uint64_t>();
    params.dim = doc.at("dim").get<std::size_t>();
    params.w_a = doc.at("w_a").get<std::vector<double>>();
    params.w_b = doc.at("w_b").get<std::vector<double>>();
    params.theta = doc.at("theta").get<std::map<std::string, double>>();
    if (auto it = doc.find("discrimination"); it != doc.end()) {
      params.link = parse_link(it->get<std::string>());
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, fmt::format("parameter snapshot: {}", e.what()));
  }
  params.validate();
  return params;
}

void save_parameters(const std::filesystem::path& path, const IrtParameters& params) {
  auto out = open_output(path);
  out << to_json(params).dump() << '\n';
}

IrtParameters load_parameters(const std::filesystem::path& path) {
  auto in = open_input(path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, fmt::format("{}: {}", path.string(), e.what()));
  }
  return parameters_from_json(doc);
}

}  // namespace radar
