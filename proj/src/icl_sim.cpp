#include "softshift/icl_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "softshift/errors.hpp"
#include "softshift/numkit/rng.hpp"

namespace softshift::icl {

using namespace numkit;

namespace {

// Selector of the first d channels of a (d+1)-dimensional token.
Matrix a_selector(std::size_t d) {
  Matrix m(d + 1, d + 1);
  for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0;
  return m;
}

void require_square(const Matrix& m, std::size_t size, const char* name) {
  if (m.rows() != size || m.cols() != size) {
    throw DimensionMismatch(std::string("attention weight ") + name + " must be " +
                            std::to_string(size) + "x" + std::to_string(size));
  }
}

void require_weights(const TokenSet& tokens, const AttentionWeights& w) {
  tokens.validate();
  const std::size_t e = tokens.d() + 1;
  require_square(w.W_Q, e, "W_Q");
  require_square(w.W_K, e, "W_K");
  require_square(w.W_V, e, "W_V");
  require_square(w.P, e, "P");
}

// Context embeddings followed by the query embedding.
std::vector<Vector> embeddings(const TokenSet& tokens) {
  std::vector<Vector> out;
  out.reserve(tokens.context.size() + 1);
  for (const auto& t : tokens.context) out.push_back(embed(t));
  out.push_back(embed(tokens.query));
  return out;
}

TokenSet with_b_updates(const TokenSet& tokens, const Vector& updates) {
  TokenSet out = tokens;
  for (std::size_t j = 0; j < out.context.size(); ++j) out.context[j].b += updates[j];
  out.query.b += updates[out.context.size()];
  return out;
}

// sum_k weight_jk W_V e_k, projected by P, for each token row j.
std::vector<Vector> softmax_messages(const TokenSet& tokens, const AttentionWeights& w) {
  const Matrix scores = attention_scores(tokens, w);
  const auto emb = embeddings(tokens);
  const std::size_t m = tokens.context.size();
  std::vector<Vector> values;
  values.reserve(m);
  for (std::size_t k = 0; k < m; ++k) values.push_back(matvec(w.W_V, emb[k]));
  std::vector<Vector> out;
  out.reserve(emb.size());
  for (std::size_t j = 0; j < emb.size(); ++j) {
    Vector acc(tokens.d() + 1);
    for (std::size_t k = 0; k < m; ++k) acc = acc + scores(j, k) * values[k];
    out.push_back(matvec(w.P, acc));
  }
  return out;
}

nlohmann::ordered_json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

nlohmann::ordered_json vec_json(const Vector& v) {
  auto arr = nlohmann::ordered_json::array();
  for (double x : v) arr.push_back(number(x));
  return arr;
}

}  // namespace

const char* to_string(StepSign sign) {
  return sign == StepSign::descent ? "descent" : "paper_plus";
}

void GDConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw PreconditionViolation("eta must be positive");
  if (steps < 1) throw PreconditionViolation("steps must be at least 1");
}

Vector gd_step(const Instance& instance, const Vector& x, const GDConfig& config) {
  config.validate();
  const Vector g = gradient(instance.A, x, instance.b);
  const Vector dir = config.sign == StepSign::descent ? -g : g;
  if (!config.backtracking) return x + config.eta * dir;

  const double base = loss(instance.A, x, instance.b);
  double eta = config.eta;
  for (int halvings = 0;; ++halvings) {
    Vector candidate = x + eta * dir;
    if (loss(instance.A, candidate, instance.b) <= base + kBacktrackTol ||
        halvings == kBacktrackHalvings) {
      return candidate;
    }
    eta *= 0.5;
  }
}

Vector induced_target(const Instance& instance, const Vector& x_t, const Vector& x_next) {
  const auto pair = shift::ShiftPair::weight(instance.A, instance.b, x_t, x_next, instance.R);
  return instance.b - shift::delta_b_exact(pair);
}

LinearStep linear_gd_induced_target(const Matrix& A, const Vector& b, const Vector& x,
                                    double eta) {
  if (b.size() != A.rows()) throw DimensionMismatch("linear_gd_induced_target: b length != rows");
  const Vector dx = -eta * matTvec(A, matvec(A, x) - b);
  return {x + dx, b - matvec(A, dx)};
}

std::size_t TokenSet::d() const { return query.a.size(); }

void TokenSet::validate() const {
  for (const auto& t : context) {
    if (t.a.size() != query.a.size()) {
      throw DimensionMismatch("TokenSet: context token has d = " + std::to_string(t.a.size()) +
                              ", query has d = " + std::to_string(query.a.size()));
    }
  }
}

Vector TokenSet::b_channels() const {
  Vector out(context.size() + 1);
  for (std::size_t j = 0; j < context.size(); ++j) out[j] = context[j].b;
  out[context.size()] = query.b;
  return out;
}

Vector embed(const Token& t) {
  Vector e(t.a.size() + 1);
  std::copy(t.a.begin(), t.a.end(), e.begin());
  e[t.a.size()] = t.b;
  return e;
}

TokenSet attention_step_linear(const TokenSet& tokens, const AttentionWeights& w) {
  require_weights(tokens, w);
  const std::size_t e = tokens.d() + 1;
  const auto emb = embeddings(tokens);
  // sum_k (W_V e_k)(W_K e_k)^T, accumulated once and applied to every query.
  Matrix kv(e, e);
  for (std::size_t k = 0; k < tokens.context.size(); ++k) {
    const Vector v = matvec(w.W_V, emb[k]);
    const Vector key = matvec(w.W_K, emb[k]);
    for (std::size_t r = 0; r < e; ++r) {
      for (std::size_t c = 0; c < e; ++c) kv(r, c) += v[r] * key[c];
    }
  }
  const Matrix pkv = matmul(w.P, kv);
  Vector updates(emb.size());
  for (std::size_t j = 0; j < emb.size(); ++j) {
    updates[j] = matvec(pkv, matvec(w.W_Q, emb[j]))[e - 1];
  }
  return with_b_updates(tokens, updates);
}

Matrix attention_scores(const TokenSet& tokens, const AttentionWeights& w) {
  require_weights(tokens, w);
  const auto emb = embeddings(tokens);
  const std::size_t m = tokens.context.size();
  Matrix scores(emb.size(), m);
  if (m == 0) return scores;
  std::vector<Vector> keys;
  keys.reserve(m);
  for (std::size_t k = 0; k < m; ++k) keys.push_back(matvec(w.W_K, emb[k]));
  for (std::size_t j = 0; j < emb.size(); ++j) {
    const Vector q = matvec(w.W_Q, emb[j]);
    Vector logits(m);
    for (std::size_t k = 0; k < m; ++k) logits[k] = dot(q, keys[k]);
    const double top = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      scores(j, k) = std::exp(logits[k] - top);
      total += scores(j, k);
    }
    for (std::size_t k = 0; k < m; ++k) scores(j, k) /= total;
  }
  return scores;
}

TokenSet attention_step_softmax(const TokenSet& tokens, const AttentionWeights& w) {
  const auto messages = softmax_messages(tokens, w);
  const std::size_t last = tokens.d();
  Vector updates(messages.size());
  for (std::size_t j = 0; j < messages.size(); ++j) updates[j] = messages[j][last];
  return with_b_updates(tokens, updates);
}

Matrix attention_data_shift(const TokenSet& tokens, const AttentionWeights& w) {
  const auto messages = softmax_messages(tokens, w);
  const std::size_t d = tokens.d();
  Matrix out(tokens.context.size(), d);
  for (std::size_t j = 0; j < tokens.context.size(); ++j) {
    for (std::size_t c = 0; c < d; ++c) out(j, c) = tokens.context[j].a[c] + messages[j][c];
  }
  return out;
}

AttentionWeights construct_gd_weights(std::size_t d, double eta) {
  if (d < 1) throw PreconditionViolation("construct_gd_weights: d must be at least 1");
  if (!(eta >= 0.0)) throw PreconditionViolation("construct_gd_weights: eta must be nonnegative");
  Matrix value(d + 1, d + 1);
  value(d, d) = eta;
  return {a_selector(d), a_selector(d), std::move(value), Matrix::identity(d + 1)};
}

StepMetrics compare_step(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("compare_transforms: vector lengths differ");
  StepMetrics m;
  m.distance = l2_norm(a - b);
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  m.cosine = (na == 0.0 || nb == 0.0) ? 0.0 : std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
  if (na == 0.0) {
    m.norm_ratio = nb == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  } else {
    m.norm_ratio = nb / na;
  }
  return m;
}

TransformMetrics compare_transforms(const std::vector<Vector>& run_a,
                                    const std::vector<Vector>& run_b) {
  if (run_a.size() != run_b.size()) {
    throw DimensionMismatch("compare_transforms: runs have " + std::to_string(run_a.size()) +
                            " and " + std::to_string(run_b.size()) + " steps");
  }
  TransformMetrics out;
  if (run_a.empty()) return out;
  out.max_cosine = -1.0;
  for (std::size_t t = 0; t < run_a.size(); ++t) {
    const StepMetrics m = compare_step(run_a[t], run_b[t]);
    out.steps.push_back(m);
    out.mean_distance += m.distance;
    out.mean_cosine += m.cosine;
    out.mean_norm_ratio += m.norm_ratio;
    out.max_distance = std::max(out.max_distance, m.distance);
    out.max_cosine = std::max(out.max_cosine, m.cosine);
    out.max_norm_ratio = std::max(out.max_norm_ratio, m.norm_ratio);
  }
  const double count = static_cast<double>(run_a.size());
  out.mean_distance /= count;
  out.mean_cosine /= count;
  out.mean_norm_ratio /= count;
  return out;
}

LinearTask sample_linear_task(std::uint64_t seed, std::size_t n, std::size_t d) {
  RngStream rng(seed, 0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  LinearTask task{scale * rng.normal_matrix(n, d), Vector(n), scale * rng.normal_vector(d)};
  const Vector w_star = rng.normal_vector(d);
  task.b = matvec(task.A, w_star);
  return task;
}

std::vector<TrajectoryStep> run_linear_icl(const LinearTask& task, const GDConfig& config) {
  config.validate();
  const std::size_t n = task.A.rows();
  const std::size_t d = task.A.cols();
  if (task.b.size() != n || task.query.size() != d) {
    throw DimensionMismatch("run_linear_icl: task dimensions disagree");
  }
  const AttentionWeights weights = construct_gd_weights(d, config.eta);
  const double a_norm = spectral_norm(task.A);

  std::vector<TrajectoryStep> out;
  Vector x(d);
  for (int t = 1; t <= config.steps; ++t) {
    const Vector residual_target = task.b - matvec(task.A, x);
    TokenSet tokens;
    for (std::size_t k = 0; k < n; ++k) {
      tokens.context.push_back({Vector(std::vector<double>(task.A.row(k).begin(), task.A.row(k).end())),
                                residual_target[k]});
    }
    tokens.query = {task.query, dot(task.query, x)};
    const Vector attn_shift =
        attention_step_linear(tokens, weights).b_channels() - tokens.b_channels();

    const LinearStep step = linear_gd_induced_target(task.A, task.b, x, config.eta);
    const Vector dx = step.x_next - x;
    Vector gd_shift(n + 1);
    const Vector a_dx = matvec(task.A, dx);
    for (std::size_t k = 0; k < n; ++k) gd_shift[k] = a_dx[k];
    gd_shift[n] = dot(task.query, dx);

    TrajectoryStep rec;
    rec.step = t;
    rec.x = step.x_next;
    const Vector r_next = matvec(task.A, step.x_next) - task.b;
    rec.loss = 0.5 * dot(r_next, r_next);
    rec.b_tilde = step.b_tilde;
    rec.delta_b_norm = l2_norm(a_dx);
    rec.log_bound = shift::safe_log(a_norm) + shift::safe_log(l2_norm(dx));
    rec.metrics = compare_step(gd_shift, attn_shift);
    out.push_back(std::move(rec));
    x = step.x_next;
  }
  return out;
}

std::vector<TrajectoryStep> run_softmax_icl(const Instance& instance, const Vector& x0,
                                            const GDConfig& config) {
  config.validate();
  const std::size_t n = instance.n();
  const std::size_t d = instance.d();
  if (x0.size() != d) throw DimensionMismatch("run_softmax_icl: x0 length differs from d");

  AttentionWeights layer{a_selector(d), a_selector(d), config.eta * Matrix::identity(d + 1),
                         Matrix::identity(d + 1)};
  TokenSet tokens;
  for (std::size_t k = 0; k < n; ++k) {
    tokens.context.push_back(
        {Vector(std::vector<double>(instance.A.row(k).begin(), instance.A.row(k).end())),
         instance.b[k]});
  }
  tokens.query = {Vector(d), 0.0};
  const Matrix A_next = attention_data_shift(tokens, layer);

  std::vector<TrajectoryStep> out;
  Vector x = x0;
  for (int t = 1; t <= config.steps; ++t) {
    const Vector x_next = gd_step(instance, x, config);
    const Vector f_t = predict(instance.A, x);
    const Vector db_weight = predict(instance.A, x_next) - f_t;
    const Vector db_data = predict(A_next, x) - f_t;

    TrajectoryStep rec;
    rec.step = t;
    rec.x = x_next;
    rec.loss = loss(instance.A, x_next, instance.b);
    rec.b_tilde = instance.b - db_weight;
    rec.delta_b_norm = l2_norm(db_weight);
    rec.delta_b_data_norm = l2_norm(db_data);
    rec.metrics = compare_step(db_weight, db_data);

    const auto weight_pair = shift::ShiftPair::weight(instance.A, instance.b, x, x_next, instance.R);
    if (auto why = weight_pair.violation()) {
      rec.hypothesis_note = "weight shift: " + *why;
    } else {
      rec.log_bound = shift::bound_delta_b(weight_pair,
                                           shift::BoundContext::floor(n, instance.R));
    }
    const auto data_pair = shift::ShiftPair::data(instance.A, A_next, instance.b, x, instance.R);
    if (auto why = data_pair.violation()) {
      const std::string note = "data shift: " + *why;
      rec.hypothesis_note = rec.hypothesis_note ? *rec.hypothesis_note + "; " + note : note;
    } else {
      rec.log_bound_data = shift::bound_delta_b(data_pair,
                                                shift::BoundContext::floor(n, instance.R));
    }
    out.push_back(std::move(rec));
    x = x_next;
  }
  return out;
}

std::string trajectory_to_json(const std::vector<TrajectoryStep>& steps, int indent) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& s : steps) {
    nlohmann::ordered_json j;
    j["step"] = s.step;
    j["x"] = vec_json(s.x);
    j["loss"] = number(s.loss);
    j["b_tilde"] = vec_json(s.b_tilde);
    j["delta_b_norm"] = number(s.delta_b_norm);
    j["log_bound"] = s.log_bound ? number(*s.log_bound) : nlohmann::ordered_json(nullptr);
    j["metrics"] = {{"distance", number(s.metrics.distance)},
                    {"cosine", number(s.metrics.cosine)},
                    {"norm_ratio", number(s.metrics.norm_ratio)}};
    if (s.delta_b_data_norm) j["delta_b_data_norm"] = number(*s.delta_b_data_norm);
    if (s.delta_b_data_norm) {
      j["log_bound_data"] =
          s.log_bound_data ? number(*s.log_bound_data) : nlohmann::ordered_json(nullptr);
    }
    if (s.hypothesis_note) j["hypothesis_note"] = *s.hypothesis_note;
    arr.push_back(std::move(j));
  }
  return arr.dump(indent) + "\n";
}

}  // namespace softshift::icl
