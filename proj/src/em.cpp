#include "groupanno/em.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "groupanno/mathutil.hpp"
#include "groupanno/parallel.hpp"

namespace groupanno {

namespace {

/// Classifier steps use learning_rate * gradient / (damping * N). The extra
/// damping keeps the classifier from racing ahead of the annotator-parameter
/// updates, which otherwise erases the advantage of modelling annotators at
/// all on the harder shapes.
constexpr double kClassifierStepDamping = 2.0;

/// Per-parameter cap on each group-level update (grand means and effects).
/// Near the prior-mean clamp the digamma terms make the objective stiff
/// enough that an uncapped step overshoots and oscillates; the cap is
/// inactive near equilibrium.
constexpr double kGroupStepCap = 0.01;

/// Initial sensitivity/specificity for every annotator and for the group
/// grand means: mildly better than chance.
constexpr double kInitBias = 0.7;

/// Dataset re-indexed with dense integer annotator ids for the inner loops.
struct DenseView {
  std::size_t n = 0;  // instances
  std::size_t r = 0;  // annotators appearing in the data
  std::size_t p = 0;  // group categories (0 when groups are unused)
  std::size_t d = 0;  // feature dimension
  std::vector<std::string> annotator_ids;             // dense index -> id (sorted)
  std::vector<std::vector<int>> groups;               // dense annotator -> groups (may be empty)
  std::vector<const std::vector<double>*> features;   // per instance
  std::vector<std::vector<std::pair<std::size_t, int>>> annotations;  // (dense annotator, label)
};

DenseView build_view(const AnnotationDataset& dataset) {
  DenseView v;
  v.n = dataset.instances.size();
  v.d = dataset.feature_dim;
  std::map<std::string, std::size_t> index;
  for (const Instance& inst : dataset.instances) {
    for (const Annotation& ann : inst.annotations) index.emplace(ann.annotator_id, 0);
  }
  v.annotator_ids.reserve(index.size());
  for (auto& [id, dense] : index) {
    dense = v.annotator_ids.size();
    v.annotator_ids.push_back(id);
  }
  v.r = v.annotator_ids.size();
  v.features.reserve(v.n);
  v.annotations.reserve(v.n);
  for (const Instance& inst : dataset.instances) {
    if (inst.features.size() != v.d) {
      throw std::invalid_argument("instance '" + inst.instance_id + "' has " +
                                  std::to_string(inst.features.size()) + " features, expected " +
                                  std::to_string(v.d));
    }
    v.features.push_back(&inst.features);
    std::vector<std::pair<std::size_t, int>> anns;
    anns.reserve(inst.annotations.size());
    for (const Annotation& ann : inst.annotations) {
      anns.emplace_back(index.at(ann.annotator_id), ann.label);
    }
    v.annotations.push_back(std::move(anns));
  }
  return v;
}

void attach_groups(DenseView& v, const AnnotatorTable& table) {
  v.p = table.num_categories;
  v.groups.resize(v.r);
  for (std::size_t r = 0; r < v.r; ++r) {
    auto it = table.annotators.find(v.annotator_ids[r]);
    if (it == table.annotators.end()) {
      throw std::invalid_argument("annotator '" + v.annotator_ids[r] +
                                  "' is missing from the annotator table");
    }
    if (it->second.size() != v.p) {
      throw std::invalid_argument("annotator '" + v.annotator_ids[r] + "' has " +
                                  std::to_string(it->second.size()) + " group entries, expected " +
                                  std::to_string(v.p));
    }
    v.groups[r] = it->second;
  }
}

/// Model parameters in dense form. Annotator parameters live in logit space;
/// group means/effects in probability space, exactly as updated.
struct DenseParams {
  std::vector<double> theta_a, theta_b;  // per dense annotator
  double u_a = kInitBias, u_b = kInitBias;
  std::vector<std::array<double, 2>> eff_a, eff_b;  // per category
  std::vector<double> w;
  double b = 0.0;
};

DenseParams init_dense(const DenseView& v) {
  DenseParams params;
  params.theta_a.assign(v.r, logit(kInitBias));
  params.theta_b.assign(v.r, logit(kInitBias));
  params.eff_a.assign(v.p, {0.0, 0.0});
  params.eff_b.assign(v.p, {0.0, 0.0});
  params.w.assign(v.d, 0.0);
  return params;
}

DenseParams to_dense(const EmState& state, const DenseView& v) {
  DenseParams params;
  params.theta_a.reserve(v.r);
  params.theta_b.reserve(v.r);
  for (const std::string& id : v.annotator_ids) {
    auto ia = state.bias.annot_alpha.find(id);
    auto ib = state.bias.annot_beta.find(id);
    if (ia == state.bias.annot_alpha.end() || ib == state.bias.annot_beta.end()) {
      throw std::invalid_argument("state has no bias parameters for annotator '" + id + "'");
    }
    params.theta_a.push_back(logit(clamp_prob(ia->second)));
    params.theta_b.push_back(logit(clamp_prob(ib->second)));
  }
  params.u_a = state.bias.u_alpha;
  params.u_b = state.bias.u_beta;
  const std::size_t p = state.bias.group_effects_alpha.size();
  params.eff_a.assign(p, {0.0, 0.0});
  params.eff_b.assign(p, {0.0, 0.0});
  for (std::size_t c = 0; c < p; ++c) {
    for (int g = 0; g < 2; ++g) {
      params.eff_a[c][static_cast<std::size_t>(g)] = state.bias.group_effects_alpha[c][static_cast<std::size_t>(g)];
      params.eff_b[c][static_cast<std::size_t>(g)] = state.bias.group_effects_beta[c][static_cast<std::size_t>(g)];
    }
  }
  params.w = state.classifier.weights;
  params.b = state.classifier.intercept;
  return params;
}

/// Per-annotator log-probability tables for the current parameters.
struct LogTables {
  std::vector<double> log_a, log_1ma;  // ln alpha_r, ln(1 - alpha_r)
  std::vector<double> log_b, log_1mb;  // ln beta_r,  ln(1 - beta_r)
  std::vector<double> alpha, beta;
};

LogTables make_tables(const DenseParams& params) {
  const std::size_t r = params.theta_a.size();
  LogTables t;
  t.log_a.resize(r);
  t.log_1ma.resize(r);
  t.log_b.resize(r);
  t.log_1mb.resize(r);
  t.alpha.resize(r);
  t.beta.resize(r);
  for (std::size_t i = 0; i < r; ++i) {
    const double a = clamp_prob(sigmoid(params.theta_a[i]));
    const double b = clamp_prob(sigmoid(params.theta_b[i]));
    t.alpha[i] = a;
    t.beta[i] = b;
    t.log_a[i] = std::log(a);
    t.log_1ma[i] = std::log1p(-a);
    t.log_b[i] = std::log(b);
    t.log_1mb[i] = std::log1p(-b);
  }
  return t;
}

double classifier_score(const DenseParams& params, const std::vector<double>& x) {
  double score = params.b;
  for (std::size_t j = 0; j < x.size(); ++j) score += params.w[j] * x[j];
  return score;
}

void dense_estep(const DenseView& v, const DenseParams& params, std::vector<double>& mu,
                 bool parallel) {
  const LogTables t = make_tables(params);
  mu.resize(v.n);
  const auto body = [&](std::size_t i) {
    double log_a = 0.0;
    double log_b = 0.0;
    for (const auto& [r, z] : v.annotations[i]) {
      if (z == 1) {
        log_a += t.log_a[r];
        log_b += t.log_1mb[r];
      } else {
        log_a += t.log_1ma[r];
        log_b += t.log_b[r];
      }
    }
    const double p = clamp_prob(sigmoid(classifier_score(params, *v.features[i])));
    mu[i] = clamp_prob(sigmoid(log_a + logit(p) - log_b));
  };
  if (parallel) {
    parallel_for(v.n, body);
  } else {
    serial_for(v.n, body);
  }
}

/// Raw prior means per annotator, plus the clamped values actually used.
struct PriorMeans {
  std::vector<double> raw_a, raw_b;
  std::vector<double> m_a, m_b;
};

PriorMeans prior_means(const DenseView& v, const DenseParams& params, double eps) {
  PriorMeans m;
  m.raw_a.resize(v.r);
  m.raw_b.resize(v.r);
  m.m_a.resize(v.r);
  m.m_b.resize(v.r);
  for (std::size_t r = 0; r < v.r; ++r) {
    double ra = params.u_a;
    double rb = params.u_b;
    for (std::size_t c = 0; c < v.p; ++c) {
      const auto g = static_cast<std::size_t>(v.groups[r][c]);
      ra += params.eff_a[c][g];
      rb += params.eff_b[c][g];
    }
    m.raw_a[r] = ra;
    m.raw_b[r] = rb;
    m.m_a[r] = clamp(ra, eps, 1.0 - eps);
    m.m_b[r] = clamp(rb, eps, 1.0 - eps);
  }
  return m;
}

/// Gradients of the MAP objective, dense form. Annotator gradients are in
/// logit space; group-level entries are the raw h-sums (the true gradient is
/// concentration times these).
struct DenseGrads {
  std::vector<double> grad_w;
  double grad_b = 0.0;
  std::vector<double> grad_theta_a, grad_theta_b;
  double h_sum_a = 0.0, h_sum_b = 0.0;
  std::vector<std::array<double, 2>> h_grp_a, h_grp_b;
};

DenseGrads compute_grads(const DenseView& v, const DenseParams& params,
                         const std::vector<double>& mu, const EmConfig& config, bool parallel) {
  const LogTables t = make_tables(params);
  const std::size_t r = v.r;
  const std::size_t d = v.d;
  // Accumulator layout: [C1a (r), C0a (r), C0b (r), C1b (r), grad_w (d), grad_b]
  const std::size_t dim = 4 * r + d + 1;
  const auto add = [&](std::size_t i, double* out) {
    const double mui = mu[i];
    for (const auto& [rr, z] : v.annotations[i]) {
      if (z == 1) {
        out[rr] += mui;              // C1a: mu * z
        out[3 * r + rr] += 1.0 - mui;  // C1b: (1-mu) * z
      } else {
        out[r + rr] += mui;            // C0a: mu * (1-z)
        out[2 * r + rr] += 1.0 - mui;  // C0b: (1-mu) * (1-z)
      }
    }
    const double p = clamp_prob(sigmoid(classifier_score(params, *v.features[i])));
    const double resid = mui - p;
    const std::vector<double>& x = *v.features[i];
    for (std::size_t j = 0; j < d; ++j) out[4 * r + j] += resid * x[j];
    out[4 * r + d] += resid;
  };
  const std::vector<double> acc = parallel ? blocked_accumulate(v.n, dim, add)
                                           : blocked_accumulate_serial(v.n, dim, add);

  DenseGrads g;
  g.grad_w.assign(acc.begin() + static_cast<std::ptrdiff_t>(4 * r),
                  acc.begin() + static_cast<std::ptrdiff_t>(4 * r + d));
  for (std::size_t j = 0; j < d; ++j) g.grad_w[j] -= config.l2_classifier * params.w[j];
  g.grad_b = acc[4 * r + d];
  g.grad_theta_a.resize(r);
  g.grad_theta_b.resize(r);
  g.h_grp_a.assign(v.p, {0.0, 0.0});
  g.h_grp_b.assign(v.p, {0.0, 0.0});

  const double s = config.concentration;
  const double eps = config.clamp_eps;
  PriorMeans pm;
  if (config.group_model_enabled) pm = prior_means(v, params, eps);
  for (std::size_t rr = 0; rr < r; ++rr) {
    const double c1a = acc[rr];
    const double c0a = acc[r + rr];
    const double c0b = acc[2 * r + rr];
    const double c1b = acc[3 * r + rr];
    const double al = t.alpha[rr];
    const double be = t.beta[rr];
    if (config.group_model_enabled) {
      const double ma = pm.m_a[rr];
      const double mb = pm.m_b[rr];
      g.grad_theta_a[rr] = (c1a + s * ma - 1.0) * (1.0 - al) - (c0a + s * (1.0 - ma) - 1.0) * al;
      g.grad_theta_b[rr] = (c0b + s * mb - 1.0) * (1.0 - be) - (c1b + s * (1.0 - mb) - 1.0) * be;
      const bool live_a = pm.raw_a[rr] > eps && pm.raw_a[rr] < 1.0 - eps;
      const bool live_b = pm.raw_b[rr] > eps && pm.raw_b[rr] < 1.0 - eps;
      const double ha =
          live_a ? logit(al) - digamma(s * ma) + digamma(s * (1.0 - ma)) : 0.0;
      const double hb =
          live_b ? logit(be) - digamma(s * mb) + digamma(s * (1.0 - mb)) : 0.0;
      g.h_sum_a += ha;
      g.h_sum_b += hb;
      for (std::size_t c = 0; c < v.p; ++c) {
        const auto gg = static_cast<std::size_t>(v.groups[rr][c]);
        g.h_grp_a[c][gg] += ha;
        g.h_grp_b[c][gg] += hb;
      }
    } else {
      g.grad_theta_a[rr] = c1a * (1.0 - al) - c0a * al;
      g.grad_theta_b[rr] = c0b * (1.0 - be) - c1b * be;
    }
  }
  return g;
}

/// Apply one round of gradient-ascent updates (the M-step update rule).
void apply_updates(const DenseView& v, DenseParams& params, const DenseGrads& g,
                   const EmConfig& config) {
  const double lr = config.learning_rate;
  for (std::size_t r = 0; r < v.r; ++r) {
    params.theta_a[r] += lr * g.grad_theta_a[r];
    params.theta_b[r] += lr * g.grad_theta_b[r];
  }
  const double n = static_cast<double>(std::max<std::size_t>(v.n, 1));
  const double cscale = lr / (kClassifierStepDamping * n);
  for (std::size_t j = 0; j < v.d; ++j) params.w[j] += cscale * g.grad_w[j];
  params.b += cscale * g.grad_b;
  if (config.group_model_enabled && v.r > 0) {
    const double rr = static_cast<double>(v.r);
    const auto step = [&](double h_sum) {
      return clamp(lr * h_sum / rr, -kGroupStepCap, kGroupStepCap);
    };
    params.u_a += step(g.h_sum_a);
    params.u_b += step(g.h_sum_b);
    for (std::size_t c = 0; c < v.p; ++c) {
      for (std::size_t gg = 0; gg < 2; ++gg) {
        params.eff_a[c][gg] += step(g.h_grp_a[c][gg]);
        params.eff_b[c][gg] += step(g.h_grp_b[c][gg]);
      }
    }
  }
}

double dense_objective(const DenseView& v, const DenseParams& params,
                       const std::vector<double>& mu, const EmConfig& config, bool parallel) {
  const LogTables t = make_tables(params);
  const auto add = [&](std::size_t i, double* out) {
    double log_a = 0.0;
    double log_b = 0.0;
    for (const auto& [r, z] : v.annotations[i]) {
      if (z == 1) {
        log_a += t.log_a[r];
        log_b += t.log_1mb[r];
      } else {
        log_a += t.log_1ma[r];
        log_b += t.log_b[r];
      }
    }
    const double p = clamp_prob(sigmoid(classifier_score(params, *v.features[i])));
    const double mui = mu[i];
    out[0] += mui * (std::log(p) + log_a) + (1.0 - mui) * (std::log1p(-p) + log_b);
  };
  double obj = (parallel ? blocked_accumulate(v.n, 1, add)
                         : blocked_accumulate_serial(v.n, 1, add))[0];
  if (config.group_model_enabled) {
    const double s = config.concentration;
    const PriorMeans pm = prior_means(v, params, config.clamp_eps);
    for (std::size_t r = 0; r < v.r; ++r) {
      obj += log_beta_pdf(t.alpha[r], s * pm.m_a[r], s * (1.0 - pm.m_a[r]));
      obj += log_beta_pdf(t.beta[r], s * pm.m_b[r], s * (1.0 - pm.m_b[r]));
    }
  }
  double w_sq = 0.0;
  for (double wj : params.w) w_sq += wj * wj;
  obj -= 0.5 * config.l2_classifier * w_sq;
  return obj;
}

std::vector<double> initial_mu(const DenseView& v) {
  std::vector<double> mu(v.n, 0.5);
  for (std::size_t i = 0; i < v.n; ++i) {
    const auto& anns = v.annotations[i];
    if (anns.empty()) continue;
    double sum = 0.0;
    for (const auto& [r, z] : anns) {
      (void)r;
      sum += z;
    }
    mu[i] = sum / static_cast<double>(anns.size());
  }
  return mu;
}

void store_posteriors(const AnnotationDataset& dataset, const std::vector<double>& mu,
                      PosteriorLabels& out) {
  out.mu.clear();
  out.hard.clear();
  for (std::size_t i = 0; i < dataset.instances.size(); ++i) {
    out.set(dataset.instances[i].instance_id, mu[i]);
  }
}

}  // namespace

EmState init_state(const AnnotationDataset& dataset, const AnnotatorTable& table,
                   const EmConfig& config) {
  DenseView v = build_view(dataset);
  attach_groups(v, table);
  const DenseParams params = init_dense(v);
  EmState state;
  state.classifier.weights.assign(dataset.feature_dim, 0.0);
  state.classifier.intercept = 0.0;
  state.bias.u_alpha = params.u_a;
  state.bias.u_beta = params.u_b;
  state.bias.group_effects_alpha.assign(v.p, std::vector<double>(2, 0.0));
  state.bias.group_effects_beta.assign(v.p, std::vector<double>(2, 0.0));
  for (const std::string& id : v.annotator_ids) {
    state.bias.annot_alpha[id] = kInitBias;
    state.bias.annot_beta[id] = kInitBias;
  }
  state.bias.concentration = config.concentration;
  store_posteriors(dataset, initial_mu(v), state.posteriors);
  return state;
}

LikelihoodTerms likelihood_terms(const EmState& state, const Instance& instance) {
  LikelihoodTerms terms;
  double score = state.classifier.intercept;
  if (instance.features.size() != state.classifier.weights.size()) {
    throw std::invalid_argument("instance '" + instance.instance_id +
                                "' feature dimension does not match the classifier");
  }
  for (std::size_t j = 0; j < instance.features.size(); ++j) {
    score += state.classifier.weights[j] * instance.features[j];
  }
  terms.p = clamp_prob(sigmoid(score));
  for (const Annotation& ann : instance.annotations) {
    auto ia = state.bias.annot_alpha.find(ann.annotator_id);
    auto ib = state.bias.annot_beta.find(ann.annotator_id);
    if (ia == state.bias.annot_alpha.end() || ib == state.bias.annot_beta.end()) {
      throw std::invalid_argument("no bias parameters for annotator '" + ann.annotator_id + "'");
    }
    const double a = clamp_prob(ia->second);
    const double b = clamp_prob(ib->second);
    if (ann.label == 1) {
      terms.log_a += std::log(a);
      terms.log_b += std::log1p(-b);
    } else {
      terms.log_a += std::log1p(-a);
      terms.log_b += std::log(b);
    }
  }
  return terms;
}

void e_step(EmState& state, const AnnotationDataset& dataset) {
  const DenseView v = build_view(dataset);
  const DenseParams params = to_dense(state, v);
  std::vector<double> mu;
  dense_estep(v, params, mu, /*parallel=*/true);
  store_posteriors(dataset, mu, state.posteriors);
}

double map_objective(const EmState& state, const AnnotationDataset& dataset,
                     const AnnotatorTable& table, const EmConfig& config) {
  DenseView v = build_view(dataset);
  if (config.group_model_enabled) attach_groups(v, table);
  const DenseParams params = to_dense(state, v);
  std::vector<double> mu(v.n);
  for (std::size_t i = 0; i < v.n; ++i) {
    auto it = state.posteriors.mu.find(dataset.instances[i].instance_id);
    if (it == state.posteriors.mu.end()) {
      throw std::invalid_argument("no posterior for instance '" +
                                  dataset.instances[i].instance_id + "'");
    }
    mu[i] = it->second;
  }
  return dense_objective(v, params, mu, config, /*parallel=*/true);
}

MapGradients map_gradients(const EmState& state, const AnnotationDataset& dataset,
                           const AnnotatorTable& table, const EmConfig& config) {
  DenseView v = build_view(dataset);
  if (config.group_model_enabled) attach_groups(v, table);
  const DenseParams params = to_dense(state, v);
  std::vector<double> mu(v.n);
  for (std::size_t i = 0; i < v.n; ++i) {
    mu[i] = state.posteriors.mu.at(dataset.instances[i].instance_id);
  }
  const DenseGrads g = compute_grads(v, params, mu, config, /*parallel=*/true);

  MapGradients out;
  out.grad_weights = g.grad_w;
  out.grad_intercept = g.grad_b;
  for (std::size_t r = 0; r < v.r; ++r) {
    out.grad_logit_alpha[v.annotator_ids[r]] = g.grad_theta_a[r];
    out.grad_logit_beta[v.annotator_ids[r]] = g.grad_theta_b[r];
  }
  const std::size_t p = table.num_categories;
  out.grad_effects_alpha.assign(p, std::vector<double>(2, 0.0));
  out.grad_effects_beta.assign(p, std::vector<double>(2, 0.0));
  if (config.group_model_enabled) {
    const double s = config.concentration;
    out.grad_u_alpha = s * g.h_sum_a;
    out.grad_u_beta = s * g.h_sum_b;
    for (std::size_t c = 0; c < v.p; ++c) {
      for (std::size_t gg = 0; gg < 2; ++gg) {
        out.grad_effects_alpha[c][gg] = s * g.h_grp_a[c][gg];
        out.grad_effects_beta[c][gg] = s * g.h_grp_b[c][gg];
      }
    }
  }
  return out;
}

void m_step(EmState& state, const AnnotationDataset& dataset, const AnnotatorTable& table,
            const EmConfig& config) {
  DenseView v = build_view(dataset);
  if (config.group_model_enabled) attach_groups(v, table);
  DenseParams params = to_dense(state, v);
  std::vector<double> mu(v.n);
  for (std::size_t i = 0; i < v.n; ++i) {
    mu[i] = state.posteriors.mu.at(dataset.instances[i].instance_id);
  }
  const DenseGrads g = compute_grads(v, params, mu, config, config.use_parallel_kernels);
  apply_updates(v, params, g, config);

  state.classifier.weights = params.w;
  state.classifier.intercept = params.b;
  state.bias.u_alpha = params.u_a;
  state.bias.u_beta = params.u_b;
  for (std::size_t c = 0; c < params.eff_a.size(); ++c) {
    for (std::size_t gg = 0; gg < 2; ++gg) {
      state.bias.group_effects_alpha[c][gg] = params.eff_a[c][gg];
      state.bias.group_effects_beta[c][gg] = params.eff_b[c][gg];
    }
  }
  for (std::size_t r = 0; r < v.r; ++r) {
    state.bias.annot_alpha[v.annotator_ids[r]] = clamp_prob(sigmoid(params.theta_a[r]));
    state.bias.annot_beta[v.annotator_ids[r]] = clamp_prob(sigmoid(params.theta_b[r]));
  }
  state.bias.concentration = config.concentration;
}

EmState run(const AnnotationDataset& dataset, const AnnotatorTable& table, const EmConfig& config) {
  DenseView v = build_view(dataset);
  if (config.group_model_enabled) attach_groups(v, table);
  DenseParams params = init_dense(v);
  const bool par = config.use_parallel_kernels;

  std::vector<double> mu = initial_mu(v);
  std::vector<double> trace;
  trace.reserve(config.epochs);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    dense_estep(v, params, mu, par);
    for (std::size_t k = 0; k < config.m_steps_per_epoch; ++k) {
      const DenseGrads g = compute_grads(v, params, mu, config, par);
      apply_updates(v, params, g, config);
    }
    trace.push_back(dense_objective(v, params, mu, config, par));
  }
  // Refresh posteriors so they reflect the final parameters.
  dense_estep(v, params, mu, par);

  EmState state;
  state.classifier.weights = params.w;
  state.classifier.intercept = params.b;
  state.bias.u_alpha = params.u_a;
  state.bias.u_beta = params.u_b;
  state.bias.group_effects_alpha.assign(params.eff_a.size(), std::vector<double>(2, 0.0));
  state.bias.group_effects_beta.assign(params.eff_b.size(), std::vector<double>(2, 0.0));
  for (std::size_t c = 0; c < params.eff_a.size(); ++c) {
    for (std::size_t gg = 0; gg < 2; ++gg) {
      state.bias.group_effects_alpha[c][gg] = params.eff_a[c][gg];
      state.bias.group_effects_beta[c][gg] = params.eff_b[c][gg];
    }
  }
  for (std::size_t r = 0; r < v.r; ++r) {
    state.bias.annot_alpha[v.annotator_ids[r]] = clamp_prob(sigmoid(params.theta_a[r]));
    state.bias.annot_beta[v.annotator_ids[r]] = clamp_prob(sigmoid(params.theta_b[r]));
  }
  state.bias.concentration = config.concentration;
  store_posteriors(dataset, mu, state.posteriors);
  state.objective_trace = std::move(trace);
  return state;
}

GroupBiasSummary report_group_bias(const EmState& state, const AnnotatorTable& table) {
  const std::size_t p = table.num_categories;
  GroupBiasSummary summary;
  summary.est_alpha.assign(p, std::vector<double>(2, std::nan("")));
  summary.est_beta.assign(p, std::vector<double>(2, std::nan("")));
  for (std::size_t c = 0; c < p; ++c) {
    for (std::size_t g = 0; g < 2; ++g) {
      double sum_a = 0.0;
      double sum_b = 0.0;
      std::size_t count = 0;
      for (const auto& [id, groups] : table.annotators) {
        auto ia = state.bias.annot_alpha.find(id);
        if (ia == state.bias.annot_alpha.end()) continue;  // annotator never fitted
        if (groups.size() != p) continue;
        if (static_cast<std::size_t>(groups[c]) != g) continue;
        sum_a += ia->second;
        sum_b += state.bias.annot_beta.at(id);
        ++count;
      }
      if (count > 0) {
        summary.est_alpha[c][g] = sum_a / static_cast<double>(count);
        summary.est_beta[c][g] = sum_b / static_cast<double>(count);
      }
    }
  }
  return summary;
}

}  // namespace groupanno
