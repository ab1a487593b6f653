// Copyright 2026 The Geosynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <utility>

#include "geosynth/errors.hpp"
#include "geosynth/kernels.hpp"
#include "geosynth/parallel.hpp"
#include "geosynth/risk.hpp"

namespace geosynth {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Log-likelihood in which point-mass factors outrank density factors.
struct LogLik {
  int masses = 0;
  double log = 0;
  bool zero = false;

  void add(double value, bool mass) {
    if (zero) return;
    if (!(value > 0)) {
      zero = true;
      return;
    }
    masses += mass ? 1 : 0;
    log += std::log(value);
  }
  void add(const LogLik& other) {
    if (zero) return;
    if (other.zero) {
      zero = true;
      return;
    }
    masses += other.masses;
    log += other.log;
  }
};

// Atoms and value range of one node under a hypothesis about the target.
struct Atoms {
  std::vector<double> values;
  double lo = kInf;
  double hi = -kInf;
};

class MixtureDensity {
 public:
  explicit MixtureDensity(double h) : h_(h) {}

  // Equal-weight mixture of kernels centred on `atoms`, each truncated to
  // [atoms.lo, atoms.hi], at y. Returns the value and whether it is a mass.
  std::pair<double, bool> operator()(const Atoms& atoms, double y) {
    const std::size_t n = atoms.values.size();
    if (n == 0) return {0.0, true};
    const double inv_n = 1.0 / static_cast<double>(n);
    if (h_ == 0 || !(atoms.lo < atoms.hi)) {
      std::size_t hits = 0;
      for (double a : atoms.values) hits += std::clamp(a, atoms.lo, atoms.hi) == y;
      return {static_cast<double>(hits) * inv_n, true};
    }
    if (y < atoms.lo || y > atoms.hi) return {0.0, false};
    std::vector<double>& w = scratch_;
    w.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double a = atoms.values[k];
      const double z = normal_cdf((atoms.hi - a) / h_) - normal_cdf((atoms.lo - a) / h_);
      w[k] = z > 0 ? 1.0 / z : 0.0;
    }
    const double s = kernels::weighted_gauss_sum(atoms.values, w, y,
                                                 -0.5 / (h_ * h_));
    return {s * inv_n / (h_ * std::sqrt(2.0 * std::numbers::pi)), false};
  }

 private:
  double h_;
  std::vector<double> scratch_;
};

bool is_redacted(const cart::CartTree& tree) {
  return tree.root().member_rows.empty();
}

// Shared, per-release state for geography posteriors.
struct GeoContext {
  const SyntheticRelease* release = nullptr;
  const Dataset* original = nullptr;
  std::size_t g1 = 0;
  std::size_t g2 = 0;
  bool g1_is_lon = true;
  double h1 = 0;
  double h2 = 0;
  std::shared_ptr<const cart::CartTree> t1;
  std::shared_ptr<const cart::CartTree> t2;
  std::optional<std::size_t> t2_g1_slot;

  GeoContext(const SyntheticRelease& rel, const Dataset& orig,
             const IntruderScenario& scenario)
      : release(&rel), original(&orig) {
    scenario.validate();
    const SynthesisPlan& plan = rel.plan;
    if (plan.order.size() < 2) {
      throw ConfigError("geography risk needs both coordinates synthesized");
    }
    const Schema& schema = orig.schema();
    g1 = schema.index_of(plan.order[0]);
    g2 = schema.index_of(plan.order[1]);
    const std::size_t lon = schema.longitude();
    const std::size_t lat = schema.latitude();
    if (!((g1 == lon && g2 == lat) || (g1 == lat && g2 == lon))) {
      throw ConfigError(
          "geography risk needs the coordinates as the first two planned "
          "variables");
    }
    g1_is_lon = g1 == lon;
    h1 = plan.bandwidth(plan.order[0]);
    h2 = plan.bandwidth(plan.order[1]);
    if (rel.datasets.empty()) throw ConfigError("release has no datasets");
    for (const auto& d : rel.datasets) {
      if (d.n_rows() != orig.n_rows()) {
        throw ConfigError("release and original differ in row count");
      }
    }
    if (scenario.knowledge == Knowledge::kHigh) {
      if (rel.trees.size() < 2 || !rel.trees[0] || !rel.trees[1]) {
        throw ConfigError("high-knowledge geography risk needs the trees");
      }
      t1 = rel.trees[0];
      t2 = rel.trees[1];
      if (is_redacted(*t1)) {
        t1 = std::make_shared<const cart::CartTree>(cart::refill_tree(*t1, orig));
      }
      if (is_redacted(*t2)) {
        t2 = std::make_shared<const cart::CartTree>(cart::refill_tree(*t2, orig));
      }
      t2_g1_slot = t2->predictor_slot(g1);
    }
  }

  double first(Point p) const { return g1_is_lon ? p.x : p.y; }
  double second(Point p) const { return g1_is_lon ? p.y : p.x; }
};

Point truth_of(const Dataset& ds, std::size_t row) {
  return record_location(ds, row);
}

std::vector<double> without_position(std::span<const double> values,
                                     std::size_t pos) {
  std::vector<double> out;
  out.reserve(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k != pos) out.push_back(values[k]);
  }
  return out;
}

std::size_t position_of(const cart::CartNode& node, std::size_t row) {
  const auto it = std::find(node.member_rows.begin(), node.member_rows.end(), row);
  if (it == node.member_rows.end()) return node.member_rows.size();
  return static_cast<std::size_t>(it - node.member_rows.begin());
}

// A node of the second tree with the target removed.
struct ReducedNode {
  Atoms atoms;
  double g1_lo = kInf;
  double g1_hi = -kInf;
};

std::vector<double> posterior_from(const std::vector<LogLik>& ll,
                                   const std::vector<double>& prior,
                                   bool& degenerate) {
  int best_masses = -1;
  double best_log = -kInf;
  for (std::size_t c = 0; c < ll.size(); ++c) {
    if (ll[c].zero || !(prior[c] > 0)) continue;
    if (ll[c].masses > best_masses) {
      best_masses = ll[c].masses;
      best_log = ll[c].log;
    } else if (ll[c].masses == best_masses) {
      best_log = std::max(best_log, ll[c].log);
    }
  }
  std::vector<double> w(ll.size(), 0.0);
  degenerate = best_masses < 0 || !std::isfinite(best_log);
  double total = 0;
  for (std::size_t c = 0; c < ll.size(); ++c) {
    if (degenerate) {
      w[c] = prior[c];
    } else if (!ll[c].zero && ll[c].masses == best_masses) {
      w[c] = prior[c] * std::exp(ll[c].log - best_log);
    }
    total += w[c];
  }
  for (double& x : w) x /= total;
  return w;
}

GeoPosterior high_posterior(const GeoContext& ctx, std::size_t i,
                            const IntruderScenario& scenario) {
  const Dataset& orig = *ctx.original;
  const Point truth = truth_of(orig, i);
  GeoPosterior post;
  if (scenario.prior.kind == PriorSpec::Kind::kEmpiricalSynthetic) {
    for (const auto& d : ctx.release->datasets) post.support.push_back(truth_of(d, i));
  } else {
    post.support = prior_grid(scenario.prior, truth);
  }
  if (post.support.empty()) throw ConfigError("prior support is empty");
  const std::size_t m = ctx.release->datasets.size();
  std::vector<double> y1(m);
  std::vector<double> y2(m);
  for (std::size_t l = 0; l < m; ++l) {
    y1[l] = ctx.release->datasets[l].value(i, ctx.g1);
    y2[l] = ctx.release->datasets[l].value(i, ctx.g2);
  }
  std::vector<double> record = orig.row(i);

  // First tree: the target's leaf is fixed.
  const cart::CartNode& leaf1 = ctx.t1->find_leaf(record);
  const std::size_t pos1 = position_of(leaf1, i);
  const std::vector<double> base1 = without_position(leaf1.values, pos1);
  double base1_lo = kInf;
  double base1_hi = -kInf;
  for (double v : base1) {
    base1_lo = std::min(base1_lo, v);
    base1_hi = std::max(base1_hi, v);
  }
  MixtureDensity f1(ctx.h1);
  MixtureDensity f2(ctx.h2);
  std::map<double, LogLik> ll1;

  // Second tree: nodes on the target's true path lose the target.
  std::set<int> true_path;
  for (int id : ctx.t2->path(record)) true_path.insert(id);
  std::map<int, ReducedNode> reduced;
  auto reduce = [&](int id) -> const ReducedNode& {
    auto it = reduced.find(id);
    if (it != reduced.end()) return it->second;
    const cart::CartNode& node = ctx.t2->node(id);
    ReducedNode r;
    const std::size_t pos =
        true_path.count(id) ? position_of(node, i) : node.member_rows.size();
    r.atoms.values = without_position(node.values, pos);
    for (double v : r.atoms.values) {
      r.atoms.lo = std::min(r.atoms.lo, v);
      r.atoms.hi = std::max(r.atoms.hi, v);
    }
    for (std::size_t k = 0; k < node.member_rows.size(); ++k) {
      if (k == pos) continue;
      const double v = orig.value(node.member_rows[k], ctx.g1);
      r.g1_lo = std::min(r.g1_lo, v);
      r.g1_hi = std::max(r.g1_hi, v);
    }
    return reduced.emplace(id, std::move(r)).first->second;
  };

  // Fallback chains of the synthetic records, leaf first.
  std::vector<std::vector<int>> chains(m);
  for (std::size_t l = 0; l < m; ++l) {
    std::vector<double> rec = record;
    rec[ctx.g1] = y1[l];
    int id = ctx.t2->find_leaf(rec).id;
    while (id >= 0) {
      chains[l].push_back(id);
      id = ctx.t2->node(id).parent;
    }
  }

  struct FirstState {
    std::set<int> path;
    std::vector<int> generating;
  };
  std::map<double, FirstState> states;
  auto state_for = [&](double c1) -> const FirstState& {
    auto it = states.find(c1);
    if (it != states.end()) return it->second;
    FirstState s;
    std::vector<double> rec = record;
    rec[ctx.g1] = c1;
    for (int id : ctx.t2->path(rec)) s.path.insert(id);
    s.generating.resize(m);
    for (std::size_t l = 0; l < m; ++l) {
      int chosen = 0;
      for (int id : chains[l]) {
        if (!ctx.t2_g1_slot) {
          chosen = id;
          break;
        }
        const ReducedNode& r = reduce(id);
        double lo = r.g1_lo;
        double hi = r.g1_hi;
        if (s.path.count(id)) {
          lo = std::min(lo, c1);
          hi = std::max(hi, c1);
        }
        if (y1[l] >= lo && y1[l] <= hi) {
          chosen = id;
          break;
        }
      }
      s.generating[l] = chosen;
    }
    return states.emplace(c1, std::move(s)).first->second;
  };

  Atoms work;
  std::vector<LogLik> ll(post.support.size());
  for (std::size_t c = 0; c < post.support.size(); ++c) {
    const double c1 = ctx.first(post.support[c]);
    const double c2 = ctx.second(post.support[c]);
    auto it1 = ll1.find(c1);
    if (it1 == ll1.end()) {
      work.values = base1;
      work.values.push_back(c1);
      work.lo = std::min(base1_lo, c1);
      work.hi = std::max(base1_hi, c1);
      LogLik part;
      for (std::size_t l = 0; l < m; ++l) {
        const auto [v, mass] = f1(work, y1[l]);
        part.add(v, mass);
      }
      it1 = ll1.emplace(c1, part).first;
    }
    LogLik total = it1->second;
    const FirstState& s = state_for(c1);
    for (std::size_t l = 0; l < m && !total.zero; ++l) {
      const int id = s.generating[l];
      const ReducedNode& r = reduce(id);
      work.values = r.atoms.values;
      work.lo = r.atoms.lo;
      work.hi = r.atoms.hi;
      if (s.path.count(id)) {
        work.values.push_back(c2);
        work.lo = std::min(work.lo, c2);
        work.hi = std::max(work.hi, c2);
      }
      const auto [v, mass] = f2(work, y2[l]);
      total.add(v, mass);
    }
    ll[c] = total;
  }
  const std::vector<double> prior(post.support.size(), 1.0);
  post.weights = posterior_from(ll, prior, post.degenerate);
  return post;
}

GeoPosterior low_posterior(const GeoContext& ctx, std::size_t i) {
  // Gauss-Hermite nodes and weights for exp(-x^2).
  static constexpr double kNodes[5] = {-2.0201828704560856, -0.9585724646138185,
                                       0.0, 0.9585724646138185,
                                       2.0201828704560856};
  static constexpr double kWeights[5] = {
      0.019953242059045913, 0.39361932315224116, 0.9453087204829419,
      0.39361932315224116, 0.019953242059045913};
  const double sd_lon = ctx.g1_is_lon ? ctx.h1 : ctx.h2;
  const double sd_lat = ctx.g1_is_lon ? ctx.h2 : ctx.h1;
  const std::size_t m = ctx.release->datasets.size();
  GeoPosterior post;
  const Extent domain{kRecodedRange, kRecodedRange};
  for (std::size_t l = 0; l < m; ++l) {
    const Point centre = truth_of(ctx.release->datasets[l], i);
    std::vector<Point> pts;
    std::vector<double> w;
    const int nx = sd_lon > 0 ? 5 : 1;
    const int ny = sd_lat > 0 ? 5 : 1;
    for (int a = 0; a < nx; ++a) {
      for (int b = 0; b < ny; ++b) {
        const double dx = nx == 1 ? 0.0 : std::sqrt(2.0) * sd_lon * kNodes[a];
        const double dy = ny == 1 ? 0.0 : std::sqrt(2.0) * sd_lat * kNodes[b];
        const Point p{centre.x + dx, centre.y + dy};
        if (!domain.contains(p) && !(dx == 0 && dy == 0)) continue;
        pts.push_back(p);
        w.push_back((nx == 1 ? 1.0 : kWeights[a]) * (ny == 1 ? 1.0 : kWeights[b]));
      }
    }
    double total = 0;
    for (double x : w) total += x;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      post.support.push_back(pts[k]);
      post.weights.push_back(w[k] / total / static_cast<double>(m));
    }
  }
  return post;
}

GeoPosterior posterior_for(const GeoContext& ctx, std::size_t target,
                           const IntruderScenario& scenario) {
  if (target >= ctx.original->n_rows()) {
    throw ConfigError("target row " + std::to_string(target) + " out of range");
  }
  return scenario.knowledge == Knowledge::kHigh
             ? high_posterior(ctx, target, scenario)
             : low_posterior(ctx, target);
}

}  // namespace

void IntruderScenario::validate() const {
  if (knowledge == Knowledge::kHigh && metadata_level == MetadataLevel::kEmpty) {
    throw ConfigError(
        "the high-knowledge scenario needs metadata level RULES_ONLY or FULL");
  }
  if (prior.kind == PriorSpec::Kind::kUniformGrid) {
    if (prior.nx < 1 || prior.ny < 1) throw ConfigError("prior grid needs nx, ny >= 1");
    if (!prior.extent && !(prior.window >= 0)) {
      throw ConfigError("prior window must be nonnegative");
    }
  }
}

std::vector<Point> prior_grid(const PriorSpec& prior, Point truth) {
  Extent e;
  if (prior.extent) {
    e = *prior.extent;
  } else {
    const double half = prior.window / 2;
    e = Extent{{truth.x - half, truth.x + half}, {truth.y - half, truth.y + half}};
  }
  auto axis = [](Interval iv, int n, double centre) {
    std::vector<double> out;
    if (n == 1) {
      out.push_back(iv.lo + iv.width() / 2);
      return out;
    }
    for (int k = 0; k < n; ++k) {
      out.push_back(iv.lo + iv.width() * k / (n - 1));
    }
    // The window midpoint is placed on the truth exactly.
    if (n % 2 == 1 && std::isfinite(centre)) out[static_cast<std::size_t>(n / 2)] = centre;
    return out;
  };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto xs = axis(e.x, prior.nx, prior.extent ? nan : truth.x);
  const auto ys = axis(e.y, prior.ny, prior.extent ? nan : truth.y);
  const Extent domain{kRecodedRange, kRecodedRange};
  std::vector<Point> out;
  for (double x : xs) {
    for (double y : ys) {
      const Point p{x, y};
      if (domain.contains(p)) out.push_back(p);
    }
  }
  return out;
}

GeoPosterior geo_posterior(const SyntheticRelease& release,
                           const Dataset& original, std::size_t target,
                           const IntruderScenario& scenario) {
  const GeoContext ctx(release, original, scenario);
  return posterior_for(ctx, target, scenario);
}

GeoRiskRecord geo_risk(const GeoPosterior& posterior, Point truth,
                       const Dataset& original, std::int64_t record_id) {
  const std::size_t n = posterior.support.size();
  if (n == 0 || posterior.weights.size() != n) {
    throw ConfigError("posterior support and weights differ in size");
  }
  std::vector<double> xs(n);
  std::vector<double> ys(n);
  for (std::size_t k = 0; k < n; ++k) {
    xs[k] = posterior.support[k].x;
    ys[k] = posterior.support[k].y;
  }
  const double ms = kernels::weighted_sq_dist(xs, ys, posterior.weights, truth.x, truth.y);
  GeoRiskRecord out;
  out.record_id = record_id;
  out.r1 = std::sqrt(std::max(ms, 0.0));
  const Schema& schema = original.schema();
  out.r2 = kernels::count_within(original.column(schema.longitude()),
                                 original.column(schema.latitude()), truth.x,
                                 truth.y, out.r1 * out.r1);
  return out;
}

std::vector<GeoRiskRecord> geo_risk_all(const SyntheticRelease& release,
                                        const Dataset& original,
                                        const IntruderScenario& scenario,
                                        std::span<const std::size_t> rows,
                                        std::size_t threads) {
  const GeoContext ctx(release, original, scenario);
  std::vector<std::size_t> targets(rows.begin(), rows.end());
  if (targets.empty()) {
    targets.resize(original.n_rows());
    for (std::size_t i = 0; i < targets.size(); ++i) targets[i] = i;
  }
  std::vector<GeoRiskRecord> out(targets.size());
  parallel_for(targets.size(), threads, [&](std::size_t k) {
    const std::size_t i = targets[k];
    const GeoPosterior post = posterior_for(ctx, i, scenario);
    out[k] = geo_risk(post, truth_of(original, i), original, original.record_id(i));
  });
  return out;
}

QuantileSummary quantile_summary(std::vector<double> values) {
  if (values.empty()) throw ConfigError("quantile summary of no values");
  std::sort(values.begin(), values.end());
  auto q = [&](double p) {
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return {q(0.0), q(0.25), q(0.5)};
}

}  // namespace geosynth
