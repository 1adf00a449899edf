#include "experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include "error.hpp"
#include "train.hpp"

namespace gvpnn {

namespace {

double rel_dev(const Tensor& test, const Tensor& base) {
  return max_abs_diff(test, base) / std::max(max_abs(base), 1e-12);
}

double rel_dev(const std::vector<double>& test, const std::vector<double>& base) {
  require(test.size() == base.size(), "rel_dev: size mismatch");
  double diff = 0.0, scale = 1e-12;
  for (std::size_t i = 0; i < test.size(); ++i) {
    diff = std::max(diff, std::fabs(test[i] - base[i]));
    scale = std::max(scale, std::fabs(base[i]));
  }
  return diff / scale;
}

Orthogonal3 seeded_orthogonal(std::uint64_t seed, bool reflection) {
  Orthogonal3 q = random_orthogonal(seed, false);  // det +1
  if (!reflection) return q;
  Tensor m = q.matrix();
  for (int r = 0; r < 3; ++r) m(r, 2) = -m(r, 2);  // flip one axis: det -1
  return Orthogonal3(std::move(m));
}

std::vector<AtomRecord> rigid_motion(const std::vector<AtomRecord>& atoms, const Orthogonal3* q,
                                     const std::array<double, 3>& t) {
  std::vector<AtomRecord> out = atoms;
  for (auto& atom : out) {
    std::array<double, 3> p = atom.pos;
    for (int r = 0; r < 3; ++r) {
      double x = q ? q->matrix()(r, 0) * p[0] + q->matrix()(r, 1) * p[1] + q->matrix()(r, 2) * p[2]
                   : p[std::size_t(r)];
      atom.pos[std::size_t(r)] = x + t[std::size_t(r)];
    }
  }
  return out;
}

// Max relative deviation between the transformed-graph trace and the
// baseline: scalar states and outputs invariant, vector states covariant.
double compare_traces(const GvpGnnModel::Trace& base, const GvpGnnModel::Trace& test,
                      const Orthogonal3* q, const std::vector<int>* perm) {
  double dev = rel_dev(test.output, base.output);
  require(test.layer_states.size() == base.layer_states.size(), "trace layer count mismatch");
  for (std::size_t l = 0; l < base.layer_states.size(); ++l) {
    const auto& bl = base.layer_states[l];
    const auto& tl = test.layer_states[l];
    require(bl.size() == tl.size(), "trace node count mismatch");
    for (std::size_t k = 0; k < tl.size(); ++k) {
      const SvTuple& b = bl[perm ? std::size_t((*perm)[k]) : k];
      const SvTuple& x = tl[k];
      dev = std::max(dev, rel_dev(x.s, b.s));
      dev = std::max(dev, rel_dev(x.V, q ? apply_orthogonal(*q, b.V) : b.V));
    }
  }
  return dev;
}

template <typename Fn>
void parallel_trials(int trials, int threads, Fn&& body) {
  if (threads <= 1 || trials <= 1) {
    for (int t = 0; t < trials; ++t) body(t);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int workers = std::min(threads, trials);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&]() {
      for (int t = next.fetch_add(1); t < trials; t = next.fetch_add(1)) body(t);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

std::string EquivarianceReport::to_text() const {
  std::string out;
  for (const auto& cls : classes) {
    out += cls.name + "_trials = " + std::to_string(cls.trials) + "\n";
    out += cls.name + "_max_dev = " + format_double(cls.max_dev) + "\n";
  }
  out += "max_dev = " + format_double(max_dev) + "\n";
  out += "worst_seed = " + std::to_string(worst_seed) + "\n";
  out += std::string("pass = ") + (pass ? "1" : "0") + "\n";
  return out;
}

EquivarianceReport check_equivariance(const GvpGnnModel& model, const MolGraph& graph,
                                      const EquivarianceOptions& opts) {
  require(opts.trials >= 1, "check_equivariance: trials must be >= 1");
  require(opts.tol > 0.0, "check_equivariance: tol must be positive");
  model.check_graph(graph);

  GvpGnnModel::Trace base = model.forward_trace(graph);
  if (opts.inject_bias != 0.0) base.layer_states[0][0].V(0, 0) += opts.inject_bias;

  // Schedule (mod 8): 0,2,4 rotation+translation; 1,3,5 reflection+translation;
  // 6 pure translation; 7 node permutation.
  enum ClassId { kRot = 0, kRefl = 1, kTrans = 2, kPerm = 3 };
  auto class_of = [](int t) {
    const int r = t % 8;
    if (r == 6) return kTrans;
    if (r == 7) return kPerm;
    return r % 2 == 0 ? kRot : kRefl;
  };

  std::vector<double> devs(static_cast<std::size_t>(opts.trials));
  parallel_trials(opts.trials, opts.threads, [&](int t) {
    const std::uint64_t seed_t = mix_seed(opts.seed, 0xE9u, std::uint64_t(t));
    std::mt19937_64 rng(seed_t);
    std::uniform_real_distribution<double> shift(-8.0, 8.0);
    const ClassId cls = class_of(t);
    if (cls == kPerm) {
      std::vector<int> perm(static_cast<std::size_t>(graph.num_nodes()));
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<AtomRecord> atoms(static_cast<std::size_t>(graph.num_nodes()));
      for (std::size_t k = 0; k < perm.size(); ++k)
        atoms[k] = graph.atoms[std::size_t(perm[k])];
      MolGraph g = featurize(std::move(atoms), graph.vocab, graph.cutoff, graph.rbf_count);
      devs[std::size_t(t)] = compare_traces(base, model.forward_trace(g), nullptr, &perm);
      return;
    }
    std::array<double, 3> shift_v{shift(rng), shift(rng), shift(rng)};
    if (cls == kTrans) {
      MolGraph g = featurize(rigid_motion(graph.atoms, nullptr, shift_v), graph.vocab,
                             graph.cutoff, graph.rbf_count);
      devs[std::size_t(t)] = compare_traces(base, model.forward_trace(g), nullptr, nullptr);
      return;
    }
    Orthogonal3 q = seeded_orthogonal(seed_t, cls == kRefl);
    MolGraph g = featurize(rigid_motion(graph.atoms, &q, shift_v), graph.vocab, graph.cutoff,
                           graph.rbf_count);
    devs[std::size_t(t)] = compare_traces(base, model.forward_trace(g), &q, nullptr);
  });

  EquivarianceReport report;
  report.classes = {{"rotation", 0, 0.0, 0},
                    {"reflection", 0, 0.0, 0},
                    {"translation", 0, 0.0, 0},
                    {"permutation", 0, 0.0, 0}};
  for (int t = 0; t < opts.trials; ++t) {
    TransformClassStat& cls = report.classes[std::size_t(class_of(t))];
    ++cls.trials;
    const std::uint64_t seed_t = mix_seed(opts.seed, 0xE9u, std::uint64_t(t));
    if (devs[std::size_t(t)] > cls.max_dev) {
      cls.max_dev = devs[std::size_t(t)];
      cls.worst_seed = seed_t;
    }
    if (devs[std::size_t(t)] > report.max_dev) {
      report.max_dev = devs[std::size_t(t)];
      report.worst_seed = seed_t;
    }
  }
  report.pass = report.max_dev <= opts.tol;
  return report;
}

double rigid_motion_max_deviation(const GvpGnnModel& model, const MolGraph& graph,
                                  int n_transforms, std::uint64_t seed, int threads) {
  require(n_transforms >= 1, "rigid_motion_max_deviation: need at least one transform");
  model.check_graph(graph);
  const GvpGnnModel::Trace base = model.forward_trace(graph);
  std::vector<double> devs(static_cast<std::size_t>(n_transforms));
  parallel_trials(n_transforms, threads, [&](int t) {
    const std::uint64_t seed_t = mix_seed(seed, 0x51u, std::uint64_t(t));
    std::mt19937_64 rng(seed_t);
    std::uniform_real_distribution<double> shift(-8.0, 8.0);
    std::array<double, 3> shift_v{shift(rng), shift(rng), shift(rng)};
    Orthogonal3 q = seeded_orthogonal(seed_t, t % 2 == 1);
    MolGraph g = featurize(rigid_motion(graph.atoms, &q, shift_v), graph.vocab, graph.cutoff,
                           graph.rbf_count);
    devs[std::size_t(t)] = compare_traces(base, model.forward_trace(g), &q, nullptr);
  });
  return *std::max_element(devs.begin(), devs.end());
}

std::vector<AtomRecord> random_atoms(int n, std::uint64_t seed) {
  require(n >= 1, "random_atoms: n must be >= 1");
  std::mt19937_64 rng(seed);
  // Box sized for an average radius-graph degree near 5 at the 4.5 A cutoff.
  const double cutoff = 4.5;
  const double sphere = 4.0 / 3.0 * 3.14159265358979323846 * cutoff * cutoff * cutoff;
  const double side = std::cbrt(double(n) * sphere / 5.0);
  const char* elements[] = {"C", "N", "O", "S"};
  std::uniform_real_distribution<double> coord(0.0, side);
  std::uniform_int_distribution<int> elem(0, 3);
  std::vector<AtomRecord> atoms;
  std::set<std::array<long, 3>> used;
  while (int(atoms.size()) < n) {
    AtomRecord a;
    a.element = elements[elem(rng)];
    std::array<long, 3> grid;
    for (int d = 0; d < 3; ++d) {
      // Snap to 1/64 A so grid-aligned translations stay exact in doubles.
      grid[std::size_t(d)] = std::lround(coord(rng) * 64.0);
      a.pos[std::size_t(d)] = double(grid[std::size_t(d)]) / 64.0;
    }
    if (!used.insert(grid).second) continue;  // coincident; redraw
    atoms.push_back(std::move(a));
  }
  return atoms;
}

// ---------------------------------------------------------------------------
// GVP stacks

GvpStack GvpStack::create(std::vector<GvpConfig> cfgs, std::uint64_t seed) {
  require(!cfgs.empty(), "GvpStack: empty config list");
  for (std::size_t k = 0; k + 1 < cfgs.size(); ++k) {
    require(cfgs[k].out_scalars == cfgs[k + 1].in_scalars &&
                cfgs[k].out_vectors == cfgs[k + 1].in_vectors,
            "GvpStack: layer " + std::to_string(k + 1) + " does not accept layer " +
                std::to_string(k) + " output");
  }
  GvpStack stack;
  stack.cfgs = std::move(cfgs);
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < stack.cfgs.size(); ++k)
    add_gvp_params(stack.params, "g" + std::to_string(k), stack.cfgs[k], rng);
  return stack;
}

SvIds GvpStack::build(Tape& tape, const ParamBinding& binding, SvIds in) const {
  SvIds x = in;
  for (std::size_t k = 0; k < cfgs.size(); ++k)
    x = gvp_forward(tape, cfgs[k], gvp_param_ids(params, binding, "g" + std::to_string(k)), x);
  return x;
}

SvTuple GvpStack::apply(const SvTuple& x) const {
  Tape tape;
  SvIds in;
  if (cfgs.front().in_scalars > 0) in.s = tape.leaf(x.s);
  if (cfgs.front().in_vectors > 0) in.V = tape.leaf(x.V);
  ParamBinding binding = bind_params(tape, params);
  SvIds out = build(tape, binding, in);
  SvTuple result;
  result.s = out.s != kNoVal ? tape.val(out.s) : Tensor(0, 1);
  result.V = out.V != kNoVal ? tape.val(out.V) : Tensor(0, 3);
  return result;
}

namespace {

struct VecDataset {
  std::vector<SvTuple> inputs;
  std::vector<Tensor> targets;  // mu x 3 each
};

// Mean squared error of the stack's vector output, summed over coordinates.
double eval_stack_total_mse(const GvpStack& stack, const VecDataset& data) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.inputs.size(); ++i) {
    SvTuple out = stack.apply(data.inputs[i]);
    const Tensor& t = data.targets[i];
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double d = out.V.data()[k] - t.data()[k];
      total += d * d;
    }
  }
  return total / double(data.inputs.size());
}

double eval_stack_coord_mae(const GvpStack& stack, const VecDataset& data) {
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < data.inputs.size(); ++i) {
    SvTuple out = stack.apply(data.inputs[i]);
    const Tensor& t = data.targets[i];
    for (std::size_t k = 0; k < t.size(); ++k) {
      total += std::fabs(out.V.data()[k] - t.data()[k]);
      ++count;
    }
  }
  return total / double(count);
}

// Mini-batch Adam on the stack's vector-output MSE. Logs the running train
// MSE every log_every steps when a curve sink is given.
void train_stack_vec_mse(GvpStack& stack, const VecDataset& data, int steps, int batch, double lr,
                         std::uint64_t seed, int log_every, std::vector<double>* curve) {
  require(!data.inputs.empty() && data.inputs.size() == data.targets.size(),
          "train_stack_vec_mse: bad dataset");
  AdamOptimizer adam(stack.params, lr, 0.9, 0.999, 1e-8);
  std::mt19937_64 shuffle_rng(mix_seed(seed, 0x7Au, 1));
  const int n = int(data.inputs.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  int cursor = n;  // forces an initial shuffle
  for (int step = 0; step < steps; ++step) {
    Grads total(stack.params);
    double batch_loss = 0.0;
    for (int b = 0; b < batch; ++b) {
      if (cursor >= n) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        cursor = 0;
      }
      const int idx = order[std::size_t(cursor++)];
      Tape tape;
      SvIds in;
      if (stack.cfgs.front().in_scalars > 0) in.s = tape.leaf(data.inputs[std::size_t(idx)].s);
      if (stack.cfgs.front().in_vectors > 0) in.V = tape.leaf(data.inputs[std::size_t(idx)].V);
      ParamBinding binding = bind_params(tape, stack.params);
      SvIds out = stack.build(tape, binding, in);
      ValId target = tape.leaf(data.targets[std::size_t(idx)]);
      ValId diff = tape.add(out.V, tape.scale(target, -1.0));
      ValId loss = tape.sum(tape.hadamard(diff, diff));
      batch_loss += tape.val(loss)(0, 0);
      total.accumulate(tape.backward(loss), binding, 1.0 / double(batch));
    }
    if (!std::isfinite(batch_loss))
      fail(Errc::numeric, "train_stack_vec_mse: non-finite loss at step " + std::to_string(step));
    adam.step(stack.params, total);
    if (curve && log_every > 0 && (step + 1) % log_every == 0)
      curve->push_back(batch_loss / double(batch));
  }
}

// Max equivariance deviation of the stack's vector output over orthogonal
// transforms with alternating determinant signs.
double stack_equivariance_dev(const GvpStack& stack, std::span<const SvTuple> inputs,
                              int n_transforms, std::uint64_t seed) {
  double dev = 0.0;
  for (const SvTuple& x : inputs) {
    SvTuple base = stack.apply(x);
    for (int t = 0; t < n_transforms; ++t) {
      Orthogonal3 q = seeded_orthogonal(mix_seed(seed, 0x3Fu, std::uint64_t(t)), t % 2 == 1);
      SvTuple rotated(x.s, apply_orthogonal(q, x.V));
      SvTuple out = stack.apply(rotated);
      dev = std::max(dev, rel_dev(out.V, apply_orthogonal(q, base.V)));
    }
  }
  return dev;
}

Tensor unit_gaussian_rows(int rows, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Tensor v(rows, 3);
  for (int r = 0; r < rows; ++r) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (int c = 0; c < 3; ++c) {
        v(r, c) = gauss(rng);
        norm += v(r, c) * v(r, c);
      }
      norm = std::sqrt(norm);
    } while (norm < 1e-3);
    for (int c = 0; c < 3; ++c) v(r, c) /= norm;
  }
  return v;
}

double det3_rows(const Tensor& v) {
  return v(0, 0) * (v(1, 1) * v(2, 2) - v(1, 2) * v(2, 1)) -
         v(0, 1) * (v(1, 0) * v(2, 2) - v(1, 2) * v(2, 0)) +
         v(0, 2) * (v(1, 0) * v(2, 1) - v(1, 1) * v(2, 0));
}

}  // namespace

std::string GateDemoResult::to_text() const {
  std::string out;
  out += "var_target = " + format_double(var_target) + "\n";
  out += "mse_gated = " + format_double(mse_gated) + "\n";
  out += "mse_ungated = " + format_double(mse_ungated) + "\n";
  out += "gated_threshold = " + format_double(0.1 * var_target) + "\n";
  out += "ungated_threshold = " + format_double(0.9 * var_target) + "\n";
  out += std::string("ungated_scalar_grad_zero = ") + (ungated_scalar_grad_zero ? "1" : "0") + "\n";
  out += "steps = " + std::to_string(steps) + "\n";
  out += std::string("pass = ") + (pass ? "1" : "0") + "\n";
  return out;
}

GateDemoResult run_demo_gate(std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed, 0xA1u, 0));
  const Tensor v_fixed = unit_gaussian_rows(4, rng);

  auto make_set = [&](int count) {
    VecDataset data;
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int i = 0; i < count; ++i) {
      const double s = unit(rng);
      data.inputs.emplace_back(Tensor::scalar(s), v_fixed);
      Tensor target(1, 3);
      for (int c = 0; c < 3; ++c) target(0, c) = s * v_fixed(0, c);
      data.targets.push_back(std::move(target));
    }
    return data;
  };
  VecDataset train = make_set(256);
  VecDataset test = make_set(256);

  auto stack_cfgs = [&](GvpVariant variant) {
    GvpConfig a{1, 4, 16, 8};
    GvpConfig b{16, 8, 16, 8};
    GvpConfig c{16, 8, 1, 1};
    a.variant = b.variant = c.variant = variant;
    return std::vector<GvpConfig>{a, b, c};
  };
  GvpStack gated = GvpStack::create(stack_cfgs(GvpVariant::kGated), mix_seed(seed, 0xA2u, 0));
  GvpStack ungated =
      GvpStack::create(stack_cfgs(GvpVariant::kOriginal), mix_seed(seed, 0xA2u, 1));

  GateDemoResult result;
  result.steps = 4000;
  train_stack_vec_mse(gated, train, result.steps, 32, 3e-3, mix_seed(seed, 0xA3u, 0), 100,
                      &result.gated_curve);
  train_stack_vec_mse(ungated, train, result.steps, 32, 3e-3, mix_seed(seed, 0xA3u, 1), 100,
                      &result.ungated_curve);

  // Empirical total target variance on the held-out set.
  {
    Tensor mean(1, 3);
    for (const Tensor& t : test.targets)
      for (int c = 0; c < 3; ++c) mean(0, c) += t(0, c) / double(test.targets.size());
    double var = 0.0;
    for (const Tensor& t : test.targets)
      for (int c = 0; c < 3; ++c) var += (t(0, c) - mean(0, c)) * (t(0, c) - mean(0, c));
    result.var_target = var / double(test.targets.size());
  }
  result.mse_gated = eval_stack_total_mse(gated, test);
  result.mse_ungated = eval_stack_total_mse(ungated, test);

  // The ungated vector path never reads s: the adjoint of the scalar input
  // must be identically zero.
  {
    Tape tape;
    ValId s_leaf = tape.leaf(test.inputs[0].s, true);
    ValId v_leaf = tape.leaf(test.inputs[0].V);
    ParamBinding binding = bind_params(tape, ungated.params);
    SvIds out = ungated.build(tape, binding, SvIds{s_leaf, v_leaf});
    ValId probe = tape.sum(tape.hadamard(out.V, out.V));
    std::vector<Tensor> adjoints = tape.backward(probe);
    const Tensor& ds = adjoints[std::size_t(s_leaf)];
    result.ungated_scalar_grad_zero = ds.empty() || max_abs(ds) == 0.0;
  }

  result.pass = result.ungated_scalar_grad_zero &&
                result.mse_ungated >= 0.9 * result.var_target &&
                result.mse_gated <= 0.1 * result.var_target;
  return result;
}

std::string ApproxDemoResult::to_text() const {
  std::string out;
  out += "nu = " + std::to_string(nu) + "\n";
  out += "width = " + std::to_string(width) + "\n";
  out += "mae_width8 = " + format_double(mae_small) + "\n";
  out += "mae_width" + std::to_string(width) + " = " + format_double(mae_large) + "\n";
  out += "mae_threshold = 0.05\n";
  out += "equiv_max_dev = " + format_double(equiv_max_dev) + "\n";
  out += "steps = " + std::to_string(steps) + "\n";
  out += std::string("pass = ") + (pass ? "1" : "0") + "\n";
  return out;
}

ApproxDemoResult run_demo_approx(int nu, int width, std::uint64_t seed) {
  require(nu >= 3, "demo_approx: nu must be >= 3");
  require(width >= 9, "demo_approx: width must exceed the small reference width 8");
  std::mt19937_64 rng(mix_seed(seed, 0xB1u, 0));

  // Fixed random invariant coefficients: tanh of linear combinations of the
  // pairwise row-difference norms.
  const int n_pairs = nu * (nu - 1) / 2;
  std::uniform_real_distribution<double> wdist(-0.5, 0.5);
  std::uniform_real_distribution<double> bdist(-0.25, 0.25);
  std::vector<std::vector<double>> coef_w(3, std::vector<double>(std::size_t(n_pairs)));
  std::vector<double> coef_b(3);
  for (int i = 0; i < 3; ++i) {
    for (double& w : coef_w[std::size_t(i)]) w = wdist(rng);
    coef_b[std::size_t(i)] = bdist(rng);
  }

  auto pair_features = [&](const Tensor& v) {
    std::vector<double> f;
    f.reserve(std::size_t(n_pairs));
    for (int j = 0; j < nu; ++j)
      for (int k = j + 1; k < nu; ++k) {
        double d2 = 0.0;
        for (int c = 0; c < 3; ++c) d2 += (v(j, c) - v(k, c)) * (v(j, c) - v(k, c));
        f.push_back(std::sqrt(d2));
      }
    return f;
  };

  auto sample_input = [&]() {
    std::uniform_real_distribution<double> norm_dist(0.1, 1.0);
    for (int attempt = 0; attempt < 10000; ++attempt) {
      Tensor v = unit_gaussian_rows(nu, rng);
      for (int r = 0; r < nu; ++r) {
        const double norm = norm_dist(rng);
        for (int c = 0; c < 3; ++c) v(r, c) *= norm;
      }
      if (std::fabs(det3_rows(v)) >= 0.05) return v;
    }
    fail(Errc::numeric, "demo_approx: could not sample a well-conditioned input");
  };

  auto target_of = [&](const Tensor& v) {
    const std::vector<double> f = pair_features(v);
    Tensor t(1, 3);
    for (int i = 0; i < 3; ++i) {
      double z = coef_b[std::size_t(i)];
      for (int p = 0; p < n_pairs; ++p) z += coef_w[std::size_t(i)][std::size_t(p)] * f[std::size_t(p)];
      const double c = std::tanh(z);
      for (int col = 0; col < 3; ++col) t(0, col) += c * v(i, col);
    }
    return t;
  };

  auto make_set = [&](int count) {
    VecDataset data;
    for (int i = 0; i < count; ++i) {
      Tensor v = sample_input();
      data.targets.push_back(target_of(v));
      data.inputs.emplace_back(Tensor(0, 1), std::move(v));
    }
    return data;
  };
  VecDataset train = make_set(4096);
  VecDataset test = make_set(512);

  auto make_stack = [&](int w, std::uint64_t stack_seed) {
    GvpConfig a{0, nu, 2 * w, w};
    GvpConfig b{2 * w, w, 2 * w, w};
    GvpConfig c{2 * w, w, 1, 1};
    return GvpStack::create({a, b, c}, stack_seed);
  };

  ApproxDemoResult result;
  result.nu = nu;
  result.width = width;
  result.steps = 3000;

  GvpStack small = make_stack(8, mix_seed(seed, 0xB2u, 8));
  GvpStack large = make_stack(width, mix_seed(seed, 0xB2u, std::uint64_t(width)));
  train_stack_vec_mse(small, train, result.steps, 64, 1e-3, mix_seed(seed, 0xB3u, 8), 0, nullptr);
  train_stack_vec_mse(large, train, result.steps, 64, 1e-3,
                      mix_seed(seed, 0xB3u, std::uint64_t(width)), 100, &result.curve_large);

  result.mae_small = eval_stack_coord_mae(small, test);
  result.mae_large = eval_stack_coord_mae(large, test);
  result.equiv_max_dev =
      stack_equivariance_dev(large, std::span<const SvTuple>(test.inputs.data(), 3), 100,
                             mix_seed(seed, 0xB4u, 0));
  result.pass = result.mae_large <= 0.05 && result.mae_large < result.mae_small &&
                result.equiv_max_dev <= 1e-10;
  return result;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io, "cannot open for writing: " + path);
  out << content;
  if (!out) fail(Errc::io, "write failed: " + path);
}

}  // namespace gvpnn
