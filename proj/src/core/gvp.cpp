#include "gvp.hpp"

#include <cmath>

#include "error.hpp"
#include "params.hpp"

namespace gvpnn {

void GvpConfig::validate() const {
  require(in_scalars >= 0 && in_vectors >= 0 && out_scalars >= 0 && out_vectors >= 0,
          "GvpConfig: channel counts must be non-negative");
  require(in_scalars + in_vectors > 0, "GvpConfig: input is empty");
  require(out_scalars >= 1, "GvpConfig: the scalar pathway s_m requires out_scalars >= 1");
  if (in_vectors >= 1) require(hidden() >= 1, "GvpConfig: hidden vector count must be >= 1");
  // There is no equivariant source of vectors when nu = 0; emitting zero rows
  // would fake one, so such configs are rejected outright.
  require(!(in_vectors == 0 && out_vectors > 0),
          "GvpConfig: out_vectors > 0 requires in_vectors > 0");
}

Tensor glorot_uniform(int rows, int cols, std::mt19937_64& rng) {
  Tensor t(rows, cols);
  if (t.size() == 0) return t;
  const double bound = std::sqrt(6.0 / double(rows + cols));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& x : t.flat()) x = dist(rng);
  return t;
}

GvpParams gvp_init(const GvpConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  const int h = cfg.hidden();
  GvpParams p;
  if (cfg.in_vectors > 0) p.wh = glorot_uniform(h, cfg.in_vectors, rng);
  if (cfg.out_vectors > 0) p.wmu = glorot_uniform(cfg.out_vectors, h, rng);
  p.wm = glorot_uniform(cfg.out_scalars, cfg.norm_width() + cfg.in_scalars, rng);
  p.bm = Tensor(cfg.out_scalars, 1);
  if (cfg.variant == GvpVariant::kGated && cfg.out_vectors > 0) {
    p.wg = glorot_uniform(cfg.out_vectors, cfg.out_scalars, rng);
    p.bg = Tensor(cfg.out_vectors, 1);
  }
  return p;
}

GvpParams gvp_init(const GvpConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return gvp_init(cfg, rng);
}

GvpParamIds bind_gvp_params(Tape& tape, const GvpParams& params, bool as_params) {
  GvpParamIds ids;
  if (!params.wh.empty()) ids.wh = tape.leaf(params.wh, as_params);
  if (!params.wmu.empty()) ids.wmu = tape.leaf(params.wmu, as_params);
  ids.wm = tape.leaf(params.wm, as_params);
  ids.bm = tape.leaf(params.bm, as_params);
  if (!params.wg.empty()) ids.wg = tape.leaf(params.wg, as_params);
  if (!params.bg.empty()) ids.bg = tape.leaf(params.bg, as_params);
  return ids;
}

void add_gvp_params(ParamStore& store, const std::string& prefix, const GvpConfig& cfg,
                    std::mt19937_64& rng) {
  GvpParams p = gvp_init(cfg, rng);
  if (!p.wh.empty()) store.add(prefix + ".wh", std::move(p.wh));
  if (!p.wmu.empty()) store.add(prefix + ".wmu", std::move(p.wmu));
  store.add(prefix + ".wm", std::move(p.wm));
  store.add(prefix + ".bm", std::move(p.bm));
  if (!p.wg.empty()) store.add(prefix + ".wg", std::move(p.wg));
  if (!p.bg.empty()) store.add(prefix + ".bg", std::move(p.bg));
}

GvpParamIds gvp_param_ids(const ParamStore& store, const ParamBinding& binding,
                          const std::string& prefix) {
  auto look = [&](const char* leafname) -> ValId {
    int idx = store.index_of(prefix + "." + leafname);
    return idx < 0 ? kNoVal : binding.leaves[std::size_t(idx)];
  };
  GvpParamIds ids;
  ids.wh = look("wh");
  ids.wmu = look("wmu");
  ids.wm = look("wm");
  ids.bm = look("bm");
  ids.wg = look("wg");
  ids.bg = look("bg");
  return ids;
}

namespace {

ValId apply_act(Tape& tape, Act act, ValId x) {
  switch (act) {
    case Act::kRelu:
      return tape.relu(x);
    case Act::kSigmoid:
      return tape.sigmoid(x);
    case Act::kIdentity:
      return x;
  }
  fail_contract("apply_act: unknown activation");
}

}  // namespace

SvIds gvp_forward(Tape& tape, const GvpConfig& cfg, const GvpParamIds& p, SvIds x) {
  cfg.validate();
  if (cfg.in_scalars > 0) {
    require(x.s != kNoVal && tape.val(x.s).rows() == cfg.in_scalars,
            "gvp_forward: scalar input width mismatch");
  }
  if (cfg.in_vectors > 0) {
    require(x.V != kNoVal && tape.val(x.V).rows() == cfg.in_vectors,
            "gvp_forward: vector input width mismatch");
  }

  ValId v_mu = kNoVal;
  ValId s_cat = kNoVal;
  if (cfg.in_vectors > 0) {
    ValId v_h = tape.matmul(p.wh, x.V);
    if (cfg.out_vectors > 0) v_mu = tape.matmul(p.wmu, v_h);
    ValId s_h = tape.row_norms_safe(v_h, kSafeNormEps);
    s_cat = cfg.in_scalars > 0 ? tape.concat_rows(s_h, x.s) : s_h;
  } else {
    s_cat = x.s;
  }
  ValId s_m = tape.affine(p.wm, s_cat, p.bm);

  SvIds out;
  out.s = apply_act(tape, cfg.scalar_act, s_m);
  if (cfg.out_vectors > 0) {
    if (cfg.variant == GvpVariant::kGated) {
      ValId gate_in = apply_act(tape, cfg.pre_gate_act, s_m);
      out.V = tape.vector_gate(p.wg, gate_in, p.bg, v_mu);
    } else {
      out.V = tape.vector_norm_gate(v_mu, kSafeNormEps);
    }
  }
  return out;
}

SvTuple gvp_apply(const GvpConfig& cfg, const GvpParams& params, const SvTuple& x) {
  Tape tape;
  SvIds in;
  if (cfg.in_scalars > 0) in.s = tape.leaf(x.s);
  if (cfg.in_vectors > 0) in.V = tape.leaf(x.V);
  GvpParamIds ids = bind_gvp_params(tape, params);
  SvIds out = gvp_forward(tape, cfg, ids, in);
  SvTuple result;
  result.s = out.s != kNoVal ? tape.val(out.s) : Tensor(0, 1);
  result.V = out.V != kNoVal ? tape.val(out.V) : Tensor(0, 3);
  return result;
}

}  // namespace gvpnn
