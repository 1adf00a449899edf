#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "svt.hpp"
#include "tape.hpp"

namespace gvpnn {

enum class Act : std::uint8_t { kRelu, kSigmoid, kIdentity };
enum class GvpVariant : std::uint8_t { kGated, kOriginal };

// Layer mapping (s, V) in R^n x R^{nu x 3} to R^m x R^{mu x 3}:
//   V_h   = W_h V
//   V_mu  = W_mu V_h
//   s_h   = row norms of V_h
//   s_m   = W_m concat(s_h, s) + b_m
//   s'    = sigma(s_m)
//   V'    = sigmoid(W_g sigma_plus(s_m) + b_g) .* V_mu   (gated)
//   V'    = sigmoid(row norms of V_mu) .* V_mu           (original)
// The original variant's vector path never reads the scalar channels.
struct GvpConfig {
  int in_scalars = 0;    // n
  int in_vectors = 0;    // nu
  int out_scalars = 0;   // m
  int out_vectors = 0;   // mu
  int hidden_vectors = -1;  // h; defaults to max(nu, mu)
  Act scalar_act = Act::kRelu;
  Act pre_gate_act = Act::kIdentity;
  GvpVariant variant = GvpVariant::kGated;

  int hidden() const {
    return hidden_vectors >= 0 ? hidden_vectors : std::max(in_vectors, out_vectors);
  }
  // Width of the norm block feeding the scalar path (0 when there are no
  // input vectors).
  int norm_width() const { return in_vectors > 0 ? hidden() : 0; }
  void validate() const;
};

struct GvpParams {
  Tensor wh;   // h x nu
  Tensor wmu;  // mu x h
  Tensor wm;   // m x (norm_width + n)
  Tensor bm;   // m x 1
  Tensor wg;   // mu x m   (gated only)
  Tensor bg;   // mu x 1   (gated only)
};

// Weight matrices a x b drawn uniform on +-sqrt(6/(a+b)), biases zero.
GvpParams gvp_init(const GvpConfig& cfg, std::mt19937_64& rng);
GvpParams gvp_init(const GvpConfig& cfg, std::uint64_t seed);

Tensor glorot_uniform(int rows, int cols, std::mt19937_64& rng);

// Tape handles for one tuple. Either side may be kNoVal when that channel
// family is absent.
struct SvIds {
  ValId s = kNoVal;
  ValId V = kNoVal;
};

struct GvpParamIds {
  ValId wh = kNoVal;
  ValId wmu = kNoVal;
  ValId wm = kNoVal;
  ValId bm = kNoVal;
  ValId wg = kNoVal;
  ValId bg = kNoVal;
};

GvpParamIds bind_gvp_params(Tape& tape, const GvpParams& params, bool as_params = false);

// Store-backed naming: "<prefix>.wh", "<prefix>.wm", ... with absent tensors
// (empty shapes) skipped.
class ParamStore;
struct ParamBinding;
void add_gvp_params(ParamStore& store, const std::string& prefix, const GvpConfig& cfg,
                    std::mt19937_64& rng);
GvpParamIds gvp_param_ids(const ParamStore& store, const ParamBinding& binding,
                          const std::string& prefix);

// Records the forward pass on the tape; one value per algorithm line.
SvIds gvp_forward(Tape& tape, const GvpConfig& cfg, const GvpParamIds& p, SvIds x);

// Convenience evaluation on plain values (builds a scratch tape).
SvTuple gvp_apply(const GvpConfig& cfg, const GvpParams& params, const SvTuple& x);

}  // namespace gvpnn
