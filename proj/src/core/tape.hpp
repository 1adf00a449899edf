#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tensor.hpp"

namespace gvpnn {

// Recorded primitive applications. The set is closed: these are exactly the
// operations the models in this library are built from, each with a
// hand-derived reverse rule.
enum class Op : std::uint8_t {
  kLeaf,            // input value; may be flagged as a parameter
  kMatMul,          // A @ B
  kAffine,          // W @ x + b, bias broadcast over columns
  kAdd,             // A + B
  kScale,           // c * A                 (attr = c)
  kAddConst,        // A + c elementwise     (attr = c)
  kAddBcast,        // A + t, t is 1x1
  kMulBcast,        // A * t, t is 1x1
  kHadamard,        // A .* B
  kMulMask,         // A .* mask, constant mask (aux)
  kRowNormSafe,     // sqrt(row sum of squares + eps^2)   (attr = eps)
  kFrobNormSafe,    // sqrt(total sum of squares + eps^2) (attr = eps)
  kConcatRows,      // stack B below A
  kGateRows,        // g[i] * row i of V
  kRelu,
  kSigmoid,
  kIdentity,
  kExp,
  kPowConst,        // A^p elementwise       (attr = p)
  kSum,             // 1x1 total
  kMeanN,           // arithmetic mean of k same-shape inputs
  kVectorGate,      // sigmoid(Wg @ u + bg) .* V row-wise
  kVectorNormGate,  // sigmoid(row norms of V) .* V row-wise (attr = eps)
  kSoftmaxCe,       // logsumexp(z) - z[label]            (iattr = label)
  kOpCount,
};

using ValId = std::int32_t;
inline constexpr ValId kNoVal = -1;

// Append-only record of a computation. Nodes are topologically ordered by
// construction (inputs must already be on the tape). Forward values are
// computed eagerly at record time; replay() re-executes the whole tape and
// must reproduce them bit-exactly.
class Tape {
 public:
  struct Node {
    Op op;
    std::vector<ValId> in;
    Tensor value;
    double attr = 0.0;
    int iattr = 0;
    Tensor aux;  // constant mask, or saved gate/norm intermediates
  };

  // Single recording funnel: validates the primitive and its operands,
  // computes the forward value, appends the node.
  ValId record(Op op, std::span<const ValId> inputs, double attr = 0.0, int iattr = 0,
               Tensor aux = {});
  ValId record(Op op, std::initializer_list<ValId> inputs, double attr = 0.0, int iattr = 0,
               Tensor aux = {}) {
    return record(op, std::span<const ValId>(inputs.begin(), inputs.size()), attr, iattr,
                  std::move(aux));
  }

  ValId leaf(Tensor v, bool is_param = false);

  ValId matmul(ValId a, ValId b);
  ValId affine(ValId w, ValId x, ValId b);
  ValId add(ValId a, ValId b);
  ValId scale(ValId a, double c);
  ValId add_const(ValId a, double c);
  ValId add_bcast(ValId a, ValId t);
  ValId mul_bcast(ValId a, ValId t);
  ValId hadamard(ValId a, ValId b);
  ValId mul_mask(ValId a, Tensor mask);
  ValId row_norms_safe(ValId v, double eps);
  ValId frob_norm_safe(ValId a, double eps);
  ValId concat_rows(ValId a, ValId b);
  ValId gate_rows(ValId g, ValId v);
  ValId relu(ValId a);
  ValId sigmoid(ValId a);
  ValId identity(ValId a);
  ValId exp(ValId a);
  ValId pow_const(ValId a, double p);
  ValId sum(ValId a);
  ValId mean_n(std::span<const ValId> xs);
  ValId vector_gate(ValId wg, ValId u, ValId bg, ValId v);
  ValId vector_norm_gate(ValId v, double eps);
  ValId softmax_ce(ValId logits, int label);

  const Tensor& val(ValId id) const;
  std::size_t size() const { return nodes_.size(); }
  const std::vector<ValId>& params() const { return params_; }

  // Reverse accumulation from a 1x1 output. Returns one adjoint per node
  // (empty tensor = identically zero, i.e. the node does not reach output).
  std::vector<Tensor> backward(ValId output) const;

  // Re-executes the tape from its leaves and returns the recomputed value.
  Tensor replay(ValId id) const;

 private:
  Tensor eval_forward(const Node& node, const std::vector<Tensor>* values, Tensor* aux_out) const;
  std::vector<Node> nodes_;
  std::vector<ValId> params_;
};

double sigmoid_stable(double x);

}  // namespace gvpnn
