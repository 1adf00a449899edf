#include "tape.hpp"

#include <cmath>

#include "error.hpp"
#include "svt.hpp"

namespace gvpnn {

double sigmoid_stable(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

int arity_of(Op op) {
  switch (op) {
    case Op::kLeaf:
      return 0;
    case Op::kScale:
    case Op::kAddConst:
    case Op::kMulMask:
    case Op::kRowNormSafe:
    case Op::kFrobNormSafe:
    case Op::kRelu:
    case Op::kSigmoid:
    case Op::kIdentity:
    case Op::kExp:
    case Op::kPowConst:
    case Op::kSum:
    case Op::kVectorNormGate:
    case Op::kSoftmaxCe:
      return 1;
    case Op::kMatMul:
    case Op::kAdd:
    case Op::kAddBcast:
    case Op::kMulBcast:
    case Op::kHadamard:
    case Op::kConcatRows:
    case Op::kGateRows:
      return 2;
    case Op::kAffine:
      return 3;
    case Op::kVectorGate:
      return 4;
    case Op::kMeanN:
      return -1;  // variadic
    default:
      return -2;
  }
}

Tensor map_elementwise(const Tensor& a, double (*f)(double)) {
  Tensor out = a;
  for (double& x : out.flat()) x = f(x);
  return out;
}

}  // namespace

Tensor Tape::eval_forward(const Node& node, const std::vector<Tensor>* values,
                          Tensor* aux_out) const {
  auto in = [&](int k) -> const Tensor& {
    ValId id = node.in[std::size_t(k)];
    return values ? (*values)[std::size_t(id)] : nodes_[std::size_t(id)].value;
  };
  switch (node.op) {
    case Op::kMatMul:
      return gvpnn::matmul(in(0), in(1));
    case Op::kAffine: {
      const Tensor& b = in(2);
      Tensor y = gvpnn::matmul(in(0), in(1));
      require(b.cols() == 1 && b.rows() == y.rows(), "affine: bias shape mismatch");
      for (int i = 0; i < y.rows(); ++i)
        for (int j = 0; j < y.cols(); ++j) y(i, j) += b(i, 0);
      return y;
    }
    case Op::kAdd:
      return gvpnn::add(in(0), in(1));
    case Op::kScale:
      return scaled(in(0), node.attr);
    case Op::kAddConst: {
      Tensor y = in(0);
      for (double& x : y.flat()) x += node.attr;
      return y;
    }
    case Op::kAddBcast: {
      const Tensor& t = in(1);
      require(t.rows() == 1 && t.cols() == 1, "add_bcast: broadcast operand must be 1x1");
      Tensor y = in(0);
      for (double& x : y.flat()) x += t(0, 0);
      return y;
    }
    case Op::kMulBcast: {
      const Tensor& t = in(1);
      require(t.rows() == 1 && t.cols() == 1, "mul_bcast: broadcast operand must be 1x1");
      return scaled(in(0), t(0, 0));
    }
    case Op::kHadamard: {
      const Tensor& a = in(0);
      const Tensor& b = in(1);
      require(a.same_shape(b), "hadamard: shapes disagree");
      Tensor y = a;
      for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] *= b.data()[i];
      return y;
    }
    case Op::kMulMask: {
      const Tensor& a = in(0);
      require(a.same_shape(node.aux), "mul_mask: mask shape disagrees");
      Tensor y = a;
      for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] *= node.aux.data()[i];
      return y;
    }
    case Op::kRowNormSafe:
      return gvpnn::row_norms(in(0), node.attr);
    case Op::kFrobNormSafe: {
      const Tensor& a = in(0);
      double ss = node.attr * node.attr;
      for (double x : a.flat()) ss += x * x;
      return Tensor::scalar(std::sqrt(ss));
    }
    case Op::kConcatRows:
      return gvpnn::concat_rows(in(0), in(1));
    case Op::kGateRows:
      return gvpnn::gate_rows(in(0), in(1));
    case Op::kRelu:
      return map_elementwise(in(0), [](double x) { return x > 0.0 ? x : 0.0; });
    case Op::kSigmoid:
      return map_elementwise(in(0), [](double x) { return sigmoid_stable(x); });
    case Op::kIdentity:
      return in(0);
    case Op::kExp:
      return map_elementwise(in(0), [](double x) { return std::exp(x); });
    case Op::kPowConst: {
      Tensor y = in(0);
      for (double& x : y.flat()) x = std::pow(x, node.attr);
      return y;
    }
    case Op::kSum: {
      double s = 0.0;
      for (double x : in(0).flat()) s += x;
      return Tensor::scalar(s);
    }
    case Op::kMeanN: {
      const Tensor& first = in(0);
      Tensor y = first;
      for (std::size_t k = 1; k < node.in.size(); ++k) {
        const Tensor& xk = in(int(k));
        require(xk.same_shape(first), "mean_n: shapes disagree");
        for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] += xk.data()[i];
      }
      return scaled(y, 1.0 / double(node.in.size()));
    }
    case Op::kVectorGate: {
      const Tensor& wg = in(0);
      const Tensor& u = in(1);
      const Tensor& bg = in(2);
      const Tensor& v = in(3);
      require(u.cols() == 1 && bg.cols() == 1, "vector_gate: u and bg must be column vectors");
      require(wg.rows() == v.rows() && wg.rows() == bg.rows(),
              "vector_gate: gate width does not match vector rows");
      Tensor z = gvpnn::matmul(wg, u);
      Tensor g(z.rows(), 1);
      for (int i = 0; i < z.rows(); ++i) g(i, 0) = sigmoid_stable(z(i, 0) + bg(i, 0));
      if (aux_out) *aux_out = g;
      return gvpnn::gate_rows(g, v);
    }
    case Op::kVectorNormGate: {
      const Tensor& v = in(0);
      Tensor n = gvpnn::row_norms(v, node.attr);
      Tensor g(n.rows(), 1);
      for (int i = 0; i < n.rows(); ++i) g(i, 0) = sigmoid_stable(n(i, 0));
      if (aux_out) *aux_out = n;
      return gvpnn::gate_rows(g, v);
    }
    case Op::kSoftmaxCe: {
      const Tensor& z = in(0);
      require(z.cols() == 1 && z.rows() >= 1, "softmax_ce: logits must be a column vector");
      require(node.iattr >= 0 && node.iattr < z.rows(), "softmax_ce: label out of range");
      double m = z(0, 0);
      for (int i = 1; i < z.rows(); ++i) m = std::max(m, z(i, 0));
      double se = 0.0;
      for (int i = 0; i < z.rows(); ++i) se += std::exp(z(i, 0) - m);
      return Tensor::scalar(m + std::log(se) - z(node.iattr, 0));
    }
    default:
      fail_contract("tape: unregistered primitive");
  }
}

ValId Tape::record(Op op, std::span<const ValId> inputs, double attr, int iattr, Tensor aux) {
  const int code = int(op);
  require(code > int(Op::kLeaf) && code < int(Op::kOpCount), "record: unregistered primitive");
  const int arity = arity_of(op);
  if (arity >= 0)
    require(int(inputs.size()) == arity, "record: wrong operand count");
  else
    require(!inputs.empty(), "record: variadic primitive needs at least one operand");
  for (ValId id : inputs)
    require(id >= 0 && std::size_t(id) < nodes_.size(), "record: operand not on tape");

  Node node;
  node.op = op;
  node.in.assign(inputs.begin(), inputs.end());
  node.attr = attr;
  node.iattr = iattr;
  node.aux = std::move(aux);
  if (op == Op::kConcatRows) node.iattr = nodes_[std::size_t(inputs[0])].value.rows();
  node.value = eval_forward(node, nullptr, &node.aux);
  nodes_.push_back(std::move(node));
  return ValId(nodes_.size() - 1);
}

ValId Tape::leaf(Tensor v, bool is_param) {
  Node node;
  node.op = Op::kLeaf;
  node.value = std::move(v);
  nodes_.push_back(std::move(node));
  ValId id = ValId(nodes_.size() - 1);
  if (is_param) params_.push_back(id);
  return id;
}

ValId Tape::matmul(ValId a, ValId b) { return record(Op::kMatMul, {a, b}); }
ValId Tape::affine(ValId w, ValId x, ValId b) { return record(Op::kAffine, {w, x, b}); }
ValId Tape::add(ValId a, ValId b) { return record(Op::kAdd, {a, b}); }
ValId Tape::scale(ValId a, double c) { return record(Op::kScale, {a}, c); }
ValId Tape::add_const(ValId a, double c) { return record(Op::kAddConst, {a}, c); }
ValId Tape::add_bcast(ValId a, ValId t) { return record(Op::kAddBcast, {a, t}); }
ValId Tape::mul_bcast(ValId a, ValId t) { return record(Op::kMulBcast, {a, t}); }
ValId Tape::hadamard(ValId a, ValId b) { return record(Op::kHadamard, {a, b}); }
ValId Tape::mul_mask(ValId a, Tensor mask) {
  return record(Op::kMulMask, {a}, 0.0, 0, std::move(mask));
}
ValId Tape::row_norms_safe(ValId v, double eps) { return record(Op::kRowNormSafe, {v}, eps); }
ValId Tape::frob_norm_safe(ValId a, double eps) { return record(Op::kFrobNormSafe, {a}, eps); }
ValId Tape::concat_rows(ValId a, ValId b) { return record(Op::kConcatRows, {a, b}); }
ValId Tape::gate_rows(ValId g, ValId v) { return record(Op::kGateRows, {g, v}); }
ValId Tape::relu(ValId a) { return record(Op::kRelu, {a}); }
ValId Tape::sigmoid(ValId a) { return record(Op::kSigmoid, {a}); }
ValId Tape::identity(ValId a) { return record(Op::kIdentity, {a}); }
ValId Tape::exp(ValId a) { return record(Op::kExp, {a}); }
ValId Tape::pow_const(ValId a, double p) { return record(Op::kPowConst, {a}, p); }
ValId Tape::sum(ValId a) { return record(Op::kSum, {a}); }
ValId Tape::mean_n(std::span<const ValId> xs) { return record(Op::kMeanN, xs); }
ValId Tape::vector_gate(ValId wg, ValId u, ValId bg, ValId v) {
  return record(Op::kVectorGate, {wg, u, bg, v});
}
ValId Tape::vector_norm_gate(ValId v, double eps) {
  return record(Op::kVectorNormGate, {v}, eps);
}
ValId Tape::softmax_ce(ValId logits, int label) {
  return record(Op::kSoftmaxCe, {logits}, 0.0, label);
}

const Tensor& Tape::val(ValId id) const {
  require(id >= 0 && std::size_t(id) < nodes_.size(), "val: id not on tape");
  return nodes_[std::size_t(id)].value;
}

std::vector<Tensor> Tape::backward(ValId output) const {
  require(output >= 0 && std::size_t(output) < nodes_.size(), "backward: output not on tape");
  const Tensor& out = nodes_[std::size_t(output)].value;
  require(out.rows() == 1 && out.cols() == 1, "backward: output must be a scalar value");

  std::vector<Tensor> adj(nodes_.size());
  adj[std::size_t(output)] = Tensor::scalar(1.0);

  auto grab = [&](ValId id) -> Tensor& {
    Tensor& a = adj[std::size_t(id)];
    if (a.empty() && !nodes_[std::size_t(id)].value.empty()) {
      const Tensor& v = nodes_[std::size_t(id)].value;
      a = Tensor(v.rows(), v.cols());
    }
    return a;
  };

  for (ValId i = output; i >= 0; --i) {
    const Node& n = nodes_[std::size_t(i)];
    const Tensor& g = adj[std::size_t(i)];
    if (g.empty() || n.op == Op::kLeaf) continue;
    auto inval = [&](int k) -> const Tensor& { return nodes_[std::size_t(n.in[std::size_t(k)])].value; };
    switch (n.op) {
      case Op::kMatMul:
      case Op::kAffine: {
        const Tensor& a = inval(0);
        const Tensor& b = inval(1);
        Tensor& da = grab(n.in[0]);
        Tensor& db = grab(n.in[1]);
        // dA += G B^T ; dB += A^T G
        for (int r = 0; r < a.rows(); ++r)
          for (int k = 0; k < a.cols(); ++k) {
            double s = 0.0;
            for (int j = 0; j < b.cols(); ++j) s += g(r, j) * b(k, j);
            da(r, k) += s;
          }
        for (int k = 0; k < b.rows(); ++k)
          for (int j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (int r = 0; r < a.rows(); ++r) s += a(r, k) * g(r, j);
            db(k, j) += s;
          }
        if (n.op == Op::kAffine) {
          Tensor& dbias = grab(n.in[2]);
          for (int r = 0; r < g.rows(); ++r)
            for (int j = 0; j < g.cols(); ++j) dbias(r, 0) += g(r, j);
        }
        break;
      }
      case Op::kAdd: {
        Tensor& da = grab(n.in[0]);
        Tensor& db = grab(n.in[1]);
        for (std::size_t k = 0; k < g.size(); ++k) {
          da.data()[k] += g.data()[k];
          db.data()[k] += g.data()[k];
        }
        break;
      }
      case Op::kScale: {
        Tensor& da = grab(n.in[0]);
        for (std::size_t k = 0; k < g.size(); ++k) da.data()[k] += n.attr * g.data()[k];
        break;
      }
      case Op::kAddConst:
      case Op::kIdentity: {
        Tensor& da = grab(n.in[0]);
        for (std::size_t k = 0; k < g.size(); ++k) da.data()[k] += g.data()[k];
        break;
      }
      case Op::kAddBcast: {
        Tensor& da = grab(n.in[0]);
        Tensor& dt = grab(n.in[1]);
        double s = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
          da.data()[k] += g.data()[k];
          s += g.data()[k];
        }
        dt(0, 0) += s;
        break;
      }
      case Op::kMulBcast: {
        const Tensor& a = inval(0);
        const double t = inval(1)(0, 0);
        Tensor& da = grab(n.in[0]);
        Tensor& dt = grab(n.in[1]);
        double s = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
          da.data()[k] += t * g.data()[k];
          s += g.data()[k] * a.data()[k];
        }
        dt(0, 0) += s;
        break;
      }
      case Op::kHadamard: {
        const Tensor& a = inval(0);
        const Tensor& b = inval(1);
        Tensor& da = grab(n.in[0]);
        Tensor& db = grab(n.in[1]);
        for (std::size_t k = 0; k < g.size(); ++k) {
          da.data()[k] += g.data()[k] * b.data()[k];
          db.data()[k] += g.data()[k] * a.data()[k];
        }
        break;
      }
      case Op::kMulMask: {
        Tensor& da = grab(n.in[0]);
        for (std::size_t k = 0; k < g.size(); ++k) da.data()[k] += g.data()[k] * n.aux.data()[k];
        break;
      }
      case Op::kRowNormSafe: {
        const Tensor& v = inval(0);
        Tensor& dv = grab(n.in[0]);
        for (int r = 0; r < v.rows(); ++r) {
          const double coeff = g(r, 0) / n.value(r, 0);
          for (int j = 0; j < v.cols(); ++j) dv(r, j) += coeff * v(r, j);
        }
        break;
      }
      case Op::kFrobNormSafe: {
        const Tensor& a = inval(0);
        Tensor& da = grab(n.in[0]);
        const double coeff = g(0, 0) / n.value(0, 0);
        for (std::size_t k = 0; k < a.size(); ++k) da.data()[k] += coeff * a.data()[k];
        break;
      }
      case Op::kConcatRows: {
        const int split = n.iattr;
        Tensor& da = grab(n.in[0]);
        Tensor& db = grab(n.in[1]);
        for (int r = 0; r < g.rows(); ++r)
          for (int j = 0; j < g.cols(); ++j) {
            if (r < split)
              da(r, j) += g(r, j);
            else
              db(r - split, j) += g(r, j);
          }
        break;
      }
      case Op::kGateRows: {
        const Tensor& gate = inval(0);
        const Tensor& v = inval(1);
        Tensor& dgate = grab(n.in[0]);
        Tensor& dv = grab(n.in[1]);
        for (int r = 0; r < v.rows(); ++r) {
          double s = 0.0;
          for (int j = 0; j < v.cols(); ++j) {
            s += g(r, j) * v(r, j);
            dv(r, j) += gate(r, 0) * g(r, j);
          }
          dgate(r, 0) += s;
        }
        break;
      }
      case Op::kRelu: {
        const Tensor& a = inval(0);
        Tensor& da = grab(n.in[0]);
        for (std::size_t k = 0; k < g.size(); ++k)
          if (a.data()[k] > 0.0) da.data()[k] += g.data()[k];
        break;
      }
      case Op::kSigmoid: {
        Tensor& da = grab(n.in[0]);
        for (std::size_t k = 0; k < g.size(); ++k) {
          const double s = n.value.data()[k];
          da.data()[k] += g.data()[k] * s * (1.0 - s);
        }
        break;
      }
      case Op::kExp: {
        Tensor& da = grab(n.in[0]);
        for (std::size_t k = 0; k < g.size(); ++k)
          da.data()[k] += g.data()[k] * n.value.data()[k];
        break;
      }
      case Op::kPowConst: {
        const Tensor& a = inval(0);
        Tensor& da = grab(n.in[0]);
        for (std::size_t k = 0; k < g.size(); ++k)
          da.data()[k] += g.data()[k] * n.attr * std::pow(a.data()[k], n.attr - 1.0);
        break;
      }
      case Op::kSum: {
        Tensor& da = grab(n.in[0]);
        const double s = g(0, 0);
        for (double& x : da.flat()) x += s;
        break;
      }
      case Op::kMeanN: {
        const double inv = 1.0 / double(n.in.size());
        for (ValId id : n.in) {
          Tensor& dx = grab(id);
          for (std::size_t k = 0; k < g.size(); ++k) dx.data()[k] += inv * g.data()[k];
        }
        break;
      }
      case Op::kVectorGate: {
        const Tensor& wg = inval(0);
        const Tensor& u = inval(1);
        const Tensor& v = inval(3);
        const Tensor& gate = n.aux;
        Tensor& dwg = grab(n.in[0]);
        Tensor& du = grab(n.in[1]);
        Tensor& dbg = grab(n.in[2]);
        Tensor& dv = grab(n.in[3]);
        for (int r = 0; r < v.rows(); ++r) {
          double dgate = 0.0;
          for (int j = 0; j < v.cols(); ++j) {
            dgate += g(r, j) * v(r, j);
            dv(r, j) += gate(r, 0) * g(r, j);
          }
          const double dz = dgate * gate(r, 0) * (1.0 - gate(r, 0));
          dbg(r, 0) += dz;
          for (int k = 0; k < u.rows(); ++k) {
            dwg(r, k) += dz * u(k, 0);
            du(k, 0) += wg(r, k) * dz;
          }
        }
        break;
      }
      case Op::kVectorNormGate: {
        const Tensor& v = inval(0);
        const Tensor& norms = n.aux;
        Tensor& dv = grab(n.in[0]);
        for (int r = 0; r < v.rows(); ++r) {
          const double gate = sigmoid_stable(norms(r, 0));
          double s = 0.0;
          for (int j = 0; j < v.cols(); ++j) s += g(r, j) * v(r, j);
          const double dn = s * gate * (1.0 - gate) / norms(r, 0);
          for (int j = 0; j < v.cols(); ++j) dv(r, j) += gate * g(r, j) + dn * v(r, j);
        }
        break;
      }
      case Op::kSoftmaxCe: {
        const Tensor& z = inval(0);
        Tensor& dz = grab(n.in[0]);
        double m = z(0, 0);
        for (int r = 1; r < z.rows(); ++r) m = std::max(m, z(r, 0));
        double se = 0.0;
        for (int r = 0; r < z.rows(); ++r) se += std::exp(z(r, 0) - m);
        for (int r = 0; r < z.rows(); ++r) {
          const double p = std::exp(z(r, 0) - m) / se;
          dz(r, 0) += (p - (r == n.iattr ? 1.0 : 0.0)) * g(0, 0);
        }
        break;
      }
      default:
        fail_contract("backward: unregistered primitive");
    }
  }
  return adj;
}

Tensor Tape::replay(ValId id) const {
  require(id >= 0 && std::size_t(id) < nodes_.size(), "replay: id not on tape");
  std::vector<Tensor> vals(nodes_.size());
  for (std::size_t i = 0; i <= std::size_t(id); ++i) {
    const Node& n = nodes_[i];
    vals[i] = (n.op == Op::kLeaf) ? n.value : eval_forward(n, &vals, nullptr);
  }
  return vals[std::size_t(id)];
}

}  // namespace gvpnn
