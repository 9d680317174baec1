// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tss/ops.h"

#include <Eigen/Core>
#include <cmath>
#include <string>

#include "tss/errors.h"

namespace tss {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVec = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using VecMap = Eigen::Map<RowVec>;
using ConstVecMap = Eigen::Map<const RowVec>;

ConstMatMap as_mat(const Tensor& t) { return {t.data(), Eigen::Index(t.rows()), Eigen::Index(t.cols())}; }
MatMap as_mat(Tensor& t) { return {t.data(), Eigen::Index(t.rows()), Eigen::Index(t.cols())}; }
ConstVecMap as_vec(const Tensor& t) { return {t.data(), Eigen::Index(t.size())}; }
VecMap as_vec(Tensor& t) { return {t.data(), Eigen::Index(t.size())}; }

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
  }
}

}  // namespace

Value linear(Tape& tape, Value x, Value w, Value b) {
  const Tensor& xv = tape.value(x);
  const Tensor& wv = tape.value(w);
  const Tensor& bv = tape.value(b);
  if (wv.rank() != 2 || xv.cols() != wv.rows() || bv.size() != wv.cols()) {
    throw DimensionError("linear: cannot apply weight " + wv.shape_string() + " and bias " +
                         bv.shape_string() + " to input " + xv.shape_string());
  }
  Tensor out({xv.rows(), wv.cols()});
  auto o = as_mat(out);
  o.noalias() = as_mat(xv) * as_mat(wv);
  o.rowwise() += as_vec(bv);
  return tape.record(std::move(out), {x, w, b}, [x, w, b](Tape& t, const Tensor& g) {
    auto gm = as_mat(g);
    if (t.requires_grad(x)) as_mat(t.grad(x)).noalias() += gm * as_mat(t.value(w)).transpose();
    if (t.requires_grad(w)) as_mat(t.grad(w)).noalias() += as_mat(t.value(x)).transpose() * gm;
    if (t.requires_grad(b)) as_vec(t.grad(b)) += gm.colwise().sum();
  });
}

Value layer_norm(Tape& tape, Value x, Value gamma, Value beta, double eps) {
  const Tensor& xv = tape.value(x);
  const Tensor& gv = tape.value(gamma);
  const Tensor& bv = tape.value(beta);
  const std::size_t rows = xv.rows(), d = xv.cols();
  if (gv.size() != d || bv.size() != d) {
    throw DimensionError("layer_norm: gain " + gv.shape_string() + " / bias " +
                         bv.shape_string() + " do not match input " + xv.shape_string());
  }
  if (!(eps > 0)) throw PreconditionError("layer_norm: eps must be positive");
  Tensor xhat(xv.shape());
  Tensor inv_std({rows});
  Tensor out(xv.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    auto in = xv.row(r);
    double mean = 0.0;
    for (double v : in) mean += v;
    mean /= double(d);
    double var = 0.0;
    for (double v : in) var += (v - mean) * (v - mean);
    var /= double(d);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[r] = is;
    for (std::size_t c = 0; c < d; ++c) {
      xhat(r, c) = (in[c] - mean) * is;
      out(r, c) = gv[c] * xhat(r, c) + bv[c];
    }
  }
  return tape.record(std::move(out), {x, gamma, beta},
                     [x, gamma, beta, xhat = std::move(xhat), inv_std = std::move(inv_std)](
                         Tape& t, const Tensor& g) {
                       const std::size_t rows = g.rows(), d = g.cols();
                       const Tensor& gv = t.value(gamma);
                       if (t.requires_grad(gamma) || t.requires_grad(beta)) {
                         Tensor* dg = t.requires_grad(gamma) ? &t.grad(gamma) : nullptr;
                         Tensor* db = t.requires_grad(beta) ? &t.grad(beta) : nullptr;
                         for (std::size_t r = 0; r < rows; ++r) {
                           for (std::size_t c = 0; c < d; ++c) {
                             if (dg) (*dg)[c] += g(r, c) * xhat(r, c);
                             if (db) (*db)[c] += g(r, c);
                           }
                         }
                       }
                       if (!t.requires_grad(x)) return;
                       Tensor& dx = t.grad(x);
                       std::vector<double> dxhat(d);
                       for (std::size_t r = 0; r < rows; ++r) {
                         double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
                         for (std::size_t c = 0; c < d; ++c) {
                           dxhat[c] = g(r, c) * gv[c];
                           sum_dxhat += dxhat[c];
                           sum_dxhat_xhat += dxhat[c] * xhat(r, c);
                         }
                         const double scale = inv_std[r] / double(d);
                         for (std::size_t c = 0; c < d; ++c) {
                           dx(r, c) += scale * (double(d) * dxhat[c] - sum_dxhat -
                                                xhat(r, c) * sum_dxhat_xhat);
                         }
                       }
                     });
}

Value lstm(Tape& tape, Value x, const LstmWeights& weights) {
  const std::size_t hidden = tape.value(weights.wh).rows();
  return lstm(tape, x, weights, Tensor({hidden}), Tensor({hidden}));
}

Value lstm(Tape& tape, Value x, const LstmWeights& weights, const Tensor& h0, const Tensor& c0) {
  const Tensor& xv = tape.value(x);
  const Tensor& wx = tape.value(weights.wx);
  const Tensor& wh = tape.value(weights.wh);
  const Tensor& bv = tape.value(weights.b);
  const std::size_t steps = xv.rows(), din = xv.cols(), h = wh.rows();
  if (wx.rank() != 2 || wh.rank() != 2 || wx.rows() != din || wx.cols() != 4 * h ||
      wh.cols() != 4 * h || bv.size() != 4 * h || h0.size() != h || c0.size() != h) {
    throw DimensionError("lstm: input " + xv.shape_string() + " incompatible with wx " +
                         wx.shape_string() + ", wh " + wh.shape_string() + ", b " +
                         bv.shape_string() + ", state size " + std::to_string(h0.size()));
  }
  // gates holds activated [i, f, g, o] per frame.
  Tensor gates({steps, 4 * h});
  Tensor cells({steps, h});
  Tensor tanh_cells({steps, h});
  Tensor out({steps, h});
  auto z = as_mat(gates);
  z.noalias() = as_mat(xv) * as_mat(wx);
  z.rowwise() += as_vec(bv);
  const auto whm = as_mat(wh);
  RowVec h_prev = as_vec(h0);
  RowVec c_prev = as_vec(c0);
  for (std::size_t s = 0; s < steps; ++s) {
    auto zr = z.row(Eigen::Index(s));
    zr.noalias() += h_prev * whm;
    for (std::size_t j = 0; j < h; ++j) {
      const double ig = sigmoid_scalar(zr(j));
      const double fg = sigmoid_scalar(zr(h + j));
      const double cg = std::tanh(zr(2 * h + j));
      const double og = sigmoid_scalar(zr(3 * h + j));
      zr(j) = ig;
      zr(h + j) = fg;
      zr(2 * h + j) = cg;
      zr(3 * h + j) = og;
      const double c = fg * c_prev(j) + ig * cg;
      const double tc = std::tanh(c);
      cells(s, j) = c;
      tanh_cells(s, j) = tc;
      out(s, j) = og * tc;
      if (!std::isfinite(c) || !std::isfinite(out(s, j))) {
        throw NumericalError("lstm: nonfinite state at frame " + std::to_string(s));
      }
    }
    h_prev = as_mat(out).row(Eigen::Index(s));
    c_prev = as_mat(cells).row(Eigen::Index(s));
  }
  const Tensor& out_ref = out;
  Tensor h_hist({steps, h});  // h_{t-1} per frame
  for (std::size_t s = 0; s < steps; ++s) {
    for (std::size_t j = 0; j < h; ++j) h_hist(s, j) = s ? out_ref(s - 1, j) : h0[j];
  }
  Tensor c_init = c0;
  return tape.record(
      std::move(out), {x, weights.wx, weights.wh, weights.b},
      [x, weights, gates = std::move(gates), cells = std::move(cells),
       tanh_cells = std::move(tanh_cells), h_hist = std::move(h_hist),
       c_init = std::move(c_init)](Tape& t, const Tensor& g) {
        const std::size_t steps = g.rows(), h = g.cols();
        Tensor dz({steps, 4 * h});
        const auto whm = as_mat(t.value(weights.wh));
        RowVec dh_next = RowVec::Zero(Eigen::Index(h));
        std::vector<double> dc_next(h, 0.0);
        for (std::size_t s = steps; s-- > 0;) {
          for (std::size_t j = 0; j < h; ++j) {
            const double ig = gates(s, j), fg = gates(s, h + j), cg = gates(s, 2 * h + j),
                         og = gates(s, 3 * h + j);
            const double tc = tanh_cells(s, j);
            const double c_prev = s ? cells(s - 1, j) : c_init[j];
            const double dh = g(s, j) + dh_next(j);
            const double dc = dh * og * (1.0 - tc * tc) + dc_next[j];
            dz(s, j) = dc * cg * ig * (1.0 - ig);
            dz(s, h + j) = dc * c_prev * fg * (1.0 - fg);
            dz(s, 2 * h + j) = dc * ig * (1.0 - cg * cg);
            dz(s, 3 * h + j) = dh * tc * og * (1.0 - og);
            dc_next[j] = dc * fg;
          }
          dh_next.noalias() = as_mat(dz).row(Eigen::Index(s)) * whm.transpose();
        }
        const auto dzm = as_mat(dz);
        if (t.requires_grad(weights.wh)) {
          as_mat(t.grad(weights.wh)).noalias() += as_mat(h_hist).transpose() * dzm;
        }
        if (t.requires_grad(weights.wx)) {
          as_mat(t.grad(weights.wx)).noalias() += as_mat(t.value(x)).transpose() * dzm;
        }
        if (t.requires_grad(weights.b)) as_vec(t.grad(weights.b)) += dzm.colwise().sum();
        if (t.requires_grad(x)) {
          as_mat(t.grad(x)).noalias() += dzm * as_mat(t.value(weights.wx)).transpose();
        }
      });
}

Value relu(Tape& tape, Value x) {
  const Tensor& xv = tape.value(x);
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = (xv[i] > 0.0 || std::isnan(xv[i])) ? xv[i] : 0.0;
  return tape.record(std::move(out), {x}, [x](Tape& t, const Tensor& g) {
    const Tensor& xv = t.value(x);
    Tensor& dx = t.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (xv[i] > 0.0) dx[i] += g[i];
    }
  });
}

Value sigmoid(Tape& tape, Value x) {
  const Tensor& xv = tape.value(x);
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = sigmoid_scalar(xv[i]);
  Tensor saved = out;
  return tape.record(std::move(out), {x}, [x, y = std::move(saved)](Tape& t, const Tensor& g) {
    Tensor& dx = t.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Value add(Tape& tape, Value a, Value b) {
  const Tensor& av = tape.value(a);
  const Tensor& bv = tape.value(b);
  require_same_shape("add", av, bv);
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return tape.record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
    for (Value v : {a, b}) {
      if (!t.requires_grad(v)) continue;
      Tensor& d = t.grad(v);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
    }
  });
}

Value mul(Tape& tape, Value a, Value b) {
  const Tensor& av = tape.value(a);
  const Tensor& bv = tape.value(b);
  require_same_shape("mul", av, bv);
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return tape.record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
    const Tensor& av = t.value(a);
    const Tensor& bv = t.value(b);
    if (t.requires_grad(a)) {
      Tensor& d = t.grad(a);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * bv[i];
    }
    if (t.requires_grad(b)) {
      Tensor& d = t.grad(b);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * av[i];
    }
  });
}

Value concat_cols(Tape& tape, Value a, Value b) {
  const Tensor& av = tape.value(a);
  const Tensor& bv = tape.value(b);
  if (av.rows() != bv.rows()) {
    throw DimensionError("concat_cols: row mismatch " + av.shape_string() + " vs " +
                         bv.shape_string());
  }
  const std::size_t rows = av.rows(), ca = av.cols(), cb = bv.cols();
  Tensor out({rows, ca + cb});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < ca; ++c) out(r, c) = av(r, c);
    for (std::size_t c = 0; c < cb; ++c) out(r, ca + c) = bv(r, c);
  }
  return tape.record(std::move(out), {a, b}, [a, b, ca, cb](Tape& t, const Tensor& g) {
    const std::size_t rows = g.rows();
    if (t.requires_grad(a)) {
      Tensor& d = t.grad(a);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < ca; ++c) d(r, c) += g(r, c);
    }
    if (t.requires_grad(b)) {
      Tensor& d = t.grad(b);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cb; ++c) d(r, c) += g(r, ca + c);
    }
  });
}

Value sum(Tape& tape, Value x) {
  double total = 0.0;
  for (double v : tape.value(x).values()) total += v;
  return tape.record(Tensor::scalar(total), {x}, [x](Tape& t, const Tensor& g) {
    Tensor& d = t.grad(x);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[0];
  });
}

Value mean_of(Tape& tape, std::span<const Value> scalars) {
  if (scalars.empty()) throw PreconditionError("mean_of: no inputs");
  double total = 0.0;
  for (Value v : scalars) {
    if (tape.value(v).size() != 1) throw DimensionError("mean_of: inputs must be scalars");
    total += tape.value(v)[0];
  }
  const double n = double(scalars.size());
  std::vector<Value> inputs(scalars.begin(), scalars.end());
  return tape.record(Tensor::scalar(total / n), inputs, [inputs, n](Tape& t, const Tensor& g) {
    for (Value v : inputs) {
      if (t.requires_grad(v)) t.grad(v)[0] += g[0] / n;
    }
  });
}

}  // namespace tss
