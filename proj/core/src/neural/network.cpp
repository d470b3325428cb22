#include "envmorph/neural/network.hpp"

#include <cmath>
#include <string>

#include "envmorph/errors.hpp"

namespace envmorph::nn {
namespace {

template <typename T>
using ConstMap = Eigen::Map<const Matrix<T>>;
template <typename T>
using MutMap = Eigen::Map<Matrix<T>>;
template <typename T>
using ConstVecMap = Eigen::Map<const Vector<T>>;
template <typename T>
using MutVecMap = Eigen::Map<Vector<T>>;

Index floor_div(Index a, Index b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

// Copied so that products see an aligned operand regardless of the span.
template <typename T>
Matrix<T> weight_of(const LayerSpec& s, std::span<const T> p) {
  return ConstMap<T>(p.data(), s.out, Index(s.kernel) * s.in);
}
template <typename T>
ConstVecMap<T> bias_of(const LayerSpec& s, std::span<const T> p) {
  return ConstVecMap<T>(p.data() + s.weight_count(), s.out);
}

// Gradient buffers are caller-owned spans at arbitrary alignment, and Eigen
// picks its summation order from the destination's alignment. Evaluating into
// an owned temporary first keeps gradients independent of where they live.
template <typename Dst, typename Src>
void accumulate(Dst&& dst, const Src& src) {
  for (Index j = 0; j < src.cols(); ++j) {
    for (Index i = 0; i < src.rows(); ++i) dst(i, j) += src(i, j);
  }
}

// --- strided convolution ----------------------------------------------------

template <typename T>
Tensor<T> conv_forward(const LayerSpec& s, std::span<const T> p, const Tensor<T>& x, LayerCache<T>* cache) {
  require(x.channels() == s.in, "conv: expected " + std::to_string(s.in) + " input channels, got " +
                                    std::to_string(x.channels()));
  const Index n_batch = x.batch, len = x.length, k_size = s.kernel, stride = s.stride, cin = s.in;
  const Index out_len = (len + stride - 1) / stride;
  Matrix<T> cols = Matrix<T>::Zero(k_size * cin, n_batch * out_len);
  for (Index n = 0; n < n_batch; ++n) {
    for (Index m = 0; m < out_len; ++m) {
      const Index base = m * stride - stride;
      for (Index k = 0; k < k_size; ++k) {
        const Index pos = base + k;
        if (pos < 0 || pos >= len) continue;
        cols.block(k * cin, n * out_len + m, cin, 1) = x.data.col(n * len + pos);
      }
    }
  }
  Tensor<T> y;
  y.batch = n_batch;
  y.length = out_len;
  y.data.noalias() = weight_of(s, p) * cols;
  y.data.colwise() += bias_of(s, p);
  if (cache) {
    cache->saved = std::move(cols);
    cache->batch = n_batch;
    cache->in_length = len;
  }
  return y;
}

template <typename T>
Tensor<T> conv_backward(const LayerSpec& s, std::span<const T> p, const LayerCache<T>& cache,
                        const Tensor<T>& g, std::span<T> grads) {
  const Index n_batch = cache.batch, len = cache.in_length, k_size = s.kernel, stride = s.stride, cin = s.in;
  const Index out_len = g.length;
  MutMap<T> dw(grads.data(), s.out, k_size * cin);
  MutVecMap<T> db(grads.data() + s.weight_count(), s.out);
  accumulate(dw, Matrix<T>(g.data * cache.saved.transpose()));
  accumulate(db, Vector<T>(g.data.rowwise().sum()));
  const Matrix<T> dcols = weight_of(s, p).transpose() * g.data;
  Tensor<T> dx(n_batch, cin, len);
  for (Index n = 0; n < n_batch; ++n) {
    for (Index m = 0; m < out_len; ++m) {
      const Index base = m * stride - stride;
      for (Index k = 0; k < k_size; ++k) {
        const Index pos = base + k;
        if (pos < 0 || pos >= len) continue;
        dx.data.col(n * len + pos) += dcols.block(k * cin, n * out_len + m, cin, 1);
      }
    }
  }
  return dx;
}

// --- nearest-neighbor upsample followed by convolution ------------------------
//
// Output phase r of input position m sees the upsampled taps
// x[m + floor((r + k - f) / f)], which only takes the values m-1, m, m+1.
// Folding the 2f+1 taps into 3 per phase gives an exact polyphase form.

template <typename T>
Matrix<T> polyphase_weights(const LayerSpec& s, std::span<const T> p) {
  const Index f = s.stride, cin = s.in, cout = s.out;
  const auto w = weight_of(s, p);
  Matrix<T> eff = Matrix<T>::Zero(f * cout, 3 * cin);
  for (Index r = 0; r < f; ++r) {
    for (Index k = 0; k < s.kernel; ++k) {
      const Index d = floor_div(r + k - f, f);
      eff.block(r * cout, (d + 1) * cin, cout, cin) += w.block(0, k * cin, cout, cin);
    }
  }
  return eff;
}

template <typename T>
Tensor<T> upconv_forward(const LayerSpec& s, std::span<const T> p, const Tensor<T>& x, LayerCache<T>* cache) {
  require(x.channels() == s.in, "upsample-conv: expected " + std::to_string(s.in) +
                                    " input channels, got " + std::to_string(x.channels()));
  const Index n_batch = x.batch, len = x.length, f = s.stride, cin = s.in, cout = s.out;
  Matrix<T> cols = Matrix<T>::Zero(3 * cin, n_batch * len);
  for (Index n = 0; n < n_batch; ++n) {
    for (Index m = 0; m < len; ++m) {
      for (Index d = -1; d <= 1; ++d) {
        const Index pos = m + d;
        if (pos < 0 || pos >= len) continue;
        cols.block((d + 1) * cin, n * len + m, cin, 1) = x.data.col(n * len + pos);
      }
    }
  }
  const Matrix<T> phases = polyphase_weights(s, p) * cols;
  const auto b = bias_of(s, p);
  Tensor<T> y(n_batch, cout, len * f);
  for (Index n = 0; n < n_batch; ++n) {
    for (Index m = 0; m < len; ++m) {
      for (Index r = 0; r < f; ++r) {
        y.data.col(n * len * f + m * f + r) = phases.block(r * cout, n * len + m, cout, 1) + b;
      }
    }
  }
  if (cache) {
    cache->saved = std::move(cols);
    cache->batch = n_batch;
    cache->in_length = len;
  }
  return y;
}

template <typename T>
Tensor<T> upconv_backward(const LayerSpec& s, std::span<const T> p, const LayerCache<T>& cache,
                          const Tensor<T>& g, std::span<T> grads) {
  const Index n_batch = cache.batch, len = cache.in_length, f = s.stride, cin = s.in, cout = s.out;
  Matrix<T> dphase(f * cout, n_batch * len);
  for (Index n = 0; n < n_batch; ++n) {
    for (Index m = 0; m < len; ++m) {
      for (Index r = 0; r < f; ++r) {
        dphase.block(r * cout, n * len + m, cout, 1) = g.data.col(n * len * f + m * f + r);
      }
    }
  }
  const Matrix<T> deff = dphase * cache.saved.transpose();
  MutMap<T> dw(grads.data(), cout, Index(s.kernel) * cin);
  MutVecMap<T> db(grads.data() + s.weight_count(), cout);
  for (Index r = 0; r < f; ++r) {
    for (Index k = 0; k < s.kernel; ++k) {
      const Index d = floor_div(r + k - f, f);
      dw.block(0, k * cin, cout, cin) += deff.block(r * cout, (d + 1) * cin, cout, cin);
    }
  }
  accumulate(db, Vector<T>(g.data.rowwise().sum()));

  const Matrix<T> dcols = polyphase_weights(s, p).transpose() * dphase;
  Tensor<T> dx(n_batch, cin, len);
  for (Index n = 0; n < n_batch; ++n) {
    for (Index m = 0; m < len; ++m) {
      for (Index d = -1; d <= 1; ++d) {
        const Index pos = m + d;
        if (pos < 0 || pos >= len) continue;
        dx.data.col(n * len + pos) += dcols.block((d + 1) * cin, n * len + m, cin, 1);
      }
    }
  }
  return dx;
}

// --- dense and activations ------------------------------------------------------

template <typename T>
Tensor<T> dense_forward(const LayerSpec& s, std::span<const T> p, const Tensor<T>& x, LayerCache<T>* cache) {
  require(x.channels() == s.in, "dense: expected " + std::to_string(s.in) + " inputs, got " +
                                    std::to_string(x.channels()));
  Tensor<T> y;
  y.batch = x.batch;
  y.length = x.length;
  y.data.noalias() = weight_of(s, p) * x.data;
  y.data.colwise() += bias_of(s, p);
  if (cache) {
    cache->saved = x.data;
    cache->batch = x.batch;
    cache->in_length = x.length;
  }
  return y;
}

template <typename T>
Tensor<T> dense_backward(const LayerSpec& s, std::span<const T> p, const LayerCache<T>& cache,
                         const Tensor<T>& g, std::span<T> grads) {
  MutMap<T> dw(grads.data(), s.out, s.in);
  MutVecMap<T> db(grads.data() + s.weight_count(), s.out);
  accumulate(dw, Matrix<T>(g.data * cache.saved.transpose()));
  accumulate(db, Vector<T>(g.data.rowwise().sum()));
  Tensor<T> dx;
  dx.batch = cache.batch;
  dx.length = cache.in_length;
  dx.data.noalias() = weight_of(s, p).transpose() * g.data;
  return dx;
}

template <typename T>
T stable_sigmoid(T v) {
  if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
  const T e = std::exp(v);
  return e / (T(1) + e);
}

template <typename T>
Tensor<T> activation_forward(const LayerSpec& s, const Tensor<T>& x, LayerCache<T>* cache) {
  Tensor<T> y;
  y.batch = x.batch;
  y.length = x.length;
  if (s.kind == LayerKind::Relu) {
    y.data = x.data.cwiseMax(T(0));
  } else {
    y.data = x.data.unaryExpr([](T v) { return stable_sigmoid(v); });
  }
  if (cache) {
    cache->saved = y.data;
    cache->batch = x.batch;
    cache->in_length = x.length;
  }
  return y;
}

template <typename T>
Tensor<T> activation_backward(const LayerSpec& s, const LayerCache<T>& cache, const Tensor<T>& g) {
  Tensor<T> dx;
  dx.batch = g.batch;
  dx.length = g.length;
  const auto& y = cache.saved;
  if (s.kind == LayerKind::Relu) {
    dx.data = (y.array() > T(0)).select(g.data, T(0));
  } else {
    dx.data = g.data.array() * y.array() * (T(1) - y.array());
  }
  return dx;
}

}  // namespace

Index LayerSpec::output_length(Index input_length) const noexcept {
  switch (kind) {
    case LayerKind::Conv: return (input_length + stride - 1) / stride;
    case LayerKind::UpsampleConv: return input_length * stride;
    default: return input_length;
  }
}

template <typename T>
Tensor<T> layer_forward(const LayerSpec& spec, std::span<const T> params, const Tensor<T>& x,
                        LayerCache<T>* cache) {
  switch (spec.kind) {
    case LayerKind::Conv: return conv_forward(spec, params, x, cache);
    case LayerKind::UpsampleConv: return upconv_forward(spec, params, x, cache);
    case LayerKind::Dense: return dense_forward(spec, params, x, cache);
    case LayerKind::Relu:
    case LayerKind::Sigmoid: return activation_forward(spec, x, cache);
  }
  throw InvalidArgument("unknown layer kind");
}

template <typename T>
Tensor<T> layer_backward(const LayerSpec& spec, std::span<const T> params, const LayerCache<T>& cache,
                         const Tensor<T>& grad_out, std::span<T> grads) {
  switch (spec.kind) {
    case LayerKind::Conv: return conv_backward(spec, params, cache, grad_out, grads);
    case LayerKind::UpsampleConv: return upconv_backward(spec, params, cache, grad_out, grads);
    case LayerKind::Dense: return dense_backward(spec, params, cache, grad_out, grads);
    case LayerKind::Relu:
    case LayerKind::Sigmoid: return activation_backward(spec, cache, grad_out);
  }
  throw InvalidArgument("unknown layer kind");
}

template <typename T>
Network<T>::Network(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
  for (const auto& l : layers_) {
    if (l.has_params()) {
      require(l.in > 0 && l.out > 0 && l.kernel > 0 && l.stride > 0, "layer dimensions must be positive");
      if (l.kind != LayerKind::Dense) require(l.kernel == 2 * l.stride + 1, "conv kernel must be 2*stride+1");
    }
    offsets_.push_back(param_count_);
    param_count_ += l.param_count();
  }
}

template <typename T>
void Network<T>::init(std::span<T> params, Rng& rng) const {
  require(static_cast<Index>(params.size()) == param_count_, "init: parameter size mismatch");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (!l.has_params()) continue;
    const double bound = std::sqrt(6.0 / (double(l.kernel) * l.in));
    auto slice = params.subspan(offsets_[i], l.param_count());
    for (Index j = 0; j < l.weight_count(); ++j) slice[j] = static_cast<T>(uniform(rng, -bound, bound));
    for (Index j = l.weight_count(); j < l.param_count(); ++j) slice[j] = T(0);
  }
}

template <typename T>
Tensor<T> Network<T>::forward(std::span<const T> params, const Tensor<T>& x, Workspace<T>* ws) const {
  require(static_cast<Index>(params.size()) == param_count_, "forward: parameter size mismatch");
  if (ws) ws->caches.assign(layers_.size(), {});
  Tensor<T> h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    h = layer_forward(l, params.subspan(offsets_[i], l.param_count()), h, ws ? &ws->caches[i] : nullptr);
  }
  return h;
}

template <typename T>
Tensor<T> Network<T>::backward(std::span<const T> params, const Workspace<T>& ws, const Tensor<T>& grad_out,
                               std::span<T> grads) const {
  require(static_cast<Index>(grads.size()) == param_count_, "backward: gradient size mismatch");
  require(ws.caches.size() == layers_.size(), "backward: workspace does not match this network");
  Tensor<T> g = grad_out;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const auto& l = layers_[i];
    g = layer_backward(l, params.subspan(offsets_[i], l.param_count()), ws.caches[i], g,
                       grads.subspan(offsets_[i], l.param_count()));
  }
  return g;
}

template class Network<float>;
template class Network<double>;
template Tensor<float> layer_forward(const LayerSpec&, std::span<const float>, const Tensor<float>&,
                                     LayerCache<float>*);
template Tensor<double> layer_forward(const LayerSpec&, std::span<const double>, const Tensor<double>&,
                                      LayerCache<double>*);
template Tensor<float> layer_backward(const LayerSpec&, std::span<const float>, const LayerCache<float>&,
                                      const Tensor<float>&, std::span<float>);
template Tensor<double> layer_backward(const LayerSpec&, std::span<const double>, const LayerCache<double>&,
                                       const Tensor<double>&, std::span<double>);

}  // namespace envmorph::nn
