#include "empmin/objectives.hpp"

#include <cmath>
#include <stdexcept>

namespace empmin::objectives {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

Eigen::Map<const RowMajor> layer(const MlpSpec& spec, const Vector& x, Index k, Index offset) {
  return {x.data() + offset, spec.layers[static_cast<std::size_t>(k + 1)], spec.layers[static_cast<std::size_t>(k)]};
}

}  // namespace

Index MlpSpec::weight_count() const {
  Index d = 0;
  for (std::size_t k = 0; k + 1 < layers.size(); ++k) d += layers[k] * layers[k + 1];
  return d;
}

void validate(const MlpSpec& spec) {
  if (spec.layers.size() < 2) throw std::invalid_argument("mlp: need at least one layer (K >= 1)");
  for (Index s : spec.layers)
    if (s < 1) throw std::invalid_argument("mlp: layer sizes must be >= 1");
  if (!(spec.lambda > 0.0)) throw std::invalid_argument("mlp: ridge weight lambda must be > 0");
}

Vector mlp_forward(const MlpSpec& spec, const Vector& x, const ConstRef& u) {
  if (x.size() != spec.weight_count()) throw std::invalid_argument("mlp_forward: weight vector has wrong length");
  if (u.size() != spec.input_dim()) throw std::invalid_argument("mlp_forward: input has wrong length");
  Vector a = u;
  Index offset = 0;
  const Index K = spec.depth();
  for (Index k = 0; k < K; ++k) {
    const auto W = layer(spec, x, k, offset);
    offset += W.size();
    Vector h = W * a;
    if (k + 1 < K) h = h.unaryExpr(&sigmoid);
    a = std::move(h);
  }
  return a;
}

MlpFamily::MlpFamily(MlpSpec spec) : spec_(std::move(spec)) { validate(spec_); }

double MlpFamily::evaluate(const Vector& x, const ConstRef& z, double, double weight, Derivatives out) const {
  if (x.size() != spec_.weight_count()) throw std::invalid_argument("mlp: weight vector has wrong length");
  if (z.size() != noise_dim()) throw std::invalid_argument("mlp: sample has wrong length");
  const Index K = spec_.depth();
  const auto u = z.head(spec_.input_dim());
  const auto y = z.tail(spec_.output_dim());

  // Forward pass keeping every layer input.
  std::vector<Vector> acts;
  acts.reserve(static_cast<std::size_t>(K));
  std::vector<Index> offsets(static_cast<std::size_t>(K));
  acts.emplace_back(u);
  Index offset = 0;
  Vector out_vec;
  for (Index k = 0; k < K; ++k) {
    offsets[static_cast<std::size_t>(k)] = offset;
    const auto W = layer(spec_, x, k, offset);
    offset += W.size();
    Vector h = W * acts.back();
    if (k + 1 < K)
      acts.push_back(h.unaryExpr(&sigmoid));
    else
      out_vec = std::move(h);
  }
  const Vector resid = out_vec - y;
  const double value = 0.5 * resid.squaredNorm() + 0.5 * spec_.lambda * x.squaredNorm();
  if (out.hessian) throw std::logic_error("mlp: no analytic Hessian");
  if (!out.gradient) return value;

  Vector& g = *out.gradient;
  g.noalias() += (weight * spec_.lambda) * x;
  Vector delta = resid;
  for (Index k = K - 1; k >= 0; --k) {
    const auto& in = acts[static_cast<std::size_t>(k)];
    const Index off = offsets[static_cast<std::size_t>(k)];
    const Index rows = spec_.layers[static_cast<std::size_t>(k + 1)];
    const Index cols = spec_.layers[static_cast<std::size_t>(k)];
    Eigen::Map<RowMajor> gW(g.data() + off, rows, cols);
    gW.noalias() += weight * delta * in.transpose();
    if (k == 0) break;
    const auto W = layer(spec_, x, k, off);
    Vector back = W.transpose() * delta;
    // in = s(h) so ds/dh = in (1 - in)
    delta = back.array() * in.array() * (1.0 - in.array());
  }
  return value;
}

}  // namespace empmin::objectives
