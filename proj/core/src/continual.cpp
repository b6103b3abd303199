#include "sfd/continual.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "sfd/error.hpp"
#include "sfd/ops.hpp"

namespace sfd::continual {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericError(std::string(what) + " is not finite");
}

std::string canonical_name(std::string_view name) {
  std::string s;
  for (char c : name) {
    if (c == '-' || c == '_') continue;
    s.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return s;
}

Tensor quadratic_penalty(const NamedTensors& current, const NamedTensors& previous, const ImportanceMap& weights) {
  if (current.size() != previous.size() || current.size() != weights.values.size()) {
    throw InvalidInput("regularizer: parameter lists differ in length");
  }
  Tensor total = Tensor::scalar(0.0);
  for (std::size_t i = 0; i < current.size(); ++i) {
    const auto& cur = current[i].second;
    const auto& prev = previous[i].second;
    const auto& w = weights.values[i].second;
    if (cur.shape() != prev.shape() || cur.shape() != w.shape()) {
      throw InvalidInput("regularizer: shape mismatch at " + current[i].first);
    }
    auto diff = ops::sub(cur, prev.detach());
    total = ops::add(total, ops::sum(ops::mul(w.detach(), ops::square(diff))));
  }
  return ops::scale(total, 0.5);
}

template <typename Transform>
ImportanceMap accumulate_gradients(const NamedTensors& params, std::size_t samples, ImportanceKind kind,
                                   const std::function<Tensor(std::size_t)>& scalar_of, Transform transform) {
  if (samples == 0) throw InvalidInput("importance estimation needs at least one sample");
  std::vector<std::vector<double>> sums;
  for (const auto& [_, p] : params) sums.emplace_back(p.numel(), 0.0);
  for (std::size_t i = 0; i < samples; ++i) {
    for (auto& [_, p] : params) Tensor(p).zero_grad();
    Tensor loss = scalar_of(i);
    loss.backward();
    for (std::size_t k = 0; k < params.size(); ++k) {
      auto g = params[k].second.grad();
      if (g.empty()) continue;
      for (std::size_t j = 0; j < g.size(); ++j) sums[k][j] += transform(g[j]);
    }
  }
  for (auto& [_, p] : params) Tensor(p).zero_grad();
  ImportanceMap out{kind, {}};
  for (std::size_t k = 0; k < params.size(); ++k) {
    for (auto& v : sums[k]) v /= static_cast<double>(samples);
    out.values.emplace_back(params[k].first, Tensor::from(params[k].second.shape(), std::move(sums[k])));
  }
  return out;
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::FT: return "FT";
    case Method::LWF: return "LWF";
    case Method::EWC: return "EWC";
    case Method::MAS: return "MAS";
    case Method::SDC: return "SDC";
    case Method::SFDNet: return "SFDNet";
    case Method::E_SFDNet: return "E_SFDNet";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  auto s = canonical_name(name);
  // "E-" marks the embedding-network adaptation of the classification baselines.
  if (s.size() > 1 && s[0] == 'E' && s != "EWC" && s != "ESFDNET") s.erase(0, 1);
  if (s == "FT") return Method::FT;
  if (s == "LWF") return Method::LWF;
  if (s == "EWC" || s == "ECA") return Method::EWC;
  if (s == "MAS") return Method::MAS;
  if (s == "SDC") return Method::SDC;
  if (s == "SFDNET") return Method::SFDNet;
  if (s == "ESFDNET") return Method::E_SFDNet;
  return std::nullopt;
}

bool uses_sfdnet(Method m) noexcept { return m == Method::SFDNet || m == Method::E_SFDNet; }

bool uses_triplet(Method m) noexcept { return m != Method::SFDNet; }

void MethodConfig::validate() const {
  if (gamma < 0.0) throw ConfigError("gamma must be non-negative");
  if (margin < 0.0) throw ConfigError("triplet margin must be non-negative");
  if (!(sdc_bandwidth > 0.0)) throw ConfigError("SDC bandwidth must be positive");
}

double total_loss(double cada, double compensation) {
  require_finite(cada, "CADA loss");
  require_finite(compensation, "compensation loss");
  return cada + compensation;
}

Tensor total_loss(const Tensor& cada, const Tensor& compensation) {
  require_finite(cada.item(), "CADA loss");
  require_finite(compensation.item(), "compensation loss");
  return ops::add(cada, compensation);
}

Tensor lwf_loss(const Tensor& z_current, const Tensor& z_previous) {
  if (z_current.shape() != z_previous.shape() || z_current.rank() != 2) {
    throw InvalidInput("lwf_loss: embedding shapes differ " + shape_string(z_current.shape()) + " vs " +
                       shape_string(z_previous.shape()));
  }
  return ops::mean(ops::sqrt(ops::sum_rows(ops::square(ops::sub(z_current, z_previous)))));
}

ImportanceMap& ImportanceMap::accumulate(const ImportanceMap& other) {
  if (other.kind != kind || other.values.size() != values.size()) {
    throw InvalidInput("cannot accumulate importance maps of different layout");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].first != other.values[i].first || values[i].second.shape() != other.values[i].second.shape()) {
      throw InvalidInput("importance map mismatch at " + values[i].first);
    }
    auto dst = values[i].second.mutable_data();
    auto src = other.values[i].second.data();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
  }
  return *this;
}

Tensor ewc_loss(const NamedTensors& current, const NamedTensors& previous, const ImportanceMap& fisher) {
  if (fisher.kind != ImportanceKind::fisher) throw InvalidInput("ewc_loss needs a Fisher importance map");
  return quadratic_penalty(current, previous, fisher);
}

Tensor mas_loss(const NamedTensors& current, const NamedTensors& previous, const ImportanceMap& omega) {
  if (omega.kind != ImportanceKind::mas) throw InvalidInput("mas_loss needs a MAS importance map");
  return quadratic_penalty(current, previous, omega);
}

ImportanceMap estimate_fisher(const NamedTensors& params, std::size_t samples,
                              const std::function<Tensor(std::size_t)>& objective) {
  return accumulate_gradients(params, samples, ImportanceKind::fisher, objective, [](double g) { return g * g; });
}

ImportanceMap mas_importance(const NamedTensors& params, std::size_t samples,
                             const std::function<Tensor(std::size_t)>& output) {
  auto squared_norm = [&output](std::size_t i) { return ops::sum(ops::square(output(i))); };
  return accumulate_gradients(params, samples, ImportanceKind::mas, squared_norm, [](double g) { return std::abs(g); });
}

Tensor triplet_loss(const Tensor& anchor, const Tensor& positive, const Tensor& negative, double margin) {
  if (anchor.shape() != positive.shape() || anchor.shape() != negative.shape() || anchor.rank() != 2) {
    throw InvalidInput("triplet_loss: anchor/positive/negative shapes differ");
  }
  if (anchor.dim(0) == 0) throw InvalidInput("triplet_loss: no triplets");
  auto d_pos = ops::sqrt(ops::sum_rows(ops::square(ops::sub(anchor, positive))));
  auto d_neg = ops::sqrt(ops::sum_rows(ops::square(ops::sub(anchor, negative))));
  return ops::mean(ops::relu(ops::add_scalar(ops::sub(d_pos, d_neg), margin)));
}

Tensor combined_loss(const Tensor& metric_loss, const Tensor& reg_loss, const MethodConfig& method) {
  if (method.method != Method::LWF && method.method != Method::EWC && method.method != Method::MAS) {
    throw ConfigError("combined_loss applies to LWF, EWC and MAS, not " + to_string(method.method));
  }
  return ops::add(metric_loss, ops::scale(reg_loss, method.gamma));
}

double combined_loss(double metric_loss, double reg_loss, const MethodConfig& method) {
  if (method.method != Method::LWF && method.method != Method::EWC && method.method != Method::MAS) {
    throw ConfigError("combined_loss applies to LWF, EWC and MAS, not " + to_string(method.method));
  }
  return metric_loss + method.gamma * reg_loss;
}

translation::PrototypeMemory sdc_drift_compensation(const translation::PrototypeMemory& memory,
                                                    const Eigen::MatrixXd& before, const Eigen::MatrixXd& after,
                                                    double bandwidth) {
  if (before.rows() == 0) throw InvalidInput("sdc_drift_compensation: no current-task features");
  if (before.rows() != after.rows() || before.cols() != after.cols()) {
    throw InvalidInput("sdc_drift_compensation: before/after feature matrices differ in shape");
  }
  if (!(bandwidth > 0.0)) throw InvalidInput("sdc_drift_compensation: bandwidth must be positive");
  if (!memory.empty() && static_cast<Eigen::Index>(memory.dim()) != before.cols()) {
    throw InvalidInput("sdc_drift_compensation: prototype width differs from feature width");
  }
  const Eigen::MatrixXd drift = after - before;
  translation::PrototypeMemory out;
  for (const auto& [c, entry] : memory.entries()) {
    Eigen::VectorXd log_w(before.rows());
    for (Eigen::Index i = 0; i < before.rows(); ++i) {
      log_w[i] = -(before.row(i).transpose() - entry.prototype).squaredNorm() / (2.0 * bandwidth * bandwidth);
    }
    // Normalizing in log space keeps far-away prototypes from underflowing to 0/0.
    Eigen::VectorXd w = (log_w.array() - log_w.maxCoeff()).exp();
    Eigen::VectorXd shift = (drift.transpose() * w) / w.sum();
    out.set(c, entry.prototype + shift, entry.task);
  }
  return out;
}

}  // namespace sfd::continual
