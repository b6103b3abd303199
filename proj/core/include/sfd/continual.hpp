#pragma once

// Objectives and importance estimates used by the incremental protocol:
// the overall SFDNet objective, the embedding-network baselines (LwF, EWC,
// MAS regularizers on top of a triplet metric loss) and semantic drift
// compensation of stored prototypes.
//
// Every batch loss is a mean over the batch.

#include <Eigen/Core>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "sfd/nn.hpp"
#include "sfd/tensor.hpp"
#include "sfd/translation.hpp"

namespace sfd::continual {

enum class Method { FT, LWF, EWC, MAS, SDC, SFDNet, E_SFDNet };

std::string to_string(Method m);
/// Accepts the enum spelling ("E_SFDNet") and the dashed table spelling ("E-EWC", "E-SFDNet").
std::optional<Method> parse_method(std::string_view name);

bool uses_sfdnet(Method m) noexcept;
bool uses_triplet(Method m) noexcept;

struct MethodConfig {
  Method method = Method::FT;
  double gamma = 1.0;          // regularizer balance for LWF/EWC/MAS
  double margin = 0.5;         // triplet margin
  double sdc_bandwidth = 0.3;  // Gaussian kernel width for SDC

  void validate() const;
};

/// L_CADA + L_compensation. Throws NumericError on non-finite inputs.
double total_loss(double cada, double compensation);
Tensor total_loss(const Tensor& cada, const Tensor& compensation);

/// Batch mean of ||z_t - z_{t-1}||_2 per sample.
Tensor lwf_loss(const Tensor& z_current, const Tensor& z_previous);

enum class ImportanceKind { fisher, mas };

/// Per-parameter non-negative weights mirroring a NamedTensors list.
struct ImportanceMap {
  ImportanceKind kind = ImportanceKind::fisher;
  NamedTensors values;  // constants, same names/shapes as the parameters

  /// Elementwise sum; names and shapes must agree.
  ImportanceMap& accumulate(const ImportanceMap& other);
};

/// sum_p 0.5 * F_p * (theta_p - theta_prev_p)^2; requires kind == fisher.
Tensor ewc_loss(const NamedTensors& current, const NamedTensors& previous, const ImportanceMap& fisher);
/// sum_p 0.5 * Omega_p * (theta_p - theta_prev_p)^2; requires kind == mas.
Tensor mas_loss(const NamedTensors& current, const NamedTensors& previous, const ImportanceMap& omega);

/// Diagonal Fisher: mean over samples of the squared gradient of objective(i).
ImportanceMap estimate_fisher(const NamedTensors& params, std::size_t samples,
                              const std::function<Tensor(std::size_t)>& objective);
/// MAS: mean over samples of |d ||output(i)||_2^2 / d theta|.
ImportanceMap mas_importance(const NamedTensors& params, std::size_t samples,
                             const std::function<Tensor(std::size_t)>& output);

/// Batch mean of max(0, ||a - p|| - ||a - n|| + margin) over aligned rows.
Tensor triplet_loss(const Tensor& anchor, const Tensor& positive, const Tensor& negative, double margin);

/// L_ML + gamma * L_C; only LWF, EWC and MAS carry a regularizer.
Tensor combined_loss(const Tensor& metric_loss, const Tensor& reg_loss, const MethodConfig& method);
double combined_loss(double metric_loss, double reg_loss, const MethodConfig& method);

/// Moves every prototype by the Gaussian-kernel weighted mean drift of the
/// current-task features:
///   w_i = exp(-||before_i - p||^2 / (2 bandwidth^2)),  p += sum w_i (after_i - before_i) / sum w_i
/// Rows of `before` and `after` describe the same samples under the old and new model.
translation::PrototypeMemory sdc_drift_compensation(const translation::PrototypeMemory& memory,
                                                    const Eigen::MatrixXd& before, const Eigen::MatrixXd& after,
                                                    double bandwidth);

}  // namespace sfd::continual
