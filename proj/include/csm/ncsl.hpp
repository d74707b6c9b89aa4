#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "csm/hin.hpp"

/// Neural cross-supervised layer: batch-level entity/trigger type
/// distributions, conversion of one side into the other through the HIN
/// matrices, and the dual KL penalty. Every forward function has a matching
/// vector-Jacobian product so the penalty can be back-propagated into the
/// tagger's softmax outputs.
namespace csm::ncsl {

using corpus::TagSchema;

enum class Side { Entity, Trigger };

enum class MatrixMode {
  None,     ///< tagger only, no cross-supervision
  Direct,   ///< M, normalized by L1
  MetaPath  ///< M', normalized by softmax
};

std::string to_string(MatrixMode mode);
MatrixMode parse_matrix_mode(const std::string& text);

/// Additive floor applied before renormalization: (q + eps) / (1 + K eps).
inline constexpr double kFloor = 1e-8;
/// Below this total mass a side falls back to uniform.
inline constexpr double kMinMass = 1e-12;

struct TypeDistribution {
  Side over = Side::Entity;
  Eigen::VectorXd values;
  /// Set when a degenerate input forced the uniform fallback.
  bool flagged = false;

  Eigen::Index size() const { return values.size(); }
};

TypeDistribution uniform(Side over, Eigen::Index n);

/// Normalizes non-negative `raw` with the epsilon floor; uniform and flagged
/// when the total is below kMinMass.
TypeDistribution normalize_floor(Side over, const Eigen::VectorXd& raw);

struct SidePair {
  TypeDistribution entity;
  TypeDistribution trigger;
};

/// F-hat: soft tag mass summed over every token of the batch. `probs` holds
/// one n x |A| matrix per sentence.
SidePair aggregate_predicted(std::span<const Eigen::MatrixXd> probs,
                             const TagSchema& schema);

/// d(loss)/d(probs) given d(loss)/d(F-hat_e) and d(loss)/d(F-hat_t).
std::vector<Eigen::MatrixXd> aggregate_predicted_vjp(
    std::span<const Eigen::MatrixXd> probs, const TagSchema& schema,
    const Eigen::VectorXd& d_entity, const Eigen::VectorXd& d_trigger);

/// F: span-level type counts of the gold tags.
SidePair aggregate_gold(std::span<const std::vector<int>> gold,
                        const TagSchema& schema);

/// entity -> trigger: dist * M; trigger -> entity: dist * M^T. L1 + floor.
TypeDistribution convert_direct(const TypeDistribution& dist,
                                const Eigen::MatrixXd& m);

/// `unreached` cells take (min finite entry - 1); softmax(dist * M') then floor.
TypeDistribution convert_metapath(const TypeDistribution& dist,
                                  const hin::MetaPathMatrix& m);

/// sum_i p_i log(p_i / q_i)
double kl(const TypeDistribution& p, const TypeDistribution& q);

/// Either conversion with its vector-Jacobian product.
class Converter {
 public:
  Converter(MatrixMode mode, const hin::MetaPathMatrix& matrices);

  MatrixMode mode() const { return mode_; }
  /// Effective matrix: M, or M' with unreached cells filled.
  const Eigen::MatrixXd& matrix() const { return matrix_; }

  TypeDistribution apply(const TypeDistribution& dist) const;
  /// Gradient with respect to `dist` given the gradient of the output.
  Eigen::VectorXd vjp(const TypeDistribution& dist,
                      const Eigen::VectorXd& d_out) const;

 private:
  MatrixMode mode_;
  Eigen::MatrixXd matrix_;
  bool all_unreached_ = false;

  Eigen::VectorXd scores(const TypeDistribution& dist) const;
};

/// M' with `unreached` replaced by (min finite entry - 1); all-unreached
/// matrices come back as zeros.
Eigen::MatrixXd fill_unreached(const hin::MetaPathMatrix& m);

struct HinLoss {
  double value = 0.0;
  Eigen::VectorXd d_pred_entity;
  Eigen::VectorXd d_pred_trigger;
};

/// kl(F_t, convert(F-hat_e)) + kl(F_e, convert(F-hat_t)) and its gradient with
/// respect to the predicted distributions.
HinLoss hin_loss(const TypeDistribution& pred_entity,
                 const TypeDistribution& pred_trigger,
                 const TypeDistribution& gold_entity,
                 const TypeDistribution& gold_trigger, const Converter& conv);

double hin_loss(const TypeDistribution& pred_entity,
                const TypeDistribution& pred_trigger,
                const TypeDistribution& gold_entity,
                const TypeDistribution& gold_trigger,
                const hin::MetaPathMatrix& matrices, MatrixMode mode);

/// (1 - alpha) * seq + alpha * hin
double combined_loss(double seq_loss, double hin_loss, double alpha);

}  // namespace csm::ncsl
