#include "csm/ncsl.hpp"

#include <cmath>
#include <limits>

namespace csm::ncsl {

std::string to_string(MatrixMode mode) {
  switch (mode) {
    case MatrixMode::None:
      return "none";
    case MatrixMode::Direct:
      return "direct";
    case MatrixMode::MetaPath:
      return "metapath";
  }
  return "none";
}

MatrixMode parse_matrix_mode(const std::string& text) {
  if (text == "none") return MatrixMode::None;
  if (text == "direct") return MatrixMode::Direct;
  if (text == "metapath") return MatrixMode::MetaPath;
  throw ValidationError("unknown matrix mode '" + text +
                        "' (expected direct, metapath or none)");
}

TypeDistribution uniform(Side over, Eigen::Index n) {
  return {over, Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)), true};
}

namespace {

Eigen::VectorXd apply_floor(const Eigen::VectorXd& r) {
  const double k = static_cast<double>(r.size());
  return (r.array() + kFloor) / (1.0 + k * kFloor);
}

double floor_scale(Eigen::Index n) {
  return 1.0 / (1.0 + static_cast<double>(n) * kFloor);
}

Side other(Side s) { return s == Side::Entity ? Side::Trigger : Side::Entity; }

Eigen::VectorXd softmax(const Eigen::VectorXd& s) {
  const Eigen::ArrayXd e = (s.array() - s.maxCoeff()).exp();
  return e / e.sum();
}

// d/d raw of (raw / sum(raw)) applied to d_r.
Eigen::VectorXd l1_vjp(const Eigen::VectorXd& r, double total,
                       const Eigen::VectorXd& d_r) {
  return (d_r.array() - d_r.dot(r)) / total;
}

}  // namespace

TypeDistribution normalize_floor(Side over, const Eigen::VectorXd& raw) {
  const double total = raw.sum();
  if (!(total >= kMinMass)) return uniform(over, raw.size());
  return {over, apply_floor(raw / total), false};
}

SidePair aggregate_predicted(std::span<const Eigen::MatrixXd> probs,
                             const TagSchema& schema) {
  if (probs.empty()) throw ValidationError("aggregate_predicted: empty batch");
  Eigen::VectorXd ent = Eigen::VectorXd::Zero(schema.num_entity_types());
  Eigen::VectorXd trg = Eigen::VectorXd::Zero(schema.num_trigger_types());
  for (const auto& p : probs) {
    if (p.cols() != schema.num_tags()) {
      throw ValidationError("aggregate_predicted: probability rows have " +
                            std::to_string(p.cols()) + " columns, schema has " +
                            std::to_string(schema.num_tags()) + " tags");
    }
    const Eigen::RowVectorXd mass = p.colwise().sum();
    for (int e = 0; e < ent.size(); ++e) {
      const int b = schema.begin_tag(Role::Entity, e);
      ent[e] += mass[b] + mass[b + 1];
    }
    for (int t = 0; t < trg.size(); ++t) {
      const int b = schema.begin_tag(Role::Trigger, t);
      trg[t] += mass[b] + mass[b + 1];
    }
  }
  return {normalize_floor(Side::Entity, ent), normalize_floor(Side::Trigger, trg)};
}

std::vector<Eigen::MatrixXd> aggregate_predicted_vjp(
    std::span<const Eigen::MatrixXd> probs, const TagSchema& schema,
    const Eigen::VectorXd& d_entity, const Eigen::VectorXd& d_trigger) {
  Eigen::VectorXd ent = Eigen::VectorXd::Zero(schema.num_entity_types());
  Eigen::VectorXd trg = Eigen::VectorXd::Zero(schema.num_trigger_types());
  for (const auto& p : probs) {
    const Eigen::RowVectorXd mass = p.colwise().sum();
    for (int e = 0; e < ent.size(); ++e) {
      const int b = schema.begin_tag(Role::Entity, e);
      ent[e] += mass[b] + mass[b + 1];
    }
    for (int t = 0; t < trg.size(); ++t) {
      const int b = schema.begin_tag(Role::Trigger, t);
      trg[t] += mass[b] + mass[b + 1];
    }
  }
  // Per-tag gradient row shared by every token (the aggregate is a plain sum).
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(schema.num_tags());
  auto side = [&](const Eigen::VectorXd& raw, const Eigen::VectorXd& d_out,
                  Role role) {
    const double total = raw.sum();
    if (!(total >= kMinMass)) return;  // uniform fallback is constant
    const Eigen::VectorXd r = raw / total;
    const Eigen::VectorXd d_raw = l1_vjp(r, total, d_out * floor_scale(r.size()));
    for (int k = 0; k < raw.size(); ++k) {
      const int b = schema.begin_tag(role, k);
      row[b] = d_raw[k];
      row[b + 1] = d_raw[k];
    }
  };
  side(ent, d_entity, Role::Entity);
  side(trg, d_trigger, Role::Trigger);

  std::vector<Eigen::MatrixXd> out;
  out.reserve(probs.size());
  for (const auto& p : probs) out.push_back(row.replicate(p.rows(), 1));
  return out;
}

SidePair aggregate_gold(std::span<const std::vector<int>> gold,
                        const TagSchema& schema) {
  if (gold.empty()) throw ValidationError("aggregate_gold: empty batch");
  Eigen::VectorXd ent = Eigen::VectorXd::Zero(schema.num_entity_types());
  Eigen::VectorXd trg = Eigen::VectorXd::Zero(schema.num_trigger_types());
  for (const auto& tags : gold) {
    for (int tag : tags) {
      if (tag < 0 || tag >= schema.num_tags()) {
        throw ValidationError("aggregate_gold: tag index out of range");
      }
      if (!schema.is_begin(tag)) continue;
      if (schema.role(tag) == Role::Entity) {
        ent[schema.type_index(tag)] += 1.0;
      } else {
        trg[schema.type_index(tag)] += 1.0;
      }
    }
  }
  return {normalize_floor(Side::Entity, ent), normalize_floor(Side::Trigger, trg)};
}

Eigen::MatrixXd fill_unreached(const hin::MetaPathMatrix& m) {
  double lowest = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < m.meta.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.meta.cols(); ++j) {
      if (m.reached(i, j)) lowest = std::min(lowest, m.meta(i, j));
    }
  }
  if (!std::isfinite(lowest)) return Eigen::MatrixXd::Zero(m.meta.rows(), m.meta.cols());
  Eigen::MatrixXd out = m.meta;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      if (!m.reached(i, j)) out(i, j) = lowest - 1.0;
    }
  }
  return out;
}

Converter::Converter(MatrixMode mode, const hin::MetaPathMatrix& matrices)
    : mode_(mode) {
  switch (mode) {
    case MatrixMode::Direct:
      if ((matrices.direct.array() < 0.0).any()) {
        throw ValidationError("convert_direct: M has negative entries");
      }
      matrix_ = matrices.direct;
      break;
    case MatrixMode::MetaPath:
      matrix_ = fill_unreached(matrices);
      all_unreached_ = !matrices.any_reached();
      break;
    case MatrixMode::None:
      throw ValidationError("Converter: matrix mode 'none' has no conversion");
  }
}

Eigen::VectorXd Converter::scores(const TypeDistribution& dist) const {
  const bool from_entity = dist.over == Side::Entity;
  const Eigen::Index expected = from_entity ? matrix_.rows() : matrix_.cols();
  if (dist.size() != expected) {
    throw ValidationError("convert: distribution has " +
                          std::to_string(dist.size()) + " entries, matrix needs " +
                          std::to_string(expected));
  }
  return from_entity ? Eigen::VectorXd(matrix_.transpose() * dist.values)
                     : Eigen::VectorXd(matrix_ * dist.values);
}

TypeDistribution Converter::apply(const TypeDistribution& dist) const {
  const Side to = other(dist.over);
  const Eigen::VectorXd s = scores(dist);
  if (mode_ == MatrixMode::Direct) return normalize_floor(to, s);
  if (all_unreached_) return uniform(to, s.size());
  return {to, apply_floor(softmax(s)), false};
}

Eigen::VectorXd Converter::vjp(const TypeDistribution& dist,
                               const Eigen::VectorXd& d_out) const {
  const Eigen::VectorXd s = scores(dist);
  Eigen::VectorXd d_s;
  if (mode_ == MatrixMode::Direct) {
    const double total = s.sum();
    if (!(total >= kMinMass)) return Eigen::VectorXd::Zero(dist.size());
    d_s = l1_vjp(s / total, total, d_out * floor_scale(s.size()));
  } else {
    if (all_unreached_) return Eigen::VectorXd::Zero(dist.size());
    const Eigen::VectorXd r = softmax(s);
    const Eigen::VectorXd d_r = d_out * floor_scale(s.size());
    d_s = r.array() * (d_r.array() - d_r.dot(r));
  }
  return dist.over == Side::Entity ? Eigen::VectorXd(matrix_ * d_s)
                                   : Eigen::VectorXd(matrix_.transpose() * d_s);
}

TypeDistribution convert_direct(const TypeDistribution& dist,
                                const Eigen::MatrixXd& m) {
  hin::MetaPathMatrix mats;
  mats.direct = m;
  return Converter(MatrixMode::Direct, mats).apply(dist);
}

TypeDistribution convert_metapath(const TypeDistribution& dist,
                                  const hin::MetaPathMatrix& m) {
  return Converter(MatrixMode::MetaPath, m).apply(dist);
}

double kl(const TypeDistribution& p, const TypeDistribution& q) {
  if (p.size() != q.size() || p.over != q.over) {
    throw ValidationError("kl: distributions over different type sets");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double pi = p.values[i];
    if (pi > 0.0) total += pi * std::log(pi / q.values[i]);
  }
  // Rounding can leave tiny negatives for p ~= q.
  return total < 0.0 ? 0.0 : total;
}

HinLoss hin_loss(const TypeDistribution& pred_entity,
                 const TypeDistribution& pred_trigger,
                 const TypeDistribution& gold_entity,
                 const TypeDistribution& gold_trigger, const Converter& conv) {
  const TypeDistribution to_trigger = conv.apply(pred_entity);
  const TypeDistribution to_entity = conv.apply(pred_trigger);
  HinLoss out;
  out.value = kl(gold_trigger, to_trigger) + kl(gold_entity, to_entity);
  // d kl(p, q) / d q = -p / q
  const Eigen::VectorXd d_trg =
      -(gold_trigger.values.array() / to_trigger.values.array()).matrix();
  const Eigen::VectorXd d_ent =
      -(gold_entity.values.array() / to_entity.values.array()).matrix();
  out.d_pred_entity = to_trigger.flagged ? Eigen::VectorXd::Zero(pred_entity.size())
                                         : conv.vjp(pred_entity, d_trg);
  out.d_pred_trigger = to_entity.flagged ? Eigen::VectorXd::Zero(pred_trigger.size())
                                         : conv.vjp(pred_trigger, d_ent);
  return out;
}

double hin_loss(const TypeDistribution& pred_entity,
                const TypeDistribution& pred_trigger,
                const TypeDistribution& gold_entity,
                const TypeDistribution& gold_trigger,
                const hin::MetaPathMatrix& matrices, MatrixMode mode) {
  return hin_loss(pred_entity, pred_trigger, gold_entity, gold_trigger,
                  Converter(mode, matrices))
      .value;
}

double combined_loss(double seq_loss, double hin_loss, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ValidationError("combined_loss: alpha must lie in [0, 1]");
  }
  if (alpha == 0.0) return seq_loss;
  if (alpha == 1.0) return hin_loss;
  return (1.0 - alpha) * seq_loss + alpha * hin_loss;
}

}  // namespace csm::ncsl
