#pragma once

#include <array>
#include <utility>
#include <vector>

#include "csm/tagger.hpp"

namespace csm::tagger::detail {

// Activations of one LSTM direction, rows in processing order.
struct DirectionCache {
  Eigen::MatrixXd x;
  Eigen::MatrixXd i, f, g, o, c, h;
};

struct LayerCache {
  Eigen::MatrixXd input;  // after dropout, natural order
  Eigen::MatrixXd mask;   // empty when no dropout
  std::array<DirectionCache, 2> dir;
  Eigen::MatrixXd out;    // n x 2h, natural order
};

struct SentenceCache {
  std::vector<int> tokens;
  std::vector<LayerCache> layers;
  Eigen::MatrixXd proj_in;
  Eigen::MatrixXd proj_mask;
  Eigen::MatrixXd probs;
};

// Dense gradients except the embedding, which is kept as touched rows.
struct SentenceGrad {
  TaggerParams dense;
  std::vector<std::pair<int, Eigen::RowVectorXd>> embedding_rows;
};

SentenceCache forward_cached(const TaggerParams& params,
                             std::span<const int> tokens, double dropout,
                             Rng* rng);

// Accumulates into `out` (dense arrays must be shaped like params, embedding
// left empty).
void backward_cached(const TaggerParams& params, const SentenceCache& cache,
                     const Eigen::MatrixXd& d_logits, SentenceGrad& out);

SentenceGrad empty_grad(const TaggerParams& params);

}  // namespace csm::tagger::detail
