#pragma once

#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "csm/corpus.hpp"

namespace csm::hin {

using corpus::Corpus;
using corpus::TagSchema;

/// Global node-type id: entity types are 0..|A_e|-1, trigger types follow.
using TypeId = int;

inline TypeId entity_type_id(int e) { return e; }
inline TypeId trigger_type_id(const TagSchema& s, int t) {
  return s.num_entity_types() + t;
}

struct Node {
  std::string key;  ///< case-folded span text
  std::string type_name;
  Role role = Role::Outside;
  TypeId type = -1;
};

struct Neighbor {
  int node = 0;
  double weight = 0.0;
};

/// Bipartite entity-trigger co-occurrence graph. Nodes are identified by
/// (case-folded text, type); every edge carries the number of sentences in
/// which both spans occur. The single relation is "co-occurrence".
class Hin {
 public:
  static constexpr const char* kRelation = "co-occurrence";

  Hin() = default;
  explicit Hin(const TagSchema& schema) : schema_(schema) {}

  /// Returns the node id, creating it if needed.
  int add_node(const std::string& key, Role role, int type_index);
  /// Adds `weight` to the edge between an entity node and a trigger node.
  void add_edge(int entity_node, int trigger_node, double weight = 1.0);

  /// -1 when absent.
  int find(const std::string& key, const std::string& type_name) const;

  const TagSchema& schema() const { return schema_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  std::size_t num_edges() const { return edges_.size(); }
  const Node& node(int id) const { return nodes_.at(id); }
  const std::vector<Node>& nodes() const { return nodes_; }
  TypeId type_of(int id) const { return nodes_.at(id).type; }

  /// Neighbors sorted by node id.
  const std::vector<Neighbor>& neighbors(int id) const { return adjacency_.at(id); }
  /// 0 when there is no edge.
  double weight(int a, int b) const;
  /// (entity node, trigger node) -> weight, ordered.
  const std::map<std::pair<int, int>, double>& edges() const { return edges_; }

  /// Number of neighbors of `id` carrying type `next`.
  int degree_to(int id, TypeId next) const;

  /// Copy without the given edge (used for monotonicity checks).
  Hin without_edge(int entity_node, int trigger_node) const;

 private:
  TagSchema schema_;
  std::vector<Node> nodes_;
  std::map<std::pair<std::string, TypeId>, int> index_;
  std::map<std::pair<int, int>, double> edges_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

std::string case_fold(const std::string& text);

/// One node per distinct (case-folded span, type); one edge per co-occurring
/// entity-trigger pair weighted by sentence count.
Hin build_hin(const Corpus& corpus);

/// Type-aggregated co-occurrence counts, |A_e| x |A_t|.
Eigen::MatrixXd direct_adjacency(const Hin& hin, const TagSchema& schema);

/// Uniform step distribution over neighbors of type `next`; empty when there
/// are none.
std::map<int, double> walk_prob(const Hin& hin, int node, TypeId next);
std::map<int, double> walk_prob(const Hin& hin, int node,
                                const std::string& next_type);

/// Sequence of node types with alternating roles; length() is the number of
/// edges.
struct MetaPath {
  std::vector<TypeId> types;

  int length() const { return static_cast<int>(types.size()) - 1; }
  std::string to_string(const TagSchema& schema) const;
  bool operator==(const MetaPath&) const = default;
  auto operator<=>(const MetaPath&) const = default;
};

MetaPath parse_metapath(const std::string& text, const TagSchema& schema);
std::string type_name(const TagSchema& schema, TypeId type);

/// Sum over all node walks u=n_1,...,n_{l+1}=v matching `rho` of
/// prod_i w(n_i,n_{i+1}) * walk_prob(n_i -> n_{i+1}).
double path_score(const Hin& hin, const MetaPath& rho, int u, int v);

/// Realized meta-paths of odd length l from an entity type to a trigger type,
/// lexicographic by type index.
std::vector<MetaPath> enumerate_metapaths(const Hin& hin, const TagSchema& schema,
                                          int length);

struct MetaPathMatrix {
  Eigen::MatrixXd direct;  ///< M
  Eigen::MatrixXd meta;    ///< M'; only meaningful where reached
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> reached;
  std::vector<MetaPath> paths;

  bool any_reached() const { return reached.any(); }
};

/// Type-level score of each path: sum over start nodes of type rho_1 and end
/// nodes of type rho_{l+1} of path_score. OpenMP-parallel over paths.
std::vector<double> aggregated_path_scores(const Hin& hin,
                                           const std::vector<MetaPath>& paths);
/// Serial reference for aggregated_path_scores.
std::vector<double> aggregated_path_scores_serial(
    const Hin& hin, const std::vector<MetaPath>& paths);

/// m'[u][v] = sum over paths rho from u to v with positive score of
/// log(score); pairs without such a path are left unreached.
MetaPathMatrix metapath_adjacency(const Hin& hin, const TagSchema& schema,
                                  const std::vector<MetaPath>& paths);
MetaPathMatrix metapath_adjacency_serial(const Hin& hin, const TagSchema& schema,
                                         const std::vector<MetaPath>& paths);

/// Convenience: direct matrix plus meta-path matrix over every realized path
/// of the given length.
MetaPathMatrix build_matrices(const Hin& hin, int length);

void write_matrix_csv(std::ostream& out, const TagSchema& schema,
                      const Eigen::MatrixXd& values,
                      const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>*
                          reached = nullptr);
void write_edges_csv(std::ostream& out, const Hin& hin);

/// %.17g, round-trippable.
std::string format_double(double x);

}  // namespace csm::hin
