#include <cmath>

#include "csm/hin.hpp"

namespace csm::hin {

namespace {

// Neighbors of every node grouped by the neighbor's type, with the
// random-walk step probability folded into the weight.
struct TypedAdjacency {
  int num_types = 0;
  std::vector<std::vector<std::vector<Neighbor>>> by_type;  // [node][type]
  std::vector<std::vector<int>> nodes_of_type;

  explicit TypedAdjacency(const Hin& hin) {
    const auto& schema = hin.schema();
    num_types = schema.num_entity_types() + schema.num_trigger_types();
    by_type.assign(hin.num_nodes(), std::vector<std::vector<Neighbor>>(num_types));
    nodes_of_type.assign(num_types, {});
    for (int id = 0; id < hin.num_nodes(); ++id) {
      nodes_of_type[hin.type_of(id)].push_back(id);
      for (const auto& n : hin.neighbors(id)) {
        by_type[id][hin.type_of(n.node)].push_back(n);
      }
      for (auto& group : by_type[id]) {
        const double step = group.empty() ? 0.0 : 1.0 / group.size();
        for (auto& n : group) n.weight *= step;
      }
    }
  }
};

void check_path(const MetaPath& rho, const TagSchema& schema) {
  const int ne = schema.num_entity_types();
  const int nt = ne + schema.num_trigger_types();
  if (rho.length() < 1) throw ValidationError("meta-path has no edges");
  for (TypeId t : rho.types) {
    if (t < 0 || t >= nt) {
      throw ValidationError("meta-path type id " + std::to_string(t) +
                            " outside schema");
    }
  }
  if (rho.types.front() >= ne || rho.types.back() < ne) {
    throw ValidationError("meta-path " + rho.to_string(schema) +
                          " must start at an entity type and end at a trigger type");
  }
}

// Mass pushed from every node of type rho_1 (initial mass 1 each) along the
// typed walk; the total arriving at step l is the type-level score.
double propagate(const TypedAdjacency& adj, const MetaPath& rho,
                 std::vector<double>& cur, std::vector<double>& next) {
  std::fill(cur.begin(), cur.end(), 0.0);
  for (int id : adj.nodes_of_type[rho.types.front()]) cur[id] = 1.0;
  for (std::size_t step = 1; step < rho.types.size(); ++step) {
    const TypeId from = rho.types[step - 1];
    const TypeId to = rho.types[step];
    for (int id : adj.nodes_of_type[to]) next[id] = 0.0;
    for (int id : adj.nodes_of_type[from]) {
      const double mass = cur[id];
      if (mass == 0.0) continue;
      for (const auto& n : adj.by_type[id][to]) next[n.node] += mass * n.weight;
    }
    for (int id : adj.nodes_of_type[from]) cur[id] = 0.0;
    for (int id : adj.nodes_of_type[to]) cur[id] = next[id];
  }
  double total = 0.0;
  for (int id : adj.nodes_of_type[rho.types.back()]) total += cur[id];
  return total;
}

MetaPathMatrix assemble(const Hin& hin, const TagSchema& schema,
                        const std::vector<MetaPath>& paths,
                        const std::vector<double>& scores) {
  const int ne = schema.num_entity_types();
  const int nt = schema.num_trigger_types();
  MetaPathMatrix out;
  out.direct = direct_adjacency(hin, schema);
  out.meta = Eigen::MatrixXd::Zero(ne, nt);
  out.reached = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(
      ne, nt, false);
  out.paths = paths;
  for (std::size_t p = 0; p < paths.size(); ++p) {
    if (!(scores[p] > 0.0)) continue;
    if (!std::isfinite(scores[p])) {
      throw NumericalError("meta-path score overflow on " +
                           paths[p].to_string(schema));
    }
    const int u = paths[p].types.front();
    const int v = paths[p].types.back() - ne;
    out.meta(u, v) += std::log(scores[p]);
    out.reached(u, v) = true;
  }
  return out;
}

}  // namespace

std::vector<double> aggregated_path_scores(const Hin& hin,
                                           const std::vector<MetaPath>& paths) {
  for (const auto& rho : paths) check_path(rho, hin.schema());
  const TypedAdjacency adj(hin);
  std::vector<double> scores(paths.size(), 0.0);
  const auto n = static_cast<std::ptrdiff_t>(paths.size());
#pragma omp parallel
  {
    std::vector<double> cur(hin.num_nodes()), next(hin.num_nodes());
#pragma omp for schedule(dynamic)
    for (std::ptrdiff_t p = 0; p < n; ++p) {
      scores[p] = propagate(adj, paths[p], cur, next);
    }
  }
  return scores;
}

std::vector<double> aggregated_path_scores_serial(
    const Hin& hin, const std::vector<MetaPath>& paths) {
  for (const auto& rho : paths) check_path(rho, hin.schema());
  const TypedAdjacency adj(hin);
  std::vector<double> scores(paths.size(), 0.0);
  std::vector<double> cur(hin.num_nodes()), next(hin.num_nodes());
  for (std::size_t p = 0; p < paths.size(); ++p) {
    scores[p] = propagate(adj, paths[p], cur, next);
  }
  return scores;
}

MetaPathMatrix metapath_adjacency(const Hin& hin, const TagSchema& schema,
                                  const std::vector<MetaPath>& paths) {
  for (const auto& rho : paths) check_path(rho, schema);
  return assemble(hin, schema, paths, aggregated_path_scores(hin, paths));
}

MetaPathMatrix metapath_adjacency_serial(const Hin& hin, const TagSchema& schema,
                                         const std::vector<MetaPath>& paths) {
  for (const auto& rho : paths) check_path(rho, schema);
  return assemble(hin, schema, paths, aggregated_path_scores_serial(hin, paths));
}

std::vector<MetaPath> enumerate_metapaths(const Hin& hin, const TagSchema& schema,
                                          int length) {
  if (length < 1 || length % 2 == 0) {
    throw ValidationError("meta-path length must be odd and positive, got " +
                          std::to_string(length));
  }
  const TypedAdjacency adj(hin);
  const int ne = schema.num_entity_types();
  const int nt = schema.num_trigger_types();
  std::vector<MetaPath> found;
  MetaPath prefix;

  // Depth-first over type sequences, carrying the set of nodes reachable by
  // some node walk matching the prefix; an empty frontier prunes the branch.
  auto extend = [&](auto&& self, const std::vector<char>& frontier) -> void {
    if (prefix.length() == length) {
      found.push_back(prefix);
      return;
    }
    const bool at_entity = prefix.types.back() < ne;
    const int first = at_entity ? ne : 0;
    const int last = at_entity ? ne + nt : ne;
    for (TypeId next = first; next < last; ++next) {
      std::vector<char> reach(hin.num_nodes(), 0);
      bool any = false;
      for (int id : adj.nodes_of_type[prefix.types.back()]) {
        if (!frontier[id]) continue;
        for (const auto& n : adj.by_type[id][next]) {
          reach[n.node] = 1;
          any = true;
        }
      }
      if (!any) continue;
      prefix.types.push_back(next);
      self(self, reach);
      prefix.types.pop_back();
    }
  };

  for (TypeId start = 0; start < ne; ++start) {
    if (adj.nodes_of_type[start].empty()) continue;
    std::vector<char> frontier(hin.num_nodes(), 0);
    for (int id : adj.nodes_of_type[start]) frontier[id] = 1;
    prefix.types = {start};
    extend(extend, frontier);
  }
  return found;
}

MetaPathMatrix build_matrices(const Hin& hin, int length) {
  const auto& schema = hin.schema();
  return metapath_adjacency(hin, schema, enumerate_metapaths(hin, schema, length));
}

}  // namespace csm::hin
