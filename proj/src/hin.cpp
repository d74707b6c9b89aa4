#include "csm/hin.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>
#include <sstream>

namespace csm::hin {

std::string case_fold(const std::string& text) {
  std::string out = text;
  for (auto& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::string type_name(const TagSchema& schema, TypeId type) {
  const int ne = schema.num_entity_types();
  if (type < 0 || type >= ne + schema.num_trigger_types()) {
    throw ValidationError("type id " + std::to_string(type) + " outside schema");
  }
  return type < ne ? schema.entity_types()[type]
                   : schema.trigger_types()[type - ne];
}

int Hin::add_node(const std::string& key, Role role, int type_index) {
  if (role == Role::Outside) throw ValidationError("hin: node without a type");
  const TypeId type = role == Role::Entity ? entity_type_id(type_index)
                                           : trigger_type_id(schema_, type_index);
  auto [it, inserted] =
      index_.try_emplace({key, type}, static_cast<int>(nodes_.size()));
  if (inserted) {
    nodes_.push_back({key, type_name(schema_, type), role, type});
    adjacency_.emplace_back();
  }
  return it->second;
}

void Hin::add_edge(int entity_node, int trigger_node, double weight) {
  if (nodes_.at(entity_node).role != Role::Entity ||
      nodes_.at(trigger_node).role != Role::Trigger) {
    throw ValidationError("hin: edges must join an entity and a trigger");
  }
  edges_[{entity_node, trigger_node}] += weight;
  auto bump = [&](int from, int to) {
    auto& adj = adjacency_[from];
    auto it = std::lower_bound(adj.begin(), adj.end(), to,
                               [](const Neighbor& n, int id) { return n.node < id; });
    if (it != adj.end() && it->node == to) {
      it->weight += weight;
    } else {
      adj.insert(it, {to, weight});
    }
  };
  bump(entity_node, trigger_node);
  bump(trigger_node, entity_node);
}

int Hin::find(const std::string& key, const std::string& type_name) const {
  int type = schema_.entity_index(type_name);
  if (type < 0) {
    const int t = schema_.trigger_index(type_name);
    if (t < 0) return -1;
    type = trigger_type_id(schema_, t);
  }
  auto it = index_.find({key, type});
  return it == index_.end() ? -1 : it->second;
}

double Hin::weight(int a, int b) const {
  const auto& adj = adjacency_.at(a);
  auto it = std::lower_bound(adj.begin(), adj.end(), b,
                             [](const Neighbor& n, int id) { return n.node < id; });
  return it != adj.end() && it->node == b ? it->weight : 0.0;
}

int Hin::degree_to(int id, TypeId next) const {
  int d = 0;
  for (const auto& n : adjacency_.at(id)) d += nodes_[n.node].type == next;
  return d;
}

Hin Hin::without_edge(int entity_node, int trigger_node) const {
  Hin out(schema_);
  for (const auto& n : nodes_) {
    const int type_index = n.role == Role::Entity
                               ? n.type
                               : n.type - schema_.num_entity_types();
    out.add_node(n.key, n.role, type_index);
  }
  for (const auto& [pair, w] : edges_) {
    if (pair != std::make_pair(entity_node, trigger_node)) {
      out.add_edge(pair.first, pair.second, w);
    }
  }
  return out;
}

Hin build_hin(const Corpus& corpus) {
  const auto& schema = corpus.schema;
  Hin hin(schema);
  for (const auto& sentence : corpus.sentences) {
    std::set<int> entities;
    std::set<int> triggers;
    for (const auto& span : corpus::gold_entities(sentence, schema)) {
      entities.insert(hin.add_node(case_fold(span.text), Role::Entity, span.type));
    }
    for (const auto& span : corpus::gold_triggers(sentence, schema)) {
      triggers.insert(hin.add_node(case_fold(span.text), Role::Trigger, span.type));
    }
    for (int e : entities) {
      for (int t : triggers) hin.add_edge(e, t);
    }
  }
  return hin;
}

Eigen::MatrixXd direct_adjacency(const Hin& hin, const TagSchema& schema) {
  const int ne = schema.num_entity_types();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(ne, schema.num_trigger_types());
  for (const auto& [pair, w] : hin.edges()) {
    const auto& e = hin.node(pair.first);
    const auto& t = hin.node(pair.second);
    const int u = schema.entity_index(e.type_name);
    const int v = schema.trigger_index(t.type_name);
    if (u < 0 || v < 0) {
      throw ValidationError("direct_adjacency: node type '" +
                            (u < 0 ? e.type_name : t.type_name) +
                            "' absent from schema");
    }
    m(u, v) += w;
  }
  return m;
}

std::map<int, double> walk_prob(const Hin& hin, int node, TypeId next) {
  if (node < 0 || node >= hin.num_nodes()) {
    throw ValidationError("walk_prob: unknown node " + std::to_string(node));
  }
  std::map<int, double> out;
  const int d = hin.degree_to(node, next);
  if (d == 0) return out;
  for (const auto& n : hin.neighbors(node)) {
    if (hin.type_of(n.node) == next) out[n.node] = 1.0 / d;
  }
  return out;
}

std::map<int, double> walk_prob(const Hin& hin, int node,
                                const std::string& next_type) {
  const auto& schema = hin.schema();
  int type = schema.entity_index(next_type);
  if (type < 0) {
    const int t = schema.trigger_index(next_type);
    if (t < 0) throw ValidationError("walk_prob: unknown type '" + next_type + "'");
    type = trigger_type_id(schema, t);
  }
  return walk_prob(hin, node, type);
}

std::string MetaPath::to_string(const TagSchema& schema) const {
  std::string out;
  for (std::size_t i = 0; i < types.size(); ++i) {
    if (i) out += '-';
    out += type_name(schema, types[i]);
  }
  return out;
}

MetaPath parse_metapath(const std::string& text, const TagSchema& schema) {
  MetaPath rho;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, '-')) {
    int e = schema.entity_index(part);
    if (e >= 0) {
      rho.types.push_back(entity_type_id(e));
      continue;
    }
    int t = schema.trigger_index(part);
    if (t < 0) throw ValidationError("meta-path: unknown type '" + part + "'");
    rho.types.push_back(trigger_type_id(schema, t));
  }
  if (rho.types.size() < 2) throw ValidationError("meta-path: need at least one edge");
  const int ne = schema.num_entity_types();
  for (std::size_t i = 1; i < rho.types.size(); ++i) {
    if ((rho.types[i] < ne) == (rho.types[i - 1] < ne)) {
      throw ValidationError("meta-path: roles must alternate in '" + text + "'");
    }
  }
  return rho;
}

namespace {

double walk_from(const Hin& hin, const MetaPath& rho, std::size_t step, int node,
                 int target) {
  if (step + 1 == rho.types.size()) return node == target ? 1.0 : 0.0;
  const TypeId next = rho.types[step + 1];
  const int d = hin.degree_to(node, next);
  if (d == 0) return 0.0;
  double total = 0.0;
  for (const auto& n : hin.neighbors(node)) {
    if (hin.type_of(n.node) != next) continue;
    const double rest = walk_from(hin, rho, step + 1, n.node, target);
    if (rest != 0.0) total += n.weight * (1.0 / d) * rest;
  }
  return total;
}

}  // namespace

double path_score(const Hin& hin, const MetaPath& rho, int u, int v) {
  if (rho.length() < 1) throw ValidationError("path_score: empty meta-path");
  if (hin.type_of(u) != rho.types.front() || hin.type_of(v) != rho.types.back()) {
    throw ValidationError("path_score: endpoint types do not match the meta-path");
  }
  return walk_from(hin, rho, 0, u, v);
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_matrix_csv(
    std::ostream& out, const TagSchema& schema, const Eigen::MatrixXd& values,
    const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>* reached) {
  for (const auto& t : schema.trigger_types()) out << ',' << t;
  out << '\n';
  for (int u = 0; u < schema.num_entity_types(); ++u) {
    out << schema.entity_types()[u];
    for (int v = 0; v < schema.num_trigger_types(); ++v) {
      out << ',';
      if (reached && !(*reached)(u, v)) {
        out << "unreached";
      } else {
        out << format_double(values(u, v));
      }
    }
    out << '\n';
  }
}

void write_edges_csv(std::ostream& out, const Hin& hin) {
  out << "entity_key,entity_type,trigger_key,trigger_type,weight\n";
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + '"';
  };
  for (const auto& [pair, w] : hin.edges()) {
    const auto& e = hin.node(pair.first);
    const auto& t = hin.node(pair.second);
    out << quote(e.key) << ',' << e.type_name << ',' << quote(t.key) << ','
        << t.type_name << ',' << format_double(w) << '\n';
  }
}

}  // namespace csm::hin
