#include "csm/schema.hpp"

#include <set>

#include "json.hpp"

namespace csm::corpus {

namespace {

void check_names(const std::vector<std::string>& names, const char* what) {
  if (names.empty()) {
    throw ValidationError(std::string("schema: ") + what + " is empty");
  }
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (n.empty()) {
      throw ValidationError(std::string("schema: empty name in ") + what);
    }
    if (n.find_first_of("\t\n\r ") != std::string::npos) {
      throw ValidationError("schema: type name '" + n + "' contains whitespace");
    }
    if (!seen.insert(n).second) {
      throw ValidationError("schema: duplicate type '" + n + "' in " + what);
    }
  }
}

}  // namespace

TagSchema::TagSchema(std::vector<std::string> entity_types,
                     std::vector<std::string> trigger_types)
    : entity_types_(std::move(entity_types)),
      trigger_types_(std::move(trigger_types)) {
  check_names(entity_types_, "entity_types");
  check_names(trigger_types_, "trigger_types");
  std::set<std::string> ents(entity_types_.begin(), entity_types_.end());
  for (const auto& t : trigger_types_) {
    if (ents.count(t)) {
      throw ValidationError("schema: '" + t +
                            "' is both an entity and a trigger type");
    }
  }
  combined_.reserve(1 + 2 * (entity_types_.size() + trigger_types_.size()));
  combined_.emplace_back("O");
  for (const auto& t : entity_types_) {
    combined_.push_back("B-ENT:" + t);
    combined_.push_back("I-ENT:" + t);
  }
  for (const auto& t : trigger_types_) {
    combined_.push_back("B-TRG:" + t);
    combined_.push_back("I-TRG:" + t);
  }
}

TagSchema TagSchema::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("schema: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("schema: expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "entity_types" && key != "trigger_types") {
      throw ValidationError("schema: unknown key '" + key + "'");
    }
  }
  auto read = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_array()) {
      throw ValidationError(std::string("schema: missing array '") + key + "'");
    }
    std::vector<std::string> out;
    for (const auto& v : j[key]) {
      if (!v.is_string()) {
        throw ValidationError(std::string("schema: non-string in '") + key + "'");
      }
      out.push_back(v.get<std::string>());
    }
    return out;
  };
  return TagSchema(read("entity_types"), read("trigger_types"));
}

std::string TagSchema::to_json() const {
  nlohmann::ordered_json j;
  j["entity_types"] = entity_types_;
  j["trigger_types"] = trigger_types_;
  return j.dump();
}

int TagSchema::tag_index(std::string_view name) const {
  for (std::size_t i = 0; i < combined_.size(); ++i) {
    if (combined_[i] == name) return static_cast<int>(i);
  }
  return -1;
}

Role TagSchema::role(int tag) const {
  if (tag == kOutside) return Role::Outside;
  return (tag - 1) / 2 < num_entity_types() ? Role::Entity : Role::Trigger;
}

int TagSchema::type_index(int tag) const {
  if (tag == kOutside) return -1;
  const int k = (tag - 1) / 2;
  return k < num_entity_types() ? k : k - num_entity_types();
}

int TagSchema::begin_tag(Role role, int type) const {
  switch (role) {
    case Role::Entity:
      return 1 + 2 * type;
    case Role::Trigger:
      return 1 + 2 * (num_entity_types() + type);
    case Role::Outside:
      break;
  }
  return kOutside;
}

int TagSchema::entity_index(std::string_view name) const {
  for (std::size_t i = 0; i < entity_types_.size(); ++i) {
    if (entity_types_[i] == name) return static_cast<int>(i);
  }
  return -1;
}

int TagSchema::trigger_index(std::string_view name) const {
  for (std::size_t i = 0; i < trigger_types_.size(); ++i) {
    if (trigger_types_[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::uint64_t TagSchema::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : to_json()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace csm::corpus
