#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace csm {

/// Thrown for malformed input (corpus files, schemas, configs, arguments).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when training produces a non-finite value.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Role : std::uint8_t { Outside, Entity, Trigger };

namespace corpus {

/// Combined entity + trigger annotation tag set.
///
/// Surface tags are ordered as: `O`, then `B-ENT:t`, `I-ENT:t` for every
/// entity type in order, then `B-TRG:t`, `I-TRG:t` for every trigger type.
class TagSchema {
 public:
  TagSchema() = default;

  /// Validates disjointness, non-emptiness and uniqueness.
  TagSchema(std::vector<std::string> entity_types,
            std::vector<std::string> trigger_types);

  static TagSchema from_json(std::string_view text);
  std::string to_json() const;

  const std::vector<std::string>& entity_types() const { return entity_types_; }
  const std::vector<std::string>& trigger_types() const { return trigger_types_; }
  const std::vector<std::string>& combined() const { return combined_; }

  bool empty() const { return combined_.empty(); }
  int num_tags() const { return static_cast<int>(combined_.size()); }
  int num_entity_types() const { return static_cast<int>(entity_types_.size()); }
  int num_trigger_types() const { return static_cast<int>(trigger_types_.size()); }

  static constexpr int kOutside = 0;

  /// -1 if the name is not a tag of this schema.
  int tag_index(std::string_view name) const;
  const std::string& tag_name(int tag) const { return combined_.at(tag); }

  Role role(int tag) const;
  bool is_begin(int tag) const { return tag != kOutside && (tag - 1) % 2 == 0; }
  /// Index of the tag's type within A_e or A_t; -1 for O.
  int type_index(int tag) const;

  int begin_tag(Role role, int type) const;
  int inside_tag(Role role, int type) const { return begin_tag(role, type) + 1; }

  /// -1 if unknown; entity and trigger names are disjoint so the name is
  /// unambiguous.
  int entity_index(std::string_view name) const;
  int trigger_index(std::string_view name) const;

  /// FNV-1a over the canonical JSON form.
  std::uint64_t hash() const;

  bool operator==(const TagSchema& other) const {
    return entity_types_ == other.entity_types_ &&
           trigger_types_ == other.trigger_types_;
  }

 private:
  std::vector<std::string> entity_types_;
  std::vector<std::string> trigger_types_;
  std::vector<std::string> combined_;
};

}  // namespace corpus
}  // namespace csm
