#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mavkit/frame.hpp"
#include "mavkit/parser.hpp"

namespace mavkit {

enum class FieldType { U8, U16, U32, U64, I8, I16, I32, F64 };

/// Token used in catalog files and canonical descriptors, e.g. "u16".
std::string_view field_type_token(FieldType t);
std::optional<FieldType> field_type_from_token(std::string_view tok);
std::size_t field_type_size(FieldType t);

struct FieldDef {
  FieldType type;
  std::string name;
  std::string unit;  // display only, empty when unitless
};

// Unsigned fields carry uint64_t, signed carry int64_t, float64 carries
// double. pack() rejects a value whose alternative disagrees with the field.
using FieldValue = std::variant<uint64_t, int64_t, double>;

struct MessageDef {
  uint32_t id = 0;
  std::string name;
  std::vector<FieldDef> fields;

  /// Canonical form hashed for the CRC seed: "NAME:type name;type name;..."
  /// Units never participate, so annotating a field cannot shift the seed.
  std::string descriptor() const;
  /// Low byte of crc_x25 over the descriptor.
  uint8_t seed() const;
  /// Payload length; every field type is fixed width, so this is exact.
  std::size_t wire_size() const;

  Bytes pack(std::span<const FieldValue> values) const;
  std::vector<FieldValue> unpack(std::span<const uint8_t> payload) const;
};

// Message registry. Starts from the built-in set; extra definitions merge in
// from catalog text files. Ids and names are both unique keys.
class Catalog {
 public:
  /// The seven built-in telemetry and command messages.
  static Catalog builtin();

  void add(MessageDef def);  // CatalogError on duplicate id or name
  void load_file(const std::filesystem::path& path);
  void load_text(std::string_view text, std::string_view source);

  const MessageDef* find(uint32_t id) const;
  const MessageDef* find(std::string_view name) const;
  std::vector<const MessageDef*> all() const;  // ascending id

  /// Adapter for StreamParser: msgid to CRC seed.
  SeedLookup seed_lookup() const;

 private:
  std::map<uint32_t, MessageDef> by_id_;
  std::map<std::string, uint32_t, std::less<>> id_by_name_;
};

}  // namespace mavkit
