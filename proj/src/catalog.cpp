#include "mavkit/catalog.hpp"

#include <bit>
#include <charconv>
#include <fstream>
#include <sstream>

#include "mavkit/crc.hpp"
#include "mavkit/errors.hpp"

namespace mavkit {

namespace {

struct TypeRow {
  FieldType type;
  std::string_view token;
  std::size_t size;
};

constexpr TypeRow kTypes[] = {
    {FieldType::U8, "u8", 1},   {FieldType::U16, "u16", 2},
    {FieldType::U32, "u32", 4}, {FieldType::U64, "u64", 8},
    {FieldType::I8, "i8", 1},   {FieldType::I16, "i16", 2},
    {FieldType::I32, "i32", 4}, {FieldType::F64, "float64", 8},
};

void put_le(Bytes& out, uint64_t v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out.push_back(uint8_t(v >> (8 * i)));
}

uint64_t get_le(std::span<const uint8_t> in, std::size_t off, std::size_t n) {
  uint64_t v = 0;
  for (std::size_t i = 0; i < n; ++i) v |= uint64_t(in[off + i]) << (8 * i);
  return v;
}

// Sign-extend the low n bytes of v.
int64_t to_signed(uint64_t v, std::size_t n) {
  const unsigned shift = unsigned(64 - 8 * n);
  return int64_t(v << shift) >> shift;
}

}  // namespace

std::string_view field_type_token(FieldType t) {
  for (const auto& row : kTypes)
    if (row.type == t) return row.token;
  return "?";
}

std::optional<FieldType> field_type_from_token(std::string_view tok) {
  for (const auto& row : kTypes)
    if (row.token == tok) return row.type;
  return std::nullopt;
}

std::size_t field_type_size(FieldType t) {
  for (const auto& row : kTypes)
    if (row.type == t) return row.size;
  return 0;
}

std::string MessageDef::descriptor() const {
  std::string d = name;
  d += ':';
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) d += ';';
    d += field_type_token(fields[i].type);
    d += ' ';
    d += fields[i].name;
  }
  return d;
}

uint8_t MessageDef::seed() const {
  const std::string d = descriptor();
  return uint8_t(crc_x25(std::span<const uint8_t>(
      reinterpret_cast<const uint8_t*>(d.data()), d.size())));
}

std::size_t MessageDef::wire_size() const {
  std::size_t n = 0;
  for (const auto& f : fields) n += field_type_size(f.type);
  return n;
}

Bytes MessageDef::pack(std::span<const FieldValue> values) const {
  if (values.size() != fields.size())
    throw ArityMismatch(name + ": expected " + std::to_string(fields.size()) +
                        " values, got " + std::to_string(values.size()));
  Bytes out;
  out.reserve(wire_size());
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const FieldDef& f = fields[i];
    const FieldValue& v = values[i];
    const std::size_t n = field_type_size(f.type);
    auto bad = [&](const char* why) {
      return TypeMismatch(name + "." + f.name + ": " + why);
    };
    switch (f.type) {
      case FieldType::U8:
      case FieldType::U16:
      case FieldType::U32:
      case FieldType::U64: {
        const auto* u = std::get_if<uint64_t>(&v);
        if (!u) throw bad("unsigned value required");
        if (n < 8 && *u >> (8 * n)) throw bad("value out of range");
        put_le(out, *u, n);
        break;
      }
      case FieldType::I8:
      case FieldType::I16:
      case FieldType::I32: {
        const auto* s = std::get_if<int64_t>(&v);
        if (!s) throw bad("signed value required");
        const int64_t lo = -(int64_t(1) << (8 * n - 1));
        const int64_t hi = (int64_t(1) << (8 * n - 1)) - 1;
        if (*s < lo || *s > hi) throw bad("value out of range");
        put_le(out, uint64_t(*s), n);
        break;
      }
      case FieldType::F64: {
        const auto* d = std::get_if<double>(&v);
        if (!d) throw bad("float64 value required");
        put_le(out, std::bit_cast<uint64_t>(*d), 8);
        break;
      }
    }
  }
  return out;
}

std::vector<FieldValue> MessageDef::unpack(
    std::span<const uint8_t> payload) const {
  if (payload.size() != wire_size())
    throw LengthMismatch(name + ": payload is " +
                         std::to_string(payload.size()) + " bytes, expected " +
                         std::to_string(wire_size()));
  std::vector<FieldValue> out;
  out.reserve(fields.size());
  std::size_t off = 0;
  for (const auto& f : fields) {
    const std::size_t n = field_type_size(f.type);
    const uint64_t raw = get_le(payload, off, n);
    switch (f.type) {
      case FieldType::U8:
      case FieldType::U16:
      case FieldType::U32:
      case FieldType::U64:
        out.emplace_back(raw);
        break;
      case FieldType::I8:
      case FieldType::I16:
      case FieldType::I32:
        out.emplace_back(to_signed(raw, n));
        break;
      case FieldType::F64:
        out.emplace_back(std::bit_cast<double>(raw));
        break;
    }
    off += n;
  }
  return out;
}

Catalog Catalog::builtin() {
  Catalog c;
  c.add({0,
         "HEARTBEAT",
         {{FieldType::U8, "type", ""},
          {FieldType::U8, "autopilot", ""},
          {FieldType::U8, "base_mode", ""},
          {FieldType::U32, "custom_mode", ""},
          {FieldType::U8, "system_status", ""},
          {FieldType::U8, "mavlink_version", ""}}});
  c.add({1,
         "SYS_STATUS",
         {{FieldType::U32, "sensors_present", ""},
          {FieldType::U32, "sensors_enabled", ""},
          {FieldType::U32, "sensors_health", ""},
          {FieldType::U16, "voltage_battery", "mV"},
          {FieldType::I8, "battery_remaining", "%"},
          {FieldType::U16, "drop_rate_comm", "c%"},
          {FieldType::U16, "errors_comm", ""}}});
  c.add({2,
         "SYSTEM_TIME",
         {{FieldType::U64, "time_unix_usec", "us"},
          {FieldType::U32, "time_boot_ms", "ms"}}});
  c.add({33,
         "GLOBAL_POSITION",
         {{FieldType::I32, "lat", "degE7"},
          {FieldType::I32, "lon", "degE7"},
          {FieldType::I32, "alt", "mm"},
          {FieldType::I32, "relative_alt", "mm"},
          {FieldType::I16, "vx", "cm/s"},
          {FieldType::I16, "vy", "cm/s"},
          {FieldType::I16, "vz", "cm/s"},
          {FieldType::U16, "hdg", "cdeg"}}});
  c.add({39,
         "MISSION_ITEM",
         {{FieldType::U8, "target_system", ""},
          {FieldType::U8, "target_component", ""},
          {FieldType::U16, "seq", ""},
          {FieldType::U8, "frame", ""},
          {FieldType::F64, "x", "deg"},
          {FieldType::F64, "y", "deg"},
          {FieldType::F64, "z", "m"}}});
  c.add({76,
         "COMMAND_LONG",
         {{FieldType::U8, "target_system", ""},
          {FieldType::U8, "target_component", ""},
          {FieldType::U16, "command", ""},
          {FieldType::U8, "confirmation", ""},
          {FieldType::F64, "param1", ""},
          {FieldType::F64, "param2", ""},
          {FieldType::F64, "param3", ""},
          {FieldType::F64, "param4", ""},
          {FieldType::F64, "param5", ""},
          {FieldType::F64, "param6", ""},
          {FieldType::F64, "param7", ""}}});
  c.add({77,
         "COMMAND_ACK",
         {{FieldType::U16, "command", ""}, {FieldType::U8, "result", ""}}});
  return c;
}

void Catalog::add(MessageDef def) {
  if (def.id > 0xFFFFFF)
    throw CatalogError(def.name + ": msgid exceeds 24 bits");
  if (def.wire_size() > kMaxPayload)
    throw CatalogError(def.name + ": payload exceeds 255 bytes");
  if (by_id_.count(def.id))
    throw CatalogError("duplicate msgid " + std::to_string(def.id));
  if (id_by_name_.count(def.name))
    throw CatalogError("duplicate message name " + def.name);
  id_by_name_.emplace(def.name, def.id);
  by_id_.emplace(def.id, std::move(def));
}

void Catalog::load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CatalogError("cannot open " + path.string());
  std::ostringstream whole;
  whole << in.rdbuf();
  load_text(whole.str(), path.string());
}

void Catalog::load_text(std::string_view text, std::string_view source) {
  std::optional<MessageDef> cur;
  auto flush = [&] {
    if (cur) {
      add(std::move(*cur));
      cur.reset();
    }
  };

  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    std::istringstream ss{std::string(line)};
    std::string word;
    if (!(ss >> word) || word[0] == '#') continue;

    auto fail = [&](const std::string& why) {
      return CatalogError(std::string(source) + ":" + std::to_string(lineno) +
                          ": " + why);
    };
    if (word == "msg") {
      flush();
      std::string idtok, name;
      if (!(ss >> idtok >> name)) throw fail("msg needs <id> <NAME>");
      uint32_t id = 0;
      auto [p, ec] =
          std::from_chars(idtok.data(), idtok.data() + idtok.size(), id);
      if (ec != std::errc{} || p != idtok.data() + idtok.size())
        throw fail("bad msgid '" + idtok + "'");
      cur = MessageDef{id, name, {}};
    } else if (word == "field") {
      if (!cur) throw fail("field before any msg line");
      std::string type, fname, unit;
      if (!(ss >> type >> fname)) throw fail("field needs <type> <name>");
      ss >> unit;  // optional
      const auto ft = field_type_from_token(type);
      if (!ft) throw fail("unknown field type '" + type + "'");
      for (const auto& f : cur->fields)
        if (f.name == fname)
          throw fail("duplicate field name '" + fname + "'");
      cur->fields.push_back({*ft, fname, unit});
    } else {
      throw fail("unknown directive '" + word + "'");
    }
  }
  flush();
}

const MessageDef* Catalog::find(uint32_t id) const {
  const auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &it->second;
}

const MessageDef* Catalog::find(std::string_view name) const {
  const auto it = id_by_name_.find(name);
  return it == id_by_name_.end() ? nullptr : find(it->second);
}

std::vector<const MessageDef*> Catalog::all() const {
  std::vector<const MessageDef*> out;
  out.reserve(by_id_.size());
  for (const auto& [id, def] : by_id_) out.push_back(&def);
  return out;
}

SeedLookup Catalog::seed_lookup() const {
  // The catalog is immutable once built, so capturing `this` is safe for the
  // usual pattern of a catalog outliving its parsers.
  return [this](uint32_t msgid) -> std::optional<uint8_t> {
    const MessageDef* def = find(msgid);
    if (!def) return std::nullopt;
    return def->seed();
  };
}

}  // namespace mavkit
