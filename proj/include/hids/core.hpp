//  Copyright 2026 The hids Authors
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.

#ifndef HIDS_CORE_HPP_
#define HIDS_CORE_HPP_

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hids/error.hpp"
#include "hids/glob.hpp"

namespace hids {

/// Opaque non-empty identifier without embedded newlines. The tag keeps
/// subjects, programs, objects and operation kinds from being mixed up.
template <typename Tag>
class Identifier {
 public:
  Identifier() = default;
  explicit Identifier(std::string value) : value_(std::move(value)) {
    if (value_.empty()) throw InvalidValue(std::string(Tag::name) + " must be non-empty");
    if (value_.find_first_of("\r\n") != std::string::npos)
      throw InvalidValue(std::string(Tag::name) + " must not contain a newline");
  }

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend auto operator<=>(const Identifier&, const Identifier&) = default;
  friend bool operator==(const Identifier&, const Identifier&) = default;

 private:
  std::string value_;
};

struct SubjectTag { static constexpr const char* name = "subject"; };
struct ProgramTag { static constexpr const char* name = "program"; };
struct ObjectTag { static constexpr const char* name = "object"; };
struct OperationTag { static constexpr const char* name = "operation kind"; };

using SubjectId = Identifier<SubjectTag>;
using ProgramId = Identifier<ProgramTag>;
using ObjectId = Identifier<ObjectTag>;
using OperationKind = Identifier<OperationTag>;

using LevelRank = std::uint32_t;

namespace detail {

inline bool parse_digits(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace detail

/// Accepts `YYYY-MM-DDTHH:MM:SS[.fraction](Z|+00:00)`.
inline bool is_valid_utc_timestamp(std::string_view ts) {
  if (ts.size() < 20) return false;
  if (ts[4] != '-' || ts[7] != '-' || ts[10] != 'T' || ts[13] != ':' || ts[16] != ':') return false;
  int y, mo, d, h, mi, s;
  if (!detail::parse_digits(ts.substr(0, 4), y) || !detail::parse_digits(ts.substr(5, 2), mo) ||
      !detail::parse_digits(ts.substr(8, 2), d) || !detail::parse_digits(ts.substr(11, 2), h) ||
      !detail::parse_digits(ts.substr(14, 2), mi) || !detail::parse_digits(ts.substr(17, 2), s))
    return false;
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) return false;
  std::string_view rest = ts.substr(19);
  if (!rest.empty() && rest.front() == '.') {
    std::size_t n = 1;
    while (n < rest.size() && rest[n] >= '0' && rest[n] <= '9') ++n;
    if (n == 1) return false;
    rest.remove_prefix(n);
  }
  return rest == "Z" || rest == "+00:00";
}

/// (program, op, object): the input symbol of the policy machine.
struct OpTriple {
  ProgramId program;
  OperationKind op;
  ObjectId object;

  friend auto operator<=>(const OpTriple&, const OpTriple&) = default;
  friend bool operator==(const OpTriple&, const OpTriple&) = default;
};

struct OperationEvent {
  std::string ts;
  SubjectId subject;
  ProgramId program;
  ObjectId object;
  OperationKind op;
  LevelRank level = 0;
  std::map<std::string, std::string> attrs;

  OpTriple triple() const { return {program, op, object}; }

  friend bool operator==(const OperationEvent&, const OperationEvent&) = default;
};

/// One allow rule. All four fields are glob patterns.
struct AccessEntry {
  std::string subject_pat;
  std::string program_pat;
  std::string op_pat;
  std::string object_pat;

  AccessEntry() = default;
  AccessEntry(std::string subject, std::string program, std::string op, std::string object)
      : subject_pat(std::move(subject)),
        program_pat(std::move(program)),
        op_pat(std::move(op)),
        object_pat(std::move(object)) {
    for (const auto* p : {&subject_pat, &program_pat, &op_pat, &object_pat}) {
      if (p->empty()) throw InvalidValue("access entry patterns must be non-empty");
      if (p->find_first_of("\r\n") != std::string::npos)
        throw InvalidValue("access entry patterns must not contain a newline");
    }
  }

  bool matches(const SubjectId& s, const ProgramId& p, const OperationKind& o,
               const ObjectId& obj) const noexcept {
    return glob_match(subject_pat, s.str()) && glob_match(program_pat, p.str()) &&
           glob_match(op_pat, o.str()) && glob_match(object_pat, obj.str());
  }

  friend bool operator==(const AccessEntry&, const AccessEntry&) = default;
};

/// Default-deny allow-list. Membership is existential over the entries.
class AccessMatrix {
 public:
  AccessMatrix() = default;
  explicit AccessMatrix(std::vector<AccessEntry> entries) : entries_(std::move(entries)) {}

  const std::vector<AccessEntry>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }

  bool permits(const SubjectId& subject, const ProgramId& program, const OperationKind& op,
               const ObjectId& object) const noexcept {
    return std::any_of(entries_.begin(), entries_.end(), [&](const AccessEntry& e) {
      return e.matches(subject, program, op, object);
    });
  }

  friend bool operator==(const AccessMatrix&, const AccessMatrix&) = default;

 private:
  std::vector<AccessEntry> entries_;
};

inline bool permits(const AccessMatrix& matrix, const SubjectId& subject, const ProgramId& program,
                    const OperationKind& op, const ObjectId& object) noexcept {
  return matrix.permits(subject, program, op, object);
}

// ---------------------------------------------------------------------------
// Policy file: `allow <subject> <program> <op> <object>` per line.

namespace detail {

// Splits one policy line into fields, honouring double quotes and `#` comments.
inline std::vector<std::string> split_policy_fields(std::string_view line, std::size_t lineno) {
  std::vector<std::string> fields;
  std::size_t i = 0;
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    if (i >= line.size() || line[i] == '#') break;
    std::string field;
    if (line[i] == '"') {
      ++i;
      bool closed = false;
      while (i < line.size()) {
        char c = line[i++];
        if (c == '\\' && i < line.size() && (line[i] == '"' || line[i] == '\\')) {
          field.push_back(line[i++]);
        } else if (c == '"') {
          closed = true;
          break;
        } else {
          field.push_back(c);
        }
      }
      if (!closed) throw ParseError(lineno, "unterminated quoted field");
      if (i < line.size() && !is_space(line[i]) && line[i] != '#')
        throw ParseError(lineno, "quoted field must be followed by whitespace");
      if (field.empty()) throw ParseError(lineno, "empty quoted field");
    } else {
      while (i < line.size() && !is_space(line[i]) && line[i] != '#') {
        if (line[i] == '"') throw ParseError(lineno, "stray quote inside unquoted field");
        field.push_back(line[i++]);
      }
    }
    fields.push_back(std::move(field));
  }
  return fields;
}

inline std::string quote_policy_field(const std::string& field) {
  bool needs_quotes = field.find_first_of(" \t\"#\\") != std::string::npos;
  if (!needs_quotes) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace detail

inline AccessMatrix parse_policy(std::string_view document) {
  std::vector<AccessEntry> entries;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= document.size()) {
    std::size_t end = document.find('\n', pos);
    if (end == std::string_view::npos) end = document.size();
    std::string_view line = document.substr(pos, end - pos);
    ++lineno;
    auto fields = detail::split_policy_fields(line, lineno);
    if (!fields.empty()) {
      if (fields[0] != "allow")
        throw ParseError(lineno, "expected keyword 'allow', found '" + fields[0] + "'");
      if (fields.size() < 5)
        throw ParseError(lineno, "expected 4 patterns (subject program op object), found " +
                                     std::to_string(fields.size() - 1));
      if (fields.size() > 5)
        throw DuplicateFieldError(lineno, "extra field '" + fields[5] +
                                              "' after subject, program, op and object");
      entries.emplace_back(fields[1], fields[2], fields[3], fields[4]);
    }
    if (end == document.size()) break;
    pos = end + 1;
  }
  return AccessMatrix(std::move(entries));
}

inline std::string serialize_policy(const AccessMatrix& matrix) {
  std::string out;
  for (const auto& e : matrix.entries()) {
    out += "allow ";
    out += detail::quote_policy_field(e.subject_pat) + ' ';
    out += detail::quote_policy_field(e.program_pat) + ' ';
    out += detail::quote_policy_field(e.op_pat) + ' ';
    out += detail::quote_policy_field(e.object_pat) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Event stream: newline-delimited JSON.

enum class ParseMode { Strict, Lenient };

struct LineError {
  std::size_t line;
  std::string message;
};

struct EventStream {
  std::vector<OperationEvent> events;
  std::vector<std::size_t> lines;  // 1-based source line of each event
  std::vector<LineError> skipped;  // lenient mode only
};

namespace detail {

inline std::string required_string(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(std::string("missing required key '") + key + "'");
  if (!it->is_string()) throw Error(std::string("key '") + key + "' must be a string");
  return it->get<std::string>();
}

}  // namespace detail

/// Decodes one JSON object into an event. Unknown keys land in attrs.
inline OperationEvent event_from_json(const nlohmann::json& obj) {
  if (!obj.is_object()) throw Error("event must be a JSON object");
  OperationEvent ev;
  ev.ts = detail::required_string(obj, "ts");
  if (!is_valid_utc_timestamp(ev.ts)) throw Error("ts '" + ev.ts + "' is not an ISO-8601 UTC instant");
  ev.subject = SubjectId(detail::required_string(obj, "subject"));
  ev.program = ProgramId(detail::required_string(obj, "program"));
  ev.object = ObjectId(detail::required_string(obj, "object"));
  ev.op = OperationKind(detail::required_string(obj, "op"));
  auto lvl = obj.find("level");
  if (lvl == obj.end()) throw Error("missing required key 'level'");
  if (!lvl->is_number_unsigned()) throw Error("key 'level' must be a non-negative integer");
  ev.level = lvl->get<LevelRank>();
  for (const auto& [key, value] : obj.items()) {
    if (key == "ts" || key == "subject" || key == "program" || key == "object" || key == "op" ||
        key == "level")
      continue;
    if (key == "attrs" && value.is_object()) {
      for (const auto& [k, v] : value.items()) ev.attrs[k] = v.is_string() ? v.get<std::string>() : v.dump();
      continue;
    }
    ev.attrs[key] = value.is_string() ? value.get<std::string>() : value.dump();
  }
  return ev;
}

inline nlohmann::ordered_json event_to_json(const OperationEvent& ev) {
  nlohmann::ordered_json j;
  j["ts"] = ev.ts;
  j["subject"] = ev.subject.str();
  j["program"] = ev.program.str();
  j["object"] = ev.object.str();
  j["op"] = ev.op.str();
  j["level"] = ev.level;
  if (!ev.attrs.empty()) j["attrs"] = ev.attrs;
  return j;
}

inline EventStream parse_event_stream(std::string_view document, ParseMode mode = ParseMode::Strict) {
  EventStream out;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos < document.size()) {
    std::size_t end = document.find('\n', pos);
    if (end == std::string_view::npos) end = document.size();
    std::string_view line = document.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      auto obj = nlohmann::json::parse(line);
      out.events.push_back(event_from_json(obj));
      out.lines.push_back(lineno);
    } catch (const std::exception& e) {
      if (mode == ParseMode::Strict) throw ParseError(lineno, e.what());
      out.skipped.push_back({lineno, e.what()});
    }
  }
  return out;
}

}  // namespace hids

#endif  // HIDS_CORE_HPP_
