#include "mouseauth/ingest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mouseauth/error.hpp"

namespace mouseauth {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return fields;
}

std::optional<double> parse_number(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::size_t resolve_column(const std::vector<std::string_view>& header,
                           const std::string& name, bool has_header) {
  if (has_header) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    fail(ErrorCode::kSchemaError, "column '" + name + "' not found in header");
  }
  std::size_t index = 0;
  const auto [ptr, ec] =
      std::from_chars(name.data(), name.data() + name.size(), index);
  if (ec != std::errc() || ptr != name.data() + name.size()) {
    fail(ErrorCode::kSchemaError,
         "headerless schema needs numeric column indices, got '" + name + "'");
  }
  return index;
}

}  // namespace

void SchemaMap::validate() const {
  if (timestamp_col == x_col || timestamp_col == y_col || x_col == y_col) {
    fail(ErrorCode::kSchemaError, "timestamp, x and y columns must be distinct");
  }
  if (!(timestamp_scale > 0.0) || !std::isfinite(timestamp_scale)) {
    fail(ErrorCode::kSchemaError, "timestamp_scale must be positive");
  }
  if (delimiter == '\n' || delimiter == '\r' || delimiter == '"') {
    fail(ErrorCode::kSchemaError, "unsupported delimiter");
  }
}

SchemaMap SchemaMap::balabit() {
  SchemaMap s;
  s.timestamp_col = "client timestamp";
  s.x_col = "x";
  s.y_col = "y";
  s.state_col = "state";
  return s;
}

SchemaMap SchemaMap::dfl() {
  SchemaMap s = balabit();
  s.timestamp_scale = 1e-3;
  return s;
}

SchemaMap SchemaMap::preset(std::string_view name) {
  if (name == "balabit") return balabit();
  if (name == "dfl") return dfl();
  fail(ErrorCode::kInvalidConfig, "unknown schema preset '" + std::string(name) + "'");
}

ParsedSession parse_session(std::string_view content, const SchemaMap& schema,
                            std::string user_id, std::string session_id) {
  schema.validate();
  ParsedSession out;
  out.session.user_id = std::move(user_id);
  out.session.session_id = std::move(session_id);
  out.report.file = out.session.session_id;

  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= content.size()) {
    std::size_t pos = content.find('\n', start);
    if (pos == std::string_view::npos) pos = content.size();
    const std::string_view line = content.substr(start, pos - start);
    if (!trim(line).empty()) lines.push_back(line);
    start = pos + 1;
  }

  std::size_t first_data = 0;
  std::vector<std::string_view> header;
  if (schema.has_header) {
    if (lines.empty()) {
      fail(ErrorCode::kEmptySession, "file has no header row");
    }
    header = split(lines[0], schema.delimiter);
    first_data = 1;
  }
  const std::size_t t_col = resolve_column(header, schema.timestamp_col, schema.has_header);
  const std::size_t x_col = resolve_column(header, schema.x_col, schema.has_header);
  const std::size_t y_col = resolve_column(header, schema.y_col, schema.has_header);
  std::optional<std::size_t> state_col;
  if (schema.state_col) {
    state_col = resolve_column(header, *schema.state_col, schema.has_header);
  }

  double running_max = -1.0;
  for (std::size_t i = first_data; i < lines.size(); ++i) {
    ++out.report.data_rows;
    const auto fields = split(lines[i], schema.delimiter);
    const std::size_t needed = std::max({t_col, x_col, y_col}) + 1;
    if (fields.size() < needed) {
      ++out.report.dropped_malformed;
      continue;
    }
    const auto t = parse_number(fields[t_col]);
    const auto x = parse_number(fields[x_col]);
    const auto y = parse_number(fields[y_col]);
    if (!t || !x || !y || *t < 0.0) {
      ++out.report.dropped_malformed;
      continue;
    }
    const double seconds = *t * schema.timestamp_scale;
    if (seconds < running_max) {
      ++out.report.dropped_out_of_order;
      continue;
    }
    running_max = seconds;
    RawEvent ev{seconds, *x, *y, std::nullopt};
    if (state_col && *state_col < fields.size()) {
      ev.state = std::string(fields[*state_col]);
    }
    out.session.events.push_back(std::move(ev));
  }
  out.report.events = out.session.events.size();
  if (out.session.events.empty()) {
    fail(ErrorCode::kEmptySession,
         "session '" + out.session.session_id + "' has no valid rows");
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

UserLoad load_user(const std::vector<std::filesystem::path>& paths,
                   const SchemaMap& schema, const std::string& user_id) {
  UserLoad load;
  for (const auto& path : paths) {
    const std::string content = read_file(path);
    try {
      auto parsed = parse_session(content, schema, user_id, path.stem().string());
      parsed.report.file = path.string();
      load.reports.push_back(parsed.report);
      load.sessions.push_back(std::move(parsed.session));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptySession) throw;
      load.skipped.push_back({path.string(), e.what()});
    }
  }
  if (load.sessions.empty()) {
    fail(ErrorCode::kNoSessions, "no usable sessions for user '" + user_id + "'");
  }
  return load;
}

}  // namespace mouseauth
