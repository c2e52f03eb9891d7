#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mouseauth {

/// Column layout of a per-session event file.
///
/// Without a header row, column "names" are zero-based indices written as
/// decimal strings ("0", "3", ...).
struct SchemaMap {
  std::string timestamp_col = "t";
  std::string x_col = "x";
  std::string y_col = "y";
  std::optional<std::string> state_col;
  char delimiter = ',';
  bool has_header = true;
  /// Multiplier converting raw timestamps to seconds.
  double timestamp_scale = 1.0;

  /// Throws SchemaError when the three required columns are not distinct.
  void validate() const;

  static SchemaMap balabit();
  static SchemaMap dfl();
  /// "balabit" or "dfl"; throws InvalidConfig otherwise.
  static SchemaMap preset(std::string_view name);
};

struct RawEvent {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  std::optional<std::string> state;
};

struct Session {
  std::string user_id;
  std::string session_id;
  std::vector<RawEvent> events;
};

struct ParseReport {
  std::string file;
  std::size_t data_rows = 0;
  std::size_t events = 0;
  std::size_t dropped_malformed = 0;
  std::size_t dropped_out_of_order = 0;

  std::size_t dropped() const { return dropped_malformed + dropped_out_of_order; }
};

struct ParsedSession {
  Session session;
  ParseReport report;
};

/// Parses one session file. Rows with an unparseable, non-finite or negative
/// timestamp, or unparseable x/y, are dropped; so are rows whose timestamp is
/// below the running maximum. Blank lines are not data rows.
ParsedSession parse_session(std::string_view content, const SchemaMap& schema,
                            std::string user_id, std::string session_id);

struct SkippedFile {
  std::string file;
  std::string reason;
};

struct UserLoad {
  std::vector<Session> sessions;
  std::vector<ParseReport> reports;
  std::vector<SkippedFile> skipped;
};

/// Loads one session per file (session id = file stem), in input order.
/// Files without any valid row are skipped and reported; NoSessions if every
/// file is skipped or `paths` is empty.
UserLoad load_user(const std::vector<std::filesystem::path>& paths,
                   const SchemaMap& schema, const std::string& user_id);

std::string read_file(const std::filesystem::path& path);

}  // namespace mouseauth
