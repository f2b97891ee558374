#include "signdict/service/store.hpp"

#include <sqlite3.h>

#include <fstream>
#include <memory>

#include "signdict/error.hpp"
#include "signdict/text.hpp"

namespace signdict::service {

namespace fs = std::filesystem;

namespace {

struct StatementDeleter {
  void operator()(sqlite3_stmt* s) const { sqlite3_finalize(s); }
};
using Statement = std::unique_ptr<sqlite3_stmt, StatementDeleter>;

Statement prepare(sqlite3* db, const char* sql) {
  sqlite3_stmt* stmt = nullptr;
  if (sqlite3_prepare_v2(db, sql, -1, &stmt, nullptr) != SQLITE_OK) {
    throw Error(ErrorCode::io, std::string("sqlite prepare: ") + sqlite3_errmsg(db));
  }
  return Statement(stmt);
}

void exec(sqlite3* db, const char* sql) {
  char* msg = nullptr;
  if (sqlite3_exec(db, sql, nullptr, nullptr, &msg) != SQLITE_OK) {
    std::string text = msg ? msg : "unknown error";
    sqlite3_free(msg);
    throw Error(ErrorCode::io, "sqlite: " + text);
  }
}

// Ids are generated hex tokens; anything else must not reach the filesystem.
void check_id(const std::string& id) {
  if (id.empty() || id.size() > 64) throw Error(ErrorCode::not_found, "unknown submission '" + id + "'");
  for (const char c : id) {
    const bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '-';
    if (!ok) throw Error(ErrorCode::not_found, "unknown submission '" + id + "'");
  }
}

}  // namespace

SubmissionStore::SubmissionStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(media_dir(), ec);
  fs::create_directories(pose_dir(), ec);
  if (ec) throw Error(ErrorCode::io, "cannot create storage at " + root_.string() + ": " + ec.message());
  const auto db_path = (root_ / "submissions.sqlite").string();
  if (sqlite3_open_v2(db_path.c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                      nullptr) != SQLITE_OK) {
    std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    throw Error(ErrorCode::io, "cannot open " + db_path + ": " + msg);
  }
  exec(db_, "PRAGMA journal_mode=WAL");
  exec(db_, "CREATE TABLE IF NOT EXISTS submissions (id TEXT PRIMARY KEY, record TEXT NOT NULL)");
}

SubmissionStore::~SubmissionStore() { sqlite3_close(db_); }

void SubmissionStore::put(const Submission& s) {
  check_id(s.id);
  const std::string record = to_record(s).dump();
  std::lock_guard lock(mutex_);
  auto stmt = prepare(db_, "INSERT OR REPLACE INTO submissions (id, record) VALUES (?1, ?2)");
  sqlite3_bind_text(stmt.get(), 1, s.id.c_str(), -1, SQLITE_TRANSIENT);
  sqlite3_bind_text(stmt.get(), 2, record.c_str(), static_cast<int>(record.size()), SQLITE_TRANSIENT);
  if (sqlite3_step(stmt.get()) != SQLITE_DONE) throw Error(ErrorCode::io, std::string("sqlite: ") + sqlite3_errmsg(db_));
}

std::optional<Submission> SubmissionStore::get(const std::string& id) const {
  std::string record;
  {
    std::lock_guard lock(mutex_);
    auto stmt = prepare(db_, "SELECT record FROM submissions WHERE id = ?1");
    sqlite3_bind_text(stmt.get(), 1, id.c_str(), -1, SQLITE_TRANSIENT);
    if (sqlite3_step(stmt.get()) != SQLITE_ROW) return std::nullopt;
    record = reinterpret_cast<const char*>(sqlite3_column_text(stmt.get(), 0));
  }
  return from_record(nlohmann::json::parse(record));
}

std::vector<Submission> SubmissionStore::all() const {
  std::vector<std::string> records;
  {
    std::lock_guard lock(mutex_);
    auto stmt = prepare(db_, "SELECT record FROM submissions ORDER BY id");
    while (sqlite3_step(stmt.get()) == SQLITE_ROW) {
      records.emplace_back(reinterpret_cast<const char*>(sqlite3_column_text(stmt.get(), 0)));
    }
  }
  std::vector<Submission> out;
  for (const auto& r : records) out.push_back(from_record(nlohmann::json::parse(r)));
  return out;
}

fs::path SubmissionStore::media_path(const std::string& id) const {
  check_id(id);
  return media_dir() / (id + ".media");
}

fs::path SubmissionStore::pose_path(const std::string& id) const {
  check_id(id);
  return pose_dir() / (id + ".pose");
}

void SubmissionStore::write_media(const std::string& id, std::string_view bytes) {
  write_text_file(media_path(id), bytes);
}

std::optional<std::string> SubmissionStore::read_media(const std::string& id) const {
  const auto p = media_path(id);
  if (!fs::exists(p)) return std::nullopt;
  return read_text_file(p);
}

bool SubmissionStore::remove_media(const std::string& id) {
  std::error_code ec;
  const bool removed = fs::remove(media_path(id), ec);
  if (ec) throw Error(ErrorCode::io, "cannot remove media for " + id + ": " + ec.message());
  return removed;
}

bool SubmissionStore::has_media(const std::string& id) const { return fs::exists(media_path(id)); }

void SubmissionStore::write_poses(const std::string& id, const std::vector<PoseSequence>& tracks) {
  write_text_file(pose_path(id), format_pose_tracks(tracks));
}

std::optional<std::vector<PoseSequence>> SubmissionStore::read_poses(const std::string& id) const {
  const auto p = pose_path(id);
  if (!fs::exists(p)) return std::nullopt;
  return parse_pose_tracks_file(p);
}

}  // namespace signdict::service
