#include "quarry/service.hpp"

#include <algorithm>
#include <filesystem>

#include "quarry/error.hpp"
#include "quarry/sqlite.hpp"
#include "quarry/text.hpp"

namespace quarry {

namespace {

using json = nlohmann::json;
using Lock = std::lock_guard<std::recursive_mutex>;

constexpr const char* kSchema = R"sql(
PRAGMA journal_mode = WAL;
PRAGMA synchronous = NORMAL;
CREATE TABLE IF NOT EXISTS users(
  user_id TEXT PRIMARY KEY, username TEXT UNIQUE NOT NULL, digest TEXT NOT NULL, created_at INTEGER NOT NULL);
CREATE TABLE IF NOT EXISTS sessions(
  token_digest TEXT PRIMARY KEY, user_id TEXT NOT NULL, expires_at INTEGER NOT NULL);
CREATE TABLE IF NOT EXISTS teams(team_id TEXT PRIMARY KEY, name TEXT NOT NULL, created_at INTEGER NOT NULL);
CREATE TABLE IF NOT EXISTS memberships(
  team_id TEXT NOT NULL, user_id TEXT NOT NULL, role TEXT NOT NULL, PRIMARY KEY(team_id, user_id));
CREATE TABLE IF NOT EXISTS projects(
  project_id TEXT PRIMARY KEY, team_id TEXT NOT NULL, name TEXT NOT NULL, settings TEXT NOT NULL,
  created_by TEXT NOT NULL, created_at INTEGER NOT NULL, deleted_at INTEGER);
CREATE TABLE IF NOT EXISTS documents(
  doc_id TEXT PRIMARY KEY, project_id TEXT NOT NULL, filename TEXT NOT NULL, title TEXT NOT NULL,
  meta TEXT NOT NULL, pages TEXT NOT NULL, page_count INTEGER NOT NULL, status TEXT NOT NULL,
  import_user TEXT NOT NULL, import_time INTEGER NOT NULL, last_editor TEXT, last_edit_time INTEGER,
  principal TEXT, principal_since INTEGER, seq INTEGER NOT NULL);
CREATE INDEX IF NOT EXISTS documents_project ON documents(project_id);
CREATE TABLE IF NOT EXISTS pdfs(doc_id TEXT PRIMARY KEY, bytes BLOB NOT NULL);
CREATE TABLE IF NOT EXISTS artifacts(
  id INTEGER PRIMARY KEY AUTOINCREMENT, doc_id TEXT NOT NULL, kind TEXT NOT NULL, key TEXT NOT NULL,
  version INTEGER NOT NULL, body TEXT NOT NULL, created_by TEXT NOT NULL, created_at INTEGER NOT NULL,
  UNIQUE(doc_id, kind, key, version));
CREATE INDEX IF NOT EXISTS artifacts_kind_key ON artifacts(kind, key);
CREATE TABLE IF NOT EXISTS locks(
  doc_id TEXT PRIMARY KEY, holder TEXT NOT NULL, acquired_at INTEGER NOT NULL, lease_expiry INTEGER NOT NULL);
CREATE TABLE IF NOT EXISTS recent(
  user_id TEXT NOT NULL, doc_id TEXT NOT NULL, seq INTEGER NOT NULL, PRIMARY KEY(user_id, doc_id));
)sql";

std::int64_t ms(Timestamp t) { return t.time_since_epoch().count(); }
Timestamp ts(std::int64_t v) { return Timestamp{std::chrono::milliseconds{v}}; }
std::optional<Timestamp> opt_ts(const std::optional<std::int64_t>& v) {
  if (!v) return std::nullopt;
  return ts(*v);
}

std::string new_id(const char* prefix) { return std::string(prefix) + auth::random_hex(8); }

json opt(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }
json opt(const std::optional<Timestamp>& t) { return t ? json(format_rfc3339(*t)) : json(nullptr); }

std::vector<std::string> tokens(std::string_view s) {
  std::vector<std::string> out;
  std::u32string cur;
  for (char32_t c : text::decode_utf8(s)) {
    if (text::is_word_char(c)) {
      cur += text::fold(c);
    } else if (!cur.empty()) {
      out.push_back(text::encode_utf8(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(text::encode_utf8(cur));
  return out;
}

std::vector<std::string> meta_tokens(const MetaInfo& m) {
  std::string all = m.title + " " + m.venue + " " + m.abstract;
  for (const auto& a : m.authors) all += " " + a;
  if (m.year) all += " " + std::to_string(*m.year);
  return tokens(all);
}

}  // namespace

bool permitted(Role role, Action action) {
  switch (role) {
    case Role::Owner: return true;
    case Role::Manager: return action != Action::AddRemoveManager;
    case Role::Member: return action == Action::ImportFile;
  }
  return false;
}

std::string to_string(Role r) {
  switch (r) {
    case Role::Owner: return "Owner";
    case Role::Manager: return "Manager";
    case Role::Member: return "Member";
  }
  return "Member";
}

Role role_from_string(const std::string& s) {
  if (s == "Owner") return Role::Owner;
  if (s == "Manager") return Role::Manager;
  if (s == "Member") return Role::Member;
  throw Error(ErrorCode::InvalidArgument, "unknown role '" + s + "'", {{"role", s}});
}

std::string to_string(Action a) {
  switch (a) {
    case Action::AddRemoveManager: return "AddRemoveManager";
    case Action::AddRemoveMember: return "AddRemoveMember";
    case Action::AddDeleteProject: return "AddDeleteProject";
    case Action::ImportFile: return "ImportFile";
    case Action::ProjectSettings: return "ProjectSettings";
  }
  return "";
}

struct Service::DocRow : FileEntry {
  std::optional<Timestamp> principal_since;
};

Service::Service(ServiceConfig config, Clock clock) : config_(std::move(config)), clock_(std::move(clock)) {
  namespace fs = std::filesystem;
  if (config_.data_dir.empty() || !fs::is_directory(config_.data_dir))
    throw Error(ErrorCode::BadConfig, "data directory '" + config_.data_dir + "' does not exist",
                {{"data_dir", config_.data_dir}});
  db_ = std::make_unique<sql::Database>((fs::path(config_.data_dir) / "quarry.db").string());
  db_->exec(kSchema);
  purge_tombstones();
  auto st = db_->prepare("SELECT doc_id, meta FROM documents");
  while (st.step()) index_document(st.text(0), json::parse(st.text(1)).get<MetaInfo>());
}

Service::~Service() = default;

// accounts

UserInfo Service::register_user(const std::string& username, const std::string& password) {
  auto name = text::trim(username);
  if (name.empty()) throw Error(ErrorCode::InvalidArgument, "username must not be empty");
  if (password.empty()) throw Error(ErrorCode::InvalidArgument, "password must not be empty");
  if (find_user(name)) throw Error(ErrorCode::DuplicateUsername, "username '" + name + "' is taken", {{"username", name}});
  auto digest = auth::hash_password(password, config_.password_cost);
  Lock lock(mu_);
  if (find_user(name)) throw Error(ErrorCode::DuplicateUsername, "username '" + name + "' is taken", {{"username", name}});
  UserInfo u{new_id("u-"), name, now(), {}};
  db_->prepare("INSERT INTO users VALUES(?, ?, ?, ?)").bind_all(u.user_id, u.username, digest, ms(u.created_at)).run();
  return u;
}

Session Service::login(const std::string& username, const std::string& password) {
  std::string user_id, digest;
  {
    Lock lock(mu_);
    auto st = db_->prepare("SELECT user_id, digest FROM users WHERE username = ?");
    st.bind_all(text::trim(username));
    if (st.step()) {
      user_id = st.text(0);
      digest = st.text(1);
    }
  }
  if (user_id.empty() || !auth::verify_password(digest, password))
    throw Error(ErrorCode::InvalidCredentials, "unknown username or wrong password");
  Session s{auth::random_hex(32), user_id, now() + config_.session_ttl};
  Lock lock(mu_);
  db_->prepare("DELETE FROM sessions WHERE expires_at <= ?").bind_all(ms(now())).run();
  db_->prepare("INSERT INTO sessions VALUES(?, ?, ?)")
      .bind_all(auth::token_digest(s.token), s.user_id, ms(s.expires_at))
      .run();
  return s;
}

std::string Service::authenticate(const std::string& token) {
  Lock lock(mu_);
  auto st = db_->prepare("SELECT user_id FROM sessions WHERE token_digest = ? AND expires_at > ?");
  st.bind_all(auth::token_digest(token), ms(now()));
  if (!st.step()) throw Error(ErrorCode::Unauthenticated, "missing, unknown or expired session token");
  return st.text(0);
}

void Service::logout(const std::string& token) {
  Lock lock(mu_);
  db_->prepare("DELETE FROM sessions WHERE token_digest = ?").bind_all(auth::token_digest(token)).run();
}

std::vector<UserInfo> Service::list_users() {
  Lock lock(mu_);
  std::vector<UserInfo> out;
  auto st = db_->prepare("SELECT user_id, username, created_at FROM users ORDER BY username");
  while (st.step()) out.push_back({st.text(0), st.text(1), ts(st.int64(2)), {}});
  for (auto& u : out) {
    auto m = db_->prepare("SELECT team_id, role FROM memberships WHERE user_id = ? ORDER BY team_id");
    m.bind_all(u.user_id);
    while (m.step()) u.memberships.emplace_back(m.text(0), role_from_string(m.text(1)));
  }
  return out;
}

std::optional<std::string> Service::find_user(const std::string& username) {
  Lock lock(mu_);
  auto st = db_->prepare("SELECT user_id FROM users WHERE username = ?");
  st.bind_all(username);
  if (!st.step()) return std::nullopt;
  return st.text(0);
}

// teams

std::optional<Role> Service::role_in(const std::string& user, const std::string& team) {
  auto st = db_->prepare("SELECT role FROM memberships WHERE team_id = ? AND user_id = ?");
  st.bind_all(team, user);
  if (!st.step()) return std::nullopt;
  return role_from_string(st.text(0));
}

Role Service::require_member(const std::string& user, const std::string& team) {
  auto st = db_->prepare("SELECT 1 FROM teams WHERE team_id = ?");
  st.bind_all(team);
  if (!st.step()) throw Error(ErrorCode::NotFound, "no team '" + team + "'", {{"team_id", team}});
  auto r = role_in(user, team);
  if (!r) throw Error(ErrorCode::PermissionDenied, "not a member of team " + team, {{"team_id", team}});
  return *r;
}

void Service::require(const std::string& user, const std::string& team, Action action) {
  auto st = db_->prepare("SELECT 1 FROM teams WHERE team_id = ?");
  st.bind_all(team);
  if (!st.step()) throw Error(ErrorCode::NotFound, "no team '" + team + "'", {{"team_id", team}});
  auto r = role_in(user, team);
  if (!r || !permitted(*r, action))
    throw Error(ErrorCode::PermissionDenied, to_string(action) + " is not allowed for this user",
                {{"team_id", team}, {"action", to_string(action)}, {"role", r ? json(to_string(*r)) : json(nullptr)}});
}

bool Service::check_permission(const std::string& user, const std::string& team, Action action) {
  Lock lock(mu_);
  auto r = role_in(user, team);
  return r && permitted(*r, action);
}

TeamInfo Service::create_team(const std::string& user, const std::string& name) {
  if (text::trim(name).empty()) throw Error(ErrorCode::InvalidArgument, "team name must not be empty");
  Lock lock(mu_);
  TeamInfo t{new_id("team-"), text::trim(name), Role::Owner};
  sql::Transaction tx(*db_);
  db_->prepare("INSERT INTO teams VALUES(?, ?, ?)").bind_all(t.team_id, t.name, ms(now())).run();
  db_->prepare("INSERT INTO memberships VALUES(?, ?, 'Owner')").bind_all(t.team_id, user).run();
  tx.commit();
  return t;
}

std::vector<TeamInfo> Service::list_teams(const std::string& user) {
  Lock lock(mu_);
  std::vector<TeamInfo> out;
  auto st = db_->prepare(
      "SELECT t.team_id, t.name, m.role FROM teams t JOIN memberships m ON m.team_id = t.team_id "
      "WHERE m.user_id = ? ORDER BY t.created_at, t.team_id");
  st.bind_all(user);
  while (st.step()) out.push_back({st.text(0), st.text(1), role_from_string(st.text(2))});
  return out;
}

std::vector<Member> Service::team_members(const std::string& user, const std::string& team) {
  Lock lock(mu_);
  require_member(user, team);
  std::vector<Member> out;
  auto st = db_->prepare(
      "SELECT u.user_id, u.username, m.role FROM memberships m JOIN users u ON u.user_id = m.user_id "
      "WHERE m.team_id = ? ORDER BY u.username");
  st.bind_all(team);
  while (st.step()) out.push_back({st.text(0), st.text(1), role_from_string(st.text(2))});
  return out;
}

void Service::add_member(const std::string& user, const std::string& team, const std::string& target, Role role) {
  Lock lock(mu_);
  if (role == Role::Owner) throw Error(ErrorCode::InvalidArgument, "a team has exactly one Owner");
  require(user, team, role == Role::Manager ? Action::AddRemoveManager : Action::AddRemoveMember);
  auto st = db_->prepare("SELECT 1 FROM users WHERE user_id = ?");
  st.bind_all(target);
  if (!st.step()) throw Error(ErrorCode::NotFound, "no user '" + target + "'", {{"user_id", target}});
  if (role_in(target, team))
    throw Error(ErrorCode::InvalidArgument, "user is already a member of this team", {{"user_id", target}});
  db_->prepare("INSERT INTO memberships VALUES(?, ?, ?)").bind_all(team, target, to_string(role)).run();
}

void Service::set_role(const std::string& user, const std::string& team, const std::string& target, Role role) {
  Lock lock(mu_);
  require_member(user, team);
  auto current = role_in(target, team);
  if (!current) throw Error(ErrorCode::NotFound, "user is not a member of this team", {{"user_id", target}});
  if (role == Role::Owner || *current == Role::Owner)
    throw Error(ErrorCode::InvalidArgument, "the Owner role cannot be granted or changed");
  require(user, team, Action::AddRemoveManager);
  db_->prepare("UPDATE memberships SET role = ? WHERE team_id = ? AND user_id = ?")
      .bind_all(to_string(role), team, target)
      .run();
}

void Service::remove_member(const std::string& user, const std::string& team, const std::string& target) {
  Lock lock(mu_);
  require_member(user, team);
  auto current = role_in(target, team);
  if (!current) throw Error(ErrorCode::NotFound, "user is not a member of this team", {{"user_id", target}});
  if (*current == Role::Owner) throw Error(ErrorCode::InvalidArgument, "the Owner cannot be removed");
  require(user, team, *current == Role::Manager ? Action::AddRemoveManager : Action::AddRemoveMember);
  db_->prepare("DELETE FROM memberships WHERE team_id = ? AND user_id = ?").bind_all(team, target).run();
}

// projects

Project Service::load_project(const std::string& project, bool include_deleted) {
  auto st = db_->prepare(
      "SELECT project_id, team_id, name, settings, created_by, created_at, deleted_at FROM projects "
      "WHERE project_id = ?");
  st.bind_all(project);
  if (!st.step() || (!include_deleted && !st.is_null(6)))
    throw Error(ErrorCode::NotFound, "no project '" + project + "'", {{"project_id", project}});
  return Project{st.text(0),
                 st.text(1),
                 st.text(2),
                 json::parse(st.text(3)).get<ProjectSettings>(),
                 st.text(4),
                 ts(st.int64(5)),
                 opt_ts(st.opt_int64(6))};
}

namespace {

ProjectSettings checked_settings(const json& j) {
  auto s = j.get<ProjectSettings>();
  const auto& sc = s.schema;
  if (!sc.headers.empty() || !sc.aliases.empty() || !sc.label_to_header.empty() || !sc.meta_to_header.empty() ||
      !sc.map_to_header.empty())
    validate_schema(sc);
  compile_labelset(s.labels);
  if (s.table_detector) TableAdapters::baseline().detector(*s.table_detector);
  if (s.ocr) TableAdapters::baseline().ocr(*s.ocr);
  return s;
}

}  // namespace

Project Service::create_project(const std::string& user, const std::string& team, const std::string& name,
                                const nlohmann::json& settings) {
  if (text::trim(name).empty()) throw Error(ErrorCode::InvalidArgument, "project name must not be empty");
  if (!settings.is_object()) throw Error(ErrorCode::InvalidArgument, "settings must be an object");
  Lock lock(mu_);
  require(user, team, Action::AddDeleteProject);
  Project p{new_id("prj-"), team, text::trim(name), checked_settings(settings), user, now(), std::nullopt};
  db_->prepare("INSERT INTO projects VALUES(?, ?, ?, ?, ?, ?, NULL)")
      .bind_all(p.project_id, p.team_id, p.name, json(p.settings).dump(), user, ms(p.created_at))
      .run();
  return p;
}

void Service::delete_project(const std::string& user, const std::string& project) {
  Lock lock(mu_);
  auto p = load_project(project);
  require(user, p.team_id, Action::AddDeleteProject);
  db_->prepare("UPDATE projects SET deleted_at = ? WHERE project_id = ?").bind_all(ms(now()), project).run();
  purge_tombstones();
}

Project Service::restore_project(const std::string& user, const std::string& project) {
  Lock lock(mu_);
  purge_tombstones();
  auto p = load_project(project, true);
  require(user, p.team_id, Action::AddDeleteProject);
  if (!p.deleted_at) return p;
  db_->prepare("UPDATE projects SET deleted_at = NULL WHERE project_id = ?").bind_all(project).run();
  p.deleted_at.reset();
  return p;
}

std::vector<Project> Service::list_projects(const std::string& user, const std::optional<std::string>& team) {
  Lock lock(mu_);
  if (team) require_member(user, *team);
  std::vector<std::string> ids;
  auto st = db_->prepare(
      "SELECT p.project_id FROM projects p JOIN memberships m ON m.team_id = p.team_id "
      "WHERE m.user_id = ? AND p.deleted_at IS NULL AND (? IS NULL OR p.team_id = ?) "
      "ORDER BY p.created_at, p.project_id");
  st.bind_all(user, team, team);
  while (st.step()) ids.push_back(st.text(0));
  std::vector<Project> out;
  for (const auto& id : ids) out.push_back(load_project(id));
  return out;
}

Project Service::get_project(const std::string& user, const std::string& project) {
  Lock lock(mu_);
  auto p = load_project(project);
  require_member(user, p.team_id);
  return p;
}

Project Service::update_project_settings(const std::string& user, const std::string& project,
                                         const nlohmann::json& patch) {
  if (!patch.is_object()) throw Error(ErrorCode::InvalidArgument, "settings patch must be an object");
  Lock lock(mu_);
  auto p = load_project(project);
  require(user, p.team_id, Action::ProjectSettings);
  json merged = p.settings;
  for (const auto& [k, v] : patch.items()) merged[k] = v;
  p.settings = checked_settings(merged);
  db_->prepare("UPDATE projects SET settings = ? WHERE project_id = ?")
      .bind_all(json(p.settings).dump(), project)
      .run();
  return p;
}

std::size_t Service::purge_tombstones() {
  Lock lock(mu_);
  auto cutoff = ms(now() - config_.tombstone_retention);
  std::vector<std::string> projects, docs;
  auto st = db_->prepare("SELECT project_id FROM projects WHERE deleted_at IS NOT NULL AND deleted_at <= ?");
  st.bind_all(cutoff);
  while (st.step()) projects.push_back(st.text(0));
  if (projects.empty()) return 0;
  sql::Transaction tx(*db_);
  for (const auto& p : projects) {
    auto d = db_->prepare("SELECT doc_id FROM documents WHERE project_id = ?");
    d.bind_all(p);
    while (d.step()) docs.push_back(d.text(0));
  }
  for (const auto& d : docs) {
    for (const char* table : {"artifacts", "pdfs", "locks", "recent", "documents"})
      db_->prepare(std::string("DELETE FROM ") + table + " WHERE doc_id = ?").bind_all(d).run();
    index_document(d, MetaInfo{});
    doc_tokens_.erase(d);
  }
  for (const auto& p : projects) db_->prepare("DELETE FROM projects WHERE project_id = ?").bind_all(p).run();
  tx.commit();
  return projects.size();
}

// documents

std::vector<Service::DocRow> Service::query_docs(const std::string& where, const std::vector<std::string>& args) {
  auto st = db_->prepare(
      "SELECT d.doc_id, d.project_id, p.team_id, d.filename, d.meta, d.page_count, d.status, d.import_user, "
      "d.import_time, d.last_editor, d.last_edit_time, d.principal, d.principal_since, l.holder "
      "FROM documents d JOIN projects p ON p.project_id = d.project_id "
      "LEFT JOIN locks l ON l.doc_id = d.doc_id AND l.lease_expiry > ?1 "
      "WHERE p.deleted_at IS NULL AND (" +
      where + ") ORDER BY d.seq");
  st.bind(1, ms(now()));
  for (std::size_t i = 0; i < args.size(); ++i) st.bind(static_cast<int>(i) + 2, args[i]);
  std::vector<DocRow> out;
  while (st.step()) {
    DocRow d;
    d.doc_id = st.text(0);
    d.project_id = st.text(1);
    d.team_id = st.text(2);
    d.filename = st.text(3);
    d.meta = json::parse(st.text(4)).get<MetaInfo>();
    d.page_count = static_cast<int>(st.int64(5));
    d.status = st.text(6);
    d.uploader = st.text(7);
    d.upload_time = ts(st.int64(8));
    d.last_editor = st.opt_text(9);
    d.last_edit_time = opt_ts(st.opt_int64(10));
    d.principal = st.opt_text(11);
    d.principal_since = opt_ts(st.opt_int64(12));
    d.lock_holder = st.opt_text(13);
    out.push_back(std::move(d));
  }
  return out;
}

Service::DocRow Service::load_doc(const std::string& doc) {
  auto rows = query_docs("d.doc_id = ?2", {doc});
  if (rows.empty()) throw Error(ErrorCode::NotFound, "no file '" + doc + "'", {{"doc_id", doc}});
  return rows.front();
}

Service::DocRow Service::readable_doc(const std::string& user, const std::string& doc) {
  auto d = load_doc(doc);
  require_member(user, d.team_id);
  return d;
}

Service::DocRow Service::writable_doc(const std::string& user, const std::string& doc) {
  auto d = readable_doc(user, doc);
  if (d.principal && *d.principal != user)
    throw Error(ErrorCode::NotPrincipal, "only the principal may edit this file",
                {{"doc_id", doc}, {"principal", *d.principal}});
  if (d.lock_holder != user)
    throw Error(ErrorCode::LockNotHeld, "acquire the file lock before editing",
                {{"doc_id", doc}, {"holder", opt(d.lock_holder)}});
  return d;
}

void Service::touch(const std::string& user, const std::string& doc) {
  db_->prepare("UPDATE documents SET last_editor = ?, last_edit_time = ? WHERE doc_id = ?")
      .bind_all(user, ms(now()), doc)
      .run();
}

void Service::record_view(const std::string& user, const std::string& doc) {
  db_->prepare(
         "INSERT OR REPLACE INTO recent VALUES(?1, ?2, (SELECT COALESCE(MAX(seq), 0) + 1 FROM recent WHERE user_id = ?1))")
      .bind_all(user, doc)
      .run();
  db_->prepare(
         "DELETE FROM recent WHERE user_id = ?1 AND seq NOT IN "
         "(SELECT seq FROM recent WHERE user_id = ?1 ORDER BY seq DESC LIMIT ?2)")
      .bind_all(user, static_cast<std::int64_t>(config_.recent_limit))
      .run();
}

std::vector<PageContent> Service::load_pages(const std::string& doc) {
  auto st = db_->prepare("SELECT pages FROM documents WHERE doc_id = ?");
  st.bind_all(doc);
  if (!st.step()) throw Error(ErrorCode::NotFound, "no file '" + doc + "'", {{"doc_id", doc}});
  return json::parse(st.text(0)).get<std::vector<PageContent>>();
}

DocumentRecord Service::record_of(const DocRow& d, bool with_pages) {
  DocumentRecord r;
  r.doc_id = d.doc_id;
  r.project_id = d.project_id;
  r.page_count = d.page_count;
  if (with_pages) r.pages = load_pages(d.doc_id);
  r.meta = d.meta;
  r.import_user = d.uploader;
  r.import_time = d.upload_time;
  r.last_editor = d.last_editor;
  r.last_edit_time = d.last_edit_time;
  r.principal = d.principal;
  r.status = doc_status_from_string(d.status);
  return r;
}

void Service::index_document(const std::string& doc, const MetaInfo& meta) {
  for (const auto& t : doc_tokens_[doc]) {
    auto it = postings_.find(t);
    if (it == postings_.end()) continue;
    it->second.erase(doc);
    if (it->second.empty()) postings_.erase(it);
  }
  auto toks = meta_tokens(meta);
  doc_tokens_[doc] = std::set<std::string>(toks.begin(), toks.end());
  for (const auto& t : toks) postings_[t].insert(doc);
}

std::set<std::string> Service::search_index(const std::string& q) const {
  auto toks = tokens(q);
  std::set<std::string> out;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    auto it = postings_.find(toks[i]);
    if (it == postings_.end()) return {};
    if (i == 0) {
      out = it->second;
      continue;
    }
    std::set<std::string> both;
    std::set_intersection(out.begin(), out.end(), it->second.begin(), it->second.end(),
                          std::inserter(both, both.begin()));
    out.swap(both);
  }
  return out;
}

FilePage Service::filter_page(std::vector<FileEntry> files, const SearchQuery& query) {
  static const std::set<std::string> keys = {"title", "import_time", "update_time"};
  if (!keys.count(query.sort))
    throw Error(ErrorCode::InvalidSortKey, "sort must be one of title, import_time, update_time",
                {{"sort", query.sort}});
  if (query.page < 1 || query.page_size < 1 || query.page_size > 500)
    throw Error(ErrorCode::InvalidArgument, "page must be >= 1 and page_size in 1..500");
  if (!tokens(query.q).empty()) {
    auto hits = search_index(query.q);
    std::erase_if(files, [&](const FileEntry& f) { return !hits.count(f.doc_id); });
  }
  if (query.principal) std::erase_if(files, [&](const FileEntry& f) { return f.principal != query.principal; });
  if (query.import_user) std::erase_if(files, [&](const FileEntry& f) { return f.uploader != *query.import_user; });

  // files arrive in import order, which breaks ties
  std::vector<std::size_t> order(files.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto key_less = [&](std::size_t a, std::size_t b) {
    const auto& x = files[a];
    const auto& y = files[b];
    if (query.sort == "title") return text::comparison_key(x.meta.title) < text::comparison_key(y.meta.title);
    if (query.sort == "import_time") return x.upload_time < y.upload_time;
    return x.last_edit_time.value_or(x.upload_time) < y.last_edit_time.value_or(y.upload_time);
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (key_less(a, b)) return !query.descending;
    if (key_less(b, a)) return query.descending;
    return query.descending ? a > b : a < b;
  });

  FilePage page;
  page.total = files.size();
  page.page = query.page;
  page.page_size = query.page_size;
  std::size_t first = static_cast<std::size_t>(query.page - 1) * query.page_size;
  for (std::size_t i = first; i < order.size() && i < first + query.page_size; ++i)
    page.items.push_back(files[order[i]]);
  return page;
}

namespace {

std::vector<FileEntry> entries(const auto& rows) { return {rows.begin(), rows.end()}; }

MetaRegistry registry_for(const std::vector<std::string>& ids) {
  auto base = MetaRegistry::baseline();
  MetaRegistry r;
  for (const auto& id : ids) {
    auto it = std::find_if(base.adapters().begin(), base.adapters().end(), [&](auto& a) { return a->id() == id; });
    if (it == base.adapters().end()) throw Error(ErrorCode::UnknownAdapter, "no meta adapter '" + id + "'");
    r.add(*it);
  }
  return r;
}

}  // namespace

FileEntry Service::import_file(const std::string& user, const std::string& project,
                               std::span<const std::uint8_t> bytes, const std::string& filename) {
  std::string team;
  {
    Lock lock(mu_);
    auto p = load_project(project);
    require(user, p.team_id, Action::ImportFile);
    team = p.team_id;
  }
  auto registry = registry_for(config_.meta_adapters);
  IngestContext ctx;
  ctx.doc_id = new_id("doc-");
  ctx.project_id = project;
  ctx.user = user;
  ctx.now = now();
  ctx.registry = &registry;
  auto rec = ingest_document(bytes, ctx);

  Lock lock(mu_);
  load_project(project);
  sql::Transaction tx(*db_);
  db_->prepare(
         "INSERT INTO documents VALUES(?, ?, ?, ?, ?, ?, ?, ?, ?, ?, NULL, NULL, NULL, NULL, "
         "(SELECT COALESCE(MAX(seq), 0) + 1 FROM documents))")
      .bind_all(rec.doc_id, project, filename, rec.meta.title, json(rec.meta).dump(), json(rec.pages).dump(),
                rec.page_count, to_string(rec.status), user, ms(rec.import_time))
      .run();
  db_->prepare("INSERT INTO pdfs VALUES(?, ?)")
      .bind_all(rec.doc_id, std::vector<std::uint8_t>(bytes.begin(), bytes.end()))
      .run();
  put(rec.doc_id, "meta", "", rec.meta, user);
  tx.commit();
  index_document(rec.doc_id, rec.meta);
  return load_doc(rec.doc_id);
}

FilePage Service::list_files(const std::string& user, const std::string& project, const SearchQuery& query) {
  Lock lock(mu_);
  auto p = load_project(project);
  require_member(user, p.team_id);
  return filter_page(entries(query_docs("d.project_id = ?2", {project})), query);
}

FilePage Service::search_documents(const std::string& user, const std::string& team, const SearchQuery& query) {
  Lock lock(mu_);
  require_member(user, team);
  return filter_page(entries(query_docs("p.team_id = ?2", {team})), query);
}

std::vector<FileEntry> Service::my_files(const std::string& user) {
  Lock lock(mu_);
  return entries(query_docs(
      "d.principal = ?2 AND p.team_id IN (SELECT team_id FROM memberships WHERE user_id = ?2)", {user}));
}

std::vector<FileEntry> Service::recent_files(const std::string& user) {
  Lock lock(mu_);
  auto rows = query_docs(
      "d.doc_id IN (SELECT doc_id FROM recent WHERE user_id = ?2) AND "
      "p.team_id IN (SELECT team_id FROM memberships WHERE user_id = ?2)",
      {user});
  std::map<std::string, std::int64_t> seq;
  auto st = db_->prepare("SELECT doc_id, seq FROM recent WHERE user_id = ?");
  st.bind_all(user);
  while (st.step()) seq[st.text(0)] = st.int64(1);
  std::sort(rows.begin(), rows.end(), [&](const DocRow& a, const DocRow& b) { return seq[a.doc_id] > seq[b.doc_id]; });
  return entries(rows);
}

FileEntry Service::get_file(const std::string& user, const std::string& doc) {
  Lock lock(mu_);
  auto d = readable_doc(user, doc);
  record_view(user, doc);
  return d;
}

std::vector<std::uint8_t> Service::pdf_bytes(const std::string& user, const std::string& doc) {
  Lock lock(mu_);
  readable_doc(user, doc);
  auto st = db_->prepare("SELECT bytes FROM pdfs WHERE doc_id = ?");
  st.bind_all(doc);
  if (!st.step()) throw Error(ErrorCode::NotFound, "no stored PDF for '" + doc + "'", {{"doc_id", doc}});
  return st.blob(0);
}

PageContent Service::get_page(const std::string& user, const std::string& doc, int page_index) {
  Lock lock(mu_);
  auto d = readable_doc(user, doc);
  if (page_index < 0 || page_index >= d.page_count)
    throw Error(ErrorCode::PageOutOfRange, "page " + std::to_string(page_index) + " does not exist",
                {{"page_index", page_index}, {"page_count", d.page_count}});
  record_view(user, doc);
  return load_pages(doc).at(page_index);
}

// lock and principal

FileLock Service::acquire_lock(const std::string& user, const std::string& doc) {
  Lock lock(mu_);
  auto d = readable_doc(user, doc);
  if (d.principal && *d.principal != user)
    throw Error(ErrorCode::NotPrincipal, "the file is in the charge of another user",
                {{"doc_id", doc}, {"principal", *d.principal}});
  auto t = now();
  db_->prepare(
         "INSERT INTO locks VALUES(?1, ?2, ?3, ?4) ON CONFLICT(doc_id) DO UPDATE SET "
         "acquired_at = CASE WHEN holder = excluded.holder AND lease_expiry > ?3 THEN acquired_at "
         "ELSE excluded.acquired_at END, "
         "holder = excluded.holder, lease_expiry = excluded.lease_expiry "
         "WHERE holder = excluded.holder OR lease_expiry <= ?3")
      .bind_all(doc, user, ms(t), ms(t + config_.lock_lease))
      .run();
  bool won = db_->changes() == 1;
  auto st = db_->prepare("SELECT holder, acquired_at, lease_expiry FROM locks WHERE doc_id = ?");
  st.bind_all(doc);
  st.step();
  FileLock l{doc, st.text(0), ts(st.int64(1)), ts(st.int64(2))};
  if (!won || l.holder != user)
    throw Error(ErrorCode::LockHeldByOther, "the file is locked by another user",
                {{"doc_id", doc}, {"holder", l.holder}, {"lease_expiry", format_rfc3339(l.lease_expiry)}});
  return l;
}

void Service::release_lock(const std::string& user, const std::string& doc) {
  Lock lock(mu_);
  readable_doc(user, doc);
  db_->prepare("DELETE FROM locks WHERE doc_id = ? AND holder = ? AND lease_expiry > ?")
      .bind_all(doc, user, ms(now()))
      .run();
  if (db_->changes() == 0) throw Error(ErrorCode::LockNotHeld, "you do not hold the lock on this file", {{"doc_id", doc}});
}

std::optional<FileLock> Service::current_lock(const std::string& user, const std::string& doc) {
  Lock lock(mu_);
  readable_doc(user, doc);
  auto st = db_->prepare("SELECT holder, acquired_at, lease_expiry FROM locks WHERE doc_id = ? AND lease_expiry > ?");
  st.bind_all(doc, ms(now()));
  if (!st.step()) return std::nullopt;
  return FileLock{doc, st.text(0), ts(st.int64(1)), ts(st.int64(2))};
}

PrincipalAssignment Service::take_charge(const std::string& user, const std::string& doc) {
  Lock lock(mu_);
  auto d = readable_doc(user, doc);
  if (d.principal == user) return {doc, user, *d.principal_since};
  auto t = now();
  db_->prepare("UPDATE documents SET principal = ?, principal_since = ? WHERE doc_id = ? AND principal IS NULL")
      .bind_all(user, ms(t), doc)
      .run();
  if (db_->changes() == 0) {
    auto cur = load_doc(doc);
    throw Error(ErrorCode::AlreadyAssigned, "the file already has a principal",
                {{"doc_id", doc}, {"principal", opt(cur.principal)}});
  }
  return {doc, user, t};
}

void Service::release_charge(const std::string& user, const std::string& doc) {
  Lock lock(mu_);
  auto d = readable_doc(user, doc);
  auto role = role_in(user, d.team_id);
  bool can_override = role == Role::Owner || role == Role::Manager;
  if (!d.principal || (*d.principal != user && !can_override))
    throw Error(ErrorCode::NotPrincipal, "only the principal, a Manager or the Owner may release this file",
                {{"doc_id", doc}, {"principal", opt(d.principal)}});
  db_->prepare("UPDATE documents SET principal = NULL, principal_since = NULL WHERE doc_id = ?").bind_all(doc).run();
}

// artifacts

std::optional<nlohmann::json> Service::latest(const std::string& doc, const std::string& kind,
                                              const std::string& key) {
  auto st = db_->prepare(
      "SELECT body FROM artifacts WHERE doc_id = ? AND kind = ? AND key = ? ORDER BY version DESC LIMIT 1");
  st.bind_all(doc, kind, key);
  if (!st.step()) return std::nullopt;
  return json::parse(st.text(0));
}

std::vector<nlohmann::json> Service::latest_all(const std::string& doc, const std::string& kind) {
  auto st = db_->prepare(
      "SELECT a.body FROM artifacts a WHERE a.doc_id = ?1 AND a.kind = ?2 AND a.version = "
      "(SELECT MAX(b.version) FROM artifacts b WHERE b.doc_id = ?1 AND b.kind = ?2 AND b.key = a.key) "
      "ORDER BY (SELECT MIN(c.id) FROM artifacts c WHERE c.doc_id = ?1 AND c.kind = ?2 AND c.key = a.key)");
  st.bind_all(doc, kind);
  std::vector<json> out;
  while (st.step()) out.push_back(json::parse(st.text(0)));
  return out;
}

void Service::put(const std::string& doc, const std::string& kind, const std::string& key,
                  const nlohmann::json& body, const std::string& user) {
  db_->prepare(
         "INSERT INTO artifacts(doc_id, kind, key, version, body, created_by, created_at) VALUES(?1, ?2, ?3, "
         "(SELECT COALESCE(MAX(version), 0) + 1 FROM artifacts WHERE doc_id = ?1 AND kind = ?2 AND key = ?3), "
         "?4, ?5, ?6)")
      .bind_all(doc, kind, key, body.dump(), user, ms(now()))
      .run();
}

std::string Service::table_doc(const std::string& table) {
  auto st = db_->prepare("SELECT doc_id FROM artifacts WHERE kind = 'table' AND key = ? LIMIT 1");
  st.bind_all(table);
  if (!st.step()) throw Error(ErrorCode::NotFound, "no table '" + table + "'", {{"table_id", table}});
  return st.text(0);
}

// meta

MetaInfo Service::get_meta(const std::string& user, const std::string& doc) {
  Lock lock(mu_);
  auto d = readable_doc(user, doc);
  record_view(user, doc);
  return d.meta;
}

MetaInfo Service::put_meta(const std::string& user, const std::string& doc, const MetaInfo& meta) {
  Lock lock(mu_);
  writable_doc(user, doc);
  sql::Transaction tx(*db_);
  db_->prepare("UPDATE documents SET meta = ?, title = ? WHERE doc_id = ?")
      .bind_all(json(meta).dump(), meta.title, doc)
      .run();
  put(doc, "meta", "", meta, user);
  touch(user, doc);
  tx.commit();
  index_document(doc, meta);
  return meta;
}

// tables

std::vector<TableArtifact> Service::list_tables(const std::string& user, const std::string& doc) {
  Lock lock(mu_);
  readable_doc(user, doc);
  std::vector<TableArtifact> out;
  for (const auto& j : latest_all(doc, "table")) out.push_back(j.get<TableArtifact>());
  return out;
}

TableArtifact Service::get_table(const std::string& user, const std::string& table) {
  Lock lock(mu_);
  auto doc = table_doc(table);
  readable_doc(user, doc);
  return latest(doc, "table", table)->get<TableArtifact>();
}

TableArtifact Service::create_table(const std::string& user, const std::string& doc, const Region& region) {
  Lock lock(mu_);
  auto d = writable_doc(user, doc);
  if (region.page_index < 0 || region.page_index >= d.page_count)
    throw Error(ErrorCode::PageOutOfRange, "page " + std::to_string(region.page_index) + " does not exist",
                {{"page_index", region.page_index}});
  auto t = quarry::create_table(new_id("tbl-"), doc, region, user, now());
  sql::Transaction tx(*db_);
  put(doc, "table", t.table_id, t, user);
  touch(user, doc);
  tx.commit();
  return t;
}

std::vector<TableArtifact> Service::detect_tables(const std::string& user, const std::string& doc, int page_index,
                                                  const std::optional<std::string>& detector) {
  Lock lock(mu_);
  auto d = writable_doc(user, doc);
  if (page_index < 0 || page_index >= d.page_count)
    throw Error(ErrorCode::PageOutOfRange, "page " + std::to_string(page_index) + " does not exist",
                {{"page_index", page_index}});
  auto project = load_project(d.project_id);
  auto id = detector.value_or(project.settings.table_detector.value_or(config_.table_detector));
  auto page = load_pages(doc).at(page_index);
  auto regions = detect_table_regions(page, id, config_.thresholds);
  std::vector<TableArtifact> out;
  sql::Transaction tx(*db_);
  for (const auto& r : regions) {
    out.push_back(quarry::create_table(new_id("tbl-"), doc, r, user, now()));
    put(doc, "table", out.back().table_id, out.back(), user);
  }
  touch(user, doc);
  tx.commit();
  return out;
}

TableArtifact Service::table_stage(const std::string& user, const std::string& table, TableStage target,
                                   const std::optional<std::string>& ocr) {
  Lock lock(mu_);
  auto doc = table_doc(table);
  auto d = writable_doc(user, doc);
  auto t = latest(doc, "table", table)->get<TableArtifact>();
  auto project = load_project(d.project_id);
  auto pages = load_pages(doc);
  StageContext ctx;
  ctx.page = &pages.at(t.grid.region.page_index);
  ctx.thresholds = config_.thresholds;
  ctx.ocr = ocr ? ocr : (project.settings.ocr ? project.settings.ocr : config_.ocr);
  ctx.adapters = &TableAdapters::baseline();
  auto next = advance_stage(t, target, user, now(), ctx);
  sql::Transaction tx(*db_);
  put(doc, "table", table, next, user);
  touch(user, doc);
  tx.commit();
  return next;
}

TableArtifact Service::table_edit(const std::string& user, const std::string& table, const nlohmann::json& edit) {
  Lock lock(mu_);
  auto doc = table_doc(table);
  writable_doc(user, doc);
  auto t = latest(doc, "table", table)->get<TableArtifact>();
  auto next = apply_edit(t, edit, user, now());
  sql::Transaction tx(*db_);
  put(doc, "table", table, next, user);
  touch(user, doc);
  tx.commit();
  return next;
}

// annotations

std::vector<Annotation> Service::list_annotations(const std::string& user, const std::string& doc,
                                                  bool include_hidden) {
  Lock lock(mu_);
  auto d = readable_doc(user, doc);
  auto project = load_project(d.project_id);
  auto anns = latest(doc, "annotations", "").value_or(json::array()).get<std::vector<Annotation>>();
  return quarry::list_annotations(anns, project.settings.labels, include_hidden);
}

std::vector<Annotation> Service::auto_annotate(const std::string& user, const std::string& doc) {
  Lock lock(mu_);
  auto d = writable_doc(user, doc);
  auto project = load_project(d.project_id);
  auto set = compile_labelset(project.settings.labels);
  auto fresh = quarry::auto_annotate(record_of(d, true), set, now());
  auto existing = latest(doc, "annotations", "").value_or(json::array()).get<std::vector<Annotation>>();
  auto all = replace_auto(existing, fresh);
  sql::Transaction tx(*db_);
  put(doc, "annotations", "", all, user);
  touch(user, doc);
  tx.commit();
  return quarry::list_annotations(all, project.settings.labels, true);
}

Annotation Service::add_annotation(const std::string& user, const std::string& doc, int page_index, std::size_t start,
                                   std::size_t end, const std::string& label_id) {
  Lock lock(mu_);
  auto d = writable_doc(user, doc);
  auto project = load_project(d.project_id);
  auto a = add_manual_annotation(record_of(d, true), page_index, start, end, label_id, project.settings.labels, user,
                                 now(), new_id("ann-"));
  auto all = latest(doc, "annotations", "").value_or(json::array()).get<std::vector<Annotation>>();
  all.push_back(a);
  sql::Transaction tx(*db_);
  put(doc, "annotations", "", all, user);
  touch(user, doc);
  tx.commit();
  return a;
}

// maps

MapCalibration Service::calibrate_map(const std::string& user, const std::string& doc, const Region& region,
                                      const std::optional<std::vector<AxisTick>>& ticks) {
  Lock lock(mu_);
  auto d = writable_doc(user, doc);
  if (region.page_index < 0 || region.page_index >= d.page_count)
    throw Error(ErrorCode::PageOutOfRange, "page " + std::to_string(region.page_index) + " does not exist",
                {{"page_index", region.page_index}});
  auto used = ticks ? *ticks : detect_ticks(load_pages(doc).at(region.page_index), region, config_.tick_band);
  auto cal = calibrate(region, used);
  cal.calibration_id = new_id("cal-");
  cal.doc_id = doc;
  sql::Transaction tx(*db_);
  put(doc, "calibration", cal.calibration_id, cal, user);
  touch(user, doc);
  tx.commit();
  return cal;
}

GeoPoint Service::add_point(const std::string& user, const std::string& doc, const std::string& calibration_id,
                            double x, double y, std::optional<int> table_row_hint) {
  Lock lock(mu_);
  writable_doc(user, doc);
  auto cal_json = latest(doc, "calibration", calibration_id);
  if (!cal_json)
    throw Error(ErrorCode::NotFound, "no calibration '" + calibration_id + "' on this file",
                {{"calibration_id", calibration_id}});
  auto p = locate_point(cal_json->get<MapCalibration>(), x, y);
  p.point_id = new_id("pt-");
  p.doc_id = doc;
  p.calibration_id = calibration_id;
  p.table_row_hint = table_row_hint;
  p.created_by = user;
  p.created_at = now();
  auto all = latest(doc, "points", "").value_or(json::array()).get<std::vector<GeoPoint>>();
  all.push_back(p);
  sql::Transaction tx(*db_);
  put(doc, "points", "", all, user);
  touch(user, doc);
  tx.commit();
  return p;
}

std::vector<GeoPoint> Service::list_points(const std::string& user, const std::string& doc) {
  Lock lock(mu_);
  readable_doc(user, doc);
  return latest(doc, "points", "").value_or(json::array()).get<std::vector<GeoPoint>>();
}

// integration

BroadcastOverride Service::set_override(const std::string& user, const std::string& doc, const BroadcastOverride& o) {
  Lock lock(mu_);
  writable_doc(user, doc);
  sql::Transaction tx(*db_);
  put(doc, "override", "", o, user);
  touch(user, doc);
  tx.commit();
  return o;
}

FileArtifacts Service::artifacts_of(const std::string& doc) {
  FileArtifacts a;
  for (const auto& j : latest_all(doc, "table")) a.tables.push_back(j.get<TableArtifact>());
  a.annotations = latest(doc, "annotations", "").value_or(json::array()).get<std::vector<Annotation>>();
  a.points = latest(doc, "points", "").value_or(json::array()).get<std::vector<GeoPoint>>();
  if (auto o = latest(doc, "override", "")) a.override_ = o->get<BroadcastOverride>();
  return a;
}

SummaryTable Service::summarize(const DocRow& d, const ProjectSchema& schema) {
  return quarry::integrate_file(record_of(d, false), artifacts_of(d.doc_id), schema);
}

SummaryTable Service::integrate_file(const std::string& user, const std::string& doc) {
  Lock lock(mu_);
  auto d = readable_doc(user, doc);
  return summarize(d, load_project(d.project_id).settings.schema);
}

SummaryTable Service::integrate_project(const std::string& user, const std::string& project) {
  Lock lock(mu_);
  auto p = load_project(project);
  require_member(user, p.team_id);
  validate_schema(p.settings.schema);
  // filename order keeps the output independent of upload interleaving
  auto docs = query_docs("d.project_id = ?2", {project});
  std::stable_sort(docs.begin(), docs.end(), [](const DocRow& a, const DocRow& b) { return a.filename < b.filename; });
  std::vector<SummaryTable> files;
  for (const auto& d : docs) files.push_back(summarize(d, p.settings.schema));
  return quarry::integrate_project(files, p.settings.schema);
}

// JSON

void to_json(nlohmann::json& j, const UserInfo& u) {
  auto teams = json::array();
  for (const auto& [team, role] : u.memberships) teams.push_back({{"team_id", team}, {"role", to_string(role)}});
  j = {{"user_id", u.user_id}, {"username", u.username}, {"created_at", format_rfc3339(u.created_at)}, {"teams", teams}};
}

void to_json(nlohmann::json& j, const TeamInfo& t) {
  j = {{"team_id", t.team_id}, {"name", t.name}, {"role", to_string(t.role)}};
}

void to_json(nlohmann::json& j, const Member& m) {
  j = {{"user_id", m.user_id}, {"username", m.username}, {"role", to_string(m.role)}};
}

void to_json(nlohmann::json& j, const ProjectSettings& s) {
  j = {{"schema", s.schema}, {"labels", s.labels}, {"table_detector", opt(s.table_detector)}, {"ocr", opt(s.ocr)}};
}

void from_json(const nlohmann::json& j, ProjectSettings& s) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "settings must be an object");
  s.schema = j.value("schema", ProjectSchema{});
  s.labels = j.value("labels", std::vector<LabelDef>{});
  auto str = [&](const char* k) -> std::optional<std::string> {
    if (!j.contains(k) || j.at(k).is_null()) return std::nullopt;
    return j.at(k).get<std::string>();
  };
  s.table_detector = str("table_detector");
  s.ocr = str("ocr");
}

void to_json(nlohmann::json& j, const Project& p) {
  j = {{"project_id", p.project_id},     {"team_id", p.team_id},
       {"name", p.name},                 {"settings", p.settings},
       {"created_by", p.created_by},     {"created_at", format_rfc3339(p.created_at)},
       {"deleted_at", opt(p.deleted_at)}};
}

void to_json(nlohmann::json& j, const FileLock& l) {
  j = {{"doc_id", l.doc_id},
       {"holder", l.holder},
       {"acquired_at", format_rfc3339(l.acquired_at)},
       {"lease_expiry", format_rfc3339(l.lease_expiry)}};
}

void to_json(nlohmann::json& j, const PrincipalAssignment& p) {
  j = {{"doc_id", p.doc_id}, {"principal", p.principal}, {"since", format_rfc3339(p.since)}};
}

void to_json(nlohmann::json& j, const FileEntry& f) {
  j = {{"doc_id", f.doc_id},
       {"project_id", f.project_id},
       {"team_id", f.team_id},
       {"filename", f.filename},
       {"title", f.meta.title},
       {"meta", f.meta},
       {"page_count", f.page_count},
       {"status", f.status},
       {"uploader", f.uploader},
       {"upload_time", format_rfc3339(f.upload_time)},
       {"last_editor", opt(f.last_editor)},
       {"last_edit_time", opt(f.last_edit_time)},
       {"principal", opt(f.principal)},
       {"lock_holder", opt(f.lock_holder)}};
}

void to_json(nlohmann::json& j, const FilePage& p) {
  j = {{"items", p.items}, {"total", p.total}, {"page", p.page}, {"page_size", p.page_size}};
}

}  // namespace quarry
