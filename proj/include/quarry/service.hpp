#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "quarry/annotate.hpp"
#include "quarry/auth.hpp"
#include "quarry/document.hpp"
#include "quarry/georef.hpp"
#include "quarry/integrate.hpp"
#include "quarry/table.hpp"

namespace quarry {

namespace sql {
class Database;
}

enum class Role { Owner, Manager, Member };
enum class Action { AddRemoveManager, AddRemoveMember, AddDeleteProject, ImportFile, ProjectSettings };

inline constexpr Action kAllActions[] = {Action::AddRemoveManager, Action::AddRemoveMember, Action::AddDeleteProject,
                                         Action::ImportFile, Action::ProjectSettings};

/// The constant role/action matrix.
bool permitted(Role role, Action action);

std::string to_string(Role r);
Role role_from_string(const std::string& s);
std::string to_string(Action a);

struct ServiceConfig {
  std::string data_dir;
  std::chrono::seconds lock_lease{300};
  std::chrono::seconds session_ttl{24 * 3600};
  std::chrono::hours tombstone_retention{24 * 30};
  std::size_t recent_limit = 20;
  auth::PasswordCost password_cost = auth::PasswordCost::interactive();
  TableThresholds thresholds;
  std::string table_detector = "ruling-lines";
  std::optional<std::string> ocr = "embedded-text";
  double tick_band = 0.08;
  std::vector<std::string> meta_adapters = {"layout", "pdfinfo"};
};

struct UserInfo {
  std::string user_id;
  std::string username;
  Timestamp created_at{};
  std::vector<std::pair<std::string, Role>> memberships;
};

struct Session {
  std::string token;
  std::string user_id;
  Timestamp expires_at{};
};

struct TeamInfo {
  std::string team_id;
  std::string name;
  Role role = Role::Member;  // of the caller
};

struct Member {
  std::string user_id;
  std::string username;
  Role role = Role::Member;
};

/// Project-level JSON settings.
struct ProjectSettings {
  ProjectSchema schema;
  std::vector<LabelDef> labels;
  std::optional<std::string> table_detector;
  std::optional<std::string> ocr;
};

struct Project {
  std::string project_id;
  std::string team_id;
  std::string name;
  ProjectSettings settings;
  std::string created_by;
  Timestamp created_at{};
  std::optional<Timestamp> deleted_at;
};

struct FileLock {
  std::string doc_id;
  std::string holder;
  Timestamp acquired_at{};
  Timestamp lease_expiry{};
};

struct PrincipalAssignment {
  std::string doc_id;
  std::string principal;
  Timestamp since{};
};

struct FileEntry {
  std::string doc_id;
  std::string project_id;
  std::string team_id;
  std::string filename;
  MetaInfo meta;
  int page_count = 0;
  std::string status;
  std::string uploader;
  Timestamp upload_time{};
  std::optional<std::string> last_editor;
  std::optional<Timestamp> last_edit_time;
  std::optional<std::string> principal;
  std::optional<std::string> lock_holder;
};

struct SearchQuery {
  std::string q;
  std::optional<std::string> principal;
  std::optional<std::string> import_user;
  std::string sort = "import_time";  // title | import_time | update_time
  bool descending = true;
  int page = 1;
  int page_size = 50;
};

struct FilePage {
  std::vector<FileEntry> items;
  std::size_t total = 0;
  int page = 1;
  int page_size = 50;
};

/// All operations take the acting user id and enforce membership,
/// permissions and locks. Thread safe.
class Service {
 public:
  using Clock = std::function<Timestamp()>;

  explicit Service(ServiceConfig config, Clock clock = now_utc);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  const ServiceConfig& config() const { return config_; }

  // accounts
  UserInfo register_user(const std::string& username, const std::string& password);
  Session login(const std::string& username, const std::string& password);
  /// user id for a live token; Unauthenticated otherwise.
  std::string authenticate(const std::string& token);
  void logout(const std::string& token);
  std::vector<UserInfo> list_users();
  std::optional<std::string> find_user(const std::string& username);

  // teams
  TeamInfo create_team(const std::string& user, const std::string& name);
  std::vector<TeamInfo> list_teams(const std::string& user);
  std::vector<Member> team_members(const std::string& user, const std::string& team);
  void add_member(const std::string& user, const std::string& team, const std::string& target, Role role);
  void set_role(const std::string& user, const std::string& team, const std::string& target, Role role);
  void remove_member(const std::string& user, const std::string& team, const std::string& target);
  bool check_permission(const std::string& user, const std::string& team, Action action);

  // projects
  Project create_project(const std::string& user, const std::string& team, const std::string& name,
                         const nlohmann::json& settings = nlohmann::json::object());
  void delete_project(const std::string& user, const std::string& project);
  Project restore_project(const std::string& user, const std::string& project);
  std::vector<Project> list_projects(const std::string& user, const std::optional<std::string>& team = std::nullopt);
  Project get_project(const std::string& user, const std::string& project);
  /// Top-level keys of `patch` replace the stored ones.
  Project update_project_settings(const std::string& user, const std::string& project, const nlohmann::json& patch);
  /// Drops tombstoned projects older than the retention window.
  std::size_t purge_tombstones();

  // files
  FileEntry import_file(const std::string& user, const std::string& project, std::span<const std::uint8_t> bytes,
                        const std::string& filename);
  FilePage list_files(const std::string& user, const std::string& project, const SearchQuery& query);
  FilePage search_documents(const std::string& user, const std::string& team, const SearchQuery& query);
  std::vector<FileEntry> my_files(const std::string& user);
  std::vector<FileEntry> recent_files(const std::string& user);
  /// Counts as a view for the recent list.
  FileEntry get_file(const std::string& user, const std::string& doc);
  std::vector<std::uint8_t> pdf_bytes(const std::string& user, const std::string& doc);
  PageContent get_page(const std::string& user, const std::string& doc, int page_index);

  // lock and principal
  FileLock acquire_lock(const std::string& user, const std::string& doc);
  void release_lock(const std::string& user, const std::string& doc);
  std::optional<FileLock> current_lock(const std::string& user, const std::string& doc);
  PrincipalAssignment take_charge(const std::string& user, const std::string& doc);
  void release_charge(const std::string& user, const std::string& doc);

  // meta
  MetaInfo get_meta(const std::string& user, const std::string& doc);
  MetaInfo put_meta(const std::string& user, const std::string& doc, const MetaInfo& meta);

  // tables
  std::vector<TableArtifact> list_tables(const std::string& user, const std::string& doc);
  TableArtifact get_table(const std::string& user, const std::string& table);
  TableArtifact create_table(const std::string& user, const std::string& doc, const Region& region);
  std::vector<TableArtifact> detect_tables(const std::string& user, const std::string& doc, int page_index,
                                           const std::optional<std::string>& detector);
  TableArtifact table_stage(const std::string& user, const std::string& table, TableStage target,
                            const std::optional<std::string>& ocr);
  TableArtifact table_edit(const std::string& user, const std::string& table, const nlohmann::json& edit);

  // annotations
  std::vector<Annotation> list_annotations(const std::string& user, const std::string& doc, bool include_hidden);
  std::vector<Annotation> auto_annotate(const std::string& user, const std::string& doc);
  Annotation add_annotation(const std::string& user, const std::string& doc, int page_index, std::size_t start,
                            std::size_t end, const std::string& label_id);

  // maps
  MapCalibration calibrate_map(const std::string& user, const std::string& doc, const Region& region,
                               const std::optional<std::vector<AxisTick>>& ticks);
  GeoPoint add_point(const std::string& user, const std::string& doc, const std::string& calibration_id, double x,
                     double y, std::optional<int> table_row_hint);
  std::vector<GeoPoint> list_points(const std::string& user, const std::string& doc);

  // integration
  BroadcastOverride set_override(const std::string& user, const std::string& doc, const BroadcastOverride& o);
  SummaryTable integrate_file(const std::string& user, const std::string& doc);
  SummaryTable integrate_project(const std::string& user, const std::string& project);

 private:
  struct DocRow;

  Timestamp now() const { return clock_(); }
  std::optional<Role> role_in(const std::string& user, const std::string& team);
  Role require_member(const std::string& user, const std::string& team);
  void require(const std::string& user, const std::string& team, Action action);
  Project load_project(const std::string& project, bool include_deleted = false);
  DocRow load_doc(const std::string& doc);
  DocRow readable_doc(const std::string& user, const std::string& doc);
  DocRow writable_doc(const std::string& user, const std::string& doc);
  void touch(const std::string& user, const std::string& doc);
  void record_view(const std::string& user, const std::string& doc);
  std::vector<PageContent> load_pages(const std::string& doc);
  DocumentRecord record_of(const DocRow& d, bool with_pages);
  std::vector<DocRow> query_docs(const std::string& where, const std::vector<std::string>& args);
  FilePage filter_page(std::vector<FileEntry> files, const SearchQuery& query);

  std::optional<nlohmann::json> latest(const std::string& doc, const std::string& kind, const std::string& key);
  std::vector<nlohmann::json> latest_all(const std::string& doc, const std::string& kind);
  void put(const std::string& doc, const std::string& kind, const std::string& key, const nlohmann::json& body,
           const std::string& user);
  std::string table_doc(const std::string& table);
  FileArtifacts artifacts_of(const std::string& doc);
  SummaryTable summarize(const DocRow& d, const ProjectSchema& schema);

  void index_document(const std::string& doc, const MetaInfo& meta);
  std::set<std::string> search_index(const std::string& q) const;

  ServiceConfig config_;
  Clock clock_;
  std::unique_ptr<sql::Database> db_;
  std::recursive_mutex mu_;
  std::map<std::string, std::set<std::string>> postings_;
  std::map<std::string, std::set<std::string>> doc_tokens_;
};

void to_json(nlohmann::json& j, const UserInfo& u);
void to_json(nlohmann::json& j, const TeamInfo& t);
void to_json(nlohmann::json& j, const Member& m);
void to_json(nlohmann::json& j, const ProjectSettings& s);
void from_json(const nlohmann::json& j, ProjectSettings& s);
void to_json(nlohmann::json& j, const Project& p);
void to_json(nlohmann::json& j, const FileLock& l);
void to_json(nlohmann::json& j, const PrincipalAssignment& p);
void to_json(nlohmann::json& j, const FileEntry& f);
void to_json(nlohmann::json& j, const FilePage& p);

}  // namespace quarry
