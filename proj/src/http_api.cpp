#include "quarry/http_api.hpp"

#include <httplib.h>

#include <charconv>

#include "quarry/csv.hpp"

namespace quarry {

namespace {

using json = nlohmann::json;
using httplib::Request;
using httplib::Response;

struct Call {
  const Request& req;
  Response& res;
  std::string user;

  std::string path(const char* name) const { return req.path_params.at(name); }

  json body() const {
    if (req.body.empty()) return json::object();
    auto j = json::parse(req.body, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::InvalidArgument, "request body is not valid JSON");
    return j;
  }

  std::optional<std::string> query(const char* name) const {
    if (!req.has_param(name)) return std::nullopt;
    return req.get_param_value(name);
  }

  int int_query(const char* name, int fallback) const {
    auto v = query(name);
    if (!v) return fallback;
    return to_int(*v, name);
  }

  static int to_int(const std::string& s, const char* name) {
    int out = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || p != s.data() + s.size())
      throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be an integer", {{name, s}});
    return out;
  }

  void send(const json& j, int status = 200) const {
    res.status = status;
    res.set_content(j.dump(), "application/json");
  }
  void send_text(const std::string& body, const char* type) const {
    res.status = 200;
    res.set_content(body, type);
  }
};

void send_error(Response& res, ErrorCode code, const std::string& message, const json& details) {
  res.status = http_status(code);
  res.set_content(json{{"code", to_string(code)}, {"message", message}, {"details", details}}.dump(),
                  "application/json");
}

std::string bearer(const Request& req) {
  auto h = req.get_header_value("Authorization");
  const std::string prefix = "Bearer ";
  if (h.compare(0, prefix.size(), prefix) != 0) return "";
  return h.substr(prefix.size());
}

using Body = std::function<void(Call&)>;

httplib::Server::Handler wrap(Service& svc, bool authed, Body fn) {
  return [&svc, authed, fn = std::move(fn)](const Request& req, Response& res) {
    try {
      Call c{req, res, ""};
      if (authed) c.user = svc.authenticate(bearer(req));
      fn(c);
    } catch (const Error& e) {
      send_error(res, e.code(), e.what(), e.details());
    } catch (const json::exception& e) {
      send_error(res, ErrorCode::InvalidArgument, std::string("malformed request: ") + e.what(), json::object());
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(json{{"code", "Internal"}, {"message", e.what()}, {"details", json::object()}}.dump(),
                      "application/json");
    }
  };
}

std::string required(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string())
    throw Error(ErrorCode::InvalidArgument, std::string("missing string field '") + key + "'", {{"field", key}});
  return j.at(key).get<std::string>();
}

SearchQuery search_query(const Call& c) {
  SearchQuery q;
  q.q = c.query("q").value_or("");
  q.principal = c.query("principal");
  q.import_user = c.query("import_user");
  q.sort = c.query("sort").value_or("import_time");
  auto order = c.query("order").value_or("desc");
  if (order != "asc" && order != "desc")
    throw Error(ErrorCode::InvalidArgument, "order must be asc or desc", {{"order", order}});
  q.descending = order == "desc";
  q.page = c.int_query("page", 1);
  q.page_size = c.int_query("page_size", 50);
  return q;
}

std::string user_ref(Service& svc, const json& b) {
  if (b.contains("user_id")) return required(b, "user_id");
  auto name = required(b, "username");
  auto id = svc.find_user(name);
  if (!id) throw Error(ErrorCode::NotFound, "no user '" + name + "'", {{"username", name}});
  return *id;
}

Region region_from(const json& b) {
  auto r = b.get<Region>();
  r.source = RegionSource::user_drawn;
  return r;
}

bool wants_csv(const Call& c) { return c.query("format") == "csv"; }

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::Unauthenticated:
    case ErrorCode::InvalidCredentials: return 401;
    case ErrorCode::PermissionDenied:
    case ErrorCode::NotPrincipal: return 403;
    case ErrorCode::NotFound:
    case ErrorCode::PageOutOfRange: return 404;
    case ErrorCode::DuplicateUsername:
    case ErrorCode::AlreadyAssigned:
    case ErrorCode::SchemaMismatch: return 409;
    case ErrorCode::LockHeldByOther:
    case ErrorCode::LockNotHeld: return 423;
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidSortKey:
    case ErrorCode::UnknownAdapter:
    case ErrorCode::UnknownDetector: return 400;
    case ErrorCode::AddressInUse:
    case ErrorCode::BadConfig: return 500;
    default: return 422;
  }
}

void mount_api(httplib::Server& server, Service& svc) {
  auto open = [&](Body fn) { return wrap(svc, false, std::move(fn)); };
  auto authed = [&](Body fn) { return wrap(svc, true, std::move(fn)); };

  server.Get("/health", open([](Call& c) { c.send({{"status", "ok"}}); }));

  // accounts
  server.Post("/auth/register", open([&](Call& c) {
                auto b = c.body();
                c.send(svc.register_user(required(b, "username"), required(b, "password")), 201);
              }));
  server.Post("/auth/login", open([&](Call& c) {
                auto b = c.body();
                auto s = svc.login(required(b, "username"), required(b, "password"));
                c.send({{"token", s.token}, {"user_id", s.user_id}, {"expires_at", format_rfc3339(s.expires_at)}});
              }));
  server.Post("/auth/logout", authed([&](Call& c) {
                svc.logout(bearer(c.req));
                c.send(json::object());
              }));

  // teams
  server.Get("/teams", authed([&](Call& c) { c.send(svc.list_teams(c.user)); }));
  server.Post("/teams", authed([&](Call& c) { c.send(svc.create_team(c.user, required(c.body(), "name")), 201); }));
  server.Get("/teams/:id/members", authed([&](Call& c) { c.send(svc.team_members(c.user, c.path("id"))); }));
  server.Post("/teams/:id/members", authed([&](Call& c) {
                auto b = c.body();
                auto target = user_ref(svc, b);
                svc.add_member(c.user, c.path("id"), target, role_from_string(b.value("role", "Member")));
                c.send(svc.team_members(c.user, c.path("id")), 201);
              }));
  server.Patch("/teams/:id/members/:uid", authed([&](Call& c) {
                 svc.set_role(c.user, c.path("id"), c.path("uid"), role_from_string(required(c.body(), "role")));
                 c.send(svc.team_members(c.user, c.path("id")));
               }));
  server.Delete("/teams/:id/members/:uid", authed([&](Call& c) {
                  svc.remove_member(c.user, c.path("id"), c.path("uid"));
                  c.send(svc.team_members(c.user, c.path("id")));
                }));
  server.Get("/teams/:id/files", authed([&](Call& c) { c.send(svc.search_documents(c.user, c.path("id"), search_query(c))); }));

  // projects
  server.Get("/projects", authed([&](Call& c) { c.send(svc.list_projects(c.user, c.query("team_id"))); }));
  server.Post("/projects", authed([&](Call& c) {
                auto b = c.body();
                c.send(svc.create_project(c.user, required(b, "team_id"), required(b, "name"),
                                          b.value("settings", json::object())),
                       201);
              }));
  server.Get("/projects/:id", authed([&](Call& c) { c.send(svc.get_project(c.user, c.path("id"))); }));
  server.Delete("/projects/:id", authed([&](Call& c) {
                  svc.delete_project(c.user, c.path("id"));
                  c.send(json::object());
                }));
  server.Post("/projects/:id/restore", authed([&](Call& c) { c.send(svc.restore_project(c.user, c.path("id"))); }));
  server.Patch("/projects/:id/settings", authed([&](Call& c) {
                 c.send(svc.update_project_settings(c.user, c.path("id"), c.body()));
               }));
  server.Post("/projects/:id/files", authed([&](Call& c) {
                std::vector<std::pair<std::string, std::string>> uploads;  // filename, bytes
                if (c.req.is_multipart_form_data()) {
                  for (const auto& f : c.req.get_file_values("file")) uploads.emplace_back(f.filename, f.content);
                } else {
                  uploads.emplace_back(c.query("filename").value_or("upload.pdf"), c.req.body);
                }
                if (uploads.empty()) throw Error(ErrorCode::InvalidArgument, "no file part named 'file'");
                json imported = json::array(), failed = json::array();
                std::optional<Error> first;
                for (const auto& [name, bytes] : uploads) {
                  try {
                    auto p = reinterpret_cast<const std::uint8_t*>(bytes.data());
                    imported.push_back(svc.import_file(c.user, c.path("id"), {p, bytes.size()}, name));
                  } catch (const Error& e) {
                    if (e.code() == ErrorCode::PermissionDenied || e.code() == ErrorCode::NotFound) throw;
                    failed.push_back({{"filename", name}, {"code", to_string(e.code())}, {"message", e.what()}});
                    if (!first) first = e;
                  }
                }
                if (imported.empty()) {
                  send_error(c.res, first->code(), first->what(), {{"failed", failed}});
                  return;
                }
                c.send({{"imported", imported}, {"failed", failed}}, failed.empty() ? 201 : 207);
              }));
  server.Get("/projects/:id/files", authed([&](Call& c) { c.send(svc.list_files(c.user, c.path("id"), search_query(c))); }));
  server.Post("/projects/:id/integrate", authed([&](Call& c) {
                auto t = svc.integrate_project(c.user, c.path("id"));
                if (c.query("format") == "json")
                  c.send(t);
                else if (c.query("part") == "provenance")
                  c.send_text(provenance_csv(t), "text/csv");
                else
                  c.send_text(export_csv(t), "text/csv");
              }));

  server.Get("/me/files", authed([&](Call& c) { c.send(svc.my_files(c.user)); }));
  server.Get("/me/recent", authed([&](Call& c) { c.send(svc.recent_files(c.user)); }));

  // files
  server.Get("/files/:id", authed([&](Call& c) { c.send(svc.get_file(c.user, c.path("id"))); }));
  server.Get("/files/:id/pdf", authed([&](Call& c) {
               auto bytes = svc.pdf_bytes(c.user, c.path("id"));
               c.send_text(std::string(bytes.begin(), bytes.end()), "application/pdf");
             }));
  server.Get("/files/:id/lock", authed([&](Call& c) {
               auto l = svc.current_lock(c.user, c.path("id"));
               c.send(l ? json(*l) : json(nullptr));
             }));
  server.Post("/files/:id/lock", authed([&](Call& c) { c.send(svc.acquire_lock(c.user, c.path("id"))); }));
  server.Delete("/files/:id/lock", authed([&](Call& c) {
                  svc.release_lock(c.user, c.path("id"));
                  c.send(json::object());
                }));
  server.Post("/files/:id/charge", authed([&](Call& c) { c.send(svc.take_charge(c.user, c.path("id"))); }));
  server.Delete("/files/:id/charge", authed([&](Call& c) {
                  svc.release_charge(c.user, c.path("id"));
                  c.send(json::object());
                }));
  server.Get("/files/:id/meta", authed([&](Call& c) { c.send(svc.get_meta(c.user, c.path("id"))); }));
  server.Put("/files/:id/meta", authed([&](Call& c) {
               c.send(svc.put_meta(c.user, c.path("id"), c.body().get<MetaInfo>()));
             }));
  server.Get("/files/:id/pages/:n", authed([&](Call& c) {
               c.send(svc.get_page(c.user, c.path("id"), Call::to_int(c.path("n"), "n")));
             }));

  // tables
  server.Get("/files/:id/tables", authed([&](Call& c) { c.send(svc.list_tables(c.user, c.path("id"))); }));
  server.Post("/files/:id/tables", authed([&](Call& c) {
                auto b = c.body();
                if (b.value("detect", false)) {
                  std::optional<std::string> detector;
                  if (b.contains("detector")) detector = required(b, "detector");
                  c.send(svc.detect_tables(c.user, c.path("id"), b.at("page_index").get<int>(), detector), 201);
                } else {
                  c.send(json::array({svc.create_table(c.user, c.path("id"), region_from(b))}), 201);
                }
              }));
  server.Get("/tables/:id", authed([&](Call& c) {
               auto t = svc.get_table(c.user, c.path("id"));
               if (wants_csv(c))
                 c.send_text(csv::write(export_table(t)), "text/csv");
               else
                 c.send(t);
             }));
  server.Get("/tables/:id/log", authed([&](Call& c) {
               c.send_text(edit_log_jsonl(svc.get_table(c.user, c.path("id")).edit_log), "application/jsonl");
             }));
  server.Post("/tables/:id/stage", authed([&](Call& c) {
                auto b = c.body();
                std::optional<std::string> ocr;
                if (b.contains("ocr") && !b.at("ocr").is_null()) ocr = required(b, "ocr");
                c.send(svc.table_stage(c.user, c.path("id"), table_stage_from_string(required(b, "target")), ocr));
              }));
  server.Post("/tables/:id/edits", authed([&](Call& c) { c.send(svc.table_edit(c.user, c.path("id"), c.body())); }));

  // annotations
  server.Get("/files/:id/annotations", authed([&](Call& c) {
               auto anns = svc.list_annotations(c.user, c.path("id"), c.query("include_hidden") == "true");
               if (wants_csv(c))
                 c.send_text(annotations_csv(anns), "text/csv");
               else
                 c.send(anns);
             }));
  server.Post("/files/:id/annotations", authed([&](Call& c) {
                auto b = c.body();
                if (b.value("mode", "manual") == "auto") {
                  c.send(svc.auto_annotate(c.user, c.path("id")));
                  return;
                }
                auto span = b.at("char_span");
                c.send(svc.add_annotation(c.user, c.path("id"), b.at("page_index").get<int>(),
                                          span.at(0).get<std::size_t>(), span.at(1).get<std::size_t>(),
                                          required(b, "label_id")),
                       201);
              }));

  // maps
  server.Post("/files/:id/map/calibrate", authed([&](Call& c) {
                auto b = c.body();
                std::optional<std::vector<AxisTick>> ticks;
                if (b.contains("ticks")) {
                  ticks.emplace();
                  for (const auto& t : b.at("ticks")) {
                    if (t.contains("label")) {
                      auto l = parse_coordinate_label(t.at("label").get<std::string>());
                      ticks->push_back({l.axis, t.at("pixel").get<double>(), l.degrees, t.at("label").get<std::string>()});
                    } else {
                      ticks->push_back(t.get<AxisTick>());
                    }
                  }
                }
                c.send(svc.calibrate_map(c.user, c.path("id"), region_from(b.at("region")), ticks), 201);
              }));
  server.Get("/files/:id/map/points", authed([&](Call& c) {
               auto pts = svc.list_points(c.user, c.path("id"));
               if (wants_csv(c))
                 c.send_text(geo_points_csv(pts), "text/csv");
               else
                 c.send(pts);
             }));
  server.Post("/files/:id/map/points", authed([&](Call& c) {
                auto b = c.body();
                std::optional<int> hint;
                if (b.contains("table_row_hint") && !b.at("table_row_hint").is_null())
                  hint = b.at("table_row_hint").get<int>();
                c.send(svc.add_point(c.user, c.path("id"), required(b, "calibration_id"), b.at("pixel").at(0).get<double>(),
                                     b.at("pixel").at(1).get<double>(), hint),
                       201);
              }));

  // integration
  server.Put("/files/:id/integration-override", authed([&](Call& c) {
               c.send(svc.set_override(c.user, c.path("id"), c.body().get<BroadcastOverride>()));
             }));
  server.Post("/files/:id/integrate", authed([&](Call& c) {
                auto t = svc.integrate_file(c.user, c.path("id"));
                if (wants_csv(c))
                  c.send_text(export_csv(t), "text/csv");
                else
                  c.send(t);
              }));

  server.set_error_handler([](const Request&, Response& res) {
    if (!res.body.empty()) return;
    if (res.status == 404)
      send_error(res, ErrorCode::NotFound, "no such endpoint", json::object());
  });
}

}  // namespace quarry
