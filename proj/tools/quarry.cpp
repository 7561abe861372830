#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "quarry/config.hpp"
#include "quarry/csv.hpp"
#include "quarry/error.hpp"
#include "quarry/http_api.hpp"
#include "quarry/service.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace quarry;

namespace {

constexpr int kOk = 0;
constexpr int kPartial = 1;
constexpr int kFatal = 2;

struct Globals {
  bool json_out = false;
  std::string server = "http://127.0.0.1:8080";
  std::string user;
  std::string password;
};

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v ? v : fallback;
}

// remote failures carry the server's error body
struct RemoteError : Error {
  RemoteError(ErrorCode code, const std::string& msg, json details) : Error(code, msg, std::move(details)) {}
};

ErrorCode code_from(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(ErrorCode::BadConfig); ++i)
    if (to_string(static_cast<ErrorCode>(i)) == s) return static_cast<ErrorCode>(i);
  return ErrorCode::InvalidArgument;
}

[[noreturn]] void throw_remote(const httplib::Result& r) {
  auto body = json::parse(r->body, nullptr, false);
  if (body.is_object() && body.contains("code"))
    throw RemoteError(code_from(body.value("code", "")), body.value("message", ""),
                      body.value("details", json::object()));
  throw Error(ErrorCode::InvalidArgument, "server answered " + std::to_string(r->status));
}

class Remote {
 public:
  explicit Remote(const Globals& g) : g_(g) { token_ = login(); }

  httplib::Client client() const {
    httplib::Client c(g_.server);
    c.set_read_timeout(300, 0);
    c.set_bearer_token_auth(token_);
    return c;
  }

  static void check(const httplib::Result& r, const std::string& what) {
    if (!r) throw Error(ErrorCode::InvalidArgument, what + ": " + httplib::to_string(r.error()));
    if (r->status >= 300) throw_remote(r);
  }

 private:
  std::string login() const {
    if (g_.user.empty()) throw Error(ErrorCode::Unauthenticated, "no credentials: pass --user/--password or set QUARRY_USER");
    httplib::Client c(g_.server);
    auto r = c.Post("/auth/login", json{{"username", g_.user}, {"password", g_.password}}.dump(), "application/json");
    check(r, "login at " + g_.server);
    return json::parse(r->body).at("token").get<std::string>();
  }

  const Globals& g_;
  std::string token_;
};

void print_error(const Globals& g, const Error& e) {
  if (g.json_out)
    std::cout << json{{"error", {{"code", to_string(e.code())}, {"message", e.what()}, {"details", e.details()}}}}.dump(2)
              << "\n";
  else
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
}

// serve

struct ServeArgs {
  std::string listen;
  std::string data_dir;
  std::string config;
};

int cmd_serve(const Globals& g, const ServeArgs& a) {
  CliConfig cfg;
  if (!a.config.empty()) cfg = load_config(a.config, cfg);
  if (!a.listen.empty()) cfg.listen = a.listen;
  if (!a.data_dir.empty()) cfg.service.data_dir = a.data_dir;
  validate_config(cfg);
  auto addr = parse_listen(cfg.listen);

  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  Service svc(cfg.service);
  httplib::Server server;
  // no SO_REUSEPORT, so a second server on the same port fails to bind
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });
  mount_api(server, svc);
  int port = addr.port;
  if (port == 0)
    port = server.bind_to_any_port(addr.host);
  else if (!server.bind_to_port(addr.host, port))
    port = -1;
  if (port <= 0)
    throw Error(ErrorCode::AddressInUse, "cannot listen on " + cfg.listen, {{"listen", cfg.listen}});

  std::thread([&server, stop_signals] {
    int sig = 0;
    sigwait(&stop_signals, &sig);
    server.stop();
  }).detach();

  if (g.json_out)
    std::cout << json{{"listening", addr.host + ":" + std::to_string(port)}}.dump() << std::endl;
  else
    std::cout << "listening on " << addr.host << ":" << port << std::endl;
  server.listen_after_bind();
  return kOk;
}

// import

struct ImportArgs {
  std::string project;
  std::string dir;
  int jobs = 4;
};

struct ImportResult {
  std::string file;
  std::optional<std::string> doc_id;
  std::string code;
  std::string message;
};

bool is_pdf(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".pdf";
}

int cmd_import(const Globals& g, const ImportArgs& a) {
  if (!fs::is_directory(a.dir))
    throw Error(ErrorCode::NotFound, "directory '" + a.dir + "' does not exist", {{"dir", a.dir}});
  if (a.jobs < 1) throw Error(ErrorCode::InvalidArgument, "--jobs must be at least 1");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(a.dir))
    if (e.is_regular_file() && is_pdf(e.path())) files.push_back(e.path());
  std::sort(files.begin(), files.end());

  Remote remote(g);
  Remote::check(remote.client().Get("/projects/" + a.project), "project lookup");

  std::vector<ImportResult> results(files.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> fatal{false};
  std::optional<Error> fatal_error;
  std::mutex fatal_mu;
  auto worker = [&] {
    auto cli = remote.client();
    for (std::size_t i; !fatal && (i = next++) < files.size();) {
      auto& res = results[i];
      res.file = files[i].filename().string();
      std::ifstream in(files[i], std::ios::binary);
      std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      httplib::MultipartFormDataItems items = {{"file", bytes, res.file, "application/pdf"}};
      auto r = cli.Post("/projects/" + a.project + "/files", items);
      try {
        Remote::check(r, "upload " + res.file);
        res.doc_id = json::parse(r->body).at("imported").at(0).at("doc_id").get<std::string>();
      } catch (const Error& e) {
        res.code = to_string(e.code());
        res.message = e.what();
        bool per_file = dynamic_cast<const RemoteError*>(&e) && e.code() != ErrorCode::PermissionDenied &&
                        e.code() != ErrorCode::NotFound && e.code() != ErrorCode::Unauthenticated;
        if (!per_file) {
          std::lock_guard lock(fatal_mu);
          if (!fatal_error) fatal_error = e;
          fatal = true;
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (int i = 0; i < std::min<int>(a.jobs, static_cast<int>(std::max<std::size_t>(files.size(), 1))); ++i)
    pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (fatal_error) throw *fatal_error;

  json imported = json::array(), failed = json::array();
  for (const auto& r : results) {
    if (r.doc_id)
      imported.push_back({{"file", r.file}, {"doc_id", *r.doc_id}});
    else
      failed.push_back({{"file", r.file}, {"code", r.code}, {"message", r.message}});
  }
  if (g.json_out) {
    std::cout << json{{"project_id", a.project}, {"imported", imported}, {"failed", failed}}.dump(2) << "\n";
  } else {
    for (const auto& r : imported) std::cout << "imported " << r["file"].get<std::string>() << " " << r["doc_id"].get<std::string>() << "\n";
    for (const auto& r : failed)
      std::cout << "failed   " << r["file"].get<std::string>() << " " << r["code"].get<std::string>() << ": "
                << r["message"].get<std::string>() << "\n";
    std::cout << imported.size() << " imported, " << failed.size() << " failed\n";
  }
  return failed.empty() ? kOk : kPartial;
}

// export

struct ExportArgs {
  std::string project;
  std::string out;
};

fs::path sidecar_path(const fs::path& out) {
  auto p = out;
  p.replace_extension();
  return p.string() + ".provenance.csv";
}

int cmd_export(const Globals& g, const ExportArgs& a) {
  Remote remote(g);
  auto cli = remote.client();
  auto summary = cli.Post("/projects/" + a.project + "/integrate", "", "application/json");
  Remote::check(summary, "integrate");
  auto prov = cli.Post("/projects/" + a.project + "/integrate?part=provenance", "", "application/json");
  Remote::check(prov, "provenance");

  fs::path out(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  auto side = sidecar_path(out);
  for (const auto& [path, body] : {std::pair{out, summary->body}, std::pair{side, prov->body}}) {
    std::ofstream f(path, std::ios::binary);
    f << body;
    if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path.string() + "'", {{"path", path.string()}});
  }
  auto rows = csv::parse(summary->body).size();
  rows = rows ? rows - 1 : 0;
  if (g.json_out)
    std::cout << json{{"project_id", a.project}, {"csv", out.string()}, {"provenance", side.string()}, {"rows", rows}}.dump(2)
              << "\n";
  else
    std::cout << "wrote " << rows << " rows to " << out.string() << " (provenance in " << side.string() << ")\n";
  return kOk;
}

// user administration works on the data directory directly

struct UserArgs {
  std::string data_dir;
  std::string config;
  std::string username;
  std::string password;
};

ServiceConfig local_config(const UserArgs& a) {
  CliConfig cfg;
  if (!a.config.empty()) cfg = load_config(a.config, cfg);
  if (!a.data_dir.empty()) cfg.service.data_dir = a.data_dir;
  validate_config(cfg);
  return cfg.service;
}

int cmd_user_add(const Globals& g, const UserArgs& a) {
  Service svc(local_config(a));
  auto u = svc.register_user(a.username, a.password);
  if (g.json_out)
    std::cout << json(u).dump(2) << "\n";
  else
    std::cout << "created " << u.username << " " << u.user_id << "\n";
  return kOk;
}

int cmd_user_list(const Globals& g, const UserArgs& a) {
  Service svc(local_config(a));
  auto users = svc.list_users();
  if (g.json_out) {
    std::cout << json(users).dump(2) << "\n";
  } else {
    for (const auto& u : users) std::cout << u.user_id << "  " << u.username << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quarry: collaborative extraction of tables, maps and text from scientific PDFs"};
  app.require_subcommand(1);
  Globals g;
  g.user = env_or("QUARRY_USER", "");
  g.password = env_or("QUARRY_PASSWORD", "");
  g.server = env_or("QUARRY_SERVER", g.server);
  app.add_flag("--json", g.json_out, "Machine-readable output");
  app.add_option("--server", g.server, "API base URL (QUARRY_SERVER)");
  app.add_option("--user", g.user, "Username (QUARRY_USER)");
  app.add_option("--password", g.password, "Password (QUARRY_PASSWORD)");

  ServeArgs serve;
  auto* s = app.add_subcommand("serve", "Run the HTTP API");
  s->add_option("--listen", serve.listen, "host:port, port 0 picks a free one");
  s->add_option("--data-dir", serve.data_dir, "Storage directory");
  s->add_option("--config", serve.config, "key = value config file");

  ImportArgs import;
  auto* i = app.add_subcommand("import", "Upload every *.pdf in a directory");
  i->add_option("--project", import.project, "Project id")->required();
  i->add_option("--dir", import.dir, "Directory of PDFs")->required();
  i->add_option("--jobs", import.jobs, "Parallel uploads")->capture_default_str();

  ExportArgs exp;
  auto* e = app.add_subcommand("export", "Write the project summary CSV and its provenance sidecar");
  e->add_option("--project", exp.project, "Project id")->required();
  e->add_option("--out", exp.out, "Output CSV path")->required();

  UserArgs user;
  auto* u = app.add_subcommand("user", "Manage accounts in a data directory");
  u->require_subcommand(1);
  auto* ua = u->add_subcommand("add", "Create an account");
  ua->add_option("--data-dir", user.data_dir, "Storage directory");
  ua->add_option("--config", user.config, "key = value config file");
  ua->add_option("--username", user.username)->required();
  ua->add_option("--password", user.password)->required();
  auto* ul = u->add_subcommand("list", "List accounts");
  ul->add_option("--data-dir", user.data_dir, "Storage directory");
  ul->add_option("--config", user.config, "key = value config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    int rc = app.exit(err);
    return rc == 0 ? kOk : kFatal;
  }

  try {
    if (*s) return cmd_serve(g, serve);
    if (*i) return cmd_import(g, import);
    if (*e) return cmd_export(g, exp);
    if (*ua) return cmd_user_add(g, user);
    if (*ul) return cmd_user_list(g, user);
  } catch (const Error& err) {
    print_error(g, err);
    return kFatal;
  } catch (const std::exception& err) {
    print_error(g, Error(ErrorCode::InvalidArgument, err.what()));
    return kFatal;
  }
  return kFatal;
}
