#include "quarry/config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "quarry/csv.hpp"
#include "quarry/error.hpp"
#include "quarry/text.hpp"

namespace quarry {

namespace {

[[noreturn]] void bad(const std::string& msg, nlohmann::json details = nlohmann::json::object()) {
  throw Error(ErrorCode::BadConfig, msg, std::move(details));
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad(key + " must be a number", {{"key", key}, {"value", v}});
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad(key + " must be an integer", {{"key", key}, {"value", v}});
  return out;
}

std::vector<std::string> to_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto t = text::trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

}  // namespace

CliConfig parse_config(std::string_view content, CliConfig c) {
  std::istringstream in{std::string(content)};
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto t = std::string(text::trim(line));
    if (t.empty()) continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) bad("line " + std::to_string(n) + ": expected key = value", {{"line", n}});
    auto key = std::string(text::trim(t.substr(0, eq)));
    auto v = std::string(text::trim(t.substr(eq + 1)));
    auto& s = c.service;
    if (key == "listen") c.listen = v;
    else if (key == "data_dir") s.data_dir = v;
    else if (key == "lock_lease_seconds") s.lock_lease = std::chrono::seconds(to_int(key, v));
    else if (key == "session_ttl_seconds") s.session_ttl = std::chrono::seconds(to_int(key, v));
    else if (key == "tombstone_retention_days") s.tombstone_retention = std::chrono::hours(24 * to_int(key, v));
    else if (key == "recent_limit") {
      auto r = to_int(key, v);
      if (r <= 0) bad("recent_limit must be positive");
      s.recent_limit = static_cast<std::size_t>(r);
    } else if (key == "password_cost") {
      if (v == "interactive") s.password_cost = auth::PasswordCost::interactive();
      else if (v == "minimum") s.password_cost = auth::PasswordCost::minimum();
      else bad("password_cost must be interactive or minimum", {{"value", v}});
    } else if (key == "table_detector") s.table_detector = v;
    else if (key == "ocr") s.ocr = v == "none" ? std::nullopt : std::optional<std::string>(v);
    else if (key == "meta_adapters") s.meta_adapters = to_list(v);
    else if (key == "tick_band") s.tick_band = to_double(key, v);
    else if (key == "ruling_merge_pt") s.thresholds.ruling_merge_pt = to_double(key, v);
    else if (key == "row_gap_factor") s.thresholds.row_gap_factor = to_double(key, v);
    else if (key == "col_valley_factor") s.thresholds.col_valley_factor = to_double(key, v);
    else if (key == "axis_tolerance_pt") s.thresholds.axis_tolerance_pt = to_double(key, v);
    else if (key == "junction_tolerance_pt") s.thresholds.junction_tolerance_pt = to_double(key, v);
    else bad("unknown config key '" + key + "'", {{"key", key}, {"line", n}});
  }
  return c;
}

CliConfig load_config(const std::string& path, CliConfig base) {
  std::ifstream f(path);
  if (!f) bad("cannot read config file '" + path + "'", {{"path", path}});
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

void validate_config(const CliConfig& c) {
  const auto& s = c.service;
  const auto& t = s.thresholds;
  const std::pair<const char*, double> positive[] = {
      {"lock_lease_seconds", static_cast<double>(s.lock_lease.count())},
      {"session_ttl_seconds", static_cast<double>(s.session_ttl.count())},
      {"tombstone_retention_days", static_cast<double>(s.tombstone_retention.count())},
      {"tick_band", s.tick_band},
      {"ruling_merge_pt", t.ruling_merge_pt},
      {"row_gap_factor", t.row_gap_factor},
      {"col_valley_factor", t.col_valley_factor},
      {"axis_tolerance_pt", t.axis_tolerance_pt},
      {"junction_tolerance_pt", t.junction_tolerance_pt}};
  for (const auto& [key, v] : positive)
    if (!(v > 0)) bad(std::string(key) + " must be positive", {{"key", key}, {"value", v}});
  if (s.tick_band >= 0.5) bad("tick_band must be below 0.5", {{"value", s.tick_band}});

  try {
    TableAdapters::baseline().detector(s.table_detector);
    if (s.ocr) TableAdapters::baseline().ocr(*s.ocr);
  } catch (const Error& e) {
    bad(e.what(), e.details());
  }
  if (s.meta_adapters.empty()) bad("meta_adapters must name at least one adapter");
  auto known = MetaRegistry::baseline().priority();
  for (const auto& id : s.meta_adapters)
    if (std::find(known.begin(), known.end(), id) == known.end())
      bad("unknown meta adapter '" + id + "'", {{"adapter", id}, {"known", known}});

  parse_listen(c.listen);
  namespace fs = std::filesystem;
  if (s.data_dir.empty() || !fs::is_directory(s.data_dir))
    bad("data directory '" + s.data_dir + "' does not exist", {{"data_dir", s.data_dir}});
  if (::access(s.data_dir.c_str(), W_OK) != 0)
    bad("data directory '" + s.data_dir + "' is not writable", {{"data_dir", s.data_dir}});
}

ListenAddress parse_listen(const std::string& listen) {
  auto colon = listen.rfind(':');
  if (colon == std::string::npos || colon == 0) bad("listen must be host:port", {{"listen", listen}});
  ListenAddress a{listen.substr(0, colon), 0};
  auto port = listen.substr(colon + 1);
  auto [p, ec] = std::from_chars(port.data(), port.data() + port.size(), a.port);
  if (ec != std::errc() || p != port.data() + port.size() || a.port < 0 || a.port > 65535)
    bad("listen port must be 0..65535", {{"listen", listen}});
  return a;
}

std::string render_config(const CliConfig& c) {
  const auto& s = c.service;
  std::string joined;
  for (const auto& a : s.meta_adapters) joined += (joined.empty() ? "" : ", ") + a;
  std::ostringstream o;
  o << "listen = " << c.listen << "\n"
    << "data_dir = " << s.data_dir << "\n"
    << "lock_lease_seconds = " << s.lock_lease.count() << "\n"
    << "session_ttl_seconds = " << s.session_ttl.count() << "\n"
    << "tombstone_retention_days = " << s.tombstone_retention.count() / 24 << "\n"
    << "recent_limit = " << s.recent_limit << "\n"
    << "password_cost = "
    << (s.password_cost.ops_limit == auth::PasswordCost::minimum().ops_limit ? "minimum" : "interactive") << "\n"
    << "table_detector = " << s.table_detector << "\n"
    << "ocr = " << s.ocr.value_or("none") << "\n"
    << "meta_adapters = " << joined << "\n"
    << "tick_band = " << csv::number(s.tick_band) << "\n"
    << "ruling_merge_pt = " << csv::number(s.thresholds.ruling_merge_pt) << "\n"
    << "row_gap_factor = " << csv::number(s.thresholds.row_gap_factor) << "\n"
    << "col_valley_factor = " << csv::number(s.thresholds.col_valley_factor) << "\n"
    << "axis_tolerance_pt = " << csv::number(s.thresholds.axis_tolerance_pt) << "\n"
    << "junction_tolerance_pt = " << csv::number(s.thresholds.junction_tolerance_pt) << "\n";
  return o.str();
}

}  // namespace quarry
