#pragma once

#include <string>
#include <string_view>

#include "quarry/service.hpp"

namespace quarry {

/// Settings for `quarry serve`. Text form is one `key = value` per line,
/// `#` starts a comment:
///
///   listen = 127.0.0.1:8080
///   data_dir = /var/lib/quarry
///   lock_lease_seconds = 300
///   session_ttl_seconds = 86400
///   tombstone_retention_days = 30
///   recent_limit = 20
///   password_cost = interactive        # or minimum
///   table_detector = ruling-lines      # registered detector id
///   ocr = embedded-text                # or none
///   meta_adapters = layout, pdfinfo    # priority order
///   tick_band = 0.08
///   ruling_merge_pt = 1.5
///   row_gap_factor = 1.5
///   col_valley_factor = 1.0
///   axis_tolerance_pt = 0.5
///   junction_tolerance_pt = 2.0
struct CliConfig {
  std::string listen = "127.0.0.1:8080";
  ServiceConfig service;
};

struct ListenAddress {
  std::string host;
  int port = 0;
};

/// BadConfig on unknown keys or unparsable values. Values override `base`.
CliConfig parse_config(std::string_view text, CliConfig base = {});
CliConfig load_config(const std::string& path, CliConfig base = {});

/// Thresholds positive, adapters known, data directory writable.
void validate_config(const CliConfig& config);

ListenAddress parse_listen(const std::string& listen);

std::string render_config(const CliConfig& config);

}  // namespace quarry
