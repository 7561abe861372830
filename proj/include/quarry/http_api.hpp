#pragma once

#include "quarry/error.hpp"
#include "quarry/service.hpp"

namespace httplib {
class Server;
}

namespace quarry {

int http_status(ErrorCode code);

/// Registers every endpoint on `server`. Errors are sent as {code, message, details}.
void mount_api(httplib::Server& server, Service& service);

}  // namespace quarry
