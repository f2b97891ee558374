#pragma once

#include <filesystem>
#include <iosfwd>

#include "signdict/service/service.hpp"

namespace httplib {
class Server;
}

namespace signdict::service {

// Shown at "/" when the web root has no index.html.
extern const char* const kPrivacyPage;

// API under /api/v1 plus the static web root (if present) at "/".
void install_routes(httplib::Server& server, SubmissionService& service, const std::filesystem::path& web_root);

// Loads everything named in `config` and serves until SIGINT/SIGTERM.
// Returns the process exit code.
int run_server(const ServiceConfig& config, std::ostream& log);

}  // namespace signdict::service
