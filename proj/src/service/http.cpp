#include "signdict/service/http.hpp"

#include <httplib.h>

#include <csignal>
#include <ostream>

#include "signdict/error.hpp"
#include "signdict/text.hpp"

namespace signdict::service {

namespace fs = std::filesystem;

const char* const kPrivacyPage = R"(<!doctype html>
<html lang="en">
<head><meta charset="utf-8"><title>Sign dictionary: privacy</title></head>
<body>
<h1>Privacy</h1>
<p>Recordings you submit are used only to look up the sign you performed.
The recording is discarded as soon as body and hand landmarks have been
extracted from it. Only the landmark sequence and the resulting predictions
are kept, so results can be shown again.</p>
<p>No account is needed and recordings are never used for analytics.</p>
</body>
</html>
)";

namespace {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::not_found: return 404;
    case ErrorCode::conflict: return 409;
    case ErrorCode::parse:
    case ErrorCode::invalid_argument:
    case ErrorCode::unknown_token: return 400;
    default: return 500;
  }
}

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, status, {{"error", code}, {"message", message}});
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), to_string(e.code()), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

std::optional<double> number_field(const httplib::Request& req, const std::string& name) {
  std::string text;
  if (req.has_file(name)) {
    text = req.get_file_value(name).content;
  } else if (req.has_param(name)) {
    text = req.get_param_value(name);
  } else {
    return std::nullopt;
  }
  const auto t = trim(text);
  if (t.empty()) return std::nullopt;
  double v = 0.0;
  if (!parse_double(t, v)) throw Error(ErrorCode::invalid_argument, name + " is not a number");
  return v;
}

Upload read_upload(const httplib::Request& req) {
  Upload up;
  if (req.is_multipart_form_data()) {
    const bool media = req.has_file("media");
    const bool pose = req.has_file("pose");
    if (media == pose) throw Error(ErrorCode::invalid_argument, "send exactly one of the 'media' or 'pose' parts");
    up.bytes = req.get_file_value(media ? "media" : "pose").content;
  } else {
    up.bytes = req.body;
  }
  const auto start = number_field(req, "trim_start_s");
  const auto end = number_field(req, "trim_end_s");
  if (start.has_value() != end.has_value()) {
    throw Error(ErrorCode::invalid_argument, "trim_start_s and trim_end_s go together");
  }
  if (start) up.trim = TrimBounds{*start, *end};
  return up;
}

std::string param(const httplib::Request& req, const char* name) {
  return req.has_param(name) ? req.get_param_value(name) : std::string();
}

nlohmann::json vocabulary_json(const VocabularyCatalog& catalog) {
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const auto& e = catalog.entry(i);
    entries.push_back({{"class_index", i},
                       {"rendition_id", e.rendition_id},
                       {"gloss", e.gloss},
                       {"movement", to_string(e.metadata.movement)},
                       {"hands", to_string(e.metadata.hands)},
                       {"location", to_string(e.metadata.location)},
                       {"handshape", e.metadata.handshape ? nlohmann::json(*e.metadata.handshape) : nullptr},
                       {"example_media", e.example_media}});
  }
  return {{"fingerprint", fingerprint_hex(catalog.fingerprint())},
          {"classes", catalog.size()},
          {"glosses", catalog.unique_gloss_count()},
          {"entries", entries}};
}

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

void install_routes(httplib::Server& server, SubmissionService& service, const fs::path& web_root) {
  server.set_payload_max_length(service.max_upload_bytes());
  if (!web_root.empty() && fs::is_directory(web_root)) server.set_mount_point("/", web_root.string());

  const auto privacy = [](const httplib::Request&, httplib::Response& res) {
    res.set_content(kPrivacyPage, "text/html; charset=utf-8");
  };
  server.Get("/", privacy);
  server.Get("/privacy", privacy);
  server.Get("/api/v1/health", guarded([&service](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200,
              {{"ok", true},
               {"model_fingerprint", fingerprint_hex(service.model().fingerprint())},
               {"classes", service.catalog().size()}});
  }));
  server.Get("/api/v1/vocabulary", guarded([&service](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, vocabulary_json(service.catalog()));
  }));
  server.Post("/api/v1/submissions", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    if (req.body.size() > service.max_upload_bytes()) {
      send_error(res, 413, "too_large", "upload exceeds " + std::to_string(service.max_upload_bytes()) + " bytes");
      return;
    }
    const std::string id = service.create(read_upload(req));
    send_json(res, 201, {{"id", id}});
  }));
  server.Get("/api/v1/submissions/:id/status", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, service.status(req.path_params.at("id")));
  }));
  server.Get("/api/v1/submissions/:id/results", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.path_params.at("id");
    const std::string view_token = param(req, "view");
    const ViewKind kind = view_token.empty() ? ViewKind::compact : parse_view_kind(view_token);
    const FilterCriteria filter = kind == ViewKind::compact
                                      ? FilterCriteria{}
                                      : parse_filter(param(req, "movement"), param(req, "hands"),
                                                     param(req, "location"), param(req, "handshape"));
    std::size_t matches = 0;
    const ResultView view = service.results(id, kind, filter, &matches);
    send_json(res, 200, view_json(id, view, filter, matches));
  }));
  server.Delete("/api/v1/submissions/:id/media", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.path_params.at("id");
    service.purge_media(id);
    send_json(res, 200, {{"id", id}, {"media_purged", true}});
  }));
}

int run_server(const ServiceConfig& config, std::ostream& log) {
  if (config.model_path.empty()) {
    log << "error: no model given (MODEL_PATH or --model)\n";
    return 1;
  }
  try {
    auto model = std::make_shared<const recognizer::TrainedModel>(recognizer::load_model(config.model_path));
    const VocabularyCatalog active = config.catalog_path ? load_catalog(*config.catalog_path) : model->catalog();
    auto latency = config.latency_calibration_path
                       ? std::make_shared<LatencyEstimator>(
                             eval::latency_fit(eval::load_latency_observations(*config.latency_calibration_path)))
                       : std::make_shared<LatencyEstimator>();
    SubmissionService::Options opts;
    opts.retain_media = config.retain_media;
    opts.max_upload_bytes = config.max_upload_bytes;
    opts.workers = config.workers;
    opts.thresholds = config.thresholds;
    SubmissionService service(model, active, std::make_shared<AutoPoseEstimator>(), latency, config.storage_dir,
                              opts);
    httplib::Server server;
    install_routes(server, service, config.web_root);
    int port = config.port;
    if (port == 0) {
      port = server.bind_to_any_port(config.host);
    } else if (!server.bind_to_port(config.host, port)) {
      port = -1;
    }
    if (port < 0) {
      log << "error: cannot listen on " << config.host << ":" << config.port << "\n";
      return 1;
    }
    log << "listening on http://" << config.host << ":" << port << " (model " << fingerprint_hex(model->fingerprint())
        << ", " << model->catalog().size() << " classes, retain media " << (config.retain_media ? "on" : "off")
        << ")" << std::endl;
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.listen_after_bind();
    g_server = nullptr;
    return 0;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace signdict::service
