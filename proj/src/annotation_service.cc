#include "genic/annotation_service.h"

#include "httplib.h"

namespace genic {

namespace {

void Reply(httplib::Response &res, int status, const nlohmann::json &body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

nlohmann::json SchemaJson(const AnnotationSchema &schema) {
  nlohmann::json out = schema.raw;
  nlohmann::json tags = nlohmann::json::array();
  tags.push_back({{"tag", schema.frame_tag}, {"kind", "frame"}});
  for (const RoleSpec &role : schema.roles) {
    tags.push_back({{"tag", role.outer_tag},
                    {"kind", "outer"},
                    {"role", SpanRoleName(role.role)},
                    {"indexed", role.indexed},
                    {"parent", schema.frame_tag}});
    tags.push_back({{"tag", role.inner_tag},
                    {"kind", "inner"},
                    {"role", SpanRoleName(role.role)},
                    {"indexed", role.indexed},
                    {"parent", role.outer_tag}});
  }
  out["tags"] = tags;
  out["violation_codes"] = ViolationCodes();
  return out;
}

}  // namespace

AnnotationServer::AnnotationServer(AnnotationStore *store,
                                   std::string static_dir)
    : store_(store), server_(std::make_unique<httplib::Server>()) {
  httplib::Server &s = *server_;
  s.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                         {"Access-Control-Allow-Methods", "GET, PUT, OPTIONS"},
                         {"Access-Control-Allow-Headers", "Content-Type"}});
  s.Options(R"(.*)", [](const httplib::Request &, httplib::Response &res) {
    res.status = 204;
  });

  s.Get("/documents", [this](const httplib::Request &, httplib::Response &res) {
    nlohmann::json docs = nlohmann::json::array();
    for (const auto &e : store_->List()) {
      docs.push_back({{"id", e.id}, {"version", e.version}});
    }
    Reply(res, 200, {{"documents", docs}});
  });

  s.Get(R"(/documents/([^/]+))",
        [this](const httplib::Request &req, httplib::Response &res) {
          const auto doc = store_->Get(req.matches[1]);
          if (!doc) {
            Reply(res, 404, {{"error", "unknown document"}});
            return;
          }
          Reply(res, 200, DocumentToJson(*doc));
        });

  s.Put(R"(/documents/([^/]+)/annotations)",
        [this](const httplib::Request &req, httplib::Response &res) {
          const std::string id = req.matches[1];
          long version = 0;
          std::vector<InteractionFrame> frames;
          try {
            const auto body = nlohmann::json::parse(req.body);
            version = body.at("version").get<long>();
            for (const auto &f : body.at("frames")) {
              frames.push_back(FrameFromJson(f));
            }
          } catch (const std::exception &e) {
            Reply(res, 400, {{"error", std::string("bad request: ") + e.what()}});
            return;
          }
          const auto result = store_->Save(id, frames, version);
          switch (result.status) {
            case AnnotationStore::SaveStatus::kSaved:
              Reply(res, 200, {{"id", id}, {"version", result.version}});
              return;
            case AnnotationStore::SaveStatus::kNotFound:
              Reply(res, 404, {{"error", "unknown document"}});
              return;
            case AnnotationStore::SaveStatus::kVersionConflict:
              Reply(res, 409,
                    {{"error", "version conflict"}, {"version", result.version}});
              return;
            case AnnotationStore::SaveStatus::kInvalid: {
              nlohmann::json v = nlohmann::json::array();
              for (const Violation &x : result.violations) {
                v.push_back(ViolationToJson(x));
              }
              Reply(res, 422,
                    {{"error", "invalid annotations"}, {"violations", v}});
              return;
            }
          }
        });

  s.Get("/schema", [this](const httplib::Request &, httplib::Response &res) {
    Reply(res, 200, SchemaJson(store_->schema()));
  });

  s.set_exception_handler([](const httplib::Request &, httplib::Response &res,
                             std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception &e) {
      what = e.what();
    } catch (...) {
    }
    Reply(res, 500, {{"error", what}});
  });

  if (!static_dir.empty() && !s.set_mount_point("/", static_dir)) {
    throw Error("cannot serve static directory " + static_dir);
  }
}

AnnotationServer::~AnnotationServer() { Stop(); }

int AnnotationServer::Bind(const std::string &host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host)
                              : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error("cannot bind " + host + ":" + std::to_string(port));
  }
  return bound;
}

void AnnotationServer::Listen() { server_->listen_after_bind(); }

void AnnotationServer::Stop() {
  if (server_) server_->stop();
}

}  // namespace genic
