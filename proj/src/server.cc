// Copyright 2026 The MTBR Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mtbr/server.h"

#include <atomic>

#include <spdlog/spdlog.h>

#include "httplib.h"
#include "json.hpp"
#include "mtbr/error.h"

namespace mtbr {

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kDuplicateAuditor:
    case ErrorCode::kAlreadyResolved:
    case ErrorCode::kStaleVersion:
    case ErrorCode::kPrecondition: return 409;
    case ErrorCode::kIo:
    case ErrorCode::kNonFiniteLoss: return 500;
    default: return 400;
  }
}

namespace {

using nlohmann::json;

void Reply(httplib::Response &res, int status, const json &body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void ReplyError(httplib::Response &res, int status, std::string_view code,
                const std::string &message) {
  Reply(res, status,
        {{"error", {{"code", std::string(code)}, {"message", message}}}});
}

std::int64_t ItemId(const httplib::Request &req) {
  const std::string raw = req.matches[1];
  try {
    return std::stoll(raw);
  } catch (const std::exception &) {
    throw Error(ErrorCode::kNotFound, "item " + raw);
  }
}

struct DecisionBody {
  std::string auditor_id;
  TagSequence tags;
  std::optional<std::int64_t> version;
};

DecisionBody ParseDecision(const std::string &body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kBadConfig, std::string("malformed body: ") + e.what());
  }
  if (!j.is_object() || !j.contains("auditor_id") ||
      !j["auditor_id"].is_string() || !j.contains("tags")) {
    throw Error(ErrorCode::kBadConfig, "body needs auditor_id and tags");
  }
  DecisionBody d;
  d.auditor_id = j["auditor_id"].get<std::string>();
  d.tags = TagsFromJson(j["tags"]);
  if (j.contains("version") && !j["version"].is_null()) {
    if (!j["version"].is_number_integer()) {
      throw Error(ErrorCode::kBadConfig, "version must be an integer");
    }
    d.version = j["version"].get<std::int64_t>();
  }
  return d;
}

}  // namespace

struct AuditServer::Impl {
  AuditStore &store;
  AuditLoop *loop;
  httplib::Server http;
  std::atomic<bool> iterating{false};

  Impl(AuditStore &s, AuditLoop *l) : store(s), loop(l) {}

  template <typename F>
  httplib::Server::Handler Guard(F f) {
    return [f](const httplib::Request &req, httplib::Response &res) {
      try {
        f(req, res);
      } catch (const Error &e) {
        ReplyError(res, HttpStatusFor(e.code()), ErrorCodeName(e.code()),
                   e.what());
      } catch (const std::exception &e) {
        spdlog::error("request {} {} failed: {}", req.method, req.path,
                      e.what());
        ReplyError(res, 500, "Internal", e.what());
      }
    };
  }

  void Routes() {
    http.Get("/api/queue", Guard([this](const auto &req, auto &res) {
      std::vector<AuditItem> items;
      if (req.has_param("status")) {
        const auto name = req.get_param_value("status");
        auto status = ParseAuditStatus(name);
        if (!status) {
          throw Error(ErrorCode::kBadConfig, "unknown status '" + name + "'");
        }
        items = store.ItemsWithStatus(*status);
      } else {
        items = store.Items();
      }
      json out = json::array();
      for (const auto &it : items) out.push_back(it.SummaryJson());
      Reply(res, 200, out);
    }));

    http.Get(R"(/api/item/([^/]+))", Guard([this](const auto &req, auto &res) {
      const auto id = ItemId(req);
      auto item = store.Item(id);
      if (!item) throw Error(ErrorCode::kNotFound, "item " + std::to_string(id));
      Reply(res, 200, item->ToJson());
    }));

    http.Post(R"(/api/item/([^/]+)/decision)",
              Guard([this](const auto &req, auto &res) {
                const auto id = ItemId(req);
                auto d = ParseDecision(req.body);
                auto item = store.RecordDecision(id, d.auditor_id, d.tags,
                                                 d.version);
                Reply(res, 200, item.ToJson());
              }));

    http.Post(R"(/api/item/([^/]+)/override)",
              Guard([this](const auto &req, auto &res) {
                const auto id = ItemId(req);
                auto d = ParseDecision(req.body);
                Reply(res, 200, store.Override(id, d.auditor_id, d.tags).ToJson());
              }));

    http.Get("/api/progress", Guard([this](const auto &, auto &res) {
      json out;
      if (loop) {
        out = loop->Progress();
      } else {
        json history = json::array();
        for (const auto &r : store.Reports()) history.push_back(r.ToJson());
        out = {{"iterations", history}};
      }
      out["running"] = iterating.load();
      Reply(res, 200, out);
    }));

    http.Post("/api/iterate", Guard([this](const auto &, auto &res) {
      if (!loop) {
        throw Error(ErrorCode::kPrecondition, "server started without a dataset");
      }
      bool expected = false;
      if (!iterating.compare_exchange_strong(expected, true)) {
        throw Error(ErrorCode::kPrecondition, "an iteration is already running");
      }
      try {
        auto out = loop->Iterate();
        iterating = false;
        Reply(res, 200,
              {{"report", out.report.ToJson()},
               {"enqueued", out.enqueued.size()}});
      } catch (...) {
        iterating = false;
        throw;
      }
    }));
  }
};

AuditServer::AuditServer(AuditStore &store, AuditLoop *loop,
                         std::string static_dir)
    : impl_(std::make_unique<Impl>(store, loop)) {
  impl_->Routes();
  if (!static_dir.empty() && !impl_->http.set_mount_point("/", static_dir)) {
    throw Error(ErrorCode::kIo, "static directory not found: " + static_dir);
  }
}

AuditServer::~AuditServer() { Stop(); }

int AuditServer::Bind(const std::string &host, int port) {
  if (!impl_->http.bind_to_port(host, port)) {
    throw Error(ErrorCode::kIo,
                "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

int AuditServer::BindToAnyPort(const std::string &host) {
  const int port = impl_->http.bind_to_any_port(host);
  if (port < 0) throw Error(ErrorCode::kIo, "cannot bind " + host);
  return port;
}

void AuditServer::Listen() { impl_->http.listen_after_bind(); }

void AuditServer::Stop() {
  if (impl_->http.is_running()) impl_->http.stop();
}

void AuditServer::WaitUntilReady() { impl_->http.wait_until_ready(); }

}  // namespace mtbr
