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

#ifndef MTBR_SERVER_H_
#define MTBR_SERVER_H_

#include <memory>
#include <string>

#include "mtbr/audit.h"
#include "mtbr/error.h"
#include "mtbr/loop.h"

namespace mtbr {

// HTTP front end for the audit store.
//
//   GET  /api/queue?status=pending   item summaries (all items without status)
//   GET  /api/item/{id}              full item
//   POST /api/item/{id}/decision     {auditor_id, tags[, version]}
//   POST /api/item/{id}/override     {auditor_id, tags}
//   GET  /api/progress               iteration history and queue counts
//   POST /api/iterate                runs the next iteration (needs a loop)
//
// Errors are {"error": {"code": ..., "message": ...}} with a 4xx/5xx status.
class AuditServer {
 public:
  AuditServer(AuditStore &store, AuditLoop *loop,
              std::string static_dir = "");
  ~AuditServer();

  AuditServer(const AuditServer &) = delete;
  AuditServer &operator=(const AuditServer &) = delete;

  // Returns the bound port, or throws Error(kIo).
  int Bind(const std::string &host, int port);
  int BindToAnyPort(const std::string &host);
  // Blocks until Stop().
  void Listen();
  void Stop();
  void WaitUntilReady();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

int HttpStatusFor(ErrorCode code);

}  // namespace mtbr

#endif  // MTBR_SERVER_H_
