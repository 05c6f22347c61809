#ifndef GENIC_ANNOTATION_SERVICE_H_
#define GENIC_ANNOTATION_SERVICE_H_

#include <memory>
#include <string>

#include "genic/annotations.h"

namespace httplib {
class Server;
}

namespace genic {

// JSON endpoints over an AnnotationStore:
//   GET /documents                     ids and versions
//   GET /documents/{id}                text, frames, version
//   PUT /documents/{id}/annotations    {"version": n, "frames": [...]}
//   GET /schema                        vocabularies, tags, violation codes
// PUT answers 200 with the new version, 400 for a malformed body, 404,
// 409 on a stale version and 422 with the violation list.
class AnnotationServer {
 public:
  // `static_dir`, if not empty, is served under "/".
  explicit AnnotationServer(AnnotationStore *store, std::string static_dir = "");
  ~AnnotationServer();

  // Port 0 picks a free port. Returns the bound port; throws Error on
  // failure.
  int Bind(const std::string &host, int port);
  // Blocks until Stop().
  void Listen();
  void Stop();

 private:
  AnnotationStore *store_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace genic

#endif  // GENIC_ANNOTATION_SERVICE_H_
