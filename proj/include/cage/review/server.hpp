#pragma once

#include <memory>
#include <string>

#include "cage/review/queue.hpp"

namespace httplib {
class Server;
}

namespace cage::review {

// HTTP front end of a ReviewQueue:
//   GET  /healthz
//   GET  /queue/next        (X-Reviewer-Id header) 200 item | 204 empty
//   POST /decision          ReviewDecision JSON; reviewer from the header or body
//   GET  /stats
//   GET  /jobs
//   GET  /pair/<id>         item, state, lease and image URLs
//   GET  /pair/<id>/prog.png, /pair/<id>/candidate.png
// Errors are {"error": message} with 400 (validation), 404 (unknown pair),
// 409 (lease or conflict).
class ReviewServer {
 public:
  explicit ReviewServer(ReviewQueue& queue);
  ~ReviewServer();
  ReviewServer(const ReviewServer&) = delete;
  ReviewServer& operator=(const ReviewServer&) = delete;

  // Blocks until stop(). Returns false when the address cannot be bound.
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port and returns it (or -1); serve with listen_after_bind().
  int bind_any(const std::string& host);
  bool listen_after_bind();
  void wait_until_ready() const;
  void stop();

 private:
  ReviewQueue& queue_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace cage::review
