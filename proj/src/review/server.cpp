#include "cage/review/server.hpp"

#include <httplib.h>

#include "cage/codec.hpp"

namespace cage::review {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

// Maps library exceptions onto HTTP statuses.
template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const NotFoundError& e) {
    send_error(res, 404, e.what());
  } catch (const LeaseError& e) {
    send_error(res, 409, e.what());
  } catch (const ConflictError& e) {
    send_error(res, 409, e.what());
  } catch (const ValidationError& e) {
    send_error(res, 400, e.what());
  } catch (const ParseError& e) {
    send_error(res, 400, e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

}  // namespace

ReviewServer::ReviewServer(ReviewQueue& queue) : queue_(queue), server_(std::make_unique<httplib::Server>()) {
  auto& s = *server_;
  s.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                         {"Access-Control-Allow-Headers", "Content-Type, X-Reviewer-Id"},
                         {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  s.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  s.Get("/healthz", [](const httplib::Request&, httplib::Response& res) { send_json(res, 200, {{"status", "ok"}}); });

  s.Get("/queue/next", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string reviewer = req.get_header_value("X-Reviewer-Id");
      if (reviewer.empty()) throw ValidationError("missing X-Reviewer-Id header");
      const auto item = queue_.next_candidate(reviewer);
      if (!item) {
        res.status = 204;
        return;
      }
      json body = to_json(*item);
      if (const auto l = queue_.lease(item->pair_id)) {
        body["lease_expires_ms"] =
            std::chrono::duration_cast<std::chrono::milliseconds>(l->expires.time_since_epoch()).count();
      }
      send_json(res, 200, body);
    });
  });

  s.Post("/decision", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      json body = json::parse(req.body, nullptr, false);
      if (body.is_discarded() || !body.is_object()) throw ValidationError("decision body must be a JSON object");
      ReviewDecision d = decision_from_json(body);
      const std::string header = req.get_header_value("X-Reviewer-Id");
      if (!header.empty()) d.reviewer = header;
      if (d.reviewer.empty()) throw ValidationError("missing reviewer id");
      const auto job = queue_.submit_decision(d);
      json out{{"pair_id", d.pair_id}, {"state", to_string(*queue_.state(d.pair_id))}};
      out["job"] = job ? to_json(*job) : json(nullptr);
      send_json(res, 200, out);
    });
  });

  s.Get("/stats", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, to_json(queue_.stats())); });
  });

  s.Get("/jobs", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      json jobs = json::array();
      for (const auto& j : queue_.jobs()) jobs.push_back(to_json(j));
      send_json(res, 200, {{"jobs", jobs}});
    });
  });

  s.Get(R"(/pair/([^/]+)/(prog|candidate)\.png)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto item = queue_.find(req.matches[1]);
      if (!item) throw NotFoundError("unknown pair id: " + std::string(req.matches[1]));
      const auto& path = req.matches[2] == "prog" ? item->prog_path : item->candidate_path;
      const auto bytes = codec::read_file(path.string());
      res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
    });
  });

  s.Get(R"(/pair/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string id = req.matches[1];
      const auto item = queue_.find(id);
      if (!item) throw NotFoundError("unknown pair id: " + id);
      json body = to_json(*item);
      body["state"] = to_string(*queue_.state(id));
      body["images"] = {{"prog", "/pair/" + id + "/prog.png"}, {"candidate", "/pair/" + id + "/candidate.png"}};
      const auto l = queue_.lease(id);
      body["leased_by"] = l ? json(l->reviewer) : json(nullptr);
      send_json(res, 200, body);
    });
  });
}

ReviewServer::~ReviewServer() { stop(); }

bool ReviewServer::listen(const std::string& host, int port) { return server_->listen(host, port); }

int ReviewServer::bind_any(const std::string& host) { return server_->bind_to_any_port(host); }

bool ReviewServer::listen_after_bind() { return server_->listen_after_bind(); }

void ReviewServer::wait_until_ready() const { server_->wait_until_ready(); }

void ReviewServer::stop() {
  if (server_) server_->stop();
}

}  // namespace cage::review
