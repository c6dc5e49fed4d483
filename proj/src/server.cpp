#include "server.hpp"

#include <list>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "serialization.hpp"

namespace biotrack {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
namespace fs = std::filesystem;

namespace {

using Request = http::request<http::string_body>;
using Response = http::response<http::string_body>;

http::status status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
    case ErrorCode::kRange: return http::status::not_found;
    case ErrorCode::kBusy:
    case ErrorCode::kSequence: return http::status::conflict;
    case ErrorCode::kData:
    case ErrorCode::kIo: return http::status::unprocessable_entity;
    case ErrorCode::kInternal: return http::status::internal_server_error;
    default: return http::status::bad_request;
  }
}

Response json_response(http::status status, const nlohmann::json& body, unsigned version) {
  Response res{status, version};
  res.set(http::field::content_type, "application/json");
  res.body() = body.dump();
  return res;
}

Response error_response(ErrorCode code, const std::string& message, unsigned version) {
  return json_response(status_for(code), {{"error", {{"code", error_code_name(code)}, {"message", message}}}}, version);
}

nlohmann::json body_json(const Request& req) {
  if (req.body().empty()) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(req.body());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("request body is not JSON: ") + e.what());
  }
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    std::size_t j = path.find('/', i);
    if (j == std::string_view::npos) j = path.size();
    if (j > i) out.emplace_back(path.substr(i, j - i));
    i = j;
  }
  return out;
}

std::map<std::string, std::string> parse_query(std::string_view q) {
  std::map<std::string, std::string> out;
  std::size_t i = 0;
  while (i <= q.size()) {
    std::size_t j = q.find('&', i);
    if (j == std::string_view::npos) j = q.size();
    const std::string_view kv = q.substr(i, j - i);
    if (!kv.empty()) {
      const std::size_t eq = kv.find('=');
      out[std::string(kv.substr(0, eq))] = eq == std::string_view::npos ? "" : std::string(kv.substr(eq + 1));
    }
    i = j + 1;
  }
  return out;
}

std::int64_t parse_index(const std::string& s) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kValidation, "'" + s + "' is not a frame index");
}

std::optional<std::int64_t> opt_int(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_number_integer()) throw Error(ErrorCode::kValidation, std::string(key) + " must be an integer");
  return j.at(key).get<std::int64_t>();
}

std::string content_type(const fs::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".html") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".png") return "image/png";
  if (ext == ".svg") return "image/svg+xml";
  return "application/octet-stream";
}

}  // namespace

struct Server::Impl {
  explicit Impl(ServerOptions o) : options(std::move(o)) {}

  struct Connection {
    std::shared_ptr<tcp::socket> socket;
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };

  ServerOptions options;
  SessionManager sessions;
  asio::io_context ioc;
  std::optional<tcp::acceptor> acceptor;
  std::thread accept_thread;
  std::atomic<bool> stopping{false};
  std::atomic<bool> started{false};
  std::mutex conn_m;
  std::list<Connection> connections;
  unsigned short bound_port = 0;

  void accept_next() {
    acceptor->async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec || stopping) return;
      spawn(std::move(socket));
      accept_next();
    });
  }

  void spawn(tcp::socket socket) {
    std::lock_guard lk(conn_m);
    for (auto it = connections.begin(); it != connections.end();) {
      if (*it->done) {
        it->thread.join();
        it = connections.erase(it);
      } else {
        ++it;
      }
    }
    auto sock = std::make_shared<tcp::socket>(std::move(socket));
    auto done = std::make_shared<std::atomic<bool>>(false);
    std::thread t([this, sock, done] {
      serve_connection(*sock);
      *done = true;
    });
    connections.push_back({sock, std::move(t), done});
  }

  void serve_connection(tcp::socket& socket) {
    beast::flat_buffer buffer;
    beast::error_code ec;
    while (!stopping) {
      http::request_parser<http::string_body> parser;
      parser.body_limit(64u << 20);
      http::read(socket, buffer, parser, ec);
      if (ec) break;
      Request req = parser.release();
      if (websocket::is_upgrade(req)) {
        serve_events(socket, std::move(req));
        return;
      }
      Response res = handle(req);
      res.keep_alive(req.keep_alive());
      res.prepare_payload();
      http::write(socket, res, ec);
      if (ec || !res.keep_alive()) break;
    }
    socket.shutdown(tcp::socket::shutdown_send, ec);
  }

  void serve_events(tcp::socket& socket, Request req) {
    beast::error_code ec;
    const std::string target(req.target());
    const auto parts = split_path(std::string_view(target).substr(0, target.find('?')));
    std::shared_ptr<Session> session;
    try {
      if (parts.size() != 3 || parts[0] != "sessions" || parts[2] != "events") {
        throw Error(ErrorCode::kNotFound, "no event stream at " + target);
      }
      session = sessions.get(parts[1]);
    } catch (const Error& e) {
      Response res = error_response(e.code(), e.what(), req.version());
      res.keep_alive(false);
      res.prepare_payload();
      http::write(socket, res, ec);
      return;
    }
    auto sub = session->events().subscribe();
    session.reset();
    websocket::stream<tcp::socket&> ws(socket);
    ws.accept(req, ec);
    if (ec) return;
    ws.text(true);
    while (!stopping) {
      auto event = sub->next(std::chrono::milliseconds(200));
      if (!event) {
        if (sub->closed()) break;
        continue;
      }
      const std::string text = event->to_json().dump();
      ws.write(asio::buffer(text), ec);
      if (ec) break;
    }
    sub->close();
    ws.close(websocket::close_code::normal, ec);
  }

  Response handle(const Request& req) {
    try {
      return route(req);
    } catch (const Error& e) {
      return error_response(e.code(), e.what(), req.version());
    } catch (const std::exception& e) {
      return error_response(ErrorCode::kInternal, e.what(), req.version());
    }
  }

  Response route(const Request& req) {
    const std::string target_text(req.target());
    const std::string_view target = target_text;
    const std::size_t qpos = target.find('?');
    const auto parts = split_path(target.substr(0, qpos));
    const auto query = parse_query(qpos == std::string_view::npos ? std::string_view() : target.substr(qpos + 1));
    const auto method = req.method();
    const unsigned v = req.version();
    auto ok = [&](const nlohmann::json& j) { return json_response(http::status::ok, j, v); };
    auto bad_method = [&] {
      return error_response(ErrorCode::kUsage, std::string(req.method_string()) + " not allowed on " + std::string(target), v);
    };

    if (parts.size() == 1 && parts[0] == "trackers") {
      if (method != http::verb::get) return bad_method();
      nlohmann::json list = nlohmann::json::array();
      for (const auto& d : TrackerRegistry::builtin().list()) list.push_back(descriptor_to_json(d));
      return ok(list);
    }

    if (!parts.empty() && parts[0] == "sessions") {
      if (parts.size() == 1) {
        if (method == http::verb::post) {
          const auto body = body_json(req);
          if (!body.contains("source_dir") || !body["source_dir"].is_string()) {
            throw Error(ErrorCode::kValidation, "source_dir is required");
          }
          const std::string pattern = body.value("pattern", std::string());
          const double fps = body.value("fps", 25.0);
          auto s = sessions.create(body["source_dir"].get<std::string>(), pattern, fps);
          return json_response(http::status::created, {{"id", s->id()}}, v);
        }
        if (method == http::verb::get) return ok(sessions.ids());
        return bad_method();
      }
      const std::string& id = parts[1];
      if (parts.size() == 2) {
        if (method == http::verb::get) return ok(sessions.get(id)->info());
        if (method == http::verb::delete_) {
          if (!sessions.remove(id)) throw Error(ErrorCode::kNotFound, "unknown session '" + id + "'");
          return ok({{"deleted", id}});
        }
        return bad_method();
      }
      auto session = sessions.get(id);
      const std::string& what = parts[2];

      if (what == "frames" && parts.size() == 4) {
        if (method != http::verb::get) return bad_method();
        const auto it = query.find("overlay");
        const bool overlay = it != query.end() && it->second != "0" && it->second != "false";
        const Bytes png = session->get_frame(parse_index(parts[3]), overlay);
        Response res{http::status::ok, v};
        res.set(http::field::content_type, "image/png");
        res.body().assign(png.begin(), png.end());
        return res;
      }
      if (parts.size() == 3 && what == "tracker") {
        if (method != http::verb::put) return bad_method();
        const auto body = body_json(req);
        if (!body.contains("name") || !body["name"].is_string()) throw Error(ErrorCode::kValidation, "name is required");
        session->configure_tracker(body["name"].get<std::string>(), body.value("params", nlohmann::json::object()));
        return ok(session->info()["tracker"]);
      }
      if (parts.size() == 4 && what == "tracker" && parts[3] == "points") {
        if (method != http::verb::post) return bad_method();
        const auto body = body_json(req);
        try {
          const auto id_opt = session->add_point({body.at("x").get<double>(), body.at("y").get<double>()});
          return ok({{"id", id_opt ? nlohmann::json(*id_opt) : nlohmann::json()}, {"queued", !id_opt}});
        } catch (const nlohmann::json::exception&) {
          throw Error(ErrorCode::kValidation, "x and y are required numbers");
        }
      }
      if (parts.size() == 3 && what == "run") {
        if (method != http::verb::post) return bad_method();
        const auto body = body_json(req);
        session->run(opt_int(body, "from"), opt_int(body, "to"), opt_int(body, "pause_at"));
        return ok({{"run_state", run_state_name(session->state())}});
      }
      if (parts.size() == 3 && (what == "pause" || what == "resume" || what == "stop")) {
        if (method != http::verb::post) return bad_method();
        if (what == "pause") session->pause();
        if (what == "resume") session->resume();
        if (what == "stop") session->stop();
        return ok({{"run_state", run_state_name(session->state())}});
      }
      if (parts.size() == 3 && what == "tracks") {
        if (method != http::verb::get) return bad_method();
        return ok(session->tracks_json());
      }
      if (parts.size() == 3 && what == "edits") {
        if (method != http::verb::post) return bad_method();
        const EditCommand inverse = session->edit(edit_from_json(body_json(req)));
        return ok({{"inverse", edit_to_json(inverse)}});
      }
      if (parts.size() == 3 && what == "calibration") {
        if (method != http::verb::put) return bad_method();
        const HomographyFit fit = session->set_calibration(body_json(req));
        return ok({{"h", fit.h.entries()}, {"rms", fit.rms}, {"unit", unit_name(fit.h.unit())}});
      }
      if (parts.size() == 3 && what == "save") {
        if (method != http::verb::post) return bad_method();
        const auto body = body_json(req);
        if (!body.contains("what") || !body.contains("path")) throw Error(ErrorCode::kValidation, "what and path are required");
        session->save(parse_save_kind(body["what"].get<std::string>()), body["path"].get<std::string>());
        return ok({{"saved", body["path"]}});
      }
      throw Error(ErrorCode::kNotFound, "no route for " + std::string(target));
    }

    if (options.static_dir && method == http::verb::get) return serve_static(parts, v);
    throw Error(ErrorCode::kNotFound, "no route for " + std::string(target));
  }

  Response serve_static(const std::vector<std::string>& parts, unsigned v) {
    fs::path p = *options.static_dir;
    for (const auto& seg : parts) {
      if (seg == ".." || seg == ".") throw Error(ErrorCode::kNotFound, "bad path");
      p /= seg;
    }
    if (parts.empty() || fs::is_directory(p)) p /= "index.html";
    if (!fs::is_regular_file(p)) throw Error(ErrorCode::kNotFound, "no such file");
    const Bytes bytes = read_file(p);
    Response res{http::status::ok, v};
    res.set(http::field::content_type, content_type(p));
    res.body().assign(bytes.begin(), bytes.end());
    return res;
  }
};

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Server::~Server() { stop(); }

void Server::start() {
  if (impl_->started.exchange(true)) return;
  if (impl_->options.static_dir && !fs::is_directory(*impl_->options.static_dir)) {
    throw Error(ErrorCode::kIo, "static directory not found: " + impl_->options.static_dir->string());
  }
  try {
    const auto address = asio::ip::make_address(impl_->options.bind);
    impl_->acceptor.emplace(impl_->ioc, tcp::endpoint(address, impl_->options.port));
  } catch (const boost::system::system_error& e) {
    throw Error(ErrorCode::kIo, "cannot listen on " + impl_->options.bind + ":" +
                                    std::to_string(impl_->options.port) + ": " + e.what());
  }
  impl_->bound_port = impl_->acceptor->local_endpoint().port();
  impl_->accept_next();
  impl_->accept_thread = std::thread([this] { impl_->ioc.run(); });
}

void Server::stop() {
  if (!impl_->started || impl_->stopping.exchange(true)) return;
  asio::post(impl_->ioc, [this] {
    beast::error_code ec;
    impl_->acceptor->close(ec);
  });
  impl_->ioc.stop();
  if (impl_->accept_thread.joinable()) impl_->accept_thread.join();
  impl_->sessions.shutdown();
  std::lock_guard lk(impl_->conn_m);
  for (auto& c : impl_->connections) {
    beast::error_code ec;
    c.socket->shutdown(tcp::socket::shutdown_both, ec);
  }
  for (auto& c : impl_->connections) c.thread.join();
  impl_->connections.clear();
}

unsigned short Server::port() const { return impl_->bound_port; }

SessionManager& Server::sessions() { return impl_->sessions; }

}  // namespace biotrack
