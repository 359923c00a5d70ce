#include "circsim/lab/server.hpp"

#include <deque>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast.hpp>

#include "circsim/error.hpp"
#include "circsim/lab/protocol.hpp"

namespace circsim::lab {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using Json = nlohmann::ordered_json;

namespace {

using Response = http::response<http::string_body>;
using Request = http::request<http::string_body>;

Response make_response(const Request& req, http::status status, std::string body, std::string_view type) {
    Response res{status, req.version()};
    res.set(http::field::server, "circsim");
    res.set(http::field::content_type, std::string(type));
    res.keep_alive(req.keep_alive());
    res.body() = std::move(body);
    res.prepare_payload();
    return res;
}

Response not_found(const Request& req) { return make_response(req, http::status::not_found, "not found\n", "text/plain"); }

std::string_view mime_type(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
    if (ext == ".js" || ext == ".mjs") return "text/javascript";
    if (ext == ".css") return "text/css";
    if (ext == ".json") return "application/json";
    if (ext == ".svg") return "image/svg+xml";
    if (ext == ".png") return "image/png";
    if (ext == ".ico") return "image/x-icon";
    return "application/octet-stream";
}

std::vector<std::string> split_path(std::string_view target) {
    if (const auto q = target.find('?'); q != std::string_view::npos) target = target.substr(0, q);
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= target.size()) {
        const auto slash = target.find('/', start);
        const auto end = slash == std::string_view::npos ? target.size() : slash;
        if (end > start) parts.emplace_back(target.substr(start, end - start));
        if (slash == std::string_view::npos) break;
        start = slash + 1;
    }
    return parts;
}

// ---------------------------------------------------------------------------

class WsConnection : public std::enable_shared_from_this<WsConnection> {
public:
    WsConnection(tcp::socket socket, std::shared_ptr<Session> session)
        : ws_(std::move(socket)), session_(std::move(session)) {}

    ~WsConnection() {
        if (token_ != 0) session_->unsubscribe(token_);
    }

    void run(Request req) {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
    }

private:
    void on_accept(beast::error_code ec) {
        if (ec) return;
        std::weak_ptr<WsConnection> weak = shared_from_this();
        auto executor = ws_.get_executor();
        token_ = session_->subscribe([weak, executor](const ResultsFrame& frame) {
            net::post(executor, [weak, msg = results_message(frame)]() mutable {
                if (auto self = weak.lock()) self->send(std::move(msg));
            });
        });
        do_read();
    }

    void do_read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
    }

    void on_read(beast::error_code ec) {
        if (ec) return;
        const std::string text = beast::buffers_to_string(buffer_.data());
        buffer_.consume(buffer_.size());
        handle(text);
        do_read();
    }

    void handle(const std::string& text) {
        ClientMessage msg;
        try {
            msg = parse_client_message(text);
        } catch (const Error& e) {
            const auto code = e.code() == ErrorCode::ParseError ? DiagnosticCode::ParseError : DiagnosticCode::SchemaError;
            send(rejected_message(session_->revision(), {{code, "", e.what(), 0, 0}}));
            return;
        }
        if (const auto* h = std::get_if<HighlightRequest>(&msg)) {
            try {
                send(highlight_message(session_->highlight(h->terminal)));
            } catch (const Error& e) {
                send(rejected_message(session_->revision(), {{DiagnosticCode::DanglingRef, to_string(h->terminal), e.what(), 0, 0}}));
            }
            return;
        }
        const auto outcome = session_->apply(std::get<Mutation>(msg));
        if (!outcome.accepted) send(rejected_message(outcome.revision, outcome.diagnostics));
    }

    void send(std::string msg) {
        outbox_.push_back(std::move(msg));
        if (outbox_.size() == 1) do_write();
    }

    void do_write() {
        ws_.text(true);
        ws_.async_write(net::buffer(outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) return;
            self->outbox_.pop_front();
            if (!self->outbox_.empty()) self->do_write();
        });
    }

    websocket::stream<beast::tcp_stream> ws_;
    std::shared_ptr<Session> session_;
    beast::flat_buffer buffer_;
    std::deque<std::string> outbox_;
    std::uint64_t token_ = 0;
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
public:
    HttpConnection(tcp::socket socket, SessionManager& sessions, const ServerOptions& opts)
        : stream_(std::move(socket)), sessions_(sessions), opts_(opts) {}

    void run() { do_read(); }

private:
    void do_read() {
        req_ = {};
        stream_.expires_after(std::chrono::seconds(30));
        http::async_read(stream_, buffer_, req_,
                         [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
    }

    void on_read(beast::error_code ec) {
        if (ec == http::error::end_of_stream) {
            stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
            return;
        }
        if (ec) return;

        if (websocket::is_upgrade(req_)) {
            const auto parts = split_path(std::string_view(req_.target().data(), req_.target().size()));
            if (parts.size() == 3 && parts[0] == "sessions" && parts[2] == "ws") {
                try {
                    auto session = sessions_.find(parts[1]);
                    stream_.expires_never();
                    std::make_shared<WsConnection>(stream_.release_socket(), std::move(session))->run(std::move(req_));
                    return;
                } catch (const Error&) {
                }
            }
            write(not_found(req_));
            return;
        }
        write(route());
    }

    Response route() {
        const auto parts = split_path(std::string_view(req_.target().data(), req_.target().size()));
        const auto method = req_.method();
        if (method == http::verb::get && parts.size() == 1 && parts[0] == "healthz") {
            return make_response(req_, http::status::ok, "ok\n", "text/plain");
        }
        if (method == http::verb::post && parts.size() == 1 && parts[0] == "sessions") {
            const Json body{{"session_id", sessions_.create_session()}};
            return make_response(req_, http::status::ok, body.dump(), "application/json");
        }
        if (method == http::verb::get && parts.size() == 3 && parts[0] == "sessions" && parts[2] == "sketch") {
            try {
                const auto session = sessions_.find(parts[1]);
                return make_response(req_, http::status::ok, serialize_sketch(*session->sketch()), "application/json");
            } catch (const Error&) {
                return not_found(req_);
            }
        }
        if (method == http::verb::get && !opts_.static_dir.empty()) return static_file(parts);
        return not_found(req_);
    }

    Response static_file(const std::vector<std::string>& parts) {
        std::filesystem::path path = opts_.static_dir;
        for (const auto& p : parts) {
            if (p == ".." || p == ".") return not_found(req_);
            path /= p;
        }
        if (std::filesystem::is_directory(path)) path /= "index.html";
        std::ifstream in(path, std::ios::binary);
        if (!in) return not_found(req_);
        std::ostringstream body;
        body << in.rdbuf();
        return make_response(req_, http::status::ok, body.str(), mime_type(path));
    }

    void write(Response res) {
        auto shared = std::make_shared<Response>(std::move(res));
        http::async_write(stream_, *shared, [self = shared_from_this(), shared](beast::error_code ec, std::size_t) {
            if (ec) return;
            if (shared->keep_alive()) {
                self->do_read();
            } else {
                beast::error_code ignored;
                self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
            }
        });
    }

    beast::tcp_stream stream_;
    beast::flat_buffer buffer_;
    Request req_;
    SessionManager& sessions_;
    const ServerOptions& opts_;
};

}  // namespace

// ---------------------------------------------------------------------------

struct LabServer::Impl {
    explicit Impl(ServerOptions o) : opts(std::move(o)), sessions(opts.coalescing_window, opts.solve) {}

    unsigned short bind() {
        if (!bound) {
            const tcp::endpoint endpoint{net::ip::make_address(opts.address), opts.port};
            acceptor.open(endpoint.protocol());
            acceptor.set_option(net::socket_base::reuse_address(true));
            acceptor.bind(endpoint);
            acceptor.listen(net::socket_base::max_listen_connections);
            bound = true;
            do_accept();
        }
        return acceptor.local_endpoint().port();
    }

    void do_accept() {
        acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
            if (!ec) std::make_shared<HttpConnection>(std::move(socket), sessions, opts)->run();
            if (acceptor.is_open()) do_accept();
        });
    }

    ServerOptions opts;
    SessionManager sessions;
    net::io_context ioc{1};
    tcp::acceptor acceptor{ioc};
    std::thread thread;
    bool bound = false;
};

LabServer::LabServer(ServerOptions opts) : impl_(std::make_unique<Impl>(std::move(opts))) {}

LabServer::~LabServer() { stop(); }

unsigned short LabServer::start() {
    const auto port = impl_->bind();
    if (!impl_->thread.joinable()) impl_->thread = std::thread([this] { impl_->ioc.run(); });
    return port;
}

void LabServer::run() {
    impl_->bind();
    impl_->ioc.run();
}

void LabServer::stop() {
    impl_->ioc.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

SessionManager& LabServer::sessions() noexcept { return impl_->sessions; }

}  // namespace circsim::lab
