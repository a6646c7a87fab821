#include "hubmesh/netio/wire.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <memory>
#include <optional>

#include "hubmesh/netio/jsonio.hpp"
#include "hubmesh/netio/log.hpp"

namespace hubmesh::netio {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

int remaining_ms(Clock::time_point deadline)
{
    const auto left =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    return left < 0 ? 0 : static_cast<int>(left);
}

void wait_readable(int fd, Clock::time_point deadline, const char* what)
{
    for (;;) {
        struct pollfd pfd = {fd, POLLIN, 0};
        const int rc = ::poll(&pfd, 1, remaining_ms(deadline));
        if (rc > 0) return;
        if (rc == 0) throw WireError(std::string(what) + ": timeout");
        if (errno != EINTR)
            throw WireError(std::string(what) + ": poll failed: " + std::strerror(errno));
    }
}

void read_exact(int fd, unsigned char* buf, std::size_t n, Clock::time_point deadline,
                const char* what)
{
    std::size_t got = 0;
    while (got < n) {
        wait_readable(fd, deadline, what);
        const ssize_t rc = ::recv(fd, buf + got, n - got, 0);
        if (rc > 0) {
            got += static_cast<std::size_t>(rc);
        } else if (rc == 0) {
            throw WireError(std::string(what) + ": connection closed");
        } else if (errno != EINTR && errno != EAGAIN) {
            throw WireError(std::string(what) + ": recv failed: " + std::strerror(errno));
        }
    }
}

void write_all(int fd, const unsigned char* buf, std::size_t n, const char* what)
{
    std::size_t sent = 0;
    while (sent < n) {
        const ssize_t rc = ::send(fd, buf + sent, n - sent, MSG_NOSIGNAL);
        if (rc >= 0) {
            sent += static_cast<std::size_t>(rc);
        } else if (errno != EINTR) {
            throw WireError(std::string(what) + ": send failed: " + std::strerror(errno));
        }
    }
}

void set_nodelay(int fd)
{
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

json stop_message(const std::string& reason)
{
    return json{{"type", "stop"}, {"reason", reason}};
}

admm::Phase phase_from_string(const std::string& name)
{
    if (name == "polish") return admm::Phase::Polish;
    return admm::Phase::Iterate;
}

/// Consensus participant living in another process. One socket per hub;
/// rounds are a Params/LocalResult exchange on that socket.
class RemoteHubWorker : public admm::HubWorker {
public:
    RemoteHubWorker(Socket sock, std::string hub_id, int links, int round_timeout_ms)
        : sock_(std::move(sock)),
          hub_id_(std::move(hub_id)),
          links_(links),
          timeout_ms_(round_timeout_ms)
    {
    }

    const std::string& hub_id() const override { return hub_id_; }
    int link_count() const override { return links_; }

    admm::LocalReply round(const admm::RoundParams& p) override
    {
        json msg = {{"type", "params"},   {"iter", p.iter}, {"phase", admm::to_string(p.phase)},
                    {"rho", p.rho},       {"z", p.z},       {"lambda", p.lambda}};
        send_frame(sock_, msg);
        for (;;) {
            const json r = recv_frame(sock_, timeout_ms_);
            const std::string type = r.value("type", "");
            if (type != "local_result") {
                log_debug("hub " + hub_id_ + ": ignoring frame type '" + type + "'");
                continue;
            }
            const int iter = r.value("iter", -1);
            if (iter < p.iter) {
                log_debug("hub " + hub_id_ + ": dropping stale result for iter " +
                          std::to_string(iter));
                continue;
            }
            if (iter > p.iter)
                throw WireError("hub " + hub_id_ + ": result for future iter " +
                                std::to_string(iter));
            admm::LocalReply reply;
            reply.iter = iter;
            reply.v = r.at("v").get<std::vector<double>>();
            reply.cost = r.at("cost").get<double>();
            reply.status = qp::status_from_name(r.at("status").get<std::string>());
            if (r.contains("flows"))
                reply.flows = r.at("flows").get<std::vector<dispatch::HubStepFlows>>();
            return reply;
        }
    }

    void send_best_effort(const json& msg)
    {
        try {
            send_frame(sock_, msg);
        } catch (const WireError&) {
        }
    }

private:
    Socket sock_;
    std::string hub_id_;
    int links_ = 0;
    int timeout_ms_ = 60'000;
};

}  // namespace

Socket::~Socket()
{
    close();
}

Socket::Socket(Socket&& other) noexcept : fd_(other.fd_)
{
    other.fd_ = -1;
}

Socket& Socket::operator=(Socket&& other) noexcept
{
    if (this != &other) {
        close();
        fd_ = other.fd_;
        other.fd_ = -1;
    }
    return *this;
}

void Socket::close()
{
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

Socket tcp_connect(const std::string& host, int port, int timeout_ms)
{
    struct addrinfo hints = {};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    struct addrinfo* res = nullptr;
    const std::string service = std::to_string(port);
    const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res);
    if (rc != 0)
        throw WireError("connect: cannot resolve " + host + ": " + gai_strerror(rc));
    std::unique_ptr<struct addrinfo, decltype(&::freeaddrinfo)> guard(res, &::freeaddrinfo);

    std::string last_error = "no addresses";
    for (struct addrinfo* ai = res; ai; ai = ai->ai_next) {
        const int fd = ::socket(ai->ai_family, SOCK_STREAM | SOCK_NONBLOCK, 0);
        if (fd < 0) {
            last_error = std::strerror(errno);
            continue;
        }
        Socket sock(fd);
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) != 0 && errno != EINPROGRESS) {
            last_error = std::strerror(errno);
            continue;
        }
        struct pollfd pfd = {fd, POLLOUT, 0};
        const int prc = ::poll(&pfd, 1, timeout_ms);
        if (prc <= 0) {
            last_error = prc == 0 ? "timeout" : std::strerror(errno);
            continue;
        }
        int err = 0;
        socklen_t len = sizeof(err);
        ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
        if (err != 0) {
            last_error = std::strerror(err);
            continue;
        }
        // connected; drop non-blocking, frames use poll-based deadlines anyway
        const int flags = ::fcntl(fd, F_GETFL, 0);
        ::fcntl(fd, F_SETFL, flags & ~O_NONBLOCK);
        set_nodelay(fd);
        return sock;
    }
    throw WireError("connect to " + host + ":" + service + " failed: " + last_error);
}

Listener::Listener(const std::string& bind_addr, int port)
{
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw WireError(std::string("listen: socket failed: ") + std::strerror(errno));
    sock_ = Socket(fd);
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

    struct sockaddr_in addr = {};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(port));
    if (::inet_pton(AF_INET, bind_addr.c_str(), &addr.sin_addr) != 1)
        throw WireError("listen: bad bind address '" + bind_addr + "'");
    if (::bind(fd, reinterpret_cast<struct sockaddr*>(&addr), sizeof(addr)) != 0)
        throw WireError("listen: bind to " + bind_addr + ":" + std::to_string(port) +
                        " failed: " + std::strerror(errno));
    if (::listen(fd, 16) != 0)
        throw WireError(std::string("listen failed: ") + std::strerror(errno));

    socklen_t len = sizeof(addr);
    ::getsockname(fd, reinterpret_cast<struct sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

Socket Listener::accept(int timeout_ms)
{
    const auto deadline = Clock::now() + std::chrono::milliseconds(timeout_ms);
    wait_readable(sock_.fd(), deadline, "accept");
    const int fd = ::accept(sock_.fd(), nullptr, nullptr);
    if (fd < 0) throw WireError(std::string("accept failed: ") + std::strerror(errno));
    set_nodelay(fd);
    return Socket(fd);
}

void send_frame(const Socket& sock, const json& msg)
{
    const std::string body = msg.dump();
    if (body.size() > kMaxFrameBytes)
        throw WireError("frame of " + std::to_string(body.size()) + " bytes exceeds the " +
                        std::to_string(kMaxFrameBytes) + " byte limit");
    const auto n = static_cast<std::uint32_t>(body.size());
    unsigned char hdr[4] = {static_cast<unsigned char>(n >> 24),
                            static_cast<unsigned char>(n >> 16),
                            static_cast<unsigned char>(n >> 8), static_cast<unsigned char>(n)};
    write_all(sock.fd(), hdr, sizeof(hdr), "send");
    write_all(sock.fd(), reinterpret_cast<const unsigned char*>(body.data()), body.size(),
              "send");
}

json recv_frame(const Socket& sock, int timeout_ms)
{
    const auto deadline = Clock::now() + std::chrono::milliseconds(timeout_ms);
    unsigned char hdr[4];
    read_exact(sock.fd(), hdr, sizeof(hdr), deadline, "recv");
    const std::uint32_t n = (static_cast<std::uint32_t>(hdr[0]) << 24) |
                            (static_cast<std::uint32_t>(hdr[1]) << 16) |
                            (static_cast<std::uint32_t>(hdr[2]) << 8) |
                            static_cast<std::uint32_t>(hdr[3]);
    if (n > kMaxFrameBytes)
        throw WireError("frame of " + std::to_string(n) + " bytes exceeds the " +
                        std::to_string(kMaxFrameBytes) + " byte limit");
    std::string body(n, '\0');
    read_exact(sock.fd(), reinterpret_cast<unsigned char*>(body.data()), n, deadline, "recv");
    try {
        return json::parse(body);
    } catch (const json::parse_error& e) {
        throw WireError(std::string("bad frame: ") + e.what());
    }
}

admm::AdmmResult coordinator_serve(const model::Network& net, const horizon::TimeGrid& grid,
                                   const admm::AdmmConfig& cfg, const ServeOptions& opts)
{
    Listener listener(opts.bind, opts.port);
    log_info("coordinator listening on " + opts.bind + ":" + std::to_string(listener.port()));
    if (opts.on_listening) opts.on_listening(listener.port());

    const std::size_t H = net.hubs.size();
    std::vector<std::unique_ptr<RemoteHubWorker>> workers(H);
    std::size_t connected = 0;
    while (connected < H) {
        Socket sock = listener.accept(opts.accept_timeout_ms);
        json hello;
        try {
            hello = recv_frame(sock, opts.accept_timeout_ms);
        } catch (const WireError& e) {
            log_info(std::string("dropping client: ") + e.what());
            continue;
        }
        if (hello.value("type", "") != "hello") {
            send_frame(sock, stop_message("expected hello"));
            continue;
        }
        const std::string hub_id = hello.value("hub_id", "");
        const int h = net.hub_index(hub_id);
        if (h < 0) {
            log_info("rejecting agent for unknown hub '" + hub_id + "'");
            send_frame(sock, stop_message("unknown hub '" + hub_id + "'"));
            continue;
        }
        if (workers[static_cast<std::size_t>(h)]) {
            log_info("rejecting duplicate agent for hub " + hub_id);
            send_frame(sock, stop_message("duplicate hub '" + hub_id + "'"));
            continue;
        }
        const auto views = admm::link_views(net, h);
        const int links = hello.value("links", -1);
        const auto steps = hello.value("steps", std::size_t{0});
        if (links != static_cast<int>(views.size()) || steps != grid.size()) {
            send_frame(sock, stop_message("topology mismatch for hub " + hub_id));
            continue;
        }
        workers[static_cast<std::size_t>(h)] = std::make_unique<RemoteHubWorker>(
            std::move(sock), hub_id, links, opts.round_timeout_ms);
        ++connected;
        log_info("agent " + hub_id + " connected (" + std::to_string(connected) + "/" +
                 std::to_string(H) + ")");
    }

    std::vector<admm::HubWorker*> ptrs;
    ptrs.reserve(H);
    for (auto& w : workers) ptrs.push_back(w.get());
    try {
        auto res = admm::run(net, grid, cfg, ptrs, nullptr);
        const json done = {{"type", "solution"},
                           {"iterations", res.trace.iterations},
                           {"converged", res.trace.converged},
                           {"cost_chf", res.solution.cost.total()}};
        for (auto& w : workers) w->send_best_effort(done);
        return res;
    } catch (const std::exception& e) {
        log_info(std::string("aborting run: ") + e.what());
        for (auto& w : workers) w->send_best_effort(stop_message(e.what()));
        throw WireError(std::string("coordinator aborted: ") + e.what());
    }
}

void agent_serve(const model::Hub& hub, const std::vector<dispatch::HubLinkView>& links,
                 const horizon::TimeGrid& grid, const AgentOptions& opts,
                 const qp::SolverSettings& qp_settings)
{
    Socket sock = tcp_connect(opts.host, opts.port, opts.connect_timeout_ms);
    send_frame(sock, json{{"type", "hello"},
                          {"hub_id", hub.id},
                          {"links", links.size()},
                          {"steps", grid.size()}});
    log_info("agent " + hub.id + " connected to " + opts.host + ":" +
             std::to_string(opts.port));

    std::optional<admm::LocalHubWorker> worker;
    int last_iter = 0;
    for (;;) {
        const json msg = recv_frame(sock, opts.round_timeout_ms);
        const std::string type = msg.value("type", "");
        if (type == "params") {
            admm::RoundParams p;
            p.iter = msg.at("iter").get<int>();
            if (p.iter <= last_iter) {
                log_debug("agent " + hub.id + ": ignoring stale params for iter " +
                          std::to_string(p.iter));
                continue;
            }
            p.phase = phase_from_string(msg.value("phase", "iterate"));
            p.rho = msg.at("rho").get<double>();
            p.z = msg.at("z").get<std::vector<double>>();
            p.lambda = msg.at("lambda").get<std::vector<double>>();
            if (!worker) worker.emplace(hub, links, grid, p.rho, qp_settings);
            const auto reply = worker->round(p);
            last_iter = p.iter;
            json r = {{"type", "local_result"},
                      {"iter", reply.iter},
                      {"v", reply.v},
                      {"cost", reply.cost},
                      {"status", qp::status_name(reply.status)}};
            if (!reply.flows.empty()) r["flows"] = reply.flows;
            send_frame(sock, r);
        } else if (type == "solution") {
            log_info("agent " + hub.id + ": run finished after " +
                     std::to_string(msg.value("iterations", 0)) + " iterations");
            return;
        } else if (type == "stop") {
            throw WireError("agent " + hub.id + " stopped: " + msg.value("reason", "?"));
        } else {
            log_debug("agent " + hub.id + ": ignoring frame type '" + type + "'");
        }
    }
}

}  // namespace hubmesh::netio
