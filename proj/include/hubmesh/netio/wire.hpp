#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hubmesh/admm.hpp"
#include "json.hpp"

namespace hubmesh::netio {

/// Frames are 4-byte big-endian length prefixes followed by UTF-8 JSON.
inline constexpr std::size_t kMaxFrameBytes = 16u * 1024 * 1024;

/// Message set: Hello{hub_id, links, steps}, Params{iter, phase, rho, z,
/// lambda}, LocalResult{iter, v, cost, status, flows?}, Stop{reason},
/// Solution{iterations, converged, cost_chf}. Receivers ignore unknown
/// fields and unknown message types.
class WireError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Connected stream socket; owns the fd.
class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    ~Socket();
    Socket(Socket&& other) noexcept;
    Socket& operator=(Socket&& other) noexcept;
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;

    int fd() const { return fd_; }
    bool valid() const { return fd_ >= 0; }
    void close();

private:
    int fd_ = -1;
};

Socket tcp_connect(const std::string& host, int port, int timeout_ms);

class Listener {
public:
    Listener(const std::string& bind_addr, int port);  // port 0 picks an ephemeral one
    int port() const { return port_; }
    Socket accept(int timeout_ms);

private:
    Socket sock_;
    int port_ = 0;
};

void send_frame(const Socket& sock, const nlohmann::json& msg);
nlohmann::json recv_frame(const Socket& sock, int timeout_ms);

struct ServeOptions {
    std::string bind = "127.0.0.1";
    int port = 0;
    int round_timeout_ms = 60'000;
    int accept_timeout_ms = 60'000;
    std::function<void(int)> on_listening;  // called with the bound port
};

/// Accepts one agent per hub, then drives the consensus rounds with the
/// local solves running remotely. Wire frames carry only the shared trade
/// iterates; device data stays inside the agent processes, and the final
/// polish round returns the flows that make up the published solution. On
/// any agent failure a Stop is broadcast and WireError is thrown.
admm::AdmmResult coordinator_serve(const model::Network& net, const horizon::TimeGrid& grid,
                                   const admm::AdmmConfig& cfg, const ServeOptions& opts);

struct AgentOptions {
    std::string host = "127.0.0.1";
    int port = 0;
    int connect_timeout_ms = 10'000;
    /// The coordinator paces the rounds, so agents wait much longer.
    int round_timeout_ms = 600'000;
};

/// Runs one hub's side of the protocol until the coordinator sends
/// Solution. Throws WireError on Stop or transport failure.
void agent_serve(const model::Hub& hub, const std::vector<dispatch::HubLinkView>& links,
                 const horizon::TimeGrid& grid, const AgentOptions& opts,
                 const qp::SolverSettings& qp_settings = {});

}  // namespace hubmesh::netio
