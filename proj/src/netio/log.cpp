#include "hubmesh/netio/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <mutex>

namespace hubmesh::netio {

LogLevel log_level()
{
    static const LogLevel level = [] {
        const char* env = std::getenv("HUBMESH_LOG");
        if (!env) return LogLevel::Silent;
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 2) return LogLevel::Debug;
        if (v == 1) return LogLevel::Info;
        return LogLevel::Silent;
    }();
    return level;
}

void log(LogLevel lvl, const std::string& msg)
{
    if (static_cast<int>(lvl) > static_cast<int>(log_level())) return;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    std::fprintf(stderr, "[hubmesh] %s\n", msg.c_str());
}

}  // namespace hubmesh::netio
