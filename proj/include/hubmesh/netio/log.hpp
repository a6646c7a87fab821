#pragma once

#include <string>

namespace hubmesh::netio {

/// Verbosity from the HUBMESH_LOG environment variable: 0/unset silent,
/// 1 info, 2 debug. Read once per process.
enum class LogLevel { Silent = 0, Info = 1, Debug = 2 };

LogLevel log_level();

/// Writes "[hubmesh] msg" to stderr when lvl is enabled.
void log(LogLevel lvl, const std::string& msg);

inline void log_info(const std::string& msg) { log(LogLevel::Info, msg); }
inline void log_debug(const std::string& msg) { log(LogLevel::Debug, msg); }

}  // namespace hubmesh::netio
