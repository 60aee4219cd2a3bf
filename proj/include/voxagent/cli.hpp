#pragma once

namespace voxagent::cli {

// Entry point behind the voxagent binary; exposed so tests can invoke
// commands in-process. Exit codes: 0 ok, 1 task/validation failure,
// 2 usage or I/O error.
int run(int argc, const char* const* argv);

}  // namespace voxagent::cli
