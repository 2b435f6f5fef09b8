#pragma once

namespace relpatch {

/// Full command-line entry point. Returns the process exit code:
/// 0 success, 1 runtime failure, 2 usage error.
int cli_main(int argc, const char* const* argv);

}  // namespace relpatch
