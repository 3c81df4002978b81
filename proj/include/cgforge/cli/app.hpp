#pragma once

#include <ostream>

namespace cgforge::cli {

// Exit codes.
enum ExitCode : int {
  kOk = 0,
  kValidation = 1,  // bad flags, config or input content
  kIo = 2,          // missing or unwritable files, bind failures
  kInternal = 3,    // invariant breach
};

// Entry point of the `cgforge` binary. Machine-readable JSON summaries go to
// `out`; the human log and usage text go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cgforge::cli
