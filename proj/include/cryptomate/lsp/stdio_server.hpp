// Runs a Session over Content-Length framed streams. Input is read on its own
// thread and analyses run on a worker thread, so a slow analysis never delays
// reading the next edit.
#pragma once

#include <istream>
#include <ostream>

#include "cryptomate/lsp/session.hpp"

namespace cryptomate::lsp {

/// Serves until `exit` or end of input. Returns the process exit code: 0 after
/// an orderly shutdown, 1 otherwise.
int runStdioServer(std::istream& in, std::ostream& out, SessionOptions options);

}  // namespace cryptomate::lsp
