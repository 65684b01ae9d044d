// Content-Length framing for JSON-RPC over a byte stream.
#pragma once

#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cryptomate::lsp {

class FramingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "Content-Length: <bytes>\r\n\r\n<payload>".
std::string frame(std::string_view payload);

/// Reads one message. Unknown headers are skipped. Returns nullopt on a
/// clean end of input before any header byte; throws FramingError on a
/// missing or invalid Content-Length, a header block that never ends, or a
/// payload shorter than announced.
std::optional<std::string> deframe(std::istream& in);

/// Deframes a whole buffer, for transcripts.
std::vector<std::string> deframeAll(std::string_view bytes);

}  // namespace cryptomate::lsp
