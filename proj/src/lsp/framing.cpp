#include "cryptomate/lsp/framing.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

namespace cryptomate::lsp {

std::string frame(std::string_view payload) {
  std::string out = "Content-Length: " + std::to_string(payload.size()) + "\r\n\r\n";
  out.append(payload);
  return out;
}

namespace {

constexpr size_t kMaxHeaderLine = 8192;

// A header line without its CRLF; nullopt at end of input before any byte.
std::optional<std::string> readHeaderLine(std::istream& in, bool firstLine) {
  std::string line;
  char c;
  while (in.get(c)) {
    if (c == '\n') {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    line += c;
    if (line.size() > kMaxHeaderLine) throw FramingError("header line too long");
  }
  if (line.empty() && firstLine) return std::nullopt;
  throw FramingError("end of input inside header block");
}

bool equalsIgnoreCase(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

}  // namespace

std::optional<std::string> deframe(std::istream& in) {
  std::optional<size_t> length;
  bool first = true;
  for (;;) {
    auto line = readHeaderLine(in, first);
    if (!line) return std::nullopt;
    first = false;
    if (line->empty()) break;
    auto colon = line->find(':');
    if (colon == std::string::npos) throw FramingError("malformed header: " + *line);
    std::string_view name(line->data(), colon);
    std::string_view value(line->data() + colon + 1, line->size() - colon - 1);
    while (!value.empty() && value.front() == ' ') value.remove_prefix(1);
    while (!value.empty() && value.back() == ' ') value.remove_suffix(1);
    if (!equalsIgnoreCase(name, "Content-Length")) continue;
    size_t n = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
    if (ec != std::errc() || ptr != value.data() + value.size() || value.empty())
      throw FramingError("invalid Content-Length: " + std::string(value));
    length = n;
  }
  if (!length) throw FramingError("missing Content-Length header");
  std::string payload(*length, '\0');
  in.read(payload.data(), static_cast<std::streamsize>(*length));
  if (static_cast<size_t>(in.gcount()) != *length)
    throw FramingError("short read: expected " + std::to_string(*length) + " bytes, got " +
                       std::to_string(in.gcount()));
  return payload;
}

std::vector<std::string> deframeAll(std::string_view bytes) {
  std::istringstream in{std::string(bytes)};
  std::vector<std::string> out;
  while (auto m = deframe(in)) out.push_back(std::move(*m));
  return out;
}

}  // namespace cryptomate::lsp
