#include "quizforge/io.hpp"

#include <fcntl.h>
#include <openssl/evp.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <sstream>

#include <fmt/format.h>

#include "quizforge/text.hpp"

namespace quizforge::io {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::error_code ec;
  if (fs::is_directory(path, ec)) throw IoError(path, "is a directory");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError(path, "read failed");
  return ss.str();
}

std::vector<JsonlLine> read_jsonl_lines(const fs::path& path) {
  const std::string content = read_file(path);
  std::vector<JsonlLine> out;
  std::size_t line_no = 0;
  for (auto line : text::split_lines(content)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    out.push_back({line_no, std::string(line)});
  }
  return out;
}

void ensure_directory(const fs::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError(dir, fmt::format("cannot create directory ({})", ec ? ec.message() : "not a directory"));
  }
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  const fs::path parent = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  if (!fs::is_directory(parent, ec)) throw IoError(parent, "directory does not exist");
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(parent, "directory is not writable");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError(tmp, "write failed");
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError(path, "cannot replace file");
  }
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

AppendLog::AppendLog(fs::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) ensure_directory(path_.parent_path());
  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) throw IoError(path_, fmt::format("cannot open for append ({})", std::strerror(errno)));
  // Terminate a torn final line so the next record starts on its own line.
  const int rfd = ::open(path_.c_str(), O_RDONLY | O_CLOEXEC);
  if (rfd >= 0) {
    char last = '\n';
    const off_t size = ::lseek(rfd, 0, SEEK_END);
    if (size > 0 && ::pread(rfd, &last, 1, size - 1) == 1 && last != '\n') append("");
    ::close(rfd);
  }
}

AppendLog::~AppendLog() {
  if (fd_ >= 0) ::close(fd_);
}

void AppendLog::append(std::string_view line) {
  std::string buf(line);
  if (buf.empty() || buf.back() != '\n') buf.push_back('\n');
  std::lock_guard lock(mu_);
  std::size_t written = 0;
  while (written < buf.size()) {
    const auto n = ::write(fd_, buf.data() + written, buf.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError(path_, fmt::format("append failed ({})", std::strerror(errno)));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fdatasync(fd_) != 0) throw IoError(path_, "sync failed");
}

}  // namespace quizforge::io
