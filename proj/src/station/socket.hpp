#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "core/errors.hpp"

namespace gmp3::net {

class PortBusy : public IoError {
 public:
  using IoError::IoError;
};

/// Connected TCP stream. send_all is serialized internally; recv is meant
/// for a single reader thread.
class TcpStream {
 public:
  explicit TcpStream(int fd) : fd_(fd) {}
  ~TcpStream();
  TcpStream(const TcpStream&) = delete;
  TcpStream& operator=(const TcpStream&) = delete;

  static std::unique_ptr<TcpStream> connect(const std::string& host, int port, double timeout_s);

  void send_all(const std::string& data);
  /// Bytes read into out; 0 on orderly close; nullopt on timeout.
  std::optional<std::size_t> recv(std::string& out, double timeout_s);
  /// Wakes a blocked reader; further sends fail.
  void shutdown();

 private:
  int fd_;
  std::mutex send_m_;
};

class TcpListener {
 public:
  /// port 0 picks an ephemeral port. Throws PortBusy when the port is taken.
  TcpListener(const std::string& host, int port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  int port() const { return port_; }
  /// nullptr on timeout or after close().
  std::unique_ptr<TcpStream> accept(double timeout_s);
  void close();

 private:
  int fd_ = -1;
  int port_ = 0;
};

}  // namespace gmp3::net
