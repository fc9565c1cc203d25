#pragma once

#include <atomic>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "station/ground_station.hpp"
#include "station/socket.hpp"

namespace httplib {
class Server;
}

namespace gmp3 {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int drone_port = 47800;  ///< 0 picks a free port
  int http_port = 8080;    ///< 0 picks a free port
  double tick = 0.01;      ///< dispatcher period, s
};

/// Ground station on the network: drone TCP links, dispatcher thread and
/// the operator HTTP API (GET /fleet, POST /cmd, GET /plan/{drone},
/// GET /missions, POST /missions/{name}/start|stop, POST /console,
/// GET /events as text/event-stream).
class StationServer {
 public:
  StationServer(StationConfig station, ServerConfig server);
  ~StationServer();

  StationServer(const StationServer&) = delete;
  StationServer& operator=(const StationServer&) = delete;

  /// Binds both ports and starts the threads. Throws net::PortBusy.
  void start();
  /// Hold setpoints to airborne drones, close links, join threads.
  void stop();
  bool running() const { return running_; }

  GroundStation& station() { return station_; }
  int drone_port() const { return drone_port_; }
  int http_port() const { return http_port_; }
  /// Seconds since construction on the steady clock.
  double now() const;

 private:
  void accept_loop();
  void serve_drone(std::shared_ptr<net::TcpStream> stream);
  void dispatch_loop();
  void install_routes();

  GroundStation station_;
  ServerConfig config_;
  std::chrono::steady_clock::time_point t0_;
  std::unique_ptr<net::TcpListener> listener_;
  std::unique_ptr<httplib::Server> http_;
  std::atomic<bool> running_{false};
  int drone_port_ = 0;
  int http_port_ = 0;
  std::thread accept_thread_;
  std::thread dispatch_thread_;
  std::thread http_thread_;
  std::mutex conn_m_;
  std::list<std::thread> conn_threads_;
  std::list<std::shared_ptr<net::TcpStream>> streams_;
};

}  // namespace gmp3
