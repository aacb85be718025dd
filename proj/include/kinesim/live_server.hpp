#ifndef KINESIM_LIVE_SERVER_HPP_
#define KINESIM_LIVE_SERVER_HPP_

#include <cstdint>
#include <memory>
#include <string>

#include "kinesim/live_bridge.hpp"

namespace kinesim {

struct LiveOptions {
  std::string host{"127.0.0.1"};
  /// 0 picks a free port; see LiveServer::port().
  std::uint16_t port{0};
  double frame_rate_hz{20.0};
  /// Script inlined into the page served at GET /. Empty selects the
  /// built-in fallback viewer.
  std::string viewer_bundle;
  /// Served verbatim at GET /doc. Empty serves the canonical form.
  std::string doc_bytes;
};

/// HTTP + websocket front end for a LiveState.
///
///   GET /     viewer page with the document embedded
///   GET /doc  document JSON
///   /ws       hello, then frames; accepts the commands handled by `handle`
///
/// One simulation thread owns the state. Network sessions feed it through an
/// ordered queue and receive its broadcasts.
class LiveServer {
 public:
  /// Binds immediately; throws EnvironmentError if the address is taken.
  LiveServer(LiveState state, LiveOptions options);
  ~LiveServer();
  LiveServer(const LiveServer&) = delete;
  LiveServer& operator=(const LiveServer&) = delete;

  std::uint16_t port() const;
  /// Stops accepting, closes sessions and joins all threads. Idempotent.
  void stop();

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace kinesim

#endif  // KINESIM_LIVE_SERVER_HPP_
