#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "effortlab/error.hpp"
#include "effortlab/service.hpp"

namespace httplib {
class Server;
}

namespace effortlab::http {

struct HttpOptions {
  // Directory served at / for a browser client; empty disables it.
  std::filesystem::path static_dir;
};

// Registers the listening-test routes on a fresh server. The returned
// server keeps a reference to `test`, which must outlive it.
std::unique_ptr<httplib::Server> MakeServer(service::ListeningTest& test, const HttpOptions& options = {});

// HTTP status for a library error code.
int StatusFor(ErrorCode code);

}  // namespace effortlab::http
