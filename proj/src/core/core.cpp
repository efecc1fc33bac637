#include "dynnet/core/error.hpp"
#include "dynnet/core/log.hpp"

#include <iostream>
#include <mutex>

namespace dynnet {

const char* to_string(DataErrorCode code) {
  switch (code) {
    case DataErrorCode::io: return "io error";
    case DataErrorCode::bad_magic: return "bad magic";
    case DataErrorCode::bad_version: return "bad version";
    case DataErrorCode::truncated: return "truncated payload";
    case DataErrorCode::label_out_of_range: return "label out of range";
    case DataErrorCode::subject_out_of_range: return "subject out of range";
    case DataErrorCode::invalid_argument: return "invalid argument";
    case DataErrorCode::degenerate: return "degenerate data";
  }
  return "data error";
}

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

WarningSink& sink() {
  static WarningSink s;
  return s;
}

}  // namespace

void warn(const std::string& message) {
  std::lock_guard lock(sink_mutex());
  if (sink()) {
    sink()(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

WarningSink set_warning_sink(WarningSink s) {
  std::lock_guard lock(sink_mutex());
  auto previous = std::move(sink());
  sink() = std::move(s);
  return previous;
}

}  // namespace dynnet
