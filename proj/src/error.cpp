#include "msgp/error.hpp"

#include <atomic>
#include <iostream>

namespace msgp {

namespace {

void stderr_sink(const std::string& message) {
  std::cerr << "warning: " << message << '\n';
}

std::atomic<WarningSink> g_sink{&stderr_sink};

}  // namespace

void set_warning_sink(WarningSink sink) { g_sink.store(sink ? sink : &stderr_sink); }

void warn(const std::string& message) { g_sink.load()(message); }

}  // namespace msgp
