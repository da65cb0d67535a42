#pragma once
// Structured stderr logging. Verbosity comes from MMP_LOG (error|warn|info|debug),
// default warn.

#include <sstream>
#include <string>

namespace mmp::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

Level threshold();
void set_threshold(Level level);
bool enabled(Level level);
void write(Level level, const std::string& event, const std::string& fields);

/// key=value field accumulator: log::Fields{}.add("agent", 1).add("z", 3)
class Fields {
 public:
  template <typename T>
  Fields& add(const char* key, const T& value) {
    if (!first_) out_ << ' ';
    first_ = false;
    out_ << key << '=' << value;
    return *this;
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
  bool first_ = true;
};

}  // namespace mmp::log
