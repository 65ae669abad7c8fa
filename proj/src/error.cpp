#include "samrobust/error.hpp"

namespace samrobust {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
      return "configuration error";
    case ErrorKind::usage:
      return "usage error";
    case ErrorKind::numeric:
      return "numeric error";
    case ErrorKind::domain:
      return "domain error";
    case ErrorKind::search_interval:
      return "search-interval error";
    case ErrorKind::io:
      return "I/O error";
  }
  return "error";
}

}  // namespace samrobust
