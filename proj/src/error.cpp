#include "metaforge/error.hpp"

namespace metaforge {

Error::Error(std::string_view code, std::string message, std::string path,
             std::vector<std::string> ids)
    : std::runtime_error(std::move(message)),
      code_(code),
      path_(std::move(path)),
      ids_(std::move(ids)) {}

}  // namespace metaforge
