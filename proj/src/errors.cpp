#include "nfd/errors.hpp"

namespace nfd {

FormatError::FormatError(const std::string& what, std::size_t offset)
    : Error("format-error", what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

}  // namespace nfd
