#ifndef HLENS_FSIO_HPP
#define HLENS_FSIO_HPP

#include <string>

namespace hlens {

std::string read_file(const std::string& path); // throws Error(InvalidConfig)

/// Writes via a temp file in the same directory plus rename, so partially
/// written outputs are never observed. Creates parent directories.
void write_file_atomic(const std::string& path, const std::string& content);

} // namespace hlens

#endif
