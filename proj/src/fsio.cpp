#include "hlens/fsio.hpp"

#include "hlens/errors.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace hlens {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Err::InvalidConfig, "cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) raise(Err::InvalidConfig, "cannot write file '" + tmp.string() + "'");
    out << content;
    if (!out.good()) raise(Err::InvalidConfig, "write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

} // namespace hlens
