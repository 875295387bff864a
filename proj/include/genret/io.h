#pragma once

#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace genret {

/// Opens `path` for writing, truncating it; throws kIo on failure.
std::ofstream open_output(const std::string& path, bool binary = false);
/// Opens `path` for reading; throws kIo naming the file on failure.
std::ifstream open_input(const std::string& path, bool binary = false);

std::vector<std::string> split(std::string_view text, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Tab-separated fields of every non-empty line.
std::vector<std::vector<std::string>> read_tsv(const std::string& path);

}  // namespace genret
