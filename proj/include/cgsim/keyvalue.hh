// `key = value` text files: one pair per line, '#' starts a comment.

#ifndef CGSIM_KEYVALUE_HH
#define CGSIM_KEYVALUE_HH

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cgsim {

std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text);
std::string read_text_file(const std::string& path);

}  // namespace cgsim

#endif  // CGSIM_KEYVALUE_HH
