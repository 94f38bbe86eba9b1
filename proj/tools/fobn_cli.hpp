#ifndef FOBN_TOOLS_CLI_HPP
#define FOBN_TOOLS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace fobn::cli {

// Exit codes: 0 accept/success, 1 reject, 2 undefined conditioning,
// 64 usage error, 65 parse/format error, 69 resource cap exceeded.
inline constexpr int kExitAccept = 0;
inline constexpr int kExitReject = 1;
inline constexpr int kExitUndefined = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitFormat = 65;
inline constexpr int kExitCap = 69;

int run(const std::vector<std::string>& args, std::istream& in,
        std::ostream& out, std::ostream& err);

} // namespace fobn::cli

#endif
