#ifndef STRECOVER_CLI_HPP_
#define STRECOVER_CLI_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "strecover/data_model.hpp"

namespace strecover::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitDiverged = 3;

// Runs one `strecover` invocation. `args` excludes the program name.
// One-line summaries go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "lo:hi:step", inclusive of hi up to rounding.
std::vector<double> parse_real_grid(std::string_view spec);
std::vector<Index> parse_index_grid(std::string_view spec);
// "a..b" (inclusive) or "a,b,c".
std::vector<std::uint64_t> parse_seed_list(std::string_view spec);

}  // namespace strecover::cli

#endif  // STRECOVER_CLI_HPP_
