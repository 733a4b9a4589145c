#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace specsys::cli {

/// Exit codes: 0 = all verifications pass, 1 = usage or parse error,
/// 2 = a verification failed.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace specsys::cli
