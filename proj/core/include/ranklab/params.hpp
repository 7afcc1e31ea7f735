#pragma once

#include <map>
#include <string>
#include <vector>

namespace ranklab {

/// Named parameters for builtin fields and operators. Scalars are length-1 lists.
using ParamMap = std::map<std::string, std::vector<double>>;

}  // namespace ranklab
