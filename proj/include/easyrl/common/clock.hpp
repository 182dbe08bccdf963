#pragma once

#include <string>

namespace easyrl {

// UTC wall-clock time as "YYYY-MM-DDTHH:MM:SS.mmmZ".
std::string utcTimestamp();

}  // namespace easyrl
