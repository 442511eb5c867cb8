#include "skillops/trace.hpp"

namespace skillops {

std::string_view to_string(Outcome outcome)
{
    return outcome == Outcome::success ? "success" : "failure";
}

}  // namespace skillops
