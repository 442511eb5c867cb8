#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace skillops {

enum class ErrorCode {
    MalformedFrontMatter,
    MissingOperationSection,
    DuplicateSection,
    InvalidIdentifier,
    DuplicateSkillId,
    UnknownSkillId,
    EmptyLibrary,
    MissingRiskEntry,
    CorruptLibrary,
    ConfigInvalid,
    IllegalMerge,
    RetireRequiresDuplicate,
    NoFeasiblePlan,
    AdapterTypeUnsatisfiable,
    PlanInvalid,
    MalformedTraceLine,
    Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), m_code(code)
    {}

    [[nodiscard]] ErrorCode code() const noexcept { return m_code; }

  private:
    ErrorCode m_code;
};

}  // namespace skillops
