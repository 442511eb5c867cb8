#include "skillops/error.hpp"

namespace skillops {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::MalformedFrontMatter: return "MalformedFrontMatter";
    case ErrorCode::MissingOperationSection: return "MissingOperationSection";
    case ErrorCode::DuplicateSection: return "DuplicateSection";
    case ErrorCode::InvalidIdentifier: return "InvalidIdentifier";
    case ErrorCode::DuplicateSkillId: return "DuplicateSkillId";
    case ErrorCode::UnknownSkillId: return "UnknownSkillId";
    case ErrorCode::EmptyLibrary: return "EmptyLibrary";
    case ErrorCode::MissingRiskEntry: return "MissingRiskEntry";
    case ErrorCode::CorruptLibrary: return "CorruptLibrary";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::IllegalMerge: return "IllegalMerge";
    case ErrorCode::RetireRequiresDuplicate: return "RetireRequiresDuplicate";
    case ErrorCode::NoFeasiblePlan: return "NoFeasiblePlan";
    case ErrorCode::AdapterTypeUnsatisfiable: return "AdapterTypeUnsatisfiable";
    case ErrorCode::PlanInvalid: return "PlanInvalid";
    case ErrorCode::MalformedTraceLine: return "MalformedTraceLine";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace skillops
