#include "voxagent/core.hpp"

namespace voxagent {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnknownScenario: return "UnknownScenario";
        case ErrorCode::DimsTooSmall: return "DimsTooSmall";
        case ErrorCode::UnknownTask: return "UnknownTask";
        case ErrorCode::UnknownItem: return "UnknownItem";
        case ErrorCode::UnknownRecipe: return "UnknownRecipe";
        case ErrorCode::EmptyText: return "EmptyText";
        case ErrorCode::ZeroEmbedding: return "ZeroEmbedding";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::EmptyDatabase: return "EmptyDatabase";
        case ErrorCode::UnboundParameter: return "UnboundParameter";
        case ErrorCode::StepCapExceeded: return "StepCapExceeded";
        case ErrorCode::SyntaxError: return "SyntaxError";
        case ErrorCode::DepthExceeded: return "DepthExceeded";
        case ErrorCode::BackendError: return "BackendError";
        case ErrorCode::Transport: return "Transport";
        case ErrorCode::RateLimited: return "RateLimited";
        case ErrorCode::MalformedResponse: return "MalformedResponse";
        case ErrorCode::MalformedScore: return "MalformedScore";
        case ErrorCode::ParseFailure: return "ParseFailure";
        case ErrorCode::CurriculumExhausted: return "CurriculumExhausted";
        case ErrorCode::BudgetInfeasible: return "BudgetInfeasible";
        case ErrorCode::EmptyOutcome: return "EmptyOutcome";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::DegenerateSeries: return "DegenerateSeries";
        case ErrorCode::SchemaViolation: return "SchemaViolation";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::UsageError: return "UsageError";
    }
    return "Error";
}

}  // namespace voxagent
