#include "rln/errors.hpp"

namespace rln {

std::string_view to_string(Errc code) {
    switch (code) {
        case Errc::DuplicateShare: return "DuplicateShare";
        case Errc::DepthOutOfRange: return "DepthOutOfRange";
        case Errc::IndexOutOfRange: return "IndexOutOfRange";
        case Errc::SequenceGap: return "SequenceGap";
        case Errc::Decode: return "Decode";
        case Errc::WrongDeposit: return "WrongDeposit";
        case Errc::AlreadyRegistered: return "AlreadyRegistered";
        case Errc::NotAMember: return "NotAMember";
        case Errc::NoMatchingCommit: return "NoMatchingCommit";
        case Errc::RevealNotEarliest: return "RevealNotEarliest";
        case Errc::CommitExpired: return "CommitExpired";
        case Errc::ConstraintViolated: return "ConstraintViolated";
        case Errc::RateLimitLocal: return "RateLimitLocal";
        case Errc::NotRegistered: return "NotRegistered";
        case Errc::ProofFailure: return "ProofFailure";
        case Errc::InvalidTopology: return "InvalidTopology";
        case Errc::InvalidDistribution: return "InvalidDistribution";
        case Errc::ConfigParse: return "ConfigParse";
        case Errc::ConfigValidation: return "ConfigValidation";
        case Errc::Io: return "IoError";
    }
    return "Unknown";
}

}  // namespace rln
