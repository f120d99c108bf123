#pragma once

#include <stdexcept>
#include <string>

namespace gfmodes {

enum class Errc {
    // bad input, exit code 2
    DimensionMismatch,
    InvalidArgument,
    IndexOutOfRange,
    NonPositiveMass,
    DuplicateAtomPosition,
    InvalidDimensionality,
    InvalidQuantumNumbers,
    NonPositiveConstant,
    NotSymmetricTop,
    ParseError,
    ValidationError,
    // numerical failure, exit code 3
    NegativeEigenvalueNonIntegerPower,
    SingularNonPositivePower,
    NotPositiveDefinite,
    DependentInput,
    DegenerateGeometry,
    RankDeficient,
    NegativeLambda,
    ZeroFrequencyMode,
    StepTooLarge,
    GimbalSingularity,
    NoConvergence,
    NonOrthonormalL,
    SingularInertia,
    NegativeNmax,
};

inline const char* errc_name(Errc c)
{
    switch (c) {
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::NonPositiveMass: return "NonPositiveMass";
    case Errc::DuplicateAtomPosition: return "DuplicateAtomPosition";
    case Errc::InvalidDimensionality: return "InvalidDimensionality";
    case Errc::InvalidQuantumNumbers: return "InvalidQuantumNumbers";
    case Errc::NonPositiveConstant: return "NonPositiveConstant";
    case Errc::NotSymmetricTop: return "NotSymmetricTop";
    case Errc::ParseError: return "ParseError";
    case Errc::ValidationError: return "ValidationError";
    case Errc::NegativeEigenvalueNonIntegerPower: return "NegativeEigenvalueNonIntegerPower";
    case Errc::SingularNonPositivePower: return "SingularNonPositivePower";
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::DependentInput: return "DependentInput";
    case Errc::DegenerateGeometry: return "DegenerateGeometry";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::NegativeLambda: return "NegativeLambda";
    case Errc::ZeroFrequencyMode: return "ZeroFrequencyMode";
    case Errc::StepTooLarge: return "StepTooLarge";
    case Errc::GimbalSingularity: return "GimbalSingularity";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::NonOrthonormalL: return "NonOrthonormalL";
    case Errc::SingularInertia: return "SingularInertia";
    case Errc::NegativeNmax: return "NegativeNmax";
    }
    return "Unknown";
}

/// True for errors caused by bad input rather than a numerical breakdown.
inline bool is_validation_error(Errc c)
{
    return static_cast<int>(c) <= static_cast<int>(Errc::ValidationError);
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code)
    {
    }

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace gfmodes
