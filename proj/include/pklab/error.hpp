#pragma once

#include <stdexcept>
#include <string>

namespace pklab {

enum class errc {
    division_by_zero,
    coordinate_denominator,
    missing_assignment,
    inconsistent_conjugates,
    basis_mismatch,
    singular_coframe,
    not_a_complex_structure,
    type_mismatch,
    inhomogeneous_form,
    not_closed_manifold,
    sign_mixed,
    not_simple,
    not_positive,
    degenerate_omega,
    type_leak,
    unknown_name,
    invalid_argument,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::division_by_zero: return "DivisionByZero";
        case errc::coordinate_denominator: return "CoordinateDenominator";
        case errc::missing_assignment: return "MissingAssignment";
        case errc::inconsistent_conjugates: return "InconsistentConjugates";
        case errc::basis_mismatch: return "BasisMismatch";
        case errc::singular_coframe: return "SingularCoframe";
        case errc::not_a_complex_structure: return "NotAComplexStructure";
        case errc::type_mismatch: return "TypeMismatch";
        case errc::inhomogeneous_form: return "InhomogeneousForm";
        case errc::not_closed_manifold: return "NotClosedManifold";
        case errc::sign_mixed: return "SignMixed";
        case errc::not_simple: return "NotSimple";
        case errc::not_positive: return "NotPositive";
        case errc::degenerate_omega: return "DegenerateOmega";
        case errc::type_leak: return "TypeLeak";
        case errc::unknown_name: return "UnknownName";
        case errc::invalid_argument: return "InvalidArgument";
    }
    return "Error";
}

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

} // namespace pklab
