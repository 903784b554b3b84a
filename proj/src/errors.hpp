#ifndef BBMH_ERRORS_HPP
#define BBMH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bbmh {

enum class Errc {
    InvalidArgument = 1,
    UnsupportedUniverse,
    PermutationTooLarge,
    HeaderMismatch,
    MissingMinima,
    DegenerateProfile,
    EmptySketch,
    DimensionExceeded,
    NonBinaryLabel,
    MalformedLine,
    NonBinaryValue,
    NonAscendingIndex,
    InfeasibleProfile,
    Io,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, std::string msg) : std::runtime_error(std::move(msg)), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, std::string msg) { throw Error(code, std::move(msg)); }

}  // namespace bbmh

#endif
