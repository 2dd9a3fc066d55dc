#pragma once

#include <stdexcept>
#include <string>

namespace lavlab {

enum class ErrorKind {
    Parameter,     // invalid argument / precondition violation
    Constraint,    // family-material admissibility violated
    SingularInput, // det <= 0 or vanishing singular value where forbidden
    Numerical,     // non-convergence, divergence, stall
    Domain,        // point outside the reference configuration
    Io,            // file / config problems
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace lavlab
