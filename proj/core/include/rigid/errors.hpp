#pragma once

#include <stdexcept>
#include <string>

namespace rigid {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A pivot (or a divisor) needed more p-adic digits than the cap provides.
struct PrecisionExhausted : Error {
    using Error::Error;
};

// Coefficients of an element decay slower than every admissible slope.
struct CertificateViolation : Error {
    using Error::Error;
};

// Two consecutive truncation levels disagreed on the reported dimensions.
struct NotStabilized : Error {
    using Error::Error;
};

// A reduction window had to be enlarged past its cap.
struct Resonance : Error {
    Resonance(const std::string& msg, int final_window)
        : Error(msg), window(final_window) {}
    int window;
};

struct NonEtale : Error {
    using Error::Error;
};

struct CocycleFailed : Error {
    using Error::Error;
};

struct RankDeficient : Error {
    using Error::Error;
};

struct OrderExceedsJet : Error {
    using Error::Error;
};

struct NotFaithfullyFlat : Error {
    using Error::Error;
};

struct GroupOrderNotInvertible : Error {
    using Error::Error;
};

struct UnsupportedPresentation : Error {
    using Error::Error;
};

struct ParseError : Error {
    ParseError(const std::string& msg, int line_, int col_)
        : Error(msg + " (line " + std::to_string(line_) + ", column " +
                std::to_string(col_) + ")"),
          line(line_), col(col_) {}
    int line;
    int col;
};

}  // namespace rigid
