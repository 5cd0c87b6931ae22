#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace grpurn {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Construction / parameter validation
struct InvalidParams : Error { using Error::Error; };
struct OutOfRange : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };

// Schedule evaluation
struct ScheduleDomain : Error { using Error::Error; };

// example1 produces beta_n < 0 for small n unless the burn-in clamp is requested
struct DegenerateSchedule : Error {
    DegenerateSchedule(const std::string& msg, std::int64_t first_n)
        : Error(msg), first_offending_n(first_n) {}
    std::int64_t first_offending_n;
};

// example2 cannot make every alpha_n > 0 at the requested offset
struct PositivityFailure : Error {
    PositivityFailure(const std::string& msg, std::int64_t suggested)
        : Error(msg), suggested_offset(suggested) {}
    std::int64_t suggested_offset;  // smallest working offset, or -1 if none <= 10^4
};

// Monte Carlo harness
struct MinimumHorizon : Error { using Error::Error; };
struct ResourceLimit : Error { using Error::Error; };
struct WrongRegime : Error { using Error::Error; };

// Inference
struct ZeroProbability : Error { using Error::Error; };
struct EmptySample : Error { using Error::Error; };
struct ZeroVariance : Error { using Error::Error; };

// All cluster sizes equal: only lambda * N0^eta is identifiable
struct DegenerateClusters : Error {
    DegenerateClusters(const std::string& msg, double product)
        : Error(msg), lambda_n0_eta(product) {}
    double lambda_n0_eta;
};

// Special functions
struct IterationLimit : Error { using Error::Error; };

// CSV ingestion
struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t line_no)
        : Error(msg), line(line_no) {}
    std::size_t line;
};
struct EmptyFile : Error { using Error::Error; };

}  // namespace grpurn
