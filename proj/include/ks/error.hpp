#pragma once

#include <stdexcept>
#include <string>

namespace ks {

// Root of all library errors. Callers that only care about "the run failed"
// catch this; the subclasses carry the diagnostic detail.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SizeError : public Error {
public:
    using Error::Error;
};

class SamplingError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

// An eigenvalue too close to the arithmetic floor for the requested operation.
class PrecisionError : public Error {
public:
    using Error::Error;
};

// A Cholesky pivot at or below the arithmetic resolution.
class RankDeficiencyError : public Error {
public:
    RankDeficiencyError(const std::string& what, std::size_t pivot_index)
        : Error(what), pivot_index_(pivot_index) {}
    std::size_t pivot_index() const { return pivot_index_; }

private:
    std::size_t pivot_index_;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double achieved) : Error(what), achieved_(achieved) {}
    double achieved() const { return achieved_; }

private:
    double achieved_;
};

class AccuracyError : public Error {
public:
    AccuracyError(const std::string& what, double estimate) : Error(what), estimate_(estimate) {}
    double estimate() const { return estimate_; }

private:
    double estimate_;
};

class StepSizeError : public Error {
public:
    using Error::Error;
};

class ConsistencyError : public Error {
public:
    using Error::Error;
};

}  // namespace ks
