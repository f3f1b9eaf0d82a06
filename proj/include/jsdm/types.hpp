// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace jsdm {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user input: malformed scenario, parameter outside its domain.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A numerical self-check failed (non-Hermitian covariance, ZF leakage, ...).
class InvariantError : public Error {
public:
    using Error::Error;
};

/// Selected effective channels are (numerically) linearly dependent.
class RankDeficientError : public Error {
public:
    RankDeficientError(std::string what, std::vector<int> offending)
        : Error(std::move(what)), offending_(std::move(offending)) {}

    /// Row indices of the selection that take part in the dependency, the
    /// strongest participant first.
    const std::vector<int>& offending_rows() const noexcept { return offending_; }

private:
    std::vector<int> offending_;
};

/// Group subspaces overlap beyond tolerance (approximate block diagonalization
/// does not hold).
class BdCheckError : public Error {
public:
    using Error::Error;
};

} // namespace jsdm
