/*
 Copyright 2026 The dmdlpv Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef DMDLPV_COMMON_HPP
#define DMDLPV_COMMON_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace dmdlpv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Operand shapes do not conform.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of the operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Invalid or inconsistent configuration (plant, excitation, experiment file).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Reading or writing a container/CSV file failed.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A simulation produced non-finite values. `step()` is the sample index at
/// which the state first became non-finite.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, Index step)
        : std::runtime_error(what), step_(step) {}
    Index step() const noexcept { return step_; }

private:
    Index step_;
};

} // namespace dmdlpv

#endif // DMDLPV_COMMON_HPP
