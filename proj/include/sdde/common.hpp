#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdde {

using Vector = Eigen::VectorXd;

/// Adaptive quadrature gave up before reaching tolerance; `residual` is the
/// error estimate of the best partial result.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double residual)
        : std::runtime_error(what + " (residual estimate " + std::to_string(residual) + ")"),
          residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

/// A delay integral has a divergent tail against the supplied measure.
class DivergenceError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A history operation was fed inconsistent junction data.
class ConsistencyError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Trajectory escaped the configured bound; carries the escape time.
class BlowUpError : public std::runtime_error {
public:
    BlowUpError(double time, double bound)
        : std::runtime_error("trajectory exceeded bound " + std::to_string(bound) +
                             " at t=" + std::to_string(time)),
          time_(time) {}
    double time() const { return time_; }

private:
    double time_;
};

/// Configuration failed validation; collects every issue, not just the first.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> issues)
        : std::runtime_error(join(issues)), issues_(std::move(issues)) {}
    const std::vector<std::string>& issues() const { return issues_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s = "invalid configuration:";
        for (const auto& i : v) s += "\n  - " + i;
        return s;
    }
    std::vector<std::string> issues_;
};

inline bool all_finite(const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i])) return false;
    return true;
}

}  // namespace sdde
