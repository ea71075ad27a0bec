#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qgpr {

/// Row-major so that each input point is a contiguous span.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline std::span<const double> row(const PointMatrix& X, Eigen::Index i) {
    return {X.data() + i * X.cols(), static_cast<std::size_t>(X.cols())};
}

// Error taxonomy. The CLI maps these onto exit codes 2/3/4.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ComputeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A kernel produced a non-finite entry while assembling a Gram matrix.
struct EvaluationError : ComputeError {
    EvaluationError(Eigen::Index i, Eigen::Index j, const std::string& what)
        : ComputeError(what), row(i), col(j) {}
    Eigen::Index row;
    Eigen::Index col;
};

/// Cholesky failed even at the jitter cap.
struct NotPositiveDefinite : ComputeError {
    NotPositiveDefinite(double min_eig, double jitter, const std::string& what)
        : ComputeError(what), min_eigenvalue(min_eig), final_jitter(jitter) {}
    double min_eigenvalue;
    double final_jitter;
};

enum class Scale { Linear, Log };

/// One named, bounded, trainable real.
struct Param {
    std::string name;
    double value = 1.0;
    double lower = 1e-2;
    double upper = 1e2;
    Scale scale = Scale::Log;
};

/// Ordered hyperparameters of a kernel. Doubles as the optimizer's search box.
class ParamVector {
public:
    ParamVector() = default;
    explicit ParamVector(std::vector<Param> params) : params_(std::move(params)) {}

    std::size_t size() const { return params_.size(); }
    bool empty() const { return params_.empty(); }
    Param& operator[](std::size_t i) { return params_[i]; }
    const Param& operator[](std::size_t i) const { return params_[i]; }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

    void push_back(Param p) { params_.push_back(std::move(p)); }
    void append(const ParamVector& other) {
        params_.insert(params_.end(), other.params_.begin(), other.params_.end());
    }

    std::vector<double> values() const {
        std::vector<double> v;
        v.reserve(params_.size());
        for (const auto& p : params_) v.push_back(p.value);
        return v;
    }

    /// Copy with values replaced; bounds and names kept.
    ParamVector with_values(std::span<const double> v) const {
        if (v.size() != params_.size())
            throw std::invalid_argument("ParamVector: expected " + std::to_string(params_.size()) +
                                        " values, got " + std::to_string(v.size()));
        ParamVector out = *this;
        for (std::size_t i = 0; i < v.size(); ++i) out.params_[i].value = v[i];
        return out;
    }

private:
    std::vector<Param> params_;
};

}  // namespace qgpr
