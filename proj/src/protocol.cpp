#include "qtd/protocol.hpp"

#include <algorithm>

namespace qtd {

Protocol Protocol::constant(RealVector v) {
    Protocol p;
    p.dim_ = static_cast<int>(v.size());
    p.times_ = {0.0};
    p.values_ = {std::move(v)};
    return p;
}

Protocol::Protocol(std::vector<double> times, std::vector<RealVector> values)
    : times_(std::move(times)), values_(std::move(values)) {
    if (times_.empty() || times_.size() != values_.size()) {
        throw std::invalid_argument("Protocol: need equally many node times and values");
    }
    for (std::size_t i = 1; i < times_.size(); ++i) {
        if (times_[i] <= times_[i - 1]) {
            throw std::invalid_argument("Protocol: node times must be strictly increasing");
        }
        if (values_[i].size() != values_[0].size()) {
            throw std::invalid_argument("Protocol: node value dimensions differ");
        }
    }
    dim_ = static_cast<int>(values_[0].size());
}

RealVector Protocol::value(double t) const {
    if (dim_ == 0) return RealVector(0);
    if (t <= times_.front()) return values_.front();
    if (t >= times_.back()) return values_.back();
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times_.begin());
    const double w = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
    return (1.0 - w) * values_[i - 1] + w * values_[i];
}

RealVector Protocol::rate(double t) const {
    if (dim_ == 0) return RealVector(0);
    if (t < times_.front() || t > times_.back() || times_.size() == 1) {
        return RealVector::Zero(dim_);
    }
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t i = static_cast<std::size_t>(it - times_.begin());
    if (i == times_.size()) i = times_.size() - 1;  // right endpoint: last segment slope
    if (i == 0) i = 1;
    return (values_[i] - values_[i - 1]) / (times_[i] - times_[i - 1]);
}

bool Protocol::is_static() const {
    for (std::size_t i = 1; i < values_.size(); ++i) {
        if ((values_[i] - values_[0]).cwiseAbs().maxCoeff() > 0.0) return false;
    }
    return true;
}

}  // namespace qtd
