#pragma once

#include <vector>

#include "qtd/types.hpp"

namespace qtd {

/// Piecewise-linear time course of a (possibly empty) vector of work
/// variables. Values clamp outside the node range; rates vanish there.
class Protocol {
  public:
    Protocol() = default;

    static Protocol constant(RealVector v);
    static Protocol constant(double v) { return constant(RealVector::Constant(1, v)); }
    Protocol(std::vector<double> times, std::vector<RealVector> values);

    RealVector value(double t) const;
    RealVector rate(double t) const;
    double scalar_value(double t) const { return value(t)(0); }
    double scalar_rate(double t) const { return rate(t)(0); }

    int size() const { return dim_; }
    bool empty() const { return dim_ == 0; }
    bool is_static() const;  // true when the rate vanishes everywhere

  private:
    std::vector<double> times_;
    std::vector<RealVector> values_;
    int dim_ = 0;
};

}  // namespace qtd
