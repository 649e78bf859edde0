#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nem {

/// Covariance mixture xi(t) = sum_k c_k t^k with non-negative coefficients.
///
/// The mixture fixes the law of the random map: E[F_i(x) F_j(y)] = delta_ij xi(<x, y>).
/// Only polynomial mixtures are representable; callers truncate power series themselves.
template <typename Scalar>
class BasicMixture {
 public:
  BasicMixture() = default;

  explicit BasicMixture(std::vector<Scalar> coeffs) : coeffs_(std::move(coeffs)) {
    while (coeffs_.size() > 1 && coeffs_.back() == Scalar(0)) coeffs_.pop_back();
    if (coeffs_.empty()) throw std::invalid_argument("mixture: empty coefficient list");
    Scalar total = 0;
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
      if (!(coeffs_[k] >= Scalar(0)) || !std::isfinite(coeffs_[k]))
        throw std::invalid_argument("mixture: coefficient " + std::to_string(k) +
                                    " must be finite and non-negative");
      total += coeffs_[k];
    }
    if (!(total > Scalar(0))) throw std::invalid_argument("mixture: xi(1) must be positive");
  }

  const std::vector<Scalar>& coeffs() const { return coeffs_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  Scalar coeff(int k) const {
    return (k >= 0 && k <= degree()) ? coeffs_[static_cast<std::size_t>(k)] : Scalar(0);
  }

  /// order-th derivative at t, exact (Horner on the differentiated coefficients).
  Scalar eval(Scalar t, int order = 0) const {
    if (order < 0) throw std::invalid_argument("mixture: negative derivative order");
    Scalar acc = 0;
    for (int k = degree(); k >= order; --k) {
      Scalar falling = 1;
      for (int j = 0; j < order; ++j) falling *= Scalar(k - j);
      acc = acc * t + coeffs_[static_cast<std::size_t>(k)] * falling;
    }
    return acc;
  }

  Scalar operator()(Scalar t) const { return eval(t, 0); }
  Scalar d1(Scalar t) const { return eval(t, 1); }
  Scalar d2(Scalar t) const { return eval(t, 2); }
  Scalar d3(Scalar t) const { return eval(t, 3); }

  /// xi_{>0}(t) = xi(t) - xi(0).
  BasicMixture without_constant() const {
    std::vector<Scalar> c = coeffs_;
    c[0] = 0;
    bool any = false;
    for (Scalar v : c) any = any || v > Scalar(0);
    if (!any) throw std::invalid_argument("mixture: xi_{>0} vanishes identically");
    return BasicMixture(std::move(c));
  }

  /// True when xi'' vanishes identically (degree <= 1).
  bool is_affine() const { return degree() <= 1; }

  /// Pure model xi(t) = xi0 + t^p.
  static BasicMixture pure(Scalar xi0, int p) {
    std::vector<Scalar> c(static_cast<std::size_t>(p) + 1, Scalar(0));
    c[0] = xi0;
    c[static_cast<std::size_t>(p)] += Scalar(1);
    return BasicMixture(std::move(c));
  }

  friend bool operator==(const BasicMixture& a, const BasicMixture& b) {
    return a.coeffs_ == b.coeffs_;
  }

 private:
  std::vector<Scalar> coeffs_{Scalar(1)};
};

using MixtureXi = BasicMixture<double>;

/// Free-function form of MixtureXi::eval.
inline double xi_eval(const MixtureXi& xi, double t, int order = 0) { return xi.eval(t, order); }

/// Parses "1,0,0,1" into a mixture.
MixtureXi parse_mixture(std::string_view text);
std::string format_mixture(const MixtureXi& xi);

}  // namespace nem
