#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bcrb {

// Pointwise activation kinds. Hidden layers need sigma, sigma', sigma'' in
// closed form (the score-matching trace term differentiates the Jacobian, so
// parameter gradients reach the second derivative). softplus_shifted is
// softplus(z) - log 2, which restores sigma(0) = 0.
enum class Activation { identity, tanh, softplus, softplus_shifted };

inline std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::tanh: return "tanh";
    case Activation::softplus: return "softplus";
    case Activation::softplus_shifted: return "softplus_shifted";
  }
  throw std::invalid_argument("unknown activation");
}

inline Activation activation_from_string(std::string_view s) {
  if (s == "identity") return Activation::identity;
  if (s == "tanh") return Activation::tanh;
  if (s == "softplus") return Activation::softplus;
  if (s == "softplus_shifted") return Activation::softplus_shifted;
  throw std::invalid_argument("unknown activation: " + std::string(s));
}

namespace act {

// softplus(z) = log(1 + e^z), evaluated without overflow on either tail.
template <class Scalar>
Scalar softplus(Scalar z) {
  using std::exp;
  using std::log1p;
  return z > Scalar(0) ? z + log1p(exp(-z)) : log1p(exp(z));
}

template <class Scalar>
Scalar logistic(Scalar z) {
  using std::exp;
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-z));
  const Scalar e = exp(z);
  return e / (Scalar(1) + e);
}

// Writes sigma(z), sigma'(z), sigma''(z).
template <class Scalar>
void evaluate(Activation kind, Scalar z, Scalar& value, Scalar& d1, Scalar& d2) {
  using std::tanh;
  switch (kind) {
    case Activation::identity:
      value = z;
      d1 = Scalar(1);
      d2 = Scalar(0);
      return;
    case Activation::tanh: {
      const Scalar t = tanh(z);
      value = t;
      d1 = Scalar(1) - t * t;
      d2 = Scalar(-2) * t * d1;
      return;
    }
    case Activation::softplus:
    case Activation::softplus_shifted: {
      const Scalar s = logistic(z);
      value = softplus(z);
      if (kind == Activation::softplus_shifted) value -= Scalar(M_LN2);
      d1 = s;
      d2 = s * (Scalar(1) - s);
      return;
    }
  }
  throw std::invalid_argument("unknown activation");
}

}  // namespace act
}  // namespace bcrb
