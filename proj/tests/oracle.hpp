#pragma once

// Independent high-precision evaluation of the detection model and the
// secure-gain formula. Shares no code with the library. Every function takes
// its number type as a template argument, 50 decimal digits by default.

#include <type_traits>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace oracle {

using Real = boost::multiprecision::cpp_bin_float_50;

template <class R>
using Arg = std::type_identity_t<R>;

template <class R = Real>
R log2r(Arg<R> x) {
  return log(x) / log(R(2));
}

template <class R = Real>
R transmission(Arg<R> length_km, Arg<R> alpha) {
  return pow(R(10), -alpha * length_km / 10);
}

template <class R = Real>
R detection(Arg<R> mu, Arg<R> eta, Arg<R> t, Arg<R> d) {
  return mu * eta * t + d;
}

template <class R = Real>
R multiphoton_approx(Arg<R> mu) {
  return mu * mu / 2;
}

// 1 - e^-mu (1 + mu) as its alternating series, sum_{k>=2} (-1)^k mu^k (k-1) / k!
template <class R = Real>
R multiphoton_exact_series(Arg<R> mu) {
  R sum = 0;
  R term = 1;  // mu^k / k!
  for (int k = 1; k < 200; ++k) {
    term *= mu / k;
    if (k >= 2) sum += ((k % 2 == 0) ? 1 : -1) * term * (k - 1);
  }
  return sum;
}

template <class R = Real>
R qber(Arg<R> mu, Arg<R> eta, Arg<R> t, Arg<R> d, Arg<R> modulation_error) {
  const R signal = mu * eta * t;
  return (modulation_error * signal + d / 2) / (signal + d);
}

template <class R = Real>
R h2(Arg<R> e) {
  if (e <= 0 || e >= 1) return 0;
  return -(e * log2r<R>(e) + (1 - e) * log2r<R>(1 - e));
}

template <class R = Real>
R tau(Arg<R> p, Arg<R> s, Arg<R> e) {
  const R beta = (p - s) / p;
  const R ep = e * p / (p - s);
  return beta * (1 - log2r<R>(1 + 4 * ep - 4 * ep * ep));
}

// G = P/2 { (P-S)/P (1 - log2[...]) + f [e log2 e + (1-e) log2 (1-e)] }
template <class R = Real>
R gain(Arg<R> mu, Arg<R> eta, Arg<R> alpha, Arg<R> length_km, Arg<R> d, Arg<R> modulation_error,
       Arg<R> f) {
  const R t = transmission<R>(length_km, alpha);
  const R p = detection<R>(mu, eta, t, d);
  const R s = multiphoton_approx<R>(mu);
  const R e = qber<R>(mu, eta, t, d, modulation_error);
  return p / 2 * (tau<R>(p, s, e) + f * (e * log2r<R>(e) + (1 - e) * log2r<R>(1 - e)));
}

}  // namespace oracle
