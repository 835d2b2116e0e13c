#include "ddlf/grid.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace ddlf {

GaborGrid GaborGrid::make(int M, int N, double subcarrier_spacing, double tf) {
  if (M <= 0 || N <= 0) throw ConfigError("grid: M and N must be positive");
  if (!(subcarrier_spacing > 0.0)) throw ConfigError("grid: subcarrier spacing must be positive");
  if (!(tf > 1.0)) throw ConfigError("grid: time-frequency product must exceed 1");

  GaborGrid g;
  g.M = M;
  g.N = N;
  g.b = static_cast<int>(std::lround(tf * N));
  if (g.b <= N) g.b = N + 1;
  const long base = std::lcm(static_cast<long>(N), static_cast<long>(g.b));
  const long slots = base / g.b;
  const long reps = (M + slots - 1) / slots;
  g.L = static_cast<int>(base * reps);
  g.a = g.L / N;
  g.fs = g.channels() * subcarrier_spacing;
  g.validate();
  return g;
}

long GaborGrid::first_bin() const {
  const long gap = static_cast<long>(L) - static_cast<long>(M - 1) * b;
  return -(gap / 2);
}

long GaborGrid::first_sample() const { return -(a / 2); }

void GaborGrid::validate() const {
  std::ostringstream err;
  if (M <= 0 || N <= 0 || a <= 0 || b <= 0 || L <= 0) {
    err << "grid: non-positive dimension (M=" << M << ", N=" << N << ", a=" << a << ", b=" << b
        << ", L=" << L << ")";
  } else if (L != a * N) {
    err << "grid: L=" << L << " is not a*N=" << a * N;
  } else if (L % b != 0) {
    err << "grid: L=" << L << " is not a multiple of b=" << b;
  } else if (static_cast<long>(M) * b > L) {
    err << "grid: M*b=" << M * b << " exceeds L=" << L;
  } else if (b <= N) {
    err << "grid: time-frequency product " << tf() << " is not above 1";
  } else if (!(fs > 0.0)) {
    err << "grid: sampling rate must be positive";
  }
  if (!err.str().empty()) throw ConfigError(err.str());
}

bool operator==(const GaborGrid& lhs, const GaborGrid& rhs) {
  return lhs.M == rhs.M && lhs.N == rhs.N && lhs.a == rhs.a && lhs.b == rhs.b && lhs.L == rhs.L &&
         lhs.fs == rhs.fs;
}

}  // namespace ddlf
