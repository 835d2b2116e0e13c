#include "ddlf/piloting.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "ddlf/rng.hpp"

namespace ddlf {

void PilotPlacement::validate() const {
  if (M <= 0 || N <= 0 || Mp < 0 || Np < 0) throw PilotError("placement: invalid shape");
  if (static_cast<long>(pilot_indices.size()) != static_cast<long>(M) * N - static_cast<long>(Mp) * Np)
    throw PilotError("placement: pilot count is not M N - Mp Np");
  if (static_cast<long>(data_indices.size()) != static_cast<long>(Mp) * Np)
    throw PilotError("placement: data count is not Mp Np");
  std::vector<char> seen(static_cast<size_t>(M) * N, 0);
  auto mark = [&](const CellIndex& c) {
    if (c.m < 0 || c.m >= M || c.n < 0 || c.n >= N) throw PilotError("placement: index outside the frame");
    char& flag = seen[static_cast<size_t>(c.m) * N + c.n];
    if (flag) throw PilotError("placement: duplicate index");
    flag = 1;
  };
  for (const auto& c : pilot_indices) mark(c);
  for (const auto& c : data_indices) mark(c);
}

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> PilotPlacement::pilot_mask() const {
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(M, N, false);
  for (const auto& c : pilot_indices) mask(c.m, c.n) = true;
  return mask;
}

PilotSequence qpsk_pilots(int count, std::uint64_t seed) {
  if (count < 0) throw PilotError("qpsk_pilots: negative count");
  Rng rng(seed);
  std::uniform_int_distribution<int> quadrant(0, 3);
  PilotSequence p{CVector(count)};
  const double h = 1.0 / std::sqrt(2.0);
  for (int s = 0; s < count; ++s) {
    const int q = quadrant(rng);
    p.symbols[s] = cplx((q & 1) ? -h : h, (q & 2) ? -h : h);
  }
  return p;
}

long lattice_min_distance_sq(int lambda, int mu) {
  if (lambda < 2) throw ConfigError("lattice_min_distance_sq: lambda must be at least 2");
  if (mu < 0 || mu >= lambda) throw ConfigError("lattice_min_distance_sq: mu must lie in [0, lambda)");
  long best = static_cast<long>(lambda) * lambda;  // l = 0, k = +-1
  for (long l = -lambda; l <= lambda; ++l) {
    if (l == 0) continue;
    // minimize (lambda k + mu l)^2 over a bracket around k* = -mu l / lambda
    const double center = -static_cast<double>(mu) * l / lambda;
    const long lo = static_cast<long>(std::floor(center)) - 1;
    const long hi = static_cast<long>(std::ceil(center)) + 1;
    for (long k = lo; k <= hi; ++k) {
      const long second = lambda * k + mu * l;
      best = std::min(best, l * l + second * second);
    }
  }
  return best;
}

int optimal_shift(int lambda) {
  int best_mu = 0;
  long best = -1;
  for (int mu = 0; mu < lambda; ++mu) {
    const long d = lattice_min_distance_sq(lambda, mu);
    if (d > best) {
      best = d;
      best_mu = mu;
    }
  }
  return best_mu;
}

namespace {

long round_half_away(double x) { return std::lround(x); }

PilotPlacement finish(int Mp, int Np, int Pp, const std::vector<std::vector<int>>& rows) {
  PilotPlacement pl;
  pl.M = Mp;
  pl.N = Np + Pp;
  pl.Mp = Mp;
  pl.Np = Np;
  for (int m = 0; m < pl.M; ++m) {
    std::vector<char> is_pilot(pl.N, 0);
    for (int n : rows[m]) {
      pl.pilot_indices.push_back({m, n});
      is_pilot[n] = 1;
    }
    for (int n = 0; n < pl.N; ++n)
      if (!is_pilot[n]) pl.data_indices.push_back({m, n});
  }
  pl.validate();
  return pl;
}

void check_shape(int Mp, int Np, int Pp) {
  if (Mp < 1 || Np < 1) throw ConfigError("placement: data frame must be at least 1x1");
  if (Pp < 1 || Pp >= Np) throw ConfigError("placement: pilots per row must lie in [1, Np)");
}

}  // namespace

PilotPlacement accordion_placement(int Mp, int Np, int Pp) {
  check_shape(Mp, Np, Pp);
  const int N = Np + Pp;
  const int lambda = static_cast<int>(round_half_away(static_cast<double>(N) / Pp));
  const int mu = optimal_shift(lambda);
  std::vector<int> base;
  for (int i = 0; i < Pp; ++i)
    base.push_back(static_cast<int>(round_half_away(static_cast<double>(i) * N / Pp)));
  std::vector<std::vector<int>> rows(Mp);
  for (int m = 0; m < Mp; ++m) {
    for (int r : base) rows[m].push_back(static_cast<int>((static_cast<long>(mu) * m + r) % N));
  }
  return finish(Mp, Np, Pp, rows);
}

PilotPlacement full_pilot_placement(int M, int N) {
  if (M < 1 || N < 1) throw ConfigError("placement: frame must be at least 1x1");
  PilotPlacement pl;
  pl.M = M;
  pl.N = N;
  for (int m = 0; m < M; ++m)
    for (int n = 0; n < N; ++n) pl.pilot_indices.push_back({m, n});
  return pl;
}

PilotPlacement clustered_placement(int Mp, int Np, int Pp) {
  check_shape(Mp, Np, Pp);
  std::vector<std::vector<int>> rows(Mp);
  for (int m = 0; m < Mp; ++m)
    for (int i = 0; i < Pp; ++i) rows[m].push_back(i);
  return finish(Mp, Np, Pp, rows);
}

double min_pilot_distance(const PilotPlacement& pl) {
  double best = std::numeric_limits<double>::infinity();
  const auto& p = pl.pilot_indices;
  for (size_t i = 0; i < p.size(); ++i) {
    for (size_t j = i + 1; j < p.size(); ++j) {
      const double dm = p[i].m - p[j].m;
      const double dn = p[i].n - p[j].n;
      best = std::min(best, std::sqrt(dm * dm + dn * dn));
    }
  }
  return best;
}

Frame multiplex(const Frame& data, const PilotSequence& pilots, const PilotPlacement& pl) {
  if (data.rows() != pl.Mp || data.cols() != pl.Np) {
    std::ostringstream err;
    err << "multiplex: data frame is " << data.rows() << "x" << data.cols() << ", placement expects " << pl.Mp
        << "x" << pl.Np;
    throw DimensionError(err.str());
  }
  if (pilots.symbols.size() != pl.pilot_count()) throw DimensionError("multiplex: pilot count mismatch");
  Frame x(pl.M, pl.N);
  for (size_t i = 0; i < pl.data_indices.size(); ++i) {
    const auto& c = pl.data_indices[i];
    x(c.m, c.n) = data(static_cast<long>(i) / pl.Np, static_cast<long>(i) % pl.Np);
  }
  for (size_t s = 0; s < pl.pilot_indices.size(); ++s) {
    const auto& c = pl.pilot_indices[s];
    x(c.m, c.n) = pilots.symbols[static_cast<long>(s)];
  }
  return x;
}

Frame demultiplex(const Frame& frame, const PilotPlacement& pl) {
  if (frame.rows() != pl.M || frame.cols() != pl.N) throw DimensionError("demultiplex: frame shape mismatch");
  Frame data(pl.Mp, pl.Np);
  for (size_t i = 0; i < pl.data_indices.size(); ++i) {
    const auto& c = pl.data_indices[i];
    data(static_cast<long>(i) / pl.Np, static_cast<long>(i) % pl.Np) = frame(c.m, c.n);
  }
  return data;
}

CVector extract_pilots(const Frame& y, const PilotPlacement& pl) {
  if (y.rows() != pl.M || y.cols() != pl.N) throw DimensionError("extract_pilots: frame shape mismatch");
  CVector q(pl.pilot_count());
  for (size_t s = 0; s < pl.pilot_indices.size(); ++s) {
    const auto& c = pl.pilot_indices[s];
    q[static_cast<long>(s)] = y(c.m, c.n);
  }
  return q;
}

void write_placement_csv(std::ostream& out, const PilotPlacement& pl) {
  std::vector<std::pair<int, int>> role(static_cast<size_t>(pl.M) * pl.N);
  for (size_t s = 0; s < pl.pilot_indices.size(); ++s) {
    const auto& c = pl.pilot_indices[s];
    role[static_cast<size_t>(c.m) * pl.N + c.n] = {1, static_cast<int>(s)};
  }
  for (size_t i = 0; i < pl.data_indices.size(); ++i) {
    const auto& c = pl.data_indices[i];
    role[static_cast<size_t>(c.m) * pl.N + c.n] = {0, static_cast<int>(i)};
  }
  out << "m,n,kind,order\n";
  for (int m = 0; m < pl.M; ++m) {
    for (int n = 0; n < pl.N; ++n) {
      const auto& [kind, order] = role[static_cast<size_t>(m) * pl.N + n];
      out << m << ',' << n << ',' << (kind ? "pilot" : "data") << ',' << order << '\n';
    }
  }
}

}  // namespace ddlf
