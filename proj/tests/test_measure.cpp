#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "momentkit/measure.hpp"
#include "momentkit/sequences.hpp"

using namespace momentkit;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Independent F-volume oracle: apply the 1-d difference operator axis by
// axis, G(x) -> G(..b_i..) - G(..a_i..), recursively.
double volume_oracle(const DistributionFunction& F, const Box& box, std::vector<double> point,
                     int axis) {
  if (axis == F.dim) return F(point);
  point[axis] = box.b[axis];
  const double hi = volume_oracle(F, box, point, axis + 1);
  point[axis] = box.a[axis];
  const double lo = volume_oracle(F, box, point, axis + 1);
  return hi - lo;
}

double volume_oracle(const DistributionFunction& F, const Box& box) {
  return volume_oracle(F, box, std::vector<double>(F.dim, 0.0), 0);
}

DistributionFunction product_df(std::vector<std::function<double(double)>> fs) {
  const int d = static_cast<int>(fs.size());
  return DistributionFunction{d, [fs](const std::vector<double>& x) {
                                double p = 1.0;
                                for (std::size_t i = 0; i < fs.size(); ++i) p *= fs[i](x[i]);
                                return p;
                              }};
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

TEST_CASE("f_volume matches the corner expansion") {
  SECTION("product df on the unit square") {
    DistributionFunction F{2, [](const std::vector<double>& x) { return x[0] * x[1]; }};
    CHECK_THAT(f_volume(F, Box({0.0, 0.0}, {1.0, 1.0})), WithinAbs(1.0, 1e-15));
  }
  SECTION("1-d increment of a clamp df") {
    DistributionFunction F{1, [](const std::vector<double>& x) { return clamp01(x[0]); }};
    CHECK_THAT(f_volume(F, Box(0.2, 0.5)), WithinAbs(0.3, 1e-15));
  }
  SECTION("3-d box against the 8-corner oracle") {
    DistributionFunction F{3, [](const std::vector<double>& x) { return x[0] * x[1] * x[2]; }};
    Box box({0.0, 0.0, 0.0}, {0.5, 0.5, 0.5});
    const double expected = volume_oracle(F, box);
    CHECK_THAT(expected, WithinAbs(0.125, 1e-15));
    CHECK_THAT(f_volume(F, box), WithinAbs(expected, 1e-15));
  }
  SECTION("dimension mismatch is an error") {
    DistributionFunction F{2, [](const std::vector<double>& x) { return x[0] * x[1]; }};
    CHECK_THROWS_AS(f_volume(F, Box(0.0, 1.0)), std::invalid_argument);
  }
  SECTION("non-finite corner evaluation is an error") {
    DistributionFunction F{1, [](const std::vector<double>&) { return detail::kInf; }};
    CHECK_THROWS_AS(f_volume(F, Box(0.0, 1.0)), std::runtime_error);
  }
}

TEST_CASE("f_volume properties on random product dfs") {
  std::mt19937_64 rng(20240811);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  std::uniform_int_distribution<int> dim_dist(1, 4);

  for (int rep = 0; rep < 50; ++rep) {
    const int d = dim_dist(rng);
    std::vector<std::function<double(double)>> fs;
    for (int i = 0; i < d; ++i) {
      const double shift = unif(rng);
      fs.push_back([shift](double x) { return clamp01(x - shift); });
    }
    DistributionFunction F = product_df(fs);

    std::vector<double> lo(d), hi(d);
    for (int i = 0; i < d; ++i) {
      double u = unif(rng), v = unif(rng);
      lo[i] = std::min(u, v);
      hi[i] = std::max(u, v);
    }
    Box box(lo, hi);

    const double vol = f_volume(F, box);
    // product factorization
    double prod = 1.0;
    for (int i = 0; i < d; ++i) prod *= fs[i](hi[i]) - fs[i](lo[i]);
    CHECK_THAT(vol, WithinAbs(prod, 1e-12));
    // agreement with the corner oracle
    CHECK_THAT(vol, WithinAbs(volume_oracle(F, box), 1e-12));
    // split additivity along a random axis
    std::uniform_int_distribution<int> axis_dist(0, d - 1);
    const int ax = axis_dist(rng);
    const double mid = 0.5 * (lo[ax] + hi[ax]);
    std::vector<double> hi_left = hi, lo_right = lo;
    hi_left[ax] = mid;
    lo_right[ax] = mid;
    CHECK_THAT(f_volume(F, Box(lo, hi_left)) + f_volume(F, Box(lo_right, hi)),
               WithinAbs(vol, 1e-12));
    // degenerate box
    CHECK(f_volume(F, Box(lo, lo)) == 0.0);
  }
}

TEST_CASE("is_df validates grid axioms") {
  GridSpec unit_grid{{{0.0, 0.25, 0.5, 0.75, 1.0}, {0.0, 0.25, 0.5, 0.75, 1.0}}};

  SECTION("min of two coordinates is a df") {
    DistributionFunction F{2, [](const std::vector<double>& x) {
                             return clamp01(std::min(x[0], x[1]));
                           }};
    const auto rep = is_df(F, unit_grid, 1e-9, 1.0);
    CHECK(rep.pass);
    CHECK(rep.min_box_volume >= -1e-9);
  }
  SECTION("max of two coordinates fails with a witness box") {
    DistributionFunction F{2, [](const std::vector<double>& x) {
                             return clamp01(std::max(x[0], x[1]));
                           }};
    const auto rep = is_df(F, unit_grid, 1e-9);
    CHECK_FALSE(rep.pass);
    CHECK_FALSE(rep.box_positivity_pass);
    REQUIRE(rep.witness_box.has_value());
    // the witness must actually carry negative volume
    CHECK(f_volume(F, *rep.witness_box) < 0.0);
    // the full unit box has volume 1 - 1 - 1 + 0 = -1
    CHECK_THAT(f_volume(F, Box({0.0, 0.0}, {1.0, 1.0})), WithinAbs(-1.0, 1e-15));
  }
  SECTION("a strictly decreasing 1-d function fails") {
    DistributionFunction F{1, [](const std::vector<double>& x) { return -x[0]; }};
    const auto rep = is_df(F, GridSpec{{{0.0, 0.5, 1.0}}}, 1e-9);
    CHECK_FALSE(rep.pass);
    CHECK(rep.min_box_volume < 0.0);
  }
}

TEST_CASE("cdf of built-in measures") {
  SECTION("an atom is right-closed") {
    const MeasureRep d0 = dirac(0.0);
    CHECK(cdf(d0, -0.5) == 0.0);
    CHECK(cdf(d0, 0.0) == 1.0);
  }
  SECTION("uniform") { CHECK_THAT(cdf(uniform(0.0, 1.0), 0.3), WithinAbs(0.3, 1e-14)); }
  SECTION("mixture by direct sum") {
    const MeasureRep m = MeasureRep::mixture({{0.5, dirac(0.0)}, {0.5, uniform(0.0, 1.0)}});
    CHECK_THAT(cdf(m, 0.0), WithinAbs(0.5, 1e-14));
    CHECK_THAT(cdf(m, 0.5), WithinAbs(0.75, 1e-14));
  }
}

TEST_CASE("cdf is monotone and right-continuous with the expected limits") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  std::uniform_real_distribution<double> wdist(0.1, 1.0);

  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> xs, ws;
    const int n = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < n; ++i) {
      xs.push_back(unif(rng));
      ws.push_back(wdist(rng));
    }
    double total = 0.0;
    for (double w : ws) total += w;
    for (double& w : ws) w /= total;
    MeasureRep m = MeasureRep::mixture(
        {{0.5, MeasureRep::atomic1d(xs, ws)}, {0.5, uniform(unif(rng) - 2.0, 3.0)}});

    double prev = -1.0;
    for (double x = -6.0; x <= 6.0; x += 0.25) {
      const double v = cdf(m, x);
      CHECK(v >= prev - 1e-12);
      CHECK(cdf(m, x + 1e-9) - v >= -1e-12);
      CHECK(cdf(m, x + 1e-9) - v <= 1e-6);
      prev = v;
    }
    CHECK_THAT(cdf(m, -1e6), WithinAbs(0.0, 1e-12));
    CHECK_THAT(cdf(m, 1e6), WithinAbs(1.0, 1e-12));
    // d=1 consistency: box volume equals the cdf increment
    const DistributionFunction F = df_from_measure(m);
    for (double a = -3.0; a < 3.0; a += 1.1) {
      CHECK_THAT(f_volume(F, Box(a, a + 1.3)), WithinAbs(cdf(m, a + 1.3) - cdf(m, a), 1e-12));
    }
  }
}

TEST_CASE("spectrum_report") {
  SECTION("a single atom") {
    const auto rep = spectrum_report(dirac(0.0));
    REQUIRE(rep.point_spectrum.size() == 1);
    CHECK(rep.point_spectrum[0].first == 0.0);
    CHECK(rep.intervals.empty());
    REQUIRE(rep.isolated_points.size() == 1);
  }
  SECTION("atom plus density is the union of the parts") {
    const auto rep =
        spectrum_report(MeasureRep::mixture({{0.5, dirac(0.0)}, {0.5, uniform(1.0, 2.0)}}));
    REQUIRE(rep.point_spectrum.size() == 1);
    CHECK(rep.point_spectrum[0].first == 0.0);
    REQUIRE(rep.intervals.size() == 1);
    CHECK(rep.intervals[0] == std::pair{1.0, 2.0});
    REQUIRE(rep.isolated_points.size() == 1);  // the atom sits outside [1,2]
  }
  SECTION("pure density has no atoms") {
    const auto rep = spectrum_report(uniform(0.0, 1.0));
    CHECK(rep.point_spectrum.empty());
    REQUIRE(rep.intervals.size() == 1);
    CHECK(rep.intervals[0] == std::pair{0.0, 1.0});
  }
  SECTION("overlapping densities merge") {
    const auto rep = spectrum_report(
        MeasureRep::mixture({{0.5, uniform(0.0, 1.5)}, {0.5, uniform(1.0, 2.0)}}));
    REQUIRE(rep.intervals.size() == 1);
    CHECK(rep.intervals[0] == std::pair{0.0, 2.0});
  }
}

TEST_CASE("is_f_continuous_interval") {
  const MeasureRep u = uniform(0.0, 1.0);
  CHECK(is_f_continuous_interval(u, Box(-0.5, 0.5), 1e-12));
  CHECK(is_f_continuous_interval(u, Box(0.0, 1.0), 1e-12));

  const MeasureRep m = MeasureRep::mixture({{0.5, dirac(0.0)}, {0.5, uniform(0.0, 1.0)}});
  CHECK_FALSE(is_f_continuous_interval(m, Box(-1.0, 0.0), 1e-12));  // corner 0 has mass 1/2
  CHECK(is_f_continuous_interval(m, Box(0.1, 0.9), 1e-12));

  // purely atomic: exact, tolerance ignored
  const MeasureRep two = MeasureRep::atomic1d({-1.0, 1.0}, {0.5, 0.5});
  CHECK_FALSE(is_f_continuous_interval(two, Box(0.0, 1.0), 0.9));
  CHECK(is_f_continuous_interval(two, Box(-0.5, 0.5), 0.0));

  CHECK_THROWS_AS(is_f_continuous_interval(u, Box(0.0, detail::kInf), 1e-12),
                  std::invalid_argument);
}

TEST_CASE("moments") {
  SECTION("atom powers") {
    for (int n = 0; n <= 6; ++n) CHECK(moment(dirac(0.5), n) == detail::powi(0.5, n));
  }
  SECTION("uniform against the analytic integral") {
    const MeasureRep u = uniform(0.0, 1.0);
    for (int n = 0; n <= 12; ++n) CHECK_THAT(moment(u, n), WithinAbs(1.0 / (n + 1), 1e-13));
  }
  SECTION("product factorizes") {
    const MeasureRep p = MeasureRep::product({uniform(0.0, 1.0), uniform(0.0, 1.0)});
    CHECK_THAT(moment(p, MultiIndex{1, 2}), WithinAbs(1.0 / 6.0, 1e-13));
  }
  SECTION("normal even moments are double factorials") {
    const MeasureRep n01 = normal(0.0, 1.0);
    double dfact = 1.0;
    for (int k = 1; k <= 8; ++k) {
      dfact *= 2 * k - 1;
      CHECK_THAT(moment(n01, 2 * k), WithinRel(dfact, 1e-11));
    }
    CHECK_THAT(moment(n01, 3), WithinAbs(0.0, 1e-11));
  }
  SECTION("lognormal heavy-tail moments") {
    const MeasureRep ln = lognormal(1.0);
    for (int n = 1; n <= 10; ++n)
      CHECK_THAT(moment(ln, n), WithinRel(std::exp(0.5 * n * n), 1e-10));
  }
  SECTION("order zero is the total mass for atoms") {
    const MeasureRep m = MeasureRep::atomic1d({-1.0, 0.5, 2.0}, {0.25, 0.5, 0.25});
    CHECK(moment(m, 0) == m.mass());
  }
  SECTION("dimension mismatch is an error") {
    CHECK_THROWS_AS(moment(dirac(0.0), MultiIndex{1, 1}), std::invalid_argument);
  }
}

TEST_CASE("discretize replaces densities by quadrature atoms") {
  const MeasureRep d = discretize(uniform(0.0, 1.0), 100);
  CHECK(is_purely_atomic(d));
  CHECK(flatten_atoms_1d(d).size() == 100);
  CHECK_THAT(d.mass(), WithinAbs(1.0, 1e-12));
  for (int n = 1; n <= 8; ++n) CHECK_THAT(moment(d, n), WithinAbs(1.0 / (n + 1), 1e-10));

  // an already atomic measure is returned unchanged
  const MeasureRep a = MeasureRep::atomic1d({0.0, 1.0}, {0.5, 0.5});
  CHECK(flatten_atoms_1d(discretize(a, 50)) == flatten_atoms_1d(a));
}

TEST_CASE("poisson truncation folds the tail into the last atom") {
  const MeasureRep p = poisson(1.0);
  CHECK_THAT(p.mass(), WithinAbs(1.0, 1e-15));
  CHECK_THAT(moment(p, 1), WithinAbs(1.0, 1e-11));
  CHECK_THAT(moment(p, 2), WithinAbs(2.0, 1e-10));

  const MeasureRep p40 = poisson(1.0, 40);
  CHECK(flatten_atoms_1d(p40).size() == 41);
  CHECK_THAT(p40.mass(), WithinAbs(1.0, 1e-15));
}

TEST_CASE("measure invariants are enforced") {
  CHECK_THROWS_AS(MeasureRep::atomic1d({0.0, 0.0}, {0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(MeasureRep::atomic1d({0.0}, {-1.0}), std::invalid_argument);
  CHECK_THROWS_AS(MeasureRep::mixture({{-0.5, dirac(0.0)}, {0.5, dirac(1.0)}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(uniform(1.0, 0.0), std::invalid_argument);
  // mixtures must agree on dimension
  CHECK_THROWS_AS(MeasureRep::mixture(
                      {{0.5, dirac(0.0)},
                       {0.5, MeasureRep::product({dirac(0.0), dirac(1.0)})}}),
                  std::invalid_argument);
}
