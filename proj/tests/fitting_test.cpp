#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "test_support.hpp"

namespace webrt {
namespace {

// Independent oracle: normal equations [n Sx; Sx Sxx][b a]' = [Sy Sxy]' solved
// with Cramer's rule in long double over raw sums.
std::pair<double, double> normal_equations(const std::vector<Point>& pts) {
  long double n = pts.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : pts) {
    sx += p.x;
    sy += p.y;
    sxx += (long double)p.x * p.x;
    sxy += (long double)p.x * p.y;
  }
  const long double det = n * sxx - sx * sx;
  const long double slope = (n * sxy - sx * sy) / det;
  const long double intercept = (sxx * sy - sx * sxy) / det;
  return {double(slope), double(intercept)};
}

TEST(FitAffine, ExactLine) {
  const Point pts[] = {{1, 1}, {2, 2}, {3, 3}};
  const auto r = fit_affine(pts);
  const auto line = std::get<Affine>(r.model);
  EXPECT_NEAR(line.slope, 1, 1e-12);
  EXPECT_NEAR(line.intercept, 0, 1e-12);
  EXPECT_DOUBLE_EQ(r.r_squared, 1);
  EXPECT_EQ(r.n_points, 3u);
}

TEST(FitAffine, ConstantData) {
  const Point pts[] = {{0, 1}, {1, 1}};
  const auto r = fit_affine(pts);
  const auto line = std::get<Affine>(r.model);
  EXPECT_DOUBLE_EQ(line.slope, 0);
  EXPECT_DOUBLE_EQ(line.intercept, 1);
  EXPECT_DOUBLE_EQ(r.r_squared, 1);  // SS_tot = SS_res = 0
}

TEST(FitAffine, RecoversNoiselessGeneratorAgainstOracle) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> size(1, 80 * 1024);
  std::vector<Point> pts;
  for (int i = 0; i < 100; ++i) {
    const double x = size(rng);
    pts.push_back({x, 0.03 * x + 40});
  }
  const auto [oracle_slope, oracle_intercept] = normal_equations(pts);
  const auto line = std::get<Affine>(fit_affine(pts).model);
  EXPECT_NEAR(line.slope, 0.03, 1e-9);
  EXPECT_NEAR(line.intercept, 40, 1e-9);
  EXPECT_NEAR(line.slope, oracle_slope, 1e-9);
  EXPECT_NEAR(line.intercept, oracle_intercept, 1e-9);
}

TEST(FitAffine, NoisyDataMatchesNormalEquations) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> size(100, 50000);
  std::normal_distribution<double> noise(0, 25);
  std::vector<Point> pts;
  for (int i = 0; i < 500; ++i) {
    const double x = size(rng);
    pts.push_back({x, 0.0303 * x + 60.64 + noise(rng)});
  }
  const auto [slope, intercept] = normal_equations(pts);
  const auto r = fit_affine(pts);
  const auto line = std::get<Affine>(r.model);
  EXPECT_NEAR(line.slope, slope, 1e-9);
  EXPECT_NEAR(line.intercept, intercept, 1e-6);
  EXPECT_GT(r.r_squared, 0.9);
  EXPECT_LT(r.r_squared, 1.0);
}

TEST(FitAffine, Degenerate) {
  const Point same_x[] = {{5, 1}, {5, 2}, {5, 3}};
  EXPECT_THROW(fit_affine(same_x), DegenerateFit);
  const Point one[] = {{5, 1}};
  EXPECT_THROW(fit_affine(one), DegenerateFit);
  EXPECT_THROW(fit_affine(std::span<const Point>{}), DegenerateFit);
}

TEST(FitLog, RecoversMediumRenderEquation) {
  std::vector<Point> pts;
  for (int x = 50; x <= 500; x += 50) pts.push_back({double(x), 0.4323 * std::log(double(x)) - 2.0771});
  const auto m = std::get<Log>(fit_log(pts).model);
  EXPECT_NEAR(m.a, 0.4323, 1e-6);
  EXPECT_NEAR(m.b, -2.0771, 1e-6);
}

TEST(FitLog, RecoversComplexRenderEquation) {
  std::vector<Point> pts;
  for (int x = 50; x <= 500; x += 50) pts.push_back({double(x), 0.55 * std::log(double(x)) - 2.6079});
  const auto m = std::get<Log>(fit_log(pts).model);
  EXPECT_NEAR(m.a, 0.55, 1e-6);
  EXPECT_NEAR(m.b, -2.6079, 1e-6);
}

TEST(FitLog, TwoPointExact) {
  const double a = 1.7, b = -0.4, e = std::exp(1.0);
  const Point pts[] = {{e, a + b}, {e * e, 2 * a + b}};
  const auto m = std::get<Log>(fit_log(pts).model);
  EXPECT_NEAR(m.a, a, 1e-12);
  EXPECT_NEAR(m.b, b, 1e-12);
}

TEST(FitLog, Errors) {
  const Point below_one[] = {{0.5, 1}, {2, 2}};
  EXPECT_THROW(fit_log(below_one), DomainError);
  const Point same[] = {{3, 1}, {3, 2}};
  EXPECT_THROW(fit_log(same), DegenerateFit);
}

std::vector<MeasurementRecord> column_records(const std::vector<double>& values, Column c) {
  std::vector<MeasurementRecord> out;
  for (double v : values) {
    MeasurementRecord r;
    r.kind = MeasurementKind::BasePage;
    switch (c) {
      case Column::Dns: r.dns_ms = v; break;
      case Column::Connect: r.connect_ms = v; break;
      case Column::FirstByte: r.fb_ms = v; break;
      case Column::ContentDownload: r.cd_ms = v; break;
    }
    out.push_back(r);
  }
  return out;
}

TEST(MeanOf, BasePageDnsTable) {
  const auto recs = column_records({169.23, 146.84, 170.33, 176.67, 149.70}, Column::Dns);
  EXPECT_NEAR(mean_of(Column::Dns, recs), 162.55, 0.01);
}

TEST(MeanOf, BasePageConnectTable) {
  const auto recs = column_records({193.13, 233.72, 135.43, 130.37, 139.77}, Column::Connect);
  EXPECT_NEAR(mean_of(Column::Connect, recs), 166.484, 1e-9);
}

TEST(MeanOf, SingletonAndMissing) {
  EXPECT_DOUBLE_EQ(mean_of(Column::Dns, column_records({42}, Column::Dns)), 42);
  EXPECT_THROW(mean_of(Column::Connect, column_records({42}, Column::Dns)), EmptyColumn);
  // absent values are skipped, not counted as zero
  auto recs = column_records({10, 20}, Column::Dns);
  recs.push_back(column_records({99}, Column::Connect).front());
  EXPECT_DOUBLE_EQ(mean_of(Column::Dns, recs), 15);
}

TEST(DeriveFirstByte, BasePageFirstByteTable) {
  const FirstByteSample rows[] = {{594.539375, 210}, {762.8876463, 140}, {542.1180042, 50},
                                  {691.0155561, 320}, {523.4878741, 140}};
  EXPECT_NEAR(derive_first_byte(rows), 450.81, 0.01);
  const FirstByteSample rounded[] = {{594.54, 210}, {762.89, 140}, {542.12, 50}, {691.02, 320}, {523.49, 140}};
  EXPECT_NEAR(derive_first_byte(rounded), 450.81, 0.02);
}

TEST(DeriveFirstByte, SmallCases) {
  const FirstByteSample all_server[] = {{500, 500}};
  EXPECT_DOUBLE_EQ(derive_first_byte(all_server), 0);
  const FirstByteSample two[] = {{300, 100}, {500, 100}};
  EXPECT_DOUBLE_EQ(derive_first_byte(two), 300);
  const FirstByteSample negative[] = {{100, 300}};
  EXPECT_DOUBLE_EQ(derive_first_byte(negative), -200);
  EXPECT_THROW(derive_first_byte(std::span<const FirstByteSample>{}), EmptyColumn);
}

// --- profile derivation ---------------------------------------------------

struct Generator {
  NetworkProfile truth;
  std::map<std::string, double> server;
};

Generator known_profile() {
  Generator g;
  g.truth.country = "XX";
  g.truth.t_dnsbp_ms = 150.25;
  g.truth.t_cbp_ms = 171.5;
  g.truth.fbbp_model = Constant{412.75};
  g.truth.cdbp_model = Affine{0.023, 227.1};
  g.truth.t_dnssc_ms = 148;
  g.truth.t_csc_ms = 163;
  g.truth.fbsc_model = Affine{0.0007, 320.5};
  g.truth.cdsc_model = Affine{0.0303, 60.64};
  g.server = {{"http://p0/", 210}, {"http://p1/", 140}, {"http://p2/", 50}};
  return g;
}

std::vector<MeasurementRecord> generate(const Generator& g, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size(1, 80 * 1024);
  std::vector<MeasurementRecord> out;
  const double fbbp = std::get<Constant>(*g.truth.fbbp_model).c;
  for (int i = 0; i < n; ++i) {
    MeasurementRecord r;
    r.size_bytes = size(rng);
    if (i % 10 == 0) {
      r.kind = MeasurementKind::BasePage;
      r.url = "http://p" + std::to_string((i / 10) % 3) + "/";
      r.domain = r.url;
      r.dns_ms = g.truth.t_dnsbp_ms;
      r.connect_ms = g.truth.t_cbp_ms;
      r.fb_ms = fbbp + g.server.at(r.url);
      r.cd_ms = evaluate(*g.truth.cdbp_model, double(r.size_bytes));
    } else {
      r.kind = MeasurementKind::Static;
      r.url = "http://cdn/" + std::to_string(i);
      r.domain = "cdn";
      r.dns_ms = g.truth.t_dnssc_ms;
      r.connect_ms = g.truth.t_csc_ms;
      r.fb_ms = evaluate(*g.truth.fbsc_model, double(r.size_bytes));
      r.cd_ms = evaluate(*g.truth.cdsc_model, double(r.size_bytes));
    }
    out.push_back(r);
  }
  return out;
}

void expect_profiles_near(const NetworkProfile& a, const NetworkProfile& b, double tol) {
  EXPECT_NEAR(a.t_dnsbp_ms, b.t_dnsbp_ms, tol);
  EXPECT_NEAR(a.t_cbp_ms, b.t_cbp_ms, tol);
  EXPECT_NEAR(a.t_dnssc_ms, b.t_dnssc_ms, tol);
  EXPECT_NEAR(a.t_csc_ms, b.t_csc_ms, tol);
  EXPECT_NEAR(a.t_sr_ms, b.t_sr_ms, tol);
  EXPECT_NEAR(std::get<Constant>(*a.fbbp_model).c, std::get<Constant>(*b.fbbp_model).c, tol);
  for (auto [x, y] : {std::pair{&a.cdbp_model, &b.cdbp_model}, {&a.fbsc_model, &b.fbsc_model},
                      {&a.cdsc_model, &b.cdsc_model}}) {
    const auto& l = std::get<Affine>(**x);
    const auto& r = std::get<Affine>(**y);
    EXPECT_NEAR(l.slope, r.slope, tol);
    EXPECT_NEAR(l.intercept, r.intercept, tol);
  }
}

TEST(BuildProfile, RecoversGenerator) {
  const auto g = known_profile();
  const auto recs = generate(g, 5000, 3);
  const auto p = build_profile(recs, g.server, "XX");
  EXPECT_EQ(p.country, "XX");
  expect_profiles_near(p, g.truth, 1e-6);
}

TEST(BuildProfile, StreamingCsvMatchesInMemory) {
  const auto g = known_profile();
  const auto recs = generate(g, 2000, 5);
  std::string csv = std::string(kMeasurementHeader) + "\n";
  for (const auto& r : recs) csv += measurement_csv_row(r) + "\n";
  std::istringstream in(csv);
  expect_profiles_near(build_profile(in, g.server, "XX"), build_profile(recs, g.server, "XX"), 1e-9);
}

TEST(BuildProfile, MissingServerTimeFallsBackToDefault) {
  const auto g = known_profile();
  const auto recs = generate(g, 300, 9);
  const auto p = build_profile(recs, {}, "XX");
  // mean over properties of (fbbp + server - 200)
  double expected = 0;
  for (const auto& [url, sp] : g.server) expected += std::get<Constant>(*g.truth.fbbp_model).c + sp - 200;
  expected /= 3;
  EXPECT_NEAR(std::get<Constant>(*p.fbbp_model).c, expected, 1e-9);
}

TEST(BuildProfile, NoStaticRecords) {
  auto recs = generate(known_profile(), 200, 1);
  std::erase_if(recs, [](const auto& r) { return r.kind == MeasurementKind::Static; });
  try {
    build_profile(recs, {}, "XX");
    FAIL();
  } catch (const EmptyColumn& e) {
    EXPECT_EQ(e.name(), "t_dnssc");
  }
}

TEST(BuildProfile, EqualStaticSizes) {
  auto recs = generate(known_profile(), 200, 1);
  for (auto& r : recs) {
    if (r.kind == MeasurementKind::Static) r.size_bytes = 4096;
  }
  try {
    build_profile(recs, {}, "XX");
    FAIL();
  } catch (const DegenerateFit& e) {
    EXPECT_EQ(e.name(), "fbsc_model");
  }
}

TEST(ReadMeasurements, Errors) {
  const std::string header = std::string(kMeasurementHeader) + "\n";
  const auto count = [](const std::string& s) {
    std::istringstream in(s);
    return read_measurements(in, [](const MeasurementRecord&) {});
  };
  EXPECT_EQ(count(header + "u,d,static,5,1,,,\n"), 1u);
  EXPECT_THROW(count(header + "u,d,static,5,,,,\n"), ParseError);
  EXPECT_THROW(count(header + "u,d,other,5,1,,,\n"), ParseError);
  EXPECT_THROW(count(header + "u,d,static,x,1,,,\n"), ParseError);
  EXPECT_THROW(count("bad header\n"), ParseError);
}

// --- validation statistics -------------------------------------------------

TEST(Validate, IndonesiaResults) {
  const PredictionPair pairs[] = {{10260.43, 10567}, {15504.78, 15154}, {10301.52, 10213},
                                  {6156.92, 6147},   {14051.69, 14386}, {15969.20, 16615}};
  const auto s = validate(pairs);
  const double hand[] = {2.90, 2.31, 0.87, 0.16, 2.32, 3.89};
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(s.per_row_error_pct[i], hand[i], 0.005);
  EXPECT_NEAR(s.mean_error_pct, 2.08, 0.03);
  EXPECT_NEAR(s.stddev_error_pct, 1.36, 0.03);
  EXPECT_TRUE(s.stddev_defined);
}

// The US claim (6.53% / 1.98%) is not reachable from its table rows with this
// error formula; pin what the rows actually give.
TEST(Validate, UnitedStatesRowsDoNotReproduceClaim) {
  const PredictionPair pairs[] = {
      {3237.89, 3084}, {4562.72, 4894}, {3234.63, 3007}, {3142.53, 3348}, {3078.00, 3248}};
  const auto s = validate(pairs);
  EXPECT_NEAR(s.mean_error_pct, 6.14, 0.01);
  EXPECT_NEAR(s.stddev_error_pct, 1.07, 0.01);
}

TEST(Validate, SmallCases) {
  const PredictionPair perfect[] = {{100, 100}};
  const auto s = validate(perfect);
  EXPECT_DOUBLE_EQ(s.mean_error_pct, 0);
  EXPECT_DOUBLE_EQ(s.stddev_error_pct, 0);
  EXPECT_FALSE(s.stddev_defined);

  const PredictionPair symmetric[] = {{110, 100}, {90, 100}};
  const auto t = validate(symmetric);
  EXPECT_NEAR(t.mean_error_pct, 10, 1e-12);
  EXPECT_NEAR(t.stddev_error_pct, 0, 1e-12);

  const PredictionPair bad[] = {{1, 0}};
  EXPECT_THROW(validate(bad), DomainError);
}

TEST(Validate, ReadsPairsCsv) {
  std::istringstream in(testing::slurp(testing::data_path("validation-id.csv")));
  const auto pairs = read_pairs_csv(in);
  ASSERT_EQ(pairs.size(), 6u);
  EXPECT_DOUBLE_EQ(pairs[1].predicted_ms, 15504.78);
  EXPECT_DOUBLE_EQ(pairs[1].measured_ms, 15154);
}

}  // namespace
}  // namespace webrt
