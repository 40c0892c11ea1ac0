#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "ecobounds/data_model.hpp"
#include "ecobounds/error.hpp"
#include "helpers.hpp"

using namespace ecobounds;

namespace {

std::vector<std::string> rules(const Dataset& d) {
  std::vector<std::string> out;
  for (const auto& v : validate(d)) out.push_back(v.rule);
  return out;
}

std::size_t first_study(const Dataset& d) {
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.samples[i].e) return i;
  return d.size();
}

}  // namespace

TEST(Validate, ValidToyHasNoViolations) { EXPECT_TRUE(validate(ecotest::toy_dataset(50, 1)).empty()); }

TEST(Validate, WUnderStudyPopulation) {
  Dataset d = ecotest::toy_dataset(20, 1);
  const auto i = first_study(d);
  d.samples[i].w = 0;
  const auto v = validate(d);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "W present under E=1");
  EXPECT_EQ(v[0].sample, i);
}

TEST(Validate, OutcomeOnUpperBoundIsFine) {
  Dataset d = ecotest::toy_dataset(20, 1);
  d.samples[first_study(d)].y = d.bounds.b;
  EXPECT_TRUE(validate(d).empty());
}

TEST(Validate, OutcomeAboveBound) {
  Dataset d = ecotest::toy_dataset(20, 1);
  d.samples[first_study(d)].y = d.bounds.b + 0.1;
  EXPECT_EQ(rules(d), std::vector<std::string>{"Y outside [a,b]"});
}

TEST(Validate, CoarseningPattern) {
  Dataset d = ecotest::toy_dataset(20, 1);
  d.samples[0].w.reset();
  d.samples[0].a = 1;
  const auto r = rules(d);
  EXPECT_NE(std::find(r.begin(), r.end(), "W missing under E=0"), r.end());
  EXPECT_NE(std::find(r.begin(), r.end(), "A present under E=0"), r.end());
  EXPECT_THROW(require_valid(d), DataError);
}

TEST(WSupport, LexicographicOrderAndDuplicates) {
  WSupport s({{1, 0}, {0, 1}, {0, 0}, {1, 1}});
  EXPECT_EQ(s.level(0), (WLevel{0, 0}));
  EXPECT_EQ(s.level(1), (WLevel{0, 1}));
  EXPECT_EQ(s.level(3), (WLevel{1, 1}));
  EXPECT_THROW(WSupport({{0}, {0}}), DataError);
  EXPECT_EQ(WSupport::from_observed({{2}, {1}, {2}}).size(), 2u);
}

TEST(WSupport, EncodingIsInjective) {
  WSupport s({{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 1}, {1, 2}});
  EXPECT_EQ(s.encoded_dim(), 3u);  // binary coordinate plus two indicators
  std::set<std::vector<double>> codes;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Vector e = s.encode(i);
    codes.insert(std::vector<double>(e.data(), e.data() + e.size()));
  }
  EXPECT_EQ(codes.size(), s.size());
}

TEST(CovariateEncoder, LayoutIsVThenWThenIntercept) {
  WSupport s({{0}, {1}});
  CovariateEncoder enc(s, 2);
  ASSERT_EQ(enc.dim(), 4u);
  const auto p = enc.profile(Vector::Constant(2, 0.5), 1);
  EXPECT_EQ(p.x[0], 0.5);
  EXPECT_EQ(p.x[2], 1.0);
  EXPECT_EQ(p.x[3], 1.0);
  EXPECT_EQ(CovariateEncoder(s, 2, false).dim(), 3u);
}

TEST(Split, PartitionAndDeterminism) {
  const Dataset d = ecotest::toy_dataset(100, 4);
  const auto [d1, d2] = split(d, 0.5, 7);
  EXPECT_EQ(d1.size(), 50u);
  EXPECT_EQ(d2.size(), 50u);
  std::multiset<double> all, parts;
  for (const auto& s : d.samples) all.insert(s.v[0]);
  for (const auto& s : d1.samples) parts.insert(s.v[0]);
  for (const auto& s : d2.samples) parts.insert(s.v[0]);
  EXPECT_EQ(all, parts);
  EXPECT_EQ(d1.bounds, d.bounds);
  EXPECT_EQ(d2.w_support, d.w_support);
  const auto again = split(d, 0.5, 7);
  EXPECT_EQ(again.first, d1);
  EXPECT_EQ(again.second, d2);
}

TEST(Split, Errors) {
  const Dataset d = ecotest::toy_dataset(100, 4);
  EXPECT_THROW(split(d, 0.0, 1), ConfigError);
  EXPECT_THROW(split(d, 1.0, 1), ConfigError);
  Dataset tiny = ecotest::toy_dataset(2, 1);
  EXPECT_THROW(split(tiny, 0.5, 1), DataError);
}

TEST(Split, SimulatedHalvesHoldBothPopulations) {
  const auto [d, truth] = generate(ecotest::small_dgp(10000, 2));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto [d1, d2] = split(d, 0.5, seed);
    EXPECT_GT(d1.count_target(), 0u);
    EXPECT_GT(d1.count_study(), 0u);
    EXPECT_GT(d2.count_target(), 0u);
    EXPECT_GT(d2.count_study(), 0u);
  }
}

TEST(Csv, RoundTripIsBitExact) {
  const auto [d, truth] = generate(ecotest::small_dgp(500, 9));
  std::ostringstream a;
  write_dataset_csv(d, a);
  std::istringstream in(a.str());
  const IngestResult r = ingest_csv(in, roundtrip_config(d));
  EXPECT_EQ(r.rows_dropped, 0u);
  EXPECT_EQ(r.dataset, d);
  std::ostringstream b;
  write_dataset_csv(r.dataset, b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Csv, FormatDoubleRoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 12345678.9, 0.0}) {
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
}

namespace {

IngestConfig trial_roles() {
  IngestConfig c;
  c.v = {"age", "smoking"};
  c.w = {"cough"};
  c.a = "treat";
  c.y = "pain";
  c.bounds = {0.0, 10.0};
  c.target_fraction = 0.5;
  c.target_seed = 3;
  return c;
}

}  // namespace

TEST(Ingest, IncompleteRowsAreDropped) {
  std::ostringstream csv;
  csv << "id,age,smoking,cough,treat,pain\n";
  ecobounds::Rng r(1);
  for (int i = 0; i < 236; ++i) {
    csv << i << ',' << 20 + r.index(50) << ',' << r.index(2) << ',';
    if (i != 40) csv << r.index(2);
    csv << ',' << r.index(2) << ',';
    if (i != 117) csv << r.index(11);
    csv << '\n';
  }
  std::istringstream in(csv.str());
  const IngestResult res = ingest_csv(in, trial_roles());
  EXPECT_EQ(res.rows_read, 236u);
  EXPECT_EQ(res.rows_dropped, 2u);
  EXPECT_EQ(res.dataset.size(), 234u);
  EXPECT_EQ(res.dataset.count_target(), 117u);
  EXPECT_TRUE(res.dataset.columns.v_discrete[1]);
}

TEST(Ingest, EmptyFile) {
  std::istringstream empty("");
  try {
    ingest_csv(empty, trial_roles());
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("no data rows"), std::string::npos);
  }
  std::istringstream header_only("age,smoking,cough,treat,pain\n");
  EXPECT_THROW(ingest_csv(header_only, trial_roles()), DataError);
}

TEST(Ingest, UnknownColumnIsListed) {
  std::istringstream in("age,smoking,cough,arm,pain\n30,1,0,1,4\n");
  try {
    ingest_csv(in, trial_roles());
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("treat"), std::string::npos);
  }
}

TEST(Ingest, NonNumericCell) {
  std::istringstream in("age,smoking,cough,treat,pain\n30,yes,0,1,4\n31,0,1,0,3\n");
  EXPECT_THROW(ingest_csv(in, trial_roles()), DataError);
}

TEST(Ingest, OverlappingRolesRejected) {
  IngestConfig c = trial_roles();
  c.w = {"age"};
  std::istringstream in("age,smoking,treat,pain\n30,1,1,4\n");
  EXPECT_THROW(ingest_csv(in, c), ConfigError);
}
