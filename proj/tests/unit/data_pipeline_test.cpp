#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "fixtures.hpp"
#include "sfp/sfp.hpp"

using namespace sfp;

TEST(ParseCsv, MissingTokensAndTypes) {
  const auto t = parse_csv("a,b,c,y\n1,red,?,1\n2,blue,3,2\n,red,4,1\n", "y");
  ASSERT_EQ(t.features.size(), 3u);
  EXPECT_EQ(t.rows(), 3u);
  EXPECT_EQ(t.features[0].type, ColumnType::numeric);
  EXPECT_TRUE(t.features[0].missing[2]);
  EXPECT_EQ(t.features[1].type, ColumnType::categorical);
  EXPECT_TRUE(t.features[2].missing[0]);
  EXPECT_EQ(t.features[2].missing_count(), 1u);
  ASSERT_TRUE(t.label.has_value());
  EXPECT_EQ(t.label->name, "y");
}

TEST(ParseCsv, QuotedFieldsAndHints) {
  const auto t = parse_csv("name,v\n\"x, y\",1\n\"say \"\"hi\"\"\",2\n", "", SchemaHints{{"v", ColumnType::categorical}});
  EXPECT_EQ(t.features[0].text[0], "x, y");
  EXPECT_EQ(t.features[0].text[1], "say \"hi\"");
  EXPECT_EQ(t.features[1].type, ColumnType::categorical);
  EXPECT_FALSE(t.label.has_value());
  EXPECT_THROW(parse_csv("v\nabc\n", "", SchemaHints{{"v", ColumnType::numeric}}), SchemaError);
}

TEST(ParseCsv, SchemaErrors) {
  EXPECT_THROW(parse_csv("a,b,y\n", "y"), SchemaError);
  EXPECT_THROW(parse_csv("", "y"), SchemaError);
  try {
    parse_csv("a,y\n1,2\n3\n", "y");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos);
  }
  EXPECT_THROW(parse_csv("a,b\n1,2\n", "y"), SchemaError);
  EXPECT_THROW(load_csv("/nonexistent/file.csv", "y"), IoError);
}

TEST(Preprocess, ImputesMedianThenStandardizes) {
  const auto raw = parse_csv("a,y\n1,1\n?,2\n2,1\n", "y");
  const auto [ds, stats] = preprocess(raw, LossKind::logloss);
  EXPECT_EQ(stats.inputs[0].median, 1.5);
  EXPECT_NEAR(ds.features(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(ds.features(1, 0), 0.0, 1e-15);
  EXPECT_NEAR(ds.features(2, 0), 1.0, 1e-15);
  EXPECT_EQ(ds.classes, 2);
  EXPECT_EQ(ds.labels, (std::vector<double>{0, 1, 0}));
}

TEST(Preprocess, OneHotForCategoricals) {
  const auto raw = parse_csv("c,y\nred,1\nblue,2\nred,1\ngreen,2\n", "y");
  const auto [ds, stats] = preprocess(raw, LossKind::logloss);
  EXPECT_EQ(stats.feature_names(), (std::vector<std::string>{"c=blue", "c=green", "c=red"}));
  for (std::size_t r = 0; r < 4; ++r) {
    int hot = 0;
    for (std::size_t o = 0; o < 3; ++o) hot += ds.features(r, o) > 0;
    EXPECT_EQ(hot, 1);
  }
  // a level never seen during fitting maps to all-zero indicators, i.e. minus the means
  const auto test = parse_csv("c,y\npurple,1\n", "y");
  const auto [td, _] = preprocess(test, stats);
  for (std::size_t o = 0; o < 3; ++o)
    EXPECT_NEAR(td.features(0, o), -stats.outputs[o].mean / stats.outputs[o].sd, 1e-15);
}

TEST(Preprocess, DropsConstantColumns) {
  const auto raw = parse_csv("a,k,y\n1,5,1\n2,5,2\n3,5,1\n", "y");
  const auto [ds, stats] = preprocess(raw, LossKind::logloss);
  EXPECT_EQ(ds.dims(), 1u);
  EXPECT_EQ(stats.dropped, (std::vector<std::string>{"k"}));
  EXPECT_FALSE(stats.warnings.empty());
  EXPECT_THROW(preprocess(parse_csv("k,y\n5,1\n5,2\n", "y"), LossKind::logloss), SchemaError);
}

TEST(Preprocess, IdempotentOnStandardizedData) {
  const auto d = fixture::mixture3(120, 2);
  const auto [once, s1] = preprocess(to_table(d, LossKind::logloss), LossKind::logloss);
  const auto [twice, s2] = preprocess(to_table(once, LossKind::logloss), LossKind::logloss);
  for (std::size_t t = 0; t < once.features.data().size(); ++t)
    EXPECT_NEAR(once.features.data()[t], twice.features.data()[t], 1e-12);
  for (const auto& o : s2.outputs) {
    EXPECT_NEAR(o.mean, 0.0, 1e-12);
    EXPECT_NEAR(o.sd, 1.0, 1e-12);
  }
}

TEST(Preprocess, TestRowsDoNotChangeTrainingStatistics) {
  const auto raw = to_table(fixture::mixture3(100, 5), LossKind::logloss);
  std::vector<std::size_t> train(60), test(40);
  std::iota(train.begin(), train.end(), 0);
  std::iota(test.begin(), test.end(), 60);
  const auto [_, stats] = preprocess(raw.subset(train), LossKind::logloss);
  auto perturbed = raw;
  for (std::size_t r = 60; r < 100; ++r) perturbed.features[0].numbers[r] += 1e3;
  const auto [__, again] = preprocess(perturbed.subset(train), LossKind::logloss);
  ASSERT_EQ(stats.outputs.size(), again.outputs.size());
  for (std::size_t o = 0; o < stats.outputs.size(); ++o) {
    EXPECT_EQ(stats.outputs[o].mean, again.outputs[o].mean);
    EXPECT_EQ(stats.outputs[o].sd, again.outputs[o].sd);
  }
}

TEST(Preprocess, LabelEncodings) {
  const auto raw = parse_csv("a,y\n1,no\n2,yes\n3,no\n", "y");
  const auto [ds, stats] = preprocess(raw, LossKind::logistic);
  EXPECT_EQ(ds.labels, (std::vector<double>{-1, 1, -1}));
  EXPECT_EQ(stats.label_text(1), "yes");
  EXPECT_THROW(preprocess(parse_csv("a,y\n1,a\n2,b\n3,c\n", "y"), LossKind::logistic), SchemaError);
  const auto [reg, _] = preprocess(parse_csv("a,y\n1,0.5\n2,-3\n", "y"), LossKind::squared_error);
  EXPECT_EQ(reg.labels, (std::vector<double>{0.5, -3}));
  // 1-based integer classes keep their numbering even when a class is absent
  const auto [dense, st] = preprocess(parse_csv("a,y\n1,1\n2,3\n", "y"), LossKind::logloss);
  EXPECT_EQ(st.label_levels.size(), 3u);
  EXPECT_EQ(dense.labels, (std::vector<double>{0, 2}));
}

TEST(CsvRoundTrip, WriteThenRead) {
  const auto d = gen_synthetic(SyntheticKind::spiral, 40, 3);
  std::ostringstream out;
  write_csv(out, d, LossKind::logloss);
  const auto back = to_dataset(parse_csv(out.str(), "y"), LossKind::logloss);
  EXPECT_EQ(back.features, d.features);
  EXPECT_EQ(back.labels, d.labels);
  EXPECT_EQ(back.classes, 2);
}

TEST(Generators, Mixture3MatchesItsDefinition) {
  const auto d = gen_synthetic(SyntheticKind::mixture3, 20000, 1);
  EXPECT_EQ(d.classes, 3);
  std::vector<double> count(3), s1(3), s2(3), q1(3), q2(3);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto c = static_cast<std::size_t>(d.labels[i]);
    ++count[c];
    s1[c] += d.features(i, 0);
    s2[c] += d.features(i, 1);
    q1[c] += d.features(i, 0) * d.features(i, 0);
    q2[c] += d.features(i, 1) * d.features(i, 1);
  }
  const double n = static_cast<double>(d.size());
  EXPECT_NEAR(count[0] / n, 0.25, 0.015);
  EXPECT_NEAR(count[1] / n, 0.25, 0.015);
  EXPECT_NEAR(count[2] / n, 0.5, 0.015);
  auto var = [&](std::vector<double>& q, std::vector<double>& s, std::size_t c) {
    return q[c] / count[c] - (s[c] / count[c]) * (s[c] / count[c]);
  };
  EXPECT_NEAR(var(q1, s1, 0), 15.0, 0.75);
  EXPECT_NEAR(var(q2, s2, 0), 0.05, 0.005);
  EXPECT_NEAR(s1[1] / count[1], -12.0, 0.1);
  // third class mixes N(8, 4) and N(-4, 1) on x2 with weights 2/3, 1/3
  EXPECT_NEAR(s2[2] / count[2], 4.0, 0.15);
}

TEST(Generators, DeterministicAndBalanced) {
  for (auto k : {SyntheticKind::spiral, SyntheticKind::two_circle, SyntheticKind::xor_pattern}) {
    const auto a = gen_synthetic(k, 400, 12), b = gen_synthetic(k, 400, 12);
    EXPECT_EQ(a.features, b.features);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_NE(gen_synthetic(k, 400, 13).features, a.features);
    const double ones = std::accumulate(a.labels.begin(), a.labels.end(), 0.0);
    EXPECT_NEAR(ones / 400.0, 0.5, 0.1);
  }
  const auto x = gen_synthetic(SyntheticKind::xor_pattern, 500, 4);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_GE(std::abs(x.features(i, 0) * x.features(i, 1)), 0.02);
    EXPECT_EQ(x.labels[i], x.features(i, 0) * x.features(i, 1) > 0 ? 0.0 : 1.0);
  }
  EXPECT_THROW(gen_synthetic(SyntheticKind::spiral, 3, 1), DomainError);
  EXPECT_THROW(synthetic_kind_from_string("moons"), DomainError);
}
