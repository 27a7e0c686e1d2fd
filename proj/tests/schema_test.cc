/*
 * Copyright 2026 The celldx Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "celldx/encoding.h"
#include "celldx/error.h"
#include "celldx/nn.h"
#include "celldx/schema.h"
#include "celldx/table.h"
#include "test_util.h"

namespace celldx {
namespace {

RawTable Column(std::vector<std::string> values) {
  std::vector<std::vector<std::string>> rows;
  for (auto& v : values) rows.push_back({std::move(v)});
  return RawTable({"x"}, std::move(rows));
}

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIo;
}

TEST(CsvTest, RoundTripsQuotedFields) {
  RawTable t({"a", "b"}, {{"x,y", "he said \"hi\""}, {"line\nbreak", "plain"}});
  EXPECT_EQ(ParseCsv(FormatCsv(t)), t);
}

TEST(CsvTest, SkipsBomAndHandlesCrlf) {
  const RawTable t = ParseCsv("\xEF\xBB\xBF" "a,b\r\n1,2\r\n");
  ASSERT_EQ(t.num_rows(), 1u);
  EXPECT_EQ(t.header()[0], "a");
  EXPECT_EQ(t.cell(0, 1), "2");
}

TEST(CsvTest, RaggedRowIsRejected) {
  EXPECT_THROW(ParseCsv("a,b\n1\n"), Error);
}

TEST(ParseRealTest, StrictParsing) {
  EXPECT_EQ(ParseReal("1.5"), 1.5);
  EXPECT_EQ(ParseReal(" -2e3 "), -2000.0);
  EXPECT_EQ(ParseReal("+4"), 4.0);
  EXPECT_FALSE(ParseReal("1.5x"));
  EXPECT_FALSE(ParseReal(""));
  EXPECT_FALSE(ParseReal("abc"));
}

TEST(FormatRealTest, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -12345.678, 1e-300, 6.02e23}) {
    EXPECT_EQ(*ParseReal(FormatReal(v)), v);
  }
}

TEST(InferSchemaTest, CategoricalFirstOccurrenceOrder) {
  const Schema s = InferSchema(Column({"a", "b", "a"}));
  ASSERT_EQ(s.size(), 1u);
  EXPECT_TRUE(s.attribute(0).is_categorical());
  EXPECT_EQ(s.attribute(0).categories, (std::vector<std::string>{"a", "b"}));
}

TEST(InferSchemaTest, ParseableColumnIsNumeric) {
  EXPECT_TRUE(InferSchema(Column({"1.5", "2.0"})).attribute(0).is_numeric());
}

TEST(InferSchemaTest, MixedColumnWithoutOverride) {
  EXPECT_EQ(CodeOf([] { InferSchema(Column({"1", "x"})); }), ErrorCode::kMixedColumn);
}

TEST(InferSchemaTest, OverrideForcesCategorical) {
  const Schema s = InferSchema(Column({"1", "x", "1"}), ParseKindOverrides("x:cat"));
  EXPECT_EQ(s.attribute(0).categories, (std::vector<std::string>{"1", "x"}));
  const Schema n = InferSchema(Column({"1", "2"}), ParseKindOverrides("x:cat"));
  EXPECT_TRUE(n.attribute(0).is_categorical());
}

TEST(InferSchemaTest, TooFewRows) {
  EXPECT_EQ(CodeOf([] { InferSchema(Column({"1"})); }), ErrorCode::kEmptyTable);
}

TEST(FitEncoderTest, PopulationStandardDeviation) {
  const RawTable t = Column({"1", "2", "3"});
  const Schema s = FitEncoder(t, InferSchema(t));
  EXPECT_DOUBLE_EQ(s.attribute(0).mean, 2.0);
  EXPECT_NEAR(s.attribute(0).std_dev, std::sqrt(2.0 / 3.0), 1e-15);
  EXPECT_NEAR(s.attribute(0).std_dev, 0.8165, 5e-5);
}

TEST(FitEncoderTest, ConstantColumnRejected) {
  const RawTable t = Column({"5", "5", "5"});
  EXPECT_EQ(CodeOf([&] { FitEncoder(t, InferSchema(t)); }), ErrorCode::kConstantColumn);
}

TEST(FitEncoderTest, CategoricalUntouched) {
  const RawTable t = Column({"a", "b", "a"});
  const Schema s = InferSchema(t);
  EXPECT_EQ(FitEncoder(t, s), s);
}

TEST(SchemaTest, DuplicateNamesRejected) {
  AttributeSpec a{"x", AttributeKind::kNumeric, {}, 0, 1};
  EXPECT_THROW(Schema({a, a}), Error);
}

TEST(SchemaTest, JsonRoundTrip) {
  const Schema s = testing::SmallSchema();
  EXPECT_EQ(SchemaFromJson(SchemaToJson(s)), s);
}

TEST(SchemaTest, MismatchNamesAttribute) {
  const RawTable t({"color", "form", "size"}, {{"red", "dot", "1"}});
  try {
    CheckTableMatchesSchema(t, testing::SmallSchema());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaMismatch);
    EXPECT_NE(std::string(e.what()).find("shape"), std::string::npos);
  }
}

TEST(EncodeTest, LayoutArithmetic) {
  const Schema s = testing::SmallSchema();
  const Layout l = Layout::FromSchema(s);
  EXPECT_EQ(l.width, 2u + 3u + 1u);
  EXPECT_EQ(s.encoded_width(), l.width);
  EXPECT_EQ(l.spans[1].start, 2u);
  EXPECT_EQ(l.spans[2].width, 1u);
}

TEST(EncodeTest, OneHotAndStandardization) {
  const Schema s = testing::SmallSchema();
  const std::vector<std::string> row = {"blue", "box", "10"};
  const RowVector e = EncodeRow(row, s);
  const RowVector expected = (RowVector(6) << 0, 1, 0, 1, 0, 0).finished();
  EXPECT_EQ(e, expected);
}

TEST(EncodeTest, NovelCategoryIsZeroSpanWithMaximalLoss) {
  const Schema s = testing::SmallSchema();
  const std::vector<std::string> row = {"blue", "bxo", "12"};
  const RowVector e = EncodeRow(row, s);
  EXPECT_EQ(e.segment(2, 3).sum(), 0.0);
  const Layout layout = Layout::FromSchema(s);
  // For any reconstruction, the zero span scores at least as badly as some
  // in-vocabulary target: cross-entropy vs uniform >= min_c NLL(c).
  const Matrix logits = testing::RandomMatrix(200, 6, 3);
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const RowVector out = logits.row(i);
    const double novel = MixedLoss(out, e, layout).per_attribute[1];
    double best = INFINITY;
    for (int c = 0; c < 3; ++c) {
      RowVector t = e;
      t(2 + c) = 1.0;
      best = std::min(best, MixedLoss(out, t, layout).per_attribute[1]);
    }
    EXPECT_GE(novel, best - 1e-12);
  }
}

TEST(DecodeTest, ArgmaxAndInverseStandardization) {
  AttributeSpec a{"c", AttributeKind::kCategorical, {"a", "b", "c"}, 0, 0};
  AttributeSpec n{"n", AttributeKind::kNumeric, {}, 2.0, 0.5};
  const Schema s({a, n});
  const RowVector row = (RowVector(4) << 2.0, 0.1, 0.1, 0.0).finished();
  EXPECT_EQ(DecodeRow(row, s), (std::vector<std::string>{"a", "2"}));
}

TEST(EncodeTest, RoundTripOnCleanRows) {
  const RawTable t = testing::SmallTable(50, 1);
  const Schema s = FitEncoder(t, InferSchema(t));
  const EncodedMatrix enc = Encode(t, s);
  for (std::size_t r = 0; r < t.num_rows(); ++r) {
    const auto back = DecodeRow(enc.values.row(static_cast<Eigen::Index>(r)), s);
    EXPECT_EQ(back[0], t.cell(r, 0));
    EXPECT_EQ(back[1], t.cell(r, 1));
    const double x = *ParseReal(t.cell(r, 2));
    EXPECT_NEAR(*ParseReal(back[2]), x, 1e-9 * std::abs(x));
  }
}

TEST(EncodeTest, StandardizedTrainingColumns) {
  const RawTable t = testing::SmallTable(500, 2);
  const Schema s = FitEncoder(t, InferSchema(t));
  const Matrix m = Encode(t, s).values;
  const auto col = m.col(5);
  const double mean = col.mean();
  const double sd = std::sqrt((col.array() - mean).square().mean());
  EXPECT_NEAR(mean, 0.0, 1e-9);
  EXPECT_NEAR(sd, 1.0, 1e-9);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    EXPECT_DOUBLE_EQ(m.row(r).segment(0, 2).sum(), 1.0);
    EXPECT_DOUBLE_EQ(m.row(r).segment(2, 3).sum(), 1.0);
  }
}

TEST(SoftmaxTest, SumsToOneAndStable) {
  const RowVector p = Softmax((RowVector(3) << 1000.0, 999.0, -1000.0).finished());
  EXPECT_NEAR(p.sum(), 1.0, 1e-12);
  EXPECT_NEAR(p(0) / p(1), std::exp(1.0), 1e-9);
}

}  // namespace
}  // namespace celldx
