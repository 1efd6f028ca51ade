// Copyright 2026 The hstrat Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hstrat/datamodel.hpp"

#include <limits>

#include "gtest/gtest.h"
#include "hstrat/errors.hpp"

namespace hstrat {
namespace {

DatasetBundle three_sample_bundle() {
  DatasetBundle b;
  const SampleIds ids = {"a", "b", "c"};
  b.embeddings.sample_ids = ids;
  b.embeddings.data = Matrix(3, 2);
  b.embeddings.data << 1, 2, 3, 4, 5, 6;
  b.predictions.sample_ids = ids;
  b.predictions.probs = Matrix(3, 2);
  b.predictions.probs << 0.25, 0.75, 0.5, 0.50002, 1.0, 0.0;
  b.labels = LabelVector{ids, {1, 0, 0}};
  b.metadata = MetadataTable{ids, {"sex"}, {{"m", std::nullopt, "f"}}};
  b.split = Split::kValidation;
  return b;
}

TEST(ValidateBundleTest, AcceptsAlignedBundleAndRenormalizes) {
  const ValidatedBundle v = validate_bundle(three_sample_bundle());
  EXPECT_EQ(v->embeddings, three_sample_bundle().embeddings);
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_NEAR(v->predictions.probs.row(i).sum(), 1.0, 1e-9);
  EXPECT_NEAR(v->predictions.probs(1, 0), 0.5 / 1.00002, 1e-15);
  EXPECT_EQ(v->predictions.probs(0, 1), 0.75);
}

TEST(ValidateBundleTest, IsIdempotent) {
  const ValidatedBundle once = validate_bundle(three_sample_bundle());
  const ValidatedBundle twice = validate_bundle(once.bundle());
  EXPECT_EQ(once, twice);
}

TEST(ValidateBundleTest, OptionalMembersMayBeAbsent) {
  DatasetBundle b = three_sample_bundle();
  b.labels.reset();
  b.metadata.reset();
  EXPECT_NO_THROW(validate_bundle(b));
}

TEST(ValidateBundleTest, RejectsOffSimplexRow) {
  DatasetBundle b = three_sample_bundle();
  b.predictions.probs.row(0) << 0.5, 0.6;
  EXPECT_THROW(validate_bundle(b), SimplexError);
}

TEST(ValidateBundleTest, RejectsMisalignedIds) {
  DatasetBundle b = three_sample_bundle();
  b.predictions.sample_ids = {"a", "c", "b"};
  EXPECT_THROW(validate_bundle(b), AlignmentError);
  b = three_sample_bundle();
  b.labels->sample_ids.pop_back();
  b.labels->labels.pop_back();
  EXPECT_THROW(validate_bundle(b), AlignmentError);
}

TEST(ValidateBundleTest, RejectsOutOfRangeValues) {
  DatasetBundle b = three_sample_bundle();
  b.embeddings.data(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(validate_bundle(b), RangeError);
  b = three_sample_bundle();
  b.labels->labels[0] = 2;
  EXPECT_THROW(validate_bundle(b), RangeError);
  b = three_sample_bundle();
  b.predictions.probs.row(2) << 1.2, -0.2;
  EXPECT_THROW(validate_bundle(b), RangeError);
}

TEST(ValidateBundleTest, RejectsDuplicateIdsAndAttributes) {
  DatasetBundle b = three_sample_bundle();
  for (SampleIds* ids : {&b.embeddings.sample_ids, &b.predictions.sample_ids, &b.labels->sample_ids,
                         &b.metadata->sample_ids})
    (*ids)[2] = "a";
  EXPECT_THROW(validate_bundle(b), ValidationError);
  b = three_sample_bundle();
  b.metadata->attribute_names.push_back("sex");
  b.metadata->columns.push_back({"x", "y", "z"});
  EXPECT_THROW(validate_bundle(b), ValidationError);
}

TEST(MetadataTableTest, FindAndColumn) {
  const MetadataTable m{{"a"}, {"x", "y"}, {{"1"}, {std::nullopt}}};
  EXPECT_EQ(m.find("y"), std::optional<std::size_t>(1));
  EXPECT_FALSE(m.find("z").has_value());
  EXPECT_FALSE(m.column("y")[0].has_value());
  EXPECT_THROW(m.column("z"), UnknownAttributeError);
}

TEST(SplitTest, NamesRoundTrip) {
  for (const Split s : {Split::kTrain, Split::kValidation, Split::kTest})
    EXPECT_EQ(parse_split(to_string(s)), s);
  EXPECT_THROW(parse_split("holdout"), ValidationError);
}

TEST(ArgmaxTest, LowestIndexWinsTies) {
  const std::vector<double> v = {0.2, 0.4, 0.4};
  EXPECT_EQ(argmax(v), 1u);
}

}  // namespace
}  // namespace hstrat
